"""
Preimages of f(z) = a by boundary winding numbers, quadtree subdivision and
Newton refinement on the real 2x2 system, plus zero multiplicity classes.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..errors import (
    BoundaryZeroError,
    HypothesisViolationError,
    NonConvergenceError,
    OverflowGuardError,
    SensePreservingError,
    SingularityError,
)
from ..models import (
    Cell,
    Disc,
    Multiplicity,
    PreimageRoot,
    PreimageSet,
    ProbeVerdict,
    ScanMode,
    complex_pair,
)
from ..utils.sampling import disc_samples
from . import exprparse
from .mapfn import HarmonicMap, eval_map, sample, sense_preserving_probe

logger = structlog.get_logger(logger=__name__)

BOUNDARY_CLEARANCE = 1e-7
RESIDUAL_TOL = 1e-10
MULTIPLICITY_TOL = 1e-6
MIN_SAMPLES = 64
MAX_DOUBLINGS = 12
LEAF_HALF_WIDTH = 1e-3
MIN_HALF_WIDTH = 1e-7
MAX_CELLS = 200_000
NEWTON_MAX_ITER = 100
LOCAL_CELL = 1e-3
LOCAL_CELL_MAX = 0.1
# Quadtree origin shift, as a fraction of the region radius, so grid lines miss round points.
GRID_OFFSET = complex(math.sqrt(2.0) - 1.4111, math.sqrt(3.0) - 1.7293)
SQUARE_MARGIN = 1.01
PROBE_SAMPLES = 1024


def _boundary(cell: Cell, per_side: int) -> np.ndarray:
    """Counter-clockwise boundary samples starting at the SW corner."""
    t = np.arange(per_side) / per_side
    w = cell.half_width
    corners = [cell.center + complex(-w, -w), cell.center + complex(w, -w),
               cell.center + complex(w, w), cell.center + complex(-w, w)]
    sides = [start + (end - start) * t
             for start, end in zip(corners, corners[1:] + corners[:1])]
    return np.concatenate(sides)


def _winding(m: HarmonicMap, a: complex, cell: Cell, per_side: int,
             clearance: float) -> Tuple[int, float]:
    zs = _boundary(cell, per_side)
    s = sample(m, zs)
    if s.singular.any():
        point = complex(zs[s.singular][0])
        raise SingularityError(point, min(m.singularities, key=lambda p: abs(p - point)))
    if s.overflow.any():
        raise OverflowGuardError(complex(zs[s.overflow][0]))
    v = s.f - a
    gap = np.abs(v)
    worst = int(np.argmin(gap))
    if gap[worst] <= clearance:
        raise BoundaryZeroError(complex(zs[worst]), clearance)
    steps = np.angle(np.roll(v, -1) / v)
    return int(round(float(steps.sum()) / (2.0 * math.pi))), float(np.abs(steps).max())


def boundary_degree(m: HarmonicMap, a: complex, cell: Cell, samples: int = MIN_SAMPLES,
                    clearance: float = BOUNDARY_CLEARANCE,
                    max_doublings: int = MAX_DOUBLINGS) -> int:
    """Winding number of f - a along the cell boundary.

    Samples double until two consecutive counts agree and no argument step
    reaches pi/2.
    """
    per_side = max(MIN_SAMPLES, samples) // 4
    previous = None
    for _ in range(max_doublings + 1):
        degree, jump = _winding(m, a, cell, per_side, clearance)
        if previous is not None and degree == previous and jump < math.pi / 2:
            return degree
        previous = degree
        per_side *= 2
    raise NonConvergenceError(
        f"winding number around cell {cell.center!r}/{cell.half_width:g} did not stabilise")


def real_jacobian(m: HarmonicMap, z: complex) -> np.ndarray:
    """[[d Re f/dx, d Re f/dy], [d Im f/dx, d Im f/dy]]; its determinant is J_f."""
    h1 = m._strict(m.h1, z)
    g1 = np.conj(m._strict(m.g1, z))
    fx = h1 + g1
    fy = 1j * (h1 - g1)
    return np.array([[fx.real, fy.real], [fx.imag, fy.imag]])


def newton_refine(m: HarmonicMap, a: complex, start: complex,
                  max_iter: int = NEWTON_MAX_ITER) -> Tuple[complex, float]:
    """Newton on (Re f - Re a, Im f - Im a); runs until the step is negligible."""
    z = complex(start)
    for _ in range(max_iter):
        r = eval_map(m, z) - a
        if r == 0:
            break
        jac = real_jacobian(m, z)
        if np.linalg.det(jac) == 0.0:
            break
        dx, dy = np.linalg.solve(jac, np.array([-r.real, -r.imag]))
        z += complex(dx, dy)
        if math.hypot(dx, dy) <= 1e-15 * max(1.0, abs(z)):
            break
    return z, abs(eval_map(m, z) - a)


def multiplicity_at(m: HarmonicMap, root: complex, tol1: float = MULTIPLICITY_TOL,
                    tol2: float = MULTIPLICITY_TOL) -> Multiplicity:
    """Order class from vanishing of (h', g') and then (h'', g'')."""
    first = abs(m._strict(m.h1, root)) + abs(m._strict(m.g1, root))
    if first > tol1:
        return Multiplicity.SIMPLE
    second = abs(m._strict(m.h2, root)) + abs(m._strict(m.g2, root))
    if second > tol2:
        return Multiplicity.DOUBLE
    return Multiplicity.AT_LEAST_THREE


def _local_cell(m: HarmonicMap, a: complex, root: complex,
                clearance: float) -> Optional[Tuple[int, Cell]]:
    half = LOCAL_CELL
    while half <= LOCAL_CELL_MAX:
        cell = Cell(root, half)
        try:
            return boundary_degree(m, a, cell, clearance=clearance), cell
        except (BoundaryZeroError, SingularityError, OverflowGuardError, NonConvergenceError):
            half *= 4
    logger.warning("local degree unavailable", root=[root.real, root.imag])
    return None


def local_degree(m: HarmonicMap, a: complex, root: complex,
                 clearance: float = BOUNDARY_CLEARANCE) -> int:
    """Winding number on a small cell around the root, grown on boundary hits."""
    local = _local_cell(m, a, root, clearance)
    return local[0] if local is not None else 0


def _boundary_overflows(m: HarmonicMap, cell: Cell) -> bool:
    """|f| exceeds the overflow guard at every boundary sample."""
    s = sample(m, _boundary(cell, MIN_SAMPLES))
    return bool(s.overflow.all())


def _cell_meets_disc(cell: Cell, region: Disc) -> bool:
    d = cell.center - region.center
    dx = max(abs(d.real) - cell.half_width, 0.0)
    dy = max(abs(d.imag) - cell.half_width, 0.0)
    return math.hypot(dx, dy) <= region.radius


def _same_root(z: complex, root: PreimageRoot, tol: float) -> bool:
    radius = 10 * tol if root.multiplicity is Multiplicity.SIMPLE else 10 * math.sqrt(tol)
    return abs(z - root.location) <= radius


def find_preimages(m: HarmonicMap, a: complex, region: Disc, tol: float = RESIDUAL_TOL,
                   clearance: float = BOUNDARY_CLEARANCE,
                   multiplicity_tol: float = MULTIPLICITY_TOL,
                   probe_samples: int = PROBE_SAMPLES, seed: int = 0) -> PreimageSet:
    """All solutions of f(z) = a in the closed disc, in quadtree traversal order.

    A located root whose local degree matches its multiplicity claims its local
    cell; cells inside a claim are not searched again. Cells whose whole boundary
    overflows hold no finite preimage and are counted in ``overflow_cells``. A
    cell blocked by a singularity, an overflow or an unstable winding count is
    not split below leaf size.
    """
    a = complex(a)
    probe = sense_preserving_probe(m, region, probe_samples, seed)
    if not probe.acceptable:
        raise SensePreservingError(probe.argmin, probe.min_jacobian)

    result = PreimageSet(target=a, region=region)
    if exprparse.is_constant(m.h) and exprparse.is_constant(m.g):
        if abs(eval_map(m, m.z0) - a) <= tol:
            raise HypothesisViolationError(f"f is identically {a!r}; preimages fill the disc")
        return result

    found: List[PreimageRoot] = []
    claimed: List[Cell] = []
    root_cell = Cell(region.center + GRID_OFFSET * region.radius,
                     region.radius * SQUARE_MARGIN)
    stack = [root_cell]
    processed = 0

    while stack:
        cell = stack.pop()
        processed += 1
        if processed > MAX_CELLS:
            result.unresolved_cells.extend([cell] + stack[::-1])
            logger.warning("cell budget exhausted", target=complex_pair(a),
                           unresolved=len(result.unresolved_cells))
            break
        if not _cell_meets_disc(cell, region):
            continue
        if any(claim.encloses(cell) for claim in claimed):
            continue
        blocked = False
        try:
            degree: Optional[int] = boundary_degree(m, a, cell, clearance=clearance)
        except BoundaryZeroError:
            degree = None
        except OverflowGuardError:
            if _boundary_overflows(m, cell):
                result.overflow_cells += 1
                continue
            degree, blocked = None, True
        except (SingularityError, NonConvergenceError):
            degree, blocked = None, True
        if degree == 0:
            continue

        if cell.half_width <= LEAF_HALF_WIDTH:
            leaf = _resolve_leaf(m, a, cell, degree, tol, clearance, multiplicity_tol)
            if leaf is not None:
                if not any(_same_root(leaf.root.location, r, tol) for r in found):
                    found.append(leaf.root)
                    if leaf.claim is not None:
                        claimed.append(leaf.claim)
                if leaf.complete:
                    continue
            if blocked or cell.half_width / 2 < MIN_HALF_WIDTH:
                if leaf is None or not leaf.inside:
                    result.unresolved_cells.append(cell)
                continue

        # reversed so SW is processed first
        stack.extend(reversed(cell.children()))

    for root in found:
        distance = abs(root.location - region.center)
        if distance > region.radius:
            continue
        if region.radius - distance <= clearance:
            result.boundary_excluded += 1
            continue
        result.roots.append(root)

    logger.debug("preimages located", target=complex_pair(a), roots=len(result.roots),
                 unresolved=len(result.unresolved_cells), cells=processed)
    return result


@dataclass
class _Leaf:
    root: PreimageRoot
    inside: bool
    complete: bool
    claim: Optional[Cell]


def _resolve_leaf(m: HarmonicMap, a: complex, cell: Cell, degree: Optional[int], tol: float,
                  clearance: float, multiplicity_tol: float) -> Optional[_Leaf]:
    """Newton from the cell centre.

    A converged root outside the cell is still returned; near a multiple root
    the neighbouring leaves converge onto it and it claims them.
    """
    try:
        z, residual = newton_refine(m, a, cell.center)
    except (SingularityError, OverflowGuardError, np.linalg.LinAlgError):
        return None
    if not (residual <= tol and math.isfinite(z.real) and math.isfinite(z.imag)):
        return None
    multiplicity = multiplicity_at(m, z, multiplicity_tol, multiplicity_tol)
    local = _local_cell(m, a, z, clearance)
    root = PreimageRoot(
        location=z,
        multiplicity=multiplicity,
        residual=residual,
        local_degree=local[0] if local is not None else 0,
    )
    inside = cell.contains(z, slack=0.1 * cell.half_width)
    # a simple root cannot account for a winding number of two or more
    complete = inside and not (degree is not None and degree >= 2
                               and multiplicity is Multiplicity.SIMPLE)
    claim = local[1] if local is not None and root.degree_agrees else None
    return _Leaf(root, inside, complete, claim)


@dataclass
class ExceptionalScanReport:
    """Values a whose preimages in the region are all multiple."""
    mode: ScanMode
    hits: List[complex] = field(default_factory=list)
    excluded: List[complex] = field(default_factory=list)
    scanned: int = 0

    @property
    def count(self) -> int:
        return len(self.hits)

    @property
    def bound(self) -> int:
        """Largest possible count for a non-normal family of this kind."""
        return 4 if self.mode is ScanMode.ALL_MULTIPLE else 3

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.value,
            "hits": [complex_pair(a) for a in self.hits],
            "count": self.count,
            "bound": self.bound,
            "excluded": [complex_pair(a) for a in self.excluded],
            "scanned": self.scanned,
        }


def exceptional_value_scan(m: HarmonicMap, candidates: Sequence[complex], region: Disc,
                           mode: ScanMode = ScanMode.ALL_MULTIPLE,
                           tol: float = RESIDUAL_TOL) -> ExceptionalScanReport:
    """Candidates a for which every root of f - a in the region is multiple."""
    order = 2 if mode is ScanMode.ALL_MULTIPLE else 3
    report = ExceptionalScanReport(mode=mode)
    for a in candidates:
        report.scanned += 1
        preimages = find_preimages(m, a, region, tol)
        if preimages.unresolved_cells:
            report.excluded.append(complex(a))
            continue
        if preimages.roots and all(r.multiplicity.order >= order for r in preimages.roots):
            report.hits.append(complex(a))
    logger.info("exceptional value scan", label=m.label, mode=mode.value,
                hits=report.count, excluded=len(report.excluded))
    return report


@dataclass
class ClusterTrace:
    """Nearest zero of each approximating map to one zero of the limit."""
    limit_zero: complex
    distances: List[float]
    nearest: List[Optional[complex]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "limit_zero": complex_pair(self.limit_zero),
            "distances": [d if math.isfinite(d) else None for d in self.distances],
            "nearest": [complex_pair(z) for z in self.nearest],
        }


@dataclass
class ClusterReport:
    """Hurwitz-type clustering of zeros of f_n - a at zeros of f - a."""
    target: complex
    traces: List[ClusterTrace] = field(default_factory=list)
    verdict: ProbeVerdict = ProbeVerdict.PASS
    witness: Optional[complex] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": complex_pair(self.target),
            "traces": [t.to_dict() for t in self.traces],
            "verdict": self.verdict.value,
            "witness": complex_pair(self.witness),
        }


def _clusters(distances: List[float]) -> bool:
    if not all(math.isfinite(d) for d in distances):
        return False
    if all(d <= 1e-8 for d in distances):
        return True
    nonincreasing = all(b <= a + 1e-12 for a, b in zip(distances, distances[1:]))
    return nonincreasing and len(distances) >= 2 and distances[-1] < distances[0]


def cluster_check(maps: Sequence[HarmonicMap], limit: HarmonicMap, a: complex,
                  region: Disc, tol: float = RESIDUAL_TOL) -> ClusterReport:
    """Distance from each zero of limit - a to the nearest zero of every maps[n] - a."""
    report = ClusterReport(target=complex(a))
    zero_sets = [[r.location for r in find_preimages(f, a, region, tol).roots] for f in maps]
    for z0 in (r.location for r in find_preimages(limit, a, region, tol).roots):
        trace = ClusterTrace(limit_zero=z0, distances=[], nearest=[])
        for zeros in zero_sets:
            nearest = min(zeros, key=lambda z: abs(z - z0), default=None)
            trace.nearest.append(nearest)
            trace.distances.append(abs(nearest - z0) if nearest is not None else math.inf)
        report.traces.append(trace)
        if report.verdict is ProbeVerdict.PASS and not _clusters(trace.distances):
            report.verdict = ProbeVerdict.FAIL
            report.witness = z0
    return report


def constant_dilatation(m: HarmonicMap, region: Disc, samples: int = 256, seed: int = 0,
                        tol: float = 1e-9, denominator_tol: float = 1e-12
                        ) -> Optional[complex]:
    """omega if g'/h' varies by at most tol over a probe of the region, else None."""
    s = sample(m, disc_samples(region, samples, seed))
    usable = s.valid & (np.abs(s.h1) > denominator_tol)
    if not usable.any():
        return None
    omega = s.g1[usable] / s.h1[usable]
    if np.max(np.abs(omega - omega[0])) > tol:
        return None
    return complex(omega[0])


def reduced_analytic_target(m: HarmonicMap, a: complex, alpha: complex) -> complex:
    """Value h must take at a solution of f = a when g = alpha (h - h(0))."""
    if abs(alpha) >= 1:
        raise HypothesisViolationError(f"|alpha| = {abs(alpha):g} must be below 1")
    h0 = exprparse.evaluate(m.h, 0j, m.singularity_tol, m.overflow_guard)
    numerator = a - np.conj(alpha * a) + np.conj(alpha * h0) - abs(alpha) ** 2 * h0
    return complex(numerator / (1 - abs(alpha) ** 2))
