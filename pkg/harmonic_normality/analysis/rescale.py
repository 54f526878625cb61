"""
Rescaling sequences z_n, M_n, rho_n, R_n and the rescaled maps

    g_n(zeta) = f(z_n + rho_n * zeta / phi(|z_n|)),

plus the family rescaling zeta -> f(z_n + zeta / phi(|z_n|)) used when 1/phi is convex.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import structlog

from ..errors import DegenerateSequenceError, HypothesisViolationError, OutOfRangeError
from ..models import Disc, RescalingEntry, RescalingSequence, complex_pair
from ..utils.sampling import square_grid
from .mapfn import HarmonicMap, eval_map, precompose_affine, sample, spherical_derivative
from .mapfn import fsharp_from_parts, spherical_derivative_array
from .normality import sup_trace
from .phi import phi_eval, psi_derivative, reciprocal_convexity_check, rescale_ratio_array

logger = structlog.get_logger(logger=__name__)

DEGENERATE_SUP = 1e-12
NONCONSTANT_THRESHOLD = 0.5
FAMILY_TOLERANCE = 0.05


def _tail(values: Sequence) -> list:
    half = max(2, math.ceil(len(values) / 2))
    return list(values[-half:])


def _strictly_increasing(values: Sequence[float]) -> bool:
    return len(values) >= 2 and all(b > a for a, b in zip(values, values[1:]))


def extract_sequence(m: HarmonicMap, w, schedule: Sequence[float], depth: int = 8,
                     max_workers: int = 1) -> RescalingSequence:
    """Take z_n as the sup argmax on |z| <= r_n, then rho_n = 1/M_n and R_n."""
    sequence = RescalingSequence()
    for estimate in sup_trace(m, w, schedule, depth, max_workers):
        if estimate.value <= DEGENERATE_SUP:
            raise DegenerateSequenceError(
                f"sup of f#/phi is {estimate.value:.3e} at r={estimate.radius!r}; "
                "map is numerically constant")
        z_n = estimate.argmax
        rho = 1.0 / estimate.value
        phi_n = float(w.value(np.array([abs(z_n)]))[0])
        sequence.entries.append(RescalingEntry(
            r_n=estimate.radius,
            z_n=z_n,
            M_n=estimate.value,
            rho_n=rho,
            R_n=(1.0 - abs(z_n)) * phi_n / rho,
        ))

    tail = _tail(sequence.entries)
    sequence.radius_divergent = _strictly_increasing([e.R_n for e in tail])
    sequence.rho_to_zero = _strictly_increasing([-e.rho_n for e in tail])
    logger.info("rescaling sequence extracted", label=m.label, entries=len(sequence.entries),
                radius_divergent=sequence.radius_divergent, rho_to_zero=sequence.rho_to_zero)
    return sequence


def _scale(w, entry: RescalingEntry) -> float:
    return entry.rho_n / float(w.value(np.array([abs(entry.z_n)]))[0])


def shifted_point(w, entry: RescalingEntry, zeta: complex) -> complex:
    """z_n + rho_n * zeta / phi(|z_n|), after checking |zeta| < R_n."""
    if abs(zeta) >= entry.R_n:
        raise OutOfRangeError(f"|zeta| = {abs(zeta):g} is not below R_n = {entry.R_n:g}")
    return entry.z_n + _scale(w, entry) * zeta


def rescaled_eval(m: HarmonicMap, w, entry: RescalingEntry, zeta: complex) -> complex:
    """g_n(zeta)."""
    return eval_map(m, shifted_point(w, entry, zeta))


def rescaled_spherical(m: HarmonicMap, w, entry: RescalingEntry, zeta: complex) -> float:
    """g_n#(zeta) = (rho_n / phi(|z_n|)) f#(z_n + rho_n zeta / phi(|z_n|)); 1 at zeta = 0."""
    point = shifted_point(w, entry, zeta)
    scale = _scale(w, entry)
    fsharp, _ = spherical_derivative_array(m, np.array([point]))
    return float(scale * fsharp[0])


def rescaled_spherical_direct(m: HarmonicMap, w, entry: RescalingEntry,
                              zeta: complex) -> float:
    """Same quantity through the scalar spherical_derivative."""
    return _scale(w, entry) * spherical_derivative(m, shifted_point(w, entry, zeta))


def chordal_distance(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """|u - v| / sqrt((1 + |u|^2)(1 + |v|^2)), with infinity handled as a point."""
    with np.errstate(all='ignore'):
        d = np.abs(u - v) / np.sqrt((1 + np.abs(u) ** 2) * (1 + np.abs(v) ** 2))
        inf_u = ~np.isfinite(u)
        inf_v = ~np.isfinite(v)
        d = np.where(inf_u & ~inf_v, 1.0 / np.sqrt(1 + np.abs(v) ** 2), d)
        d = np.where(inf_v & ~inf_u, 1.0 / np.sqrt(1 + np.abs(u) ** 2), d)
        return np.where(inf_u & inf_v, 0.0, d)


@dataclass
class ConvergenceReport:
    """Sup chordal distances between rescaled maps on the probe disc."""
    probe_radius: float
    grid: int
    distances: List[List[float]]
    consecutive: List[float]
    cauchy_trend: bool
    rescaled_sup: List[float]
    nonconstant_limit_witnessed: bool
    sup_trend_to_zero: bool
    subsequence: str = "not attempted"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "probe_radius": self.probe_radius,
            "grid": self.grid,
            "distances": self.distances,
            "consecutive": self.consecutive,
            "cauchy_trend": self.cauchy_trend,
            "rescaled_sup": self.rescaled_sup,
            "nonconstant_limit_witnessed": self.nonconstant_limit_witnessed,
            "sup_trend_to_zero": self.sup_trend_to_zero,
            "subsequence": self.subsequence,
        }


def convergence_probe(m: HarmonicMap, w, sequence: RescalingSequence,
                      probe_radius: float = 1.0, grid: int = 33) -> ConvergenceReport:
    """Chordal sup distances between every pair g_i, g_j on |zeta| <= probe_radius."""
    entries = sequence.entries
    if entries:
        smallest = min(e.R_n for e in entries)
        if probe_radius >= smallest:
            raise OutOfRangeError(
                f"probe radius {probe_radius:g} is not below min R_n = {smallest:g}")

    zetas = square_grid(Disc(0j, probe_radius), grid)
    values, sups = [], []
    for entry in entries:
        scale = _scale(w, entry)
        s = sample(m, entry.z_n + scale * zetas)
        f = np.where(s.valid, s.f, np.nan)
        fsharp = np.where(s.valid, fsharp_from_parts(s.f, s.h1, s.g1), np.nan)
        values.append(f)
        finite = fsharp[np.isfinite(fsharp)]
        sups.append(float(scale * finite.max()) if finite.size else 0.0)

    n = len(entries)
    # a lone entry has nothing to compare against
    distances = [[0.0] * n for _ in range(n)] if n >= 2 else []
    for i in range(n):
        for j in range(i + 1, n):
            d = chordal_distance(values[i], values[j])
            d = d[~np.isnan(d)]
            distances[i][j] = distances[j][i] = float(d.max()) if d.size else 0.0
    consecutive = [distances[i][i + 1] for i in range(n - 1)]
    last = consecutive[-3:]
    cauchy = len(last) >= 2 and all(b < a for a, b in zip(last, last[1:]))

    report = ConvergenceReport(
        probe_radius=probe_radius,
        grid=grid,
        distances=distances,
        consecutive=consecutive,
        cauchy_trend=cauchy,
        rescaled_sup=sups,
        nonconstant_limit_witnessed=bool(sups) and sups[-1] >= NONCONSTANT_THRESHOLD,
        sup_trend_to_zero=_strictly_increasing([-s for s in _tail(sups)]) if sups else False,
    )
    logger.debug("convergence probe", entries=n, cauchy_trend=cauchy)
    return report


@dataclass
class FamilyPoint:
    """Family rescaling statistics at one centre z_n."""
    z_n: complex
    phi_n: float
    sup_rescaled: float
    ratio_bound: Optional[float]
    convexity_factor: Optional[float]
    identity_gap: float
    excluded: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "z_n": complex_pair(self.z_n),
            "phi_n": self.phi_n,
            "sup_rescaled": self.sup_rescaled,
            "ratio_bound": self.ratio_bound,
            "convexity_factor": self.convexity_factor,
            "identity_gap": self.identity_gap,
            "excluded": self.excluded,
        }


@dataclass
class FamilyRescaleReport:
    """Sup of (f o phi_{z_n})# on a compact disc for each centre."""
    compact_radius: float
    points: List[FamilyPoint] = field(default_factory=list)
    tolerance: float = FAMILY_TOLERANCE

    @property
    def sups(self) -> List[float]:
        return [p.sup_rescaled for p in self.points]

    @property
    def marty_bound(self) -> float:
        return max(self.sups, default=0.0)

    @property
    def bounded_from(self) -> Optional[int]:
        """First index from which every sup stays <= 1 + tolerance."""
        start = None
        for index, value in enumerate(self.sups):
            if value <= 1.0 + self.tolerance:
                start = index if start is None else start
            else:
                start = None
        return start

    def to_dict(self) -> Dict[str, Any]:
        return {
            "compact_radius": self.compact_radius,
            "tolerance": self.tolerance,
            "points": [p.to_dict() for p in self.points],
            "marty_bound": self.marty_bound,
            "bounded_from": self.bounded_from,
        }


def family_rescale_check(m: HarmonicMap, w, points: Sequence[complex],
                         compact_radius: float = 1.0, grid: int = 33) -> FamilyRescaleReport:
    """(f o phi_{z_n})#(z) = f#(phi_{z_n}(z)) / phi(|z_n|) over |z| <= compact_radius."""
    if not reciprocal_convexity_check(w):
        raise HypothesisViolationError(
            f"1/phi is not convex for weight {getattr(w, 'spec', w)!r}")

    zs = square_grid(Disc(0j, compact_radius), grid)
    report = FamilyRescaleReport(compact_radius=compact_radius)
    for z_n in points:
        z_n = complex(z_n)
        phi_n = phi_eval(w, abs(z_n))
        shifted = z_n + zs / phi_n
        inside = np.abs(shifted) < 1.0
        fsharp, _ = spherical_derivative_array(m, shifted[inside])
        rescaled = fsharp / phi_n

        direct_map = precompose_affine(m, z_n, phi_n)
        direct, _ = spherical_derivative_array(direct_map, zs[inside])
        with np.errstate(all='ignore'):
            gap = np.abs(direct - rescaled) / np.maximum(np.abs(rescaled), 1e-300)
        gap = gap[np.isfinite(gap)]

        ratios = rescale_ratio_array(w, z_n, zs)
        slope = psi_derivative(w, abs(z_n))
        denominator = 1.0 + slope * compact_radius
        finite = rescaled[np.isfinite(rescaled)]
        report.points.append(FamilyPoint(
            z_n=z_n,
            phi_n=phi_n,
            sup_rescaled=float(finite.max()) if finite.size else 0.0,
            ratio_bound=float(np.nanmax(ratios)) if np.isfinite(ratios).any() else None,
            convexity_factor=1.0 / denominator if denominator > 0 else None,
            identity_gap=float(gap.max()) if gap.size else 0.0,
            excluded=int((~inside).sum()),
        ))
    logger.debug("family rescaling", label=m.label, marty_bound=report.marty_bound)
    return report
