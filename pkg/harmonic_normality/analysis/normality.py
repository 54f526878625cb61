"""
Sup estimation of f#/phi over closed sub-discs and phi-normality evidence.

The estimator evaluates a polar grid whose radial lines cluster geometrically
toward the disc boundary, then repeatedly splits the best 5% of the current leaf
cells. Values are lower bounds of the true sup; verdicts are evidence only.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..errors import InputError, PhiDomainError
from ..models import Disc, NormalityVerdict, ProbeVerdict, SupEstimate, Verdict
from ..utils.sampling import disc_samples
from . import exprparse
from .mapfn import HarmonicMap, fsharp_from_parts, spherical_derivative_array
from .phi import PhiWeight

logger = structlog.get_logger(logger=__name__)

RADIAL_LINES = 64
ANGULAR_LINES = 128
REFINE_FRACTION = 0.05
GROWTH_SLOPE = 0.25
BOUNDED_RATIO = 1.05


def _ratio_chunk(m: HarmonicMap, w, zs: np.ndarray) -> Tuple[np.ndarray, int, int]:
    fsharp, s = spherical_derivative_array(m, zs)
    with np.errstate(all='ignore'):
        ratio = fsharp / w.value(np.abs(zs))
    return ratio, int(s.singular.sum()), int(s.overflow.sum())


def evaluate_ratio(m: HarmonicMap, w, zs: np.ndarray,
                   max_workers: int = 1) -> Tuple[np.ndarray, int, int]:
    """f#/phi(|z|) over zs (NaN where skipped) plus singular and overflow counts.

    Chunks are merged in submission order, so the result does not depend on
    the worker count.
    """
    zs = np.asarray(zs, dtype=np.complex128)
    if max_workers <= 1 or zs.size < 4096:
        return _ratio_chunk(m, w, zs)
    chunks = np.array_split(zs, max_workers)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        parts = list(pool.map(lambda c: _ratio_chunk(m, w, c), chunks))
    ratio = np.concatenate([p[0] for p in parts])
    return ratio, sum(p[1] for p in parts), sum(p[2] for p in parts)


def _corner_scores(*corners: np.ndarray) -> np.ndarray:
    stacked = np.stack(corners)
    stacked = np.where(np.isnan(stacked), -np.inf, stacked)
    return stacked.max(axis=0)


class _Tracker:
    """Running argmax over evaluated points; first occurrence wins ties."""

    def __init__(self):
        self.value = -np.inf
        self.point = 0j
        self.evaluations = 0
        self.singular = 0
        self.overflow = 0

    def update(self, zs: np.ndarray, ratio: np.ndarray, singular: int, overflow: int):
        self.evaluations += int(zs.size)
        self.singular += singular
        self.overflow += overflow
        if not zs.size:
            return
        clean = np.where(np.isnan(ratio), -np.inf, ratio)
        index = int(np.argmax(clean))
        if clean[index] > self.value:
            self.value = float(clean[index])
            self.point = complex(zs[index])


def sup_ratio(m: HarmonicMap, w, radius: float, depth: int = 8,
              seeds: Sequence[complex] = (), max_workers: int = 1,
              radial_lines: int = RADIAL_LINES,
              angular_lines: int = ANGULAR_LINES) -> SupEstimate:
    """Lower bound for sup_{|z| <= radius} f#(z)/phi(|z|).

    Seed points inside the disc are evaluated first; a seed that is an earlier
    argmax keeps traces along a schedule nondecreasing.
    """
    if not 0.0 <= radius < 1.0:
        raise PhiDomainError(f"sup radius {radius!r} outside [0, 1)")

    tracker = _Tracker()

    def run(zs: np.ndarray) -> np.ndarray:
        ratio, singular, overflow = evaluate_ratio(m, w, zs, max_workers)
        tracker.update(zs, ratio, singular, overflow)
        return ratio

    seed_points = np.array([s for s in seeds if abs(s) <= radius], dtype=np.complex128)
    run(seed_points)
    origin = float(run(np.zeros(1, dtype=np.complex128))[0])
    if radius == 0.0:
        return _estimate(tracker, radius, depth)

    k = np.arange(radial_lines + 1) / radial_lines
    r_lines = 1.0 - (1.0 - radius) ** k
    r_lines[-1] = radius
    t_lines = 2.0 * np.pi * np.arange(angular_lines + 1) / angular_lines

    # node values; column angular_lines repeats angle 0
    rr, tt = np.meshgrid(r_lines[1:], t_lines[:-1], indexing='ij')
    ring = run((rr * np.exp(1j * tt)).ravel()).reshape(rr.shape)
    origin_row = np.full((1, angular_lines), origin)
    nodes = np.vstack((origin_row, ring))
    nodes = np.hstack((nodes, nodes[:, :1]))

    r_lo = np.repeat(r_lines[:-1], angular_lines)
    r_hi = np.repeat(r_lines[1:], angular_lines)
    t_lo = np.tile(t_lines[:-1], radial_lines)
    t_hi = np.tile(t_lines[1:], radial_lines)
    v00 = nodes[:-1, :-1].ravel()
    v01 = nodes[:-1, 1:].ravel()
    v10 = nodes[1:, :-1].ravel()
    v11 = nodes[1:, 1:].ravel()

    for _ in range(depth):
        score = _corner_scores(v00, v01, v10, v11)
        count = max(1, math.ceil(REFINE_FRACTION * score.size))
        chosen = np.argsort(-score, kind='stable')[:count]
        keep = np.ones(score.size, dtype=bool)
        keep[chosen] = False

        a0, a1, b0, b1 = r_lo[chosen], r_hi[chosen], t_lo[chosen], t_hi[chosen]
        rm = 0.5 * (a0 + a1)
        tm = 0.5 * (b0 + b1)
        fresh = np.concatenate((rm * np.exp(1j * b0), rm * np.exp(1j * b1),
                                a0 * np.exp(1j * tm), a1 * np.exp(1j * tm),
                                rm * np.exp(1j * tm)))
        values = run(fresh).reshape(5, count)
        m_lo, m_hi, lo_m, hi_m, mid = values

        c00, c01, c10, c11 = v00[chosen], v01[chosen], v10[chosen], v11[chosen]
        children = (
            (a0, rm, b0, tm, c00, lo_m, m_lo, mid),
            (a0, rm, tm, b1, lo_m, c01, mid, m_hi),
            (rm, a1, b0, tm, m_lo, mid, c10, hi_m),
            (rm, a1, tm, b1, mid, m_hi, hi_m, c11),
        )
        r_lo = np.concatenate([r_lo[keep]] + [c[0] for c in children])
        r_hi = np.concatenate([r_hi[keep]] + [c[1] for c in children])
        t_lo = np.concatenate([t_lo[keep]] + [c[2] for c in children])
        t_hi = np.concatenate([t_hi[keep]] + [c[3] for c in children])
        v00 = np.concatenate([v00[keep]] + [c[4] for c in children])
        v01 = np.concatenate([v01[keep]] + [c[5] for c in children])
        v10 = np.concatenate([v10[keep]] + [c[6] for c in children])
        v11 = np.concatenate([v11[keep]] + [c[7] for c in children])

    return _estimate(tracker, radius, depth)


def _estimate(tracker: _Tracker, radius: float, depth: int) -> SupEstimate:
    value = tracker.value if np.isfinite(tracker.value) else 0.0
    estimate = SupEstimate(
        radius=float(radius),
        value=value,
        argmax=tracker.point,
        refinement_depth=depth,
        evaluations=tracker.evaluations,
        skipped_singular=tracker.singular,
        overflow_count=tracker.overflow,
    )
    logger.debug("sup estimate", radius=radius, value=value,
                 evaluations=tracker.evaluations, skipped=tracker.singular,
                 overflow=tracker.overflow)
    return estimate


def check_schedule(schedule: Sequence[float]) -> List[float]:
    radii = [float(r) for r in schedule]
    if not radii:
        raise InputError("radius schedule is empty")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InputError("radius schedule must be strictly increasing")
    if radii[0] < 0 or radii[-1] >= 1:
        raise InputError("radius schedule must lie in [0, 1)")
    return radii


def sup_trace(m: HarmonicMap, w, schedule: Sequence[float], depth: int = 8,
              max_workers: int = 1) -> List[SupEstimate]:
    """sup_ratio along a schedule, each step seeded with the previous argmax."""
    trace: List[SupEstimate] = []
    for r in check_schedule(schedule):
        seeds = [trace[-1].argmax] if trace else []
        trace.append(sup_ratio(m, w, r, depth, seeds=seeds, max_workers=max_workers))
    return trace


def growth_slope(radii: Sequence[float], sups: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(sup) against -log(1 - r) over the last half."""
    n = len(radii)
    if n < 2:
        return None
    half = max(2, math.ceil(n / 2))
    r = np.asarray(radii[-half:], dtype=np.float64)
    s = np.asarray(sups[-half:], dtype=np.float64)
    if np.any(s <= 0) or not np.all(np.isfinite(s)):
        return None
    slope, _ = np.polyfit(-np.log1p(-r), np.log(s), 1)
    return float(slope)


def classify_trace(radii: Sequence[float], sups: Sequence[float],
                   overflow: bool = False) -> Tuple[Verdict, Optional[float]]:
    """Growth / bounded / inconclusive rule shared by the normality and criterion checks."""
    slope = growth_slope(radii, sups)
    if overflow or (slope is not None and slope > GROWTH_SLOPE):
        return Verdict.GROWTH, slope
    if sups and sups[-1] <= BOUNDED_RATIO * float(np.median(sups[-3:])):
        return Verdict.BOUNDED, slope
    return Verdict.INCONCLUSIVE, slope


def classify_normality(m: HarmonicMap, w, schedule: Sequence[float], depth: int = 8,
                       max_workers: int = 1) -> NormalityVerdict:
    """Classify the sup trace of f#/phi along a schedule r_n -> 1."""
    trace = sup_trace(m, w, schedule, depth, max_workers)
    overflow = any(s.overflow_witnessed for s in trace)
    kind, slope = classify_trace([s.radius for s in trace], [s.value for s in trace], overflow)
    logger.info("normality classified", label=m.label, weight=getattr(w, 'spec', None),
                verdict=kind.value, slope=slope)
    return NormalityVerdict(kind=kind, sup_trace=trace, growth_exponent=slope,
                            overflow_witnessed=overflow)


def classical_normal_sup(m: HarmonicMap, radius: float, depth: int = 8,
                         max_workers: int = 1) -> SupEstimate:
    """sup_ratio with the classical weight 1/(1 - r^2)."""
    return sup_ratio(m, PhiWeight.classical(), radius, depth, max_workers=max_workers)


@dataclass
class MartyReport:
    """Uniform bound of f# over a family on one compact disc."""
    uniform_bound: float
    per_map_max: List[float] = field(default_factory=list)
    per_map_overflow: List[int] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)

    @property
    def overflow_witnessed(self) -> bool:
        return any(self.per_map_overflow)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "uniform_bound": "overflow" if self.overflow_witnessed else self.uniform_bound,
            "per_map": [{"label": label, "max": value, "overflow": count}
                        for label, value, count in zip(self.labels, self.per_map_max,
                                                       self.per_map_overflow)],
        }


def marty_family_check(family: Sequence[HarmonicMap], compact: Disc,
                       samples: int = 4096, seed: int = 0) -> MartyReport:
    """Max of f# over each map and over the family on a sampled compact disc."""
    zs = disc_samples(compact, samples, seed)
    report = MartyReport(uniform_bound=0.0)
    for m in family:
        fsharp, s = spherical_derivative_array(m, zs)
        finite = fsharp[s.valid]
        report.per_map_max.append(float(finite.max()) if finite.size else 0.0)
        report.per_map_overflow.append(int(s.overflow.sum()))
        report.labels.append(m.label)
    if report.per_map_max:
        report.uniform_bound = max(report.per_map_max)
    if report.overflow_witnessed:
        report.uniform_bound = float('inf')
    return report


@dataclass
class SplitBoundReport:
    """Pointwise check of f# <= h# + g# where Re(h g) >= 0."""
    considered: int
    violations: int
    max_slack: Optional[float]
    witness: Optional[complex] = None

    @property
    def verdict(self) -> ProbeVerdict:
        return ProbeVerdict.PASS if self.violations == 0 else ProbeVerdict.FAIL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "considered": self.considered,
            "violations": self.violations,
            "max_slack": self.max_slack,
            "witness": None if self.witness is None else [self.witness.real,
                                                          self.witness.imag],
            "verdict": self.verdict.value,
        }


def split_bound_probe(m: HarmonicMap, compact: Disc, samples: int = 10_000,
                      seed: int = 0, rel_tol: float = 1e-12) -> SplitBoundReport:
    """Sample f# - (h# + g#) on the part of the disc where Re(h g) >= 0."""
    zs = disc_samples(compact, samples, seed)
    valid = ~m.singular_mask(zs)
    zs = zs[valid]
    h, bad_h = exprparse.evaluate_masked(m.h, zs, m.overflow_guard)
    g, bad_g = exprparse.evaluate_masked(m.g, zs, m.overflow_guard)
    h1, bad_h1 = exprparse.evaluate_masked(m.h1, zs, m.overflow_guard)
    g1, bad_g1 = exprparse.evaluate_masked(m.g1, zs, m.overflow_guard)
    with np.errstate(all='ignore'):
        keep = ~(bad_h | bad_g | bad_h1 | bad_g1) & (np.real(h * g) >= 0)
        fsharp = fsharp_from_parts(h + np.conj(g), h1, g1)[keep]
        bound = (np.abs(h1) / (1 + np.abs(h) ** 2) + np.abs(g1) / (1 + np.abs(g) ** 2))[keep]
    slack = fsharp - bound
    broken = slack > rel_tol * np.maximum(bound, 1e-300)
    witness = complex(zs[keep][np.argmax(broken)]) if broken.any() else None
    return SplitBoundReport(
        considered=int(keep.sum()),
        violations=int(broken.sum()),
        max_slack=float(slack.max()) if slack.size else None,
        witness=witness,
    )
