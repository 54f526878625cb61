"""
Weight families phi: [0, 1) -> (0, inf) and the diagnostics run on them.

    classical   phi(r) = 1 / (1 - r^2)
    inv_pow     phi(r) = (1 - r)^(-alpha),                      alpha > 1
    inv_log     phi(r) = (1 - r)^(-1) * (1 - ln(1 - r))^beta,   beta >= 1

psi = 1/phi is the reciprocal whose convexity the family rescaling needs.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import structlog

from ..errors import OverflowGuardError, PhiDomainError, WeightSpecError
from ..models import Disc, ProbeVerdict
from ..utils.sampling import polar_grid

logger = structlog.get_logger(logger=__name__)

OVERFLOW_GUARD = 1e300
CONSTRUCTION_GRID = 10_000
# r at which the growth phi(r)(1 - r) is reported
GROWTH_PROBE_RADIUS = 1.0 - 1e-8
DEVIATION_THRESHOLD = 0.05
CONVEXITY_TOL = -1e-10


class PhiFamily(Enum):
    """Built-in weight families."""
    CLASSICAL = "classical"
    INV_POW = "inv_pow"
    INV_LOG = "inv_log"


@dataclass(frozen=True)
class PhiWeight:
    """Smoothly increasing weight from one of the built-in families."""

    family: PhiFamily
    alpha: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        if self.family is PhiFamily.INV_POW:
            if self.alpha is None or not self.alpha > 1:
                raise WeightSpecError(f"inv_pow needs alpha > 1, got {self.alpha!r}")
        elif self.family is PhiFamily.INV_LOG:
            if self.beta is None or not self.beta >= 1:
                raise WeightSpecError(f"inv_log needs beta >= 1, got {self.beta!r}")

        rs = np.linspace(0.0, GROWTH_PROBE_RADIUS, CONSTRUCTION_GRID)
        values = self.value(rs)
        if not np.all(~np.isnan(values) & (values > 0)):
            raise WeightSpecError(f"{self.spec} is not positive on [0, 1)")
        if np.any(np.diff(values) < -1e-12 * values[1:]):
            raise WeightSpecError(f"{self.spec} is not nondecreasing on [0, 1)")

    @classmethod
    def classical(cls) -> "PhiWeight":
        return cls(PhiFamily.CLASSICAL)

    @classmethod
    def inv_pow(cls, alpha: float) -> "PhiWeight":
        return cls(PhiFamily.INV_POW, alpha=float(alpha))

    @classmethod
    def inv_log(cls, beta: float) -> "PhiWeight":
        return cls(PhiFamily.INV_LOG, beta=float(beta))

    @property
    def spec(self) -> str:
        """Specifier text accepted by the command line."""
        if self.family is PhiFamily.INV_POW:
            return f"inv_pow:alpha={self.alpha!r}"
        if self.family is PhiFamily.INV_LOG:
            return f"inv_log:beta={self.beta!r}"
        return "classical"

    def value(self, rs) -> np.ndarray:
        """Family formula over an array of radii; no domain checks."""
        rs = np.asarray(rs, dtype=np.float64)
        with np.errstate(all='ignore'):
            if self.family is PhiFamily.CLASSICAL:
                return 1.0 / (1.0 - rs * rs)
            gap = 1.0 - rs
            if self.family is PhiFamily.INV_POW:
                return gap ** (-self.alpha)
            return (1.0 - np.log(gap)) ** self.beta / gap

    def psi(self, rs) -> np.ndarray:
        with np.errstate(all='ignore'):
            return 1.0 / self.value(rs)

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family.value, "alpha": self.alpha, "beta": self.beta,
                "spec": self.spec}


def phi_eval(w: PhiWeight, r: float) -> float:
    """phi(r) for 0 <= r < 1."""
    if not 0.0 <= r < 1.0:
        raise PhiDomainError(f"weight evaluated at r={r!r}, outside [0, 1)")
    value = float(w.value(np.array([r]))[0])
    if not np.isfinite(value) or value > OVERFLOW_GUARD:
        raise OverflowGuardError(complex(r), "weight exceeds overflow guard")
    return value


def boundary_growth(w, r: float = GROWTH_PROBE_RADIUS) -> float:
    """phi(r)(1 - r) at a radius close to 1."""
    return float(w.value(np.array([r]))[0] * (1.0 - r))


def rescale_ratio(w: PhiWeight, a: complex, z: complex) -> float:
    """R_a(z) = phi(|a + z/phi(|a|)|) / phi(|a|); exactly 1 at z = 0."""
    base = phi_eval(w, abs(a))
    shifted = a + z / base
    if abs(shifted) >= 1.0:
        raise PhiDomainError(f"shifted point {shifted!r} leaves the unit disc")
    return phi_eval(w, abs(shifted)) / base


def rescale_ratio_array(w, a: complex, zs: np.ndarray) -> np.ndarray:
    """R_a over an array; NaN where the shifted point leaves the disc."""
    base = float(w.value(np.array([abs(a)]))[0])
    with np.errstate(all='ignore'):
        radii = np.abs(a + np.asarray(zs) / base)
        inside = radii < 1.0
        ratios = np.full(radii.shape, np.nan)
        ratios[inside] = w.value(radii[inside]) / base
    return ratios


@dataclass
class SmoothIncreaseReport:
    """Numerical evidence that a weight is smoothly increasing."""
    radii: List[float]
    monotone: bool
    growth_trend: List[float]
    ratio_sup_deviation: List[float]
    excluded_samples: List[int]
    compact_radius: float
    verdict: ProbeVerdict
    boundary_growth: Optional[float] = None
    conventions: Dict[str, float] = field(
        default_factory=lambda: {"deviation_threshold": DEVIATION_THRESHOLD})

    @property
    def deviation_decreasing(self) -> bool:
        d = self.ratio_sup_deviation
        return all(b <= a for a, b in zip(d, d[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "radii": self.radii,
            "monotone": self.monotone,
            "growth_trend": self.growth_trend,
            "ratio_sup_deviation": self.ratio_sup_deviation,
            "deviation_decreasing": self.deviation_decreasing,
            "excluded_samples": self.excluded_samples,
            "compact_radius": self.compact_radius,
            "boundary_growth": self.boundary_growth,
            "verdict": self.verdict.value,
            "conventions": self.conventions,
        }


def smooth_increase_check(w, radii: Sequence[float], compact_radius: float = 2.0,
                          n_radial: int = 16, n_angular: int = 64) -> SmoothIncreaseReport:
    """Monotonicity, growth of phi(r)(1 - r) and sup |R_a - 1| on a compact disc.

    Works with anything exposing a vectorised ``value(rs)``. Sample points whose
    shifted image leaves the unit disc are excluded and counted.
    """
    radii = [float(r) for r in radii]
    top = max(radii) if radii else 0.0
    grid = np.concatenate((np.linspace(0.0, top, CONSTRUCTION_GRID), radii))
    grid.sort()
    values = np.asarray(w.value(grid), dtype=np.float64)
    monotone = bool(np.all(np.isfinite(values)) and np.all(np.diff(values) >= 0))

    samples = polar_grid(Disc(0j, compact_radius), n_radial, n_angular)
    growth, deviation, excluded = [], [], []
    for a in radii:
        phi_a = float(w.value(np.array([a]))[0])
        growth.append(phi_a * (1.0 - a))
        ratios = rescale_ratio_array(w, a, samples)
        inside = np.isfinite(ratios)
        excluded.append(int((~inside).sum()))
        deviation.append(float(np.max(np.abs(ratios[inside] - 1.0))) if inside.any()
                         else float('inf'))

    passed = monotone and bool(deviation) and deviation[-1] < DEVIATION_THRESHOLD
    report = SmoothIncreaseReport(
        radii=radii,
        monotone=monotone,
        growth_trend=growth,
        ratio_sup_deviation=deviation,
        excluded_samples=excluded,
        compact_radius=compact_radius,
        verdict=ProbeVerdict.PASS if passed else ProbeVerdict.FAIL,
        boundary_growth=boundary_growth(w) if isinstance(w, PhiWeight) else None,
    )
    logger.debug("smooth increase check", verdict=report.verdict.value,
                 deviation=deviation[-1] if deviation else None)
    return report


def reciprocal_convexity_check(w, grid: int = 1001) -> bool:
    """Second central differences of psi = 1/phi are >= -1e-10 on [0, 1 - 1e-6]."""
    if grid < 3:
        raise ValueError("convexity grid needs at least 3 points")
    rs = np.linspace(0.0, 1.0 - 1e-6, grid)
    psi = 1.0 / np.asarray(w.value(rs), dtype=np.float64)
    second = psi[:-2] - 2.0 * psi[1:-1] + psi[2:]
    return bool(np.all(second >= CONVEXITY_TOL))


def psi_derivative(w, r: float, step: float = 1e-7) -> float:
    """Central difference of psi = 1/phi at r, one-sided at 0."""
    lo = max(r - step, 0.0)
    hi = r + step
    psi = 1.0 / np.asarray(w.value(np.array([lo, hi])), dtype=np.float64)
    return float((psi[1] - psi[0]) / (hi - lo))
