"""
Harmonic mappings f = h + conj(g) and their pointwise invariants.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import structlog

from ..errors import DegenerateDenominatorError, NormalizationError, OverflowGuardError
from ..models import Disc, PointReport, ProbeVerdict, SenseReport
from ..utils.sampling import disc_samples
from . import exprparse
from .exprparse import ComplexExpr

logger = structlog.get_logger(logger=__name__)

NORMALIZATION_TOL = 1e-9
DILATATION_TOL = 1e-12
# Below this |h'| + |g'| the spherical derivative is reported as exactly 0.
FSHARP_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class HarmonicMap:
    """f = h + conj(g) with g(z0) = 0."""

    h: ComplexExpr
    g: ComplexExpr
    z0: complex = 0j
    label: str = ""
    singularity_tol: float = exprparse.SINGULARITY_TOL
    overflow_guard: float = exprparse.OVERFLOW_GUARD
    dilatation_tol: float = DILATATION_TOL

    def __post_init__(self):
        g0 = exprparse.evaluate(self.g, self.z0, self.singularity_tol, self.overflow_guard)
        if abs(g0) > NORMALIZATION_TOL:
            raise NormalizationError(
                f"co-analytic part must vanish at z0={self.z0!r}, got |g(z0)|={abs(g0):.3e}")

    @classmethod
    def from_text(cls, h: str, g: str = "0", z0: complex = 0j, label: str = "",
                  singularities: Tuple[complex, ...] = (), **tolerances) -> "HarmonicMap":
        """Parse both parts; extra singularities are declared on each."""
        return cls(exprparse.parse(h, singularities), exprparse.parse(g, singularities),
                   complex(z0), label or f"h={h}, g={g}", **tolerances)

    @cached_property
    def h1(self) -> ComplexExpr:
        return exprparse.differentiate(self.h, 1)

    @cached_property
    def g1(self) -> ComplexExpr:
        return exprparse.differentiate(self.g, 1)

    @cached_property
    def h2(self) -> ComplexExpr:
        return exprparse.differentiate(self.h1, 1)

    @cached_property
    def g2(self) -> ComplexExpr:
        return exprparse.differentiate(self.g1, 1)

    @cached_property
    def singularities(self) -> Tuple[complex, ...]:
        merged = list(self.h.singularities)
        for s in self.g.singularities:
            if all(abs(s - u) > 1e-14 for u in merged):
                merged.append(s)
        return tuple(merged)

    def singular_mask(self, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=np.complex128)
        mask = np.zeros(zs.shape, dtype=bool)
        for s in self.singularities:
            mask |= np.abs(zs - s) <= self.singularity_tol
        return mask

    def _strict(self, e: ComplexExpr, z: complex) -> complex:
        # the union of both parts' poles applies to every evaluation
        joined = ComplexExpr(e.expr, self.singularities)
        return exprparse.evaluate(joined, z, self.singularity_tol, self.overflow_guard)


@dataclass
class MapSamples:
    """Vectorised values of f and first derivatives at admissible points."""

    zs: np.ndarray
    f: np.ndarray
    h1: np.ndarray
    g1: np.ndarray
    singular: np.ndarray
    overflow: np.ndarray

    @property
    def valid(self) -> np.ndarray:
        return ~(self.singular | self.overflow)


def sample(m: HarmonicMap, zs) -> MapSamples:
    """Evaluate f, h', g' over an array; singular and overflowing points are masked."""
    zs = np.asarray(zs, dtype=np.complex128)
    singular = m.singular_mask(zs)
    safe = np.where(singular, 0.0, zs)
    h, bad_h = exprparse.evaluate_masked(m.h, safe, m.overflow_guard)
    g, bad_g = exprparse.evaluate_masked(m.g, safe, m.overflow_guard)
    h1, bad_h1 = exprparse.evaluate_masked(m.h1, safe, m.overflow_guard)
    g1, bad_g1 = exprparse.evaluate_masked(m.g1, safe, m.overflow_guard)
    with np.errstate(all='ignore'):
        f = h + np.conj(g)
    overflow = (bad_h | bad_g | bad_h1 | bad_g1) & ~singular
    return MapSamples(zs, f, h1, g1, singular, overflow)


def fsharp_from_parts(f: np.ndarray, h1: np.ndarray, g1: np.ndarray) -> np.ndarray:
    """(|h'| + |g'|) / (1 + |f|^2), vectorised."""
    with np.errstate(all='ignore'):
        numerator = np.abs(h1) + np.abs(g1)
        numerator = np.where(numerator <= FSHARP_ZERO_TOL, 0.0, numerator)
        return numerator / (1.0 + np.abs(f) ** 2)


def spherical_derivative_array(m: HarmonicMap, zs) -> Tuple[np.ndarray, MapSamples]:
    """f# over an array; NaN at singular or overflowing points."""
    s = sample(m, zs)
    values = fsharp_from_parts(s.f, s.h1, s.g1)
    values = np.where(s.valid, values, np.nan)
    return values, s


def eval_map(m: HarmonicMap, z: complex) -> complex:
    """f(z) = h(z) + conj(g(z))."""
    value = m._strict(m.h, z) + np.conj(m._strict(m.g, z))
    if not np.isfinite(value) or abs(value) > m.overflow_guard:
        raise OverflowGuardError(complex(z))
    return complex(value)


def spherical_derivative(m: HarmonicMap, z: complex) -> float:
    """f#(z) = (|h'(z)| + |g'(z)|) / (1 + |f(z)|^2)."""
    f = eval_map(m, z)
    h1 = m._strict(m.h1, z)
    g1 = m._strict(m.g1, z)
    value = fsharp_from_parts(np.array([f]), np.array([h1]), np.array([g1]))
    return float(value[0])


def analytic_spherical(e: ComplexExpr, z: complex) -> float:
    """Classical spherical derivative |e'(z)| / (1 + |e(z)|^2) of one analytic part."""
    value = exprparse.evaluate(e, z)
    derivative = exprparse.evaluate(exprparse.differentiate(e, 1), z)
    with np.errstate(over='ignore'):
        return float(abs(derivative) / (1.0 + abs(value) ** 2))


def jacobian(m: HarmonicMap, z: complex) -> float:
    """J_f(z) = |h'(z)|^2 - |g'(z)|^2."""
    h1 = m._strict(m.h1, z)
    g1 = m._strict(m.g1, z)
    return float(abs(h1) ** 2 - abs(g1) ** 2)


def dilatation(m: HarmonicMap, z: complex, tol: Optional[float] = None) -> complex:
    """omega(z) = g'(z) / h'(z); undefined where |h'(z)| <= tol (default m.dilatation_tol)."""
    tol = m.dilatation_tol if tol is None else tol
    h1 = m._strict(m.h1, z)
    if abs(h1) <= tol:
        raise DegenerateDenominatorError(
            f"|h'({z!r})| = {abs(h1):.3e} is below tolerance {tol:g}")
    return complex(m._strict(m.g1, z) / h1)


def second_order_quantity(m: HarmonicMap, z: complex) -> float:
    """(|h''(z)| + |g''(z)|) / (1 + (|h'(z)| + |g'(z)|)^2)."""
    first = abs(m._strict(m.h1, z)) + abs(m._strict(m.g1, z))
    second = abs(m._strict(m.h2, z)) + abs(m._strict(m.g2, z))
    with np.errstate(over='ignore'):
        return float(second / (1.0 + first ** 2))


def point_report(m: HarmonicMap, z: complex, tol: Optional[float] = None) -> PointReport:
    """All pointwise invariants at z from one set of derivative values."""
    tol = m.dilatation_tol if tol is None else tol
    f = eval_map(m, z)
    h1 = m._strict(m.h1, z)
    g1 = m._strict(m.g1, z)
    fsharp = float(fsharp_from_parts(np.array([f]), np.array([h1]), np.array([g1]))[0])
    omega = complex(g1 / h1) if abs(h1) > tol else None
    return PointReport(
        z=complex(z),
        f_value=f,
        fsharp=fsharp,
        jacobian=float(abs(h1) ** 2 - abs(g1) ** 2),
        dilatation=omega,
        second_quantity=second_order_quantity(m, z),
    )


def sense_preserving_probe(m: HarmonicMap, region: Disc, samples: int = 4096,
                           seed: int = 0, tol: Optional[float] = None) -> SenseReport:
    """Sampled evidence that J_f > 0 on the region.

    The disc centre is always probed. FAIL when some sample has J_f <= 0;
    `degenerate_only` marks failures where no sample drops below -tol.
    """
    tol = m.dilatation_tol if tol is None else tol
    zs = disc_samples(region, samples, seed)
    s = sample(m, zs)
    with np.errstate(all='ignore'):
        jac = np.abs(s.h1) ** 2 - np.abs(s.g1) ** 2
    jac = np.where(s.valid, jac, np.inf)
    index = int(np.argmin(jac))
    min_jac = float(jac[index])
    skipped = int((~s.valid).sum())
    if skipped:
        logger.debug("probe skipped samples", skipped=skipped, label=m.label)

    verdict = ProbeVerdict.PASS if min_jac > 0 else ProbeVerdict.FAIL
    degenerate_only = verdict is ProbeVerdict.FAIL and min_jac >= -tol
    return SenseReport(
        min_jacobian=min_jac,
        argmin=complex(zs[index]),
        verdict=verdict,
        samples=int(s.valid.sum()),
        degenerate_only=degenerate_only,
    )


def precompose_affine(m: HarmonicMap, a: complex, c: float) -> HarmonicMap:
    """The map zeta -> f(a + zeta/c), built by composing both parts."""
    inner = exprparse.affine(a, 1.0 / c)
    return HarmonicMap(
        exprparse.compose(m.h, inner),
        exprparse.compose(m.g, inner),
        z0=(m.z0 - a) * c,
        label=f"{m.label} o (a + zeta/{c:g})",
        singularity_tol=m.singularity_tol,
        overflow_guard=m.overflow_guard,
        dilatation_tol=m.dilatation_tol,
    )
