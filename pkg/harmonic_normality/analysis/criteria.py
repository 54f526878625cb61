"""
Five-point and four-point preimage criteria.

Preimages of every value of E are collected inside growing discs |z| <= r_n and
the criterion quantities are traced over the schedule; the growth of that trace
is the reported signal.
"""

from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..errors import CriterionPreconditionError, SensePreservingError
from ..models import CriterionReport, Disc, PreimageSet, ProbeVerdict, ValueTrace, Verdict
from .mapfn import (
    HarmonicMap,
    eval_map,
    second_order_quantity,
    sense_preserving_probe,
    spherical_derivative,
)
from .normality import check_schedule, classify_normality, classify_trace
from .phi import phi_eval, smooth_increase_check
from .roots import RESIDUAL_TOL, find_preimages

logger = structlog.get_logger(logger=__name__)

DISTINCT_TOL = 1e-9
PROBE_SAMPLES = 4096


def _check_targets(E: Sequence[complex], size: int) -> List[complex]:
    values = [complex(a) for a in E]
    if len(values) != size:
        raise CriterionPreconditionError(
            f"expected {size} target values, got {len(values)}")
    for a, b in combinations(values, 2):
        if abs(a - b) <= DISTINCT_TOL:
            raise CriterionPreconditionError(f"target values {a!r} and {b!r} coincide")
    return values


def _search(m: HarmonicMap, tasks: List[Tuple[float, complex]], tol: float,
            max_workers: int) -> List[PreimageSet]:
    """find_preimages per (radius, value); results keep task order."""
    def one(task: Tuple[float, complex]) -> PreimageSet:
        radius, a = task
        return find_preimages(m, a, Disc(0j, radius), tol)

    if max_workers <= 1:
        return [one(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, tasks))


def _trace_value(m: HarmonicMap, w, preimages: PreimageSet, tol: float,
                 second: bool) -> ValueTrace:
    locations = []
    for root in preimages.roots:
        # recheck against a fresh evaluation
        if abs(eval_map(m, root.location) - preimages.target) <= tol:
            locations.append(root.location)
        else:
            logger.warning("preimage failed recheck", root=[root.location.real,
                                                            root.location.imag])
    ratios = [spherical_derivative(m, z) / phi_eval(w, abs(z)) for z in locations]
    seconds = [second_order_quantity(m, z) for z in locations] if second else []
    return ValueTrace(
        value=preimages.target,
        radius=preimages.region.radius,
        preimage_count=len(locations),
        sup_ratio=max(ratios, default=0.0),
        sup_second=max(seconds, default=0.0) if second else None,
        preimages=locations,
        boundary_excluded=preimages.boundary_excluded,
        unresolved_cells=len(preimages.unresolved_cells),
    )


def _run_criterion(m: HarmonicMap, w, E: List[complex], schedule: Sequence[float],
                   tol: float, second: bool, mode: str, max_workers: int,
                   probe_samples: int) -> CriterionReport:
    radii = check_schedule(schedule)
    probe = sense_preserving_probe(m, Disc(0j, radii[-1]), probe_samples)
    if not probe.acceptable:
        raise SensePreservingError(probe.argmin, probe.min_jacobian)

    tasks = [(r, a) for r in radii for a in E]
    per_value = [_trace_value(m, w, found, tol, second)
                 for found in _search(m, tasks, tol, max_workers)]

    sup1_trace, sup2_trace = [], []
    for r in radii:
        at_radius = [t for t in per_value if t.radius == r]
        sup1_trace.append(max((t.sup_ratio for t in at_radius), default=0.0))
        if second:
            sup2_trace.append(max((t.sup_second or 0.0 for t in at_radius), default=0.0))

    final = [t for t in per_value if t.radius == radii[-1]]
    if not any(t.preimage_count for t in final):
        verdict = Verdict.NO_PREIMAGES
    else:
        verdict, _ = classify_trace(radii, sup1_trace)
        if second:
            verdict_2, _ = classify_trace(radii, sup2_trace)
            if Verdict.GROWTH in (verdict, verdict_2):
                verdict = Verdict.GROWTH
            elif verdict is Verdict.BOUNDED and verdict_2 is Verdict.BOUNDED:
                verdict = Verdict.BOUNDED
            else:
                verdict = Verdict.INCONCLUSIVE

    report = CriterionReport(
        E=E,
        radii=radii,
        per_value=per_value,
        sup1=max(sup1_trace, default=0.0),
        sup2=max(sup2_trace, default=0.0) if second else None,
        verdict=verdict,
        mode=mode,
        sup1_trace=sup1_trace,
        sup2_trace=sup2_trace if second else None,
    )
    logger.info("criterion evaluated", label=m.label, mode=mode, verdict=verdict.value,
                sup1=report.sup1, sup2=report.sup2)
    return report


def lappan_five(m: HarmonicMap, w, E: Sequence[complex], schedule: Sequence[float],
                tol: float = RESIDUAL_TOL, max_workers: int = 1,
                probe_samples: int = PROBE_SAMPLES) -> CriterionReport:
    """Trace sup of f#/phi over the preimages of five values."""
    values = _check_targets(E, 5)
    return _run_criterion(m, w, values, schedule, tol, False, "five_point",
                          max_workers, probe_samples)


def lappan_four(m: HarmonicMap, w, E: Sequence[complex], schedule: Sequence[float],
                tol: float = RESIDUAL_TOL, max_workers: int = 1,
                probe_samples: int = PROBE_SAMPLES) -> CriterionReport:
    """Five-point trace on four values plus the second-order quantity.

    The weight's smooth-increase check is attached to the report; a failing
    check is logged, not raised.
    """
    values = _check_targets(E, 4)
    weight_check = smooth_increase_check(w, check_schedule(schedule))
    if weight_check.verdict is ProbeVerdict.FAIL:
        logger.warning("weight failed smooth increase check",
                       weight=getattr(w, 'spec', None),
                       deviation=weight_check.ratio_sup_deviation[-1])
    report = _run_criterion(m, w, values, schedule, tol, True, "four_point",
                            max_workers, probe_samples)
    report.weight_check = weight_check.to_dict()
    return report


def criterion_consistency(m: HarmonicMap, w, E: Sequence[complex],
                          schedule: Sequence[float], depth: int = 8,
                          tol: float = RESIDUAL_TOL,
                          max_workers: int = 1) -> Dict[str, Any]:
    """classify_normality next to lappan_five; growth with a bounded five-point
    trace is flagged for review."""
    normality = classify_normality(m, w, schedule, depth, max_workers)
    five = lappan_five(m, w, E, schedule, tol, max_workers)
    conflict = normality.kind is Verdict.GROWTH and five.verdict is Verdict.BOUNDED
    if conflict:
        logger.warning("criterion conflict", label=m.label)
    return {
        "normality": normality.kind.value,
        "five_point": five.verdict.value,
        "growth_exponent": normality.growth_exponent,
        "consistent": not conflict,
        "flagged": conflict,
        "note": "desk-scale evidence",
        "normality_report": normality.to_dict(),
        "five_point_report": five.to_dict(),
    }


def sup_over_preimages(m: HarmonicMap, w, report: CriterionReport) -> Optional[float]:
    """Recompute sup1 from the listed preimages."""
    ratios = [spherical_derivative(m, z) / phi_eval(w, abs(z))
              for t in report.per_value for z in t.preimages]
    return float(np.max(ratios)) if ratios else None
