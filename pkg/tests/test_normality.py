"""Tests for sup estimation and normality evidence."""

import numpy as np
import pytest

from harmonic_normality.analysis.mapfn import HarmonicMap, spherical_derivative
from harmonic_normality.analysis.normality import (
    check_schedule,
    classical_normal_sup,
    classify_normality,
    classify_trace,
    growth_slope,
    marty_family_check,
    split_bound_probe,
    sup_ratio,
    sup_trace,
)
from harmonic_normality.analysis.phi import PhiWeight, phi_eval
from harmonic_normality.errors import InputError, PhiDomainError
from harmonic_normality.models import Disc, ProbeVerdict, Verdict

POWERS_OF_TEN = [1 - 10.0 ** -n for n in range(1, 5)]


class TestSupRatio:

    def test_identity_classical(self, identity_map, classical):
        estimate = sup_ratio(identity_map, classical, 0.999, depth=8)
        assert estimate.value == pytest.approx(1.0, abs=1e-6)
        assert abs(estimate.argmax) <= 1e-3
        assert estimate.refinement_depth == 8

    def test_witness_attains_real_axis_value(self, witness_map, inv_pow_15):
        estimate = sup_ratio(witness_map, inv_pow_15, 0.99)
        assert estimate.value >= 5.0 * (1 - 1e-9)
        assert abs(estimate.argmax) <= 0.99

    def test_value_recomputes_at_argmax(self, witness_map, inv_pow_15):
        estimate = sup_ratio(witness_map, inv_pow_15, 0.99)
        z = estimate.argmax
        recomputed = spherical_derivative(witness_map, z) / phi_eval(inv_pow_15, abs(z))
        assert estimate.value == pytest.approx(recomputed, rel=1e-12)

    def test_constant_map_is_zero(self, constant_map, inv_pow_2):
        assert sup_ratio(constant_map, inv_pow_2, 0.9).value == 0.0

    def test_zero_radius_evaluates_origin(self, affine_map, classical):
        estimate = sup_ratio(affine_map, classical, 0.0)
        assert estimate.value == pytest.approx(1.5)
        assert estimate.argmax == 0

    @pytest.mark.parametrize("radius", [1.0, -0.5])
    def test_radius_outside_unit_interval(self, identity_map, classical, radius):
        with pytest.raises(PhiDomainError):
            sup_ratio(identity_map, classical, radius)

    def test_worker_count_does_not_change_result(self, witness_map, inv_pow_15):
        serial = sup_ratio(witness_map, inv_pow_15, 0.99, depth=3)
        threaded = sup_ratio(witness_map, inv_pow_15, 0.99, depth=3, max_workers=3)
        assert threaded.to_dict() == serial.to_dict()

    def test_singular_points_skipped(self, inv_pow_2):
        m = HarmonicMap.from_text("1/(z-0.5)", "0", z0=0)
        estimate = sup_ratio(m, inv_pow_2, 0.6, depth=2, seeds=[0.5])
        assert estimate.skipped_singular >= 1
        assert estimate.value > 0

    def test_refinement_never_lowers_estimate(self, witness_map, inv_pow_15):
        coarse = sup_ratio(witness_map, inv_pow_15, 0.9, depth=0)
        fine = sup_ratio(witness_map, inv_pow_15, 0.9, depth=6)
        assert fine.value >= coarse.value
        assert fine.evaluations > coarse.evaluations


class TestSupTrace:

    def test_nondecreasing(self, witness_map, inv_pow_15):
        trace = sup_trace(witness_map, inv_pow_15, [0.5, 0.9, 0.99], depth=4)
        values = [s.value for s in trace]
        assert values == sorted(values)

    @pytest.mark.parametrize("schedule", [[], [0.5, 0.4], [0.5, 1.0], [0.5, 0.5]])
    def test_bad_schedules(self, schedule):
        with pytest.raises(InputError):
            check_schedule(schedule)


class TestClassifyTrace:

    def test_flat_trace_is_bounded(self):
        verdict, slope = classify_trace([0.9, 0.99, 0.999], [1.0, 1.0, 1.0])
        assert verdict is Verdict.BOUNDED
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_power_growth(self):
        radii = [0.9, 0.99, 0.999, 0.9999]
        verdict, slope = classify_trace(radii, [(1 - r) ** -1 for r in radii])
        assert verdict is Verdict.GROWTH
        assert slope == pytest.approx(1.0)

    def test_overflow_is_growth(self):
        verdict, _ = classify_trace([0.9, 0.99], [1.0, 1.0], overflow=True)
        assert verdict is Verdict.GROWTH

    def test_slow_drift_is_inconclusive(self):
        verdict, slope = classify_trace([0.9, 0.999999], [1.0, 1.2])
        assert verdict is Verdict.INCONCLUSIVE
        assert slope < 0.25

    def test_slope_needs_positive_values(self):
        assert growth_slope([0.9, 0.99], [0.0, 1.0]) is None
        assert growth_slope([0.9], [1.0]) is None


class TestClassifyNormality:

    def test_identity_classical_bounded(self, identity_map, classical):
        verdict = classify_normality(identity_map, classical, [0.5, 0.75, 0.875, 0.9375])
        assert verdict.kind is Verdict.BOUNDED
        assert verdict.sup_trace[-1].value == pytest.approx(1.0, abs=1e-9)

    def test_witness_grows_against_inv_pow(self, witness_map, inv_pow_15):
        verdict = classify_normality(witness_map, inv_pow_15, POWERS_OF_TEN)
        assert verdict.kind is Verdict.GROWTH
        for n, estimate in enumerate(verdict.sup_trace, 1):
            assert estimate.value >= 10 ** (n / 2) / 2 * (1 - 1e-9)

    def test_witness_bounded_against_steeper_weight(self, witness_map):
        schedule = [1 - 10.0 ** -n for n in range(1, 4)]
        verdict = classify_normality(witness_map, PhiWeight.inv_pow(2.5), schedule)
        assert verdict.kind is Verdict.BOUNDED
        assert not verdict.overflow_witnessed

    def test_report_dict(self, identity_map, classical):
        data = classify_normality(identity_map, classical, [0.5, 0.9], depth=1).to_dict()
        assert data["kind"] == "BoundedEvidence"
        assert len(data["sup_trace"]) == 2
        assert data["conventions"] == {"growth_slope": 0.25, "bounded_ratio": 1.05}

    def test_report_conventions_follow_classifier_constants(self, identity_map, classical, mocker):
        verdict = classify_normality(identity_map, classical, [0.5, 0.9], depth=1)
        mocker.patch("harmonic_normality.analysis.normality.GROWTH_SLOPE", 0.5)
        mocker.patch("harmonic_normality.analysis.normality.BOUNDED_RATIO", 1.5)
        assert verdict.to_dict()["conventions"] == {"growth_slope": 0.5, "bounded_ratio": 1.5}

    def test_witness_classification_is_deterministic(self, witness_map, inv_pow_15):
        first = classify_normality(witness_map, inv_pow_15, POWERS_OF_TEN)
        second = classify_normality(witness_map, inv_pow_15, POWERS_OF_TEN)
        assert first.to_dict() == second.to_dict()


class TestClassicalNormalSup:

    def test_identity(self, identity_map):
        estimate = classical_normal_sup(identity_map, 0.9)
        assert estimate.value == pytest.approx(1.0)
        assert estimate.argmax == 0

    def test_affine_lower_bound(self, affine_map):
        assert classical_normal_sup(affine_map, 0.9).value >= 1.5 - 1e-6

    def test_witness_real_axis_bound(self, witness_map):
        expected = (1 + 0.999) / (2 * (1 - 0.999))
        assert classical_normal_sup(witness_map, 0.999).value >= expected * (1 - 1e-9)


class TestMartyFamilyCheck:

    def test_translates_bounded_by_one(self):
        family = [HarmonicMap.from_text(f"z + {c}") for c in (0, 1, 2)]
        report = marty_family_check(family, Disc(0j, 0.5))
        assert report.uniform_bound <= 1.0
        assert report.per_map_max[0] == pytest.approx(1.0)

    def test_dilations_grow(self):
        family = [HarmonicMap.from_text(f"{n}*z") for n in range(1, 11)]
        report = marty_family_check(family, Disc(0j, 0.5))
        assert report.per_map_max == sorted(report.per_map_max)
        assert report.per_map_max[-1] == pytest.approx(10.0)
        assert report.to_dict()["uniform_bound"] == pytest.approx(10.0)

    def test_empty_family(self):
        report = marty_family_check([], Disc(0j, 0.5))
        assert report.uniform_bound == 0
        assert report.to_dict() == {"uniform_bound": 0.0, "per_map": []}

    def test_overflow_reported(self):
        report = marty_family_check([HarmonicMap.from_text("exp(1000*z)")], Disc(0j, 0.9))
        assert report.to_dict()["uniform_bound"] == "overflow"


class TestSplitBoundProbe:

    @pytest.mark.parametrize("h, g", [("z", "0.5*z"), ("z^2 + 1", "z/3"),
                                      ("exp(z)", "0.25*z^2"), ("sin(z)", "z^3")])
    def test_bound_holds(self, h, g):
        report = split_bound_probe(HarmonicMap.from_text(h, g), Disc(0j, 0.95))
        assert report.verdict is ProbeVerdict.PASS
        assert report.considered > 0
        assert report.witness is None

    def test_random_maps_at_ten_thousand_samples(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            h = " + ".join(f"(({c.real:.6f}) + ({c.imag:.6f})*i)*z^{k}"
                           for k, c in enumerate(rng.normal(size=4) + 1j * rng.normal(size=4)))
            g = " + ".join(f"(({c.real:.6f}) + ({c.imag:.6f})*i)*z^{k}"
                           for k, c in enumerate(rng.normal(size=3) + 1j * rng.normal(size=3), 1))
            report = split_bound_probe(HarmonicMap.from_text(h, g), Disc(0j, 0.95), 10_000)
            assert report.verdict is ProbeVerdict.PASS, (h, g)
            assert report.considered > 0
