"""Tests for rescaling sequences and rescaled maps."""

import numpy as np
import pytest

from harmonic_normality.analysis.mapfn import eval_map, spherical_derivative
from harmonic_normality.analysis.phi import phi_eval
from harmonic_normality.analysis.rescale import (
    chordal_distance,
    convergence_probe,
    extract_sequence,
    family_rescale_check,
    rescaled_eval,
    rescaled_spherical,
    rescaled_spherical_direct,
    shifted_point,
)
from harmonic_normality.errors import (
    DegenerateSequenceError,
    HypothesisViolationError,
    OutOfRangeError,
)
from harmonic_normality.models import RescalingEntry, RescalingSequence

SCHEDULE = [0.9, 0.99, 0.999]


@pytest.fixture
def witness_sequence(witness_map, inv_pow_15):
    return extract_sequence(witness_map, inv_pow_15, SCHEDULE, depth=6)


class TestExtractSequence:

    def test_witness_sequence(self, witness_sequence):
        entries = witness_sequence.entries
        assert len(entries) == 3
        for entry, bound in zip(entries, (1.58, 5.0, 15.8)):
            assert entry.M_n >= bound
        assert witness_sequence.radius_divergent
        assert witness_sequence.rho_to_zero

    def test_entry_identities(self, witness_sequence, inv_pow_15):
        for entry in witness_sequence.entries:
            assert entry.rho_n == pytest.approx(1.0 / entry.M_n, rel=1e-12)
            phi_n = phi_eval(inv_pow_15, abs(entry.z_n))
            expected = (1 - abs(entry.z_n)) * phi_n / entry.rho_n
            assert entry.R_n == pytest.approx(expected, rel=1e-12)
            assert abs(entry.z_n) <= entry.r_n

    def test_identity_not_divergent(self, identity_map, classical):
        sequence = extract_sequence(identity_map, classical, SCHEDULE, depth=4)
        assert [e.M_n for e in sequence.entries] == pytest.approx([1.0, 1.0, 1.0])
        assert not sequence.radius_divergent

    def test_constant_map(self, constant_map, classical):
        with pytest.raises(DegenerateSequenceError):
            extract_sequence(constant_map, classical, SCHEDULE)

    def test_csv_rows(self, witness_sequence):
        rows = witness_sequence.csv_rows()
        assert [row[0] for row in rows] == [1, 2, 3]
        assert float(rows[0][1]) == 0.9


class TestRescaledMaps:

    def test_center_value(self, witness_map, inv_pow_15, witness_sequence):
        entry = witness_sequence.entries[-1]
        assert rescaled_eval(witness_map, inv_pow_15, entry, 0) == eval_map(witness_map,
                                                                            entry.z_n)

    def test_matches_shifted_evaluation(self, witness_map, inv_pow_15, witness_sequence):
        entry = witness_sequence.entries[1]
        zeta = 0.01
        point = entry.z_n + entry.rho_n * zeta / phi_eval(inv_pow_15, abs(entry.z_n))
        assert shifted_point(inv_pow_15, entry, zeta) == pytest.approx(point, abs=1e-15)
        assert rescaled_eval(witness_map, inv_pow_15, entry, zeta) == pytest.approx(
            eval_map(witness_map, point), abs=1e-12)

    def test_unit_spherical_derivative_at_center(self, witness_map, inv_pow_15,
                                                 witness_sequence):
        for entry in witness_sequence.entries:
            assert rescaled_spherical(witness_map, inv_pow_15, entry, 0) == pytest.approx(
                1.0, abs=1e-9)
            assert rescaled_spherical_direct(witness_map, inv_pow_15, entry, 0) == \
                pytest.approx(1.0, abs=1e-9)

    def test_forced_entry_for_identity(self, identity_map, classical):
        entry = RescalingEntry(r_n=0.5, z_n=0j, M_n=1.0, rho_n=1.0, R_n=1.0)
        assert rescaled_spherical(identity_map, classical, entry, 0) == 1.0
        expected = spherical_derivative(identity_map, 0.3)
        assert rescaled_spherical(identity_map, classical, entry, 0.3) == pytest.approx(expected)

    def test_out_of_range(self, witness_map, inv_pow_15, witness_sequence):
        entry = witness_sequence.entries[0]
        with pytest.raises(OutOfRangeError):
            rescaled_eval(witness_map, inv_pow_15, entry, entry.R_n)


class TestChordalDistance:

    def test_finite_values(self):
        d = chordal_distance(np.array([0j, 1 + 0j]), np.array([1 + 0j, 1 + 0j]))
        assert d[0] == pytest.approx(1 / np.sqrt(2))
        assert d[1] == 0.0

    def test_infinity_is_a_point(self):
        inf = complex(np.inf, 0)
        d = chordal_distance(np.array([inf, inf]), np.array([0j, inf]))
        assert d[0] == pytest.approx(1.0)
        assert d[1] == 0.0


class TestConvergenceProbe:

    def test_witness_limit_is_nonconstant(self, witness_map, inv_pow_15, witness_sequence):
        report = convergence_probe(witness_map, inv_pow_15, witness_sequence, 1.0, grid=17)
        assert report.nonconstant_limit_witnessed
        assert len(report.distances) == 3
        assert len(report.consecutive) == 2
        assert report.subsequence == "not attempted"
        for i in range(3):
            assert report.distances[i][i] == 0.0

    def test_identical_maps_have_zero_distance(self, identity_map, classical):
        sequence = extract_sequence(identity_map, classical, SCHEDULE, depth=2)
        report = convergence_probe(identity_map, classical, sequence, 0.5, grid=9)
        assert report.consecutive == [0.0, 0.0]
        assert not report.cauchy_trend

    def test_single_entry_has_empty_matrix(self, identity_map, classical):
        sequence = RescalingSequence([RescalingEntry(0.5, 0j, 1.0, 1.0, 1.0)])
        report = convergence_probe(identity_map, classical, sequence, 0.5, grid=9)
        assert report.distances == []
        assert len(report.rescaled_sup) == 1
        assert report.consecutive == []
        assert not report.cauchy_trend

    def test_phi_normal_map_sup_trends_to_zero(self, identity_map, inv_pow_2):
        # rescaling factor rho_n / phi(|z_n|) = 10^(-3n)
        entries = [RescalingEntry(1 - 10.0 ** -n, complex(1 - 10.0 ** -n), 10.0 ** n,
                                  10.0 ** -n, 10.0 ** (2 * n)) for n in range(1, 5)]
        report = convergence_probe(identity_map, inv_pow_2, RescalingSequence(entries), 1.0,
                                   grid=9)
        assert report.sup_trend_to_zero
        assert report.rescaled_sup == sorted(report.rescaled_sup, reverse=True)
        assert report.rescaled_sup[-1] < 1e-9
        assert not report.nonconstant_limit_witnessed

    def test_sample_radius_must_stay_inside(self, identity_map, classical):
        sequence = RescalingSequence([RescalingEntry(0.5, 0j, 1.0, 1.0, 1.0)])
        with pytest.raises(OutOfRangeError):
            convergence_probe(identity_map, classical, sequence, 1.0)


class TestFamilyRescaleCheck:

    def test_identity_with_inv_pow(self, identity_map, inv_pow_2):
        points = [1 - 10.0 ** -n for n in range(1, 5)]
        report = family_rescale_check(identity_map, inv_pow_2, points, compact_radius=1.0)
        assert all(s <= 1.05 for s in report.sups[1:])
        assert report.bounded_from == 0
        assert report.marty_bound <= 1.05
        for point in report.points:
            assert point.identity_gap <= 1e-9
            assert point.excluded == 0

    def test_classical_violates_convexity(self, identity_map, classical):
        with pytest.raises(HypothesisViolationError):
            family_rescale_check(identity_map, classical, [0.9])

    def test_constant_map(self, constant_map, inv_pow_2):
        report = family_rescale_check(constant_map, inv_pow_2, [0.9, 0.99])
        assert report.sups == [0.0, 0.0]
        assert report.to_dict()["marty_bound"] == 0.0
