"""Tests for map file loading and command-line literals."""

import pytest

from harmonic_normality.analysis.mapfn import dilatation, eval_map, precompose_affine
from harmonic_normality.analysis.phi import PhiFamily
from harmonic_normality.errors import (
    DegenerateDenominatorError,
    InputError,
    MapFileError,
    NormalizationError,
    UnknownIdentifierError,
    WeightSpecError,
)
from harmonic_normality.integrations.mapfile import (
    MapFileLoader,
    format_complex_literal,
    parse_complex_literal,
    parse_targets,
    parse_weight_spec,
    read_map_entries,
)

WITNESS = """# exp(i/(1-z)) is unimodular on the real axis
h = exp(i/(1-z))
g = 0
singularities = 1+0i
"""


class TestComplexLiterals:

    @pytest.mark.parametrize("text, value", [
        ("1", 1 + 0j),
        ("-2.5", -2.5 + 0j),
        ("1+2i", 1 + 2j),
        ("0.5-0.25i", 0.5 - 0.25j),
        ("3i", 3j),
        ("-i", -1j),
        ("i", 1j),
        ("1e-3+1e2i", 0.001 + 100j),
        (" 1 - i ", 1 - 1j),
    ])
    def test_parse(self, text, value):
        assert parse_complex_literal(text) == value

    @pytest.mark.parametrize("text", ["", "1+", "2j", "i1", "1..2", "abc"])
    def test_malformed(self, text):
        with pytest.raises(InputError):
            parse_complex_literal(text)

    def test_format_reads_back(self):
        for z in (0.5 - 0.25j, -1j, 3 + 0j):
            assert parse_complex_literal(format_complex_literal(z)) == z

    def test_targets(self):
        assert parse_targets(["0", "1+i"]) == [0j, 1 + 1j]
        assert parse_targets(None) == []


class TestWeightSpec:

    def test_families(self):
        assert parse_weight_spec("classical").family is PhiFamily.CLASSICAL
        assert parse_weight_spec("inv_pow:alpha=1.5").alpha == 1.5
        assert parse_weight_spec("inv_log:beta=2").beta == 2.0

    @pytest.mark.parametrize("text", ["inv_pow:beta=2", "inv_log:alpha=2", "pow:alpha=2",
                                      "inv_pow:alpha=0.5", "inv_log:beta=0.5", ""])
    def test_rejected(self, text):
        with pytest.raises(WeightSpecError):
            parse_weight_spec(text)


class TestReadMapEntries:

    def test_comments_and_blank_lines(self):
        entries = read_map_entries(WITNESS)
        assert entries == {"h": "exp(i/(1-z))", "g": "0", "singularities": "1+0i"}

    def test_missing_g_names_the_key(self):
        with pytest.raises(MapFileError) as excinfo:
            read_map_entries("h = z\n")
        assert excinfo.value.key == "g"
        assert "'g ='" in str(excinfo.value)
        assert excinfo.value.exit_code == 2

    def test_unknown_key(self):
        with pytest.raises(MapFileError) as excinfo:
            read_map_entries("h = z\ng = 0\nk = 1\n")
        assert excinfo.value.key == "k"
        assert "line 3" in str(excinfo.value)

    def test_duplicate_key(self):
        with pytest.raises(MapFileError, match="duplicate"):
            read_map_entries("h = z\nh = z^2\ng = 0\n")

    def test_line_without_equals(self):
        with pytest.raises(MapFileError, match="line 1"):
            read_map_entries("h z\n")


class TestMapFileLoader:

    def test_load_uses_file_stem(self, tmp_path, config):
        path = tmp_path / "witness.map"
        path.write_text(WITNESS, encoding="utf-8")
        m = MapFileLoader(config).load(path)
        assert m.label == "witness"
        assert any(abs(s - 1) < 1e-12 for s in m.singularities)
        assert eval_map(m, 0) == pytest.approx(complex(0.5403023058681398, 0.8414709848078965))

    def test_base_point(self, config):
        m = MapFileLoader(config).loads("h = z\ng = z - 0.5\nz0 = 0.5\n")
        assert m.z0 == 0.5

    def test_normalization_error_passes_through(self, config):
        with pytest.raises(NormalizationError):
            MapFileLoader(config).loads("h = z\ng = z + 1\n")

    def test_expression_error_passes_through(self, config):
        with pytest.raises(UnknownIdentifierError):
            MapFileLoader(config).loads("h = log(z)\ng = 0\n")

    def test_unreadable_file(self, tmp_path, config):
        with pytest.raises(MapFileError, match="cannot read map file"):
            MapFileLoader(config).load(tmp_path / "missing.map")

    def test_dilatation_tolerance_comes_from_config(self, config, monkeypatch):
        monkeypatch.setattr(config, 'dilatation_tol', 1e-3)
        m = MapFileLoader(config).loads("h = z^2\ng = 0.1*z^2\n")
        assert m.dilatation_tol == 1e-3
        assert dilatation(m, 0.01) == pytest.approx(0.1)
        with pytest.raises(DegenerateDenominatorError):
            dilatation(m, 1e-4)
        assert precompose_affine(m, 0.1, 2.0).dilatation_tol == 1e-3
