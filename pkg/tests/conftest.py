"""Shared fixtures for the harmonic normality test suite."""

import pytest

from harmonic_normality.analysis.mapfn import HarmonicMap
from harmonic_normality.analysis.phi import PhiWeight
from harmonic_normality.config import Config


@pytest.fixture
def identity_map():
    return HarmonicMap.from_text("z", "0")


@pytest.fixture
def affine_map():
    """h = z, g = z/2: constant dilatation 1/2."""
    return HarmonicMap.from_text("z", "0.5*z")


@pytest.fixture
def square_map():
    return HarmonicMap.from_text("z^2", "0")


@pytest.fixture
def cube_map():
    return HarmonicMap.from_text("z^3", "0")


@pytest.fixture
def witness_map():
    """exp(i/(1-z)): unimodular on the real axis, blows up near z = 1."""
    return HarmonicMap.from_text("exp(i/(1-z))", "0")


@pytest.fixture
def constant_map():
    return HarmonicMap.from_text("1", "0")


@pytest.fixture
def classical():
    return PhiWeight.classical()


@pytest.fixture
def inv_pow_15():
    return PhiWeight.inv_pow(1.5)


@pytest.fixture
def inv_pow_2():
    return PhiWeight.inv_pow(2.0)


@pytest.fixture
def config(tmp_path, monkeypatch):
    """Config writing logs under tmp_path with the console mirror off."""
    monkeypatch.setenv('LOG_FILE', str(tmp_path / 'logs' / 'run.log'))
    monkeypatch.setenv('LOG_CONSOLE', 'false')
    return Config()
