import math

import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from finitewidth.config import (
    ActivationKind, EnsembleSpec, InitScheme, NetworkConfig, ResolvedInit, ValidationError,
    glorot_limit, resolve_init, validate_spec,
)


@pytest.mark.parametrize("fan_in, fan_out, expected", [
    (1, 128, math.sqrt(6 / 129)),
    (2, 2, math.sqrt(1.5)),
    (1, 1, math.sqrt(3)),
])
def test_glorot_limit(fan_in, fan_out, expected):
    assert glorot_limit(fan_in, fan_out) == pytest.approx(expected, rel=1e-15)


def test_glorot_limit_decimal_value():
    assert glorot_limit(1, 128) == pytest.approx(0.215666, abs=1e-6)
    assert glorot_limit(2, 2) == pytest.approx(1.224745, abs=1e-6)
    assert glorot_limit(1, 1) == pytest.approx(1.732051, abs=1e-6)


@given(st.integers(1, 10_000), st.integers(1, 10_000))
def test_glorot_symmetric_and_decreasing(a, b):
    assert glorot_limit(a, b) == glorot_limit(b, a)
    assert glorot_limit(a + 1, b) < glorot_limit(a, b)


def test_resolve_init():
    r = resolve_init(InitScheme.glorot_uniform(), 1, 128)
    assert r.family == "uniform" and r.scale == pytest.approx(0.215666, abs=1e-6)
    assert resolve_init(InitScheme.uniform(1.0), 3, 7) == ResolvedInit("uniform", 1.0)
    assert resolve_init(InitScheme.normal(0.3), 3, 7) == ResolvedInit("normal", 0.3)
    with pytest.raises(ValidationError):
        resolve_init(InitScheme.normal(0.0), 1, 1)
    with pytest.raises(ValidationError):
        resolve_init(InitScheme.uniform(-1.0), 1, 1)


@pytest.mark.parametrize("init", [ResolvedInit("uniform", 0.7), ResolvedInit("normal", 1.3)])
def test_resolved_distribution_moments_by_quadrature(init):
    if init.family == "uniform":
        pdf, lo, hi = (lambda w: 0.5 / init.scale), -init.scale, init.scale
        expected_var = init.scale**2 / 3
    else:
        pdf = lambda w: math.exp(-0.5 * (w / init.scale) ** 2) / (math.sqrt(2 * math.pi) * init.scale)
        lo, hi = -math.inf, math.inf
        expected_var = init.scale**2
    mean = integrate.quad(lambda w: w * pdf(w), lo, hi)[0]
    var = integrate.quad(lambda w: w * w * pdf(w), lo, hi)[0]
    m4 = integrate.quad(lambda w: w**4 * pdf(w), lo, hi)[0]
    assert abs(mean) < 1e-12
    assert var == pytest.approx(expected_var, rel=1e-9)
    assert init.variance == pytest.approx(expected_var, rel=1e-12)
    assert init.raw_moment(4) == pytest.approx(m4, rel=1e-9)


def test_activation_functions():
    assert ActivationKind.RELU(-2.0) == 0.0 and ActivationKind.RELU(2.5) == 2.5
    assert ActivationKind.IDENTITY(-2.0) == -2.0
    assert ActivationKind.TANH(0.5) == math.tanh(0.5)


def test_validate_spec():
    ok = EnsembleSpec(NetworkConfig(128), 1.0, 10**7, 0)
    assert validate_spec(ok) == []
    assert "width must be >= 1" in validate_spec(EnsembleSpec(NetworkConfig(0), 1.0, 10, 0))
    assert "probe input must be finite" in validate_spec(EnsembleSpec(NetworkConfig(4), math.nan, 10, 0))
    assert "n_samples must be >= 1" in validate_spec(EnsembleSpec(NetworkConfig(4), 1.0, 0, 0))
    bad = EnsembleSpec(NetworkConfig(4, init_hidden=InitScheme.uniform(0.0)), math.inf, 0, -1)
    assert len(validate_spec(bad)) == 4


def test_spec_json_roundtrip():
    spec = EnsembleSpec(NetworkConfig(16, "tanh", InitScheme.uniform(0.5), InitScheme.normal(2.0)), -0.5, 1234, 2**64 - 1)
    obj = spec.to_json()
    assert list(obj) == ["width", "activation", "init_hidden", "init_output", "x", "n_samples", "seed"]
    assert EnsembleSpec.from_json(obj) == spec


def test_spec_json_accepts_string_inits_and_rejects_unknown_fields():
    spec = EnsembleSpec.from_json({"width": 8, "init_hidden": "uniform:1", "init_output": "glorot_uniform"})
    assert spec.network.init_hidden == InitScheme.uniform(1.0)
    with pytest.raises(ValidationError):
        EnsembleSpec.from_json({"width": 8, "bias": 0.0})
    with pytest.raises(ValidationError):
        InitScheme.parse("laplace:1")
