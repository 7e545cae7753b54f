"""Exact moments of a single hidden unit's contribution ``v f(u x)``.

These are the ground truth for every Monte-Carlo result: the predicted
output variance ``N m2`` and the predicted standardized CDF-difference
amplitude ``-gamma2 / (24 N)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .config import ActivationKind, NetworkConfig, ResolvedInit
from .sampler import ChunkPlan, DEFAULT_CHUNK_SIZE, map_chunks, simulate_outputs

__all__ = [
    "DegenerateError",
    "QuadratureError",
    "SingleTermMoments",
    "activation_moment",
    "single_term_moments",
    "predicted_variance",
    "predicted_alpha",
    "predict",
    "mc_moment_oracle",
]

QUAD_RTOL = 1e-10


class DegenerateError(ValueError):
    """The predicted output variance is zero."""


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SingleTermMoments:
    m2: float
    m4: float
    method: str
    m2_stderr: float | None = None
    m4_stderr: float | None = None

    @property
    def gamma2(self) -> float:
        """Excess kurtosis ``m4 / m2**2 - 3``; NaN when ``m2 == 0``."""
        if self.m2 == 0.0:
            return math.nan
        return self.m4 / (self.m2 * self.m2) - 3.0

    @property
    def degenerate(self) -> bool:
        return self.m2 == 0.0


def _double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2))


def activation_moment(activation: ActivationKind, init: ResolvedInit, x: float, k: int) -> tuple[float, str]:
    """E[f(u x)**k] for even ``k`` with ``u`` drawn from ``init``."""
    activation = ActivationKind(activation)
    ax = abs(x)
    if activation is ActivationKind.IDENTITY:
        return init.raw_moment(k) * ax**k, "closed_form"
    if activation is ActivationKind.RELU:
        # symmetric u: relu(u x)**k is nonzero on half the mass
        return 0.5 * init.raw_moment(k) * ax**k, "closed_form"
    if ax == 0.0:
        return 0.0, "closed_form"
    return _tanh_moment(init, ax, k), "quadrature"


def _tanh_moment(init: ResolvedInit, x: float, k: int) -> float:
    a = init.scale
    if init.family == "uniform":
        def f(u):
            return math.tanh(u * x) ** k / a
        lo, hi = 0.0, a
    else:
        norm = 2.0 / (math.sqrt(2.0 * math.pi) * a)

        def f(u):
            return math.tanh(u * x) ** k * norm * math.exp(-0.5 * (u / a) ** 2)
        lo, hi = 0.0, math.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=QUAD_RTOL, limit=200, full_output=1)[:3]
    if err > QUAD_RTOL * abs(val) * 10 and err > 1e-300:
        raise QuadratureError(
            f"tanh moment k={k} did not converge: value={val!r}, error estimate={err!r}, "
            f"evaluations={info.get('neval')}, init={init}, x={x}"
        )
    return val


def single_term_moments(activation: ActivationKind, init_hidden: ResolvedInit,
                        init_output: ResolvedInit, x: float) -> SingleTermMoments:
    """Raw moments m2 = E[(v h)^2] and m4 = E[(v h)^4]; u and v are independent."""
    h2, method = activation_moment(activation, init_hidden, x, 2)
    h4, _ = activation_moment(activation, init_hidden, x, 4)
    return SingleTermMoments(init_output.raw_moment(2) * h2, init_output.raw_moment(4) * h4, method)


def _network_moments(config: NetworkConfig, x: float) -> SingleTermMoments:
    return single_term_moments(config.activation, config.resolved_hidden(), config.resolved_output(), x)


def predicted_variance(config: NetworkConfig, x: float) -> float:
    """``N m2``; zero flags a degenerate configuration (e.g. x = 0)."""
    return config.width * _network_moments(config, x).m2


def predicted_alpha(config: NetworkConfig, x: float) -> float:
    m = _network_moments(config, x)
    if m.degenerate:
        raise DegenerateError("predicted output variance is zero")
    return -m.gamma2 / (24.0 * config.width)


def predict(config: NetworkConfig, x: float) -> dict:
    m = _network_moments(config, x)
    if m.degenerate:
        raise DegenerateError("predicted output variance is zero")
    return {
        "m2": m.m2,
        "m4": m.m4,
        "gamma2": m.gamma2,
        "sigma2_pred": config.width * m.m2,
        "alpha_pred": -m.gamma2 / (24.0 * config.width),
        "method": m.method,
    }


def mc_moment_oracle(activation: ActivationKind, init_hidden: ResolvedInit, init_output: ResolvedInit,
                     x: float, n_draws: int, seed: int, workers: int = 1,
                     backend: str | None = None) -> SingleTermMoments:
    """Brute-force m2, m4 by direct sampling of ``v f(u x)``, with standard errors."""
    if n_draws < 2:
        raise ValueError("n_draws must be at least 2")

    def chunk(start, count):
        y = simulate_outputs(seed, start, count, 1, activation, init_hidden, init_output, x, backend)
        y2 = y * y
        y4 = y2 * y2
        return float(y2.sum()), float(y4.sum()), float((y4 * y4).sum())

    s2 = s4 = s8 = 0.0
    for a, b, c in map_chunks(chunk, ChunkPlan(n_draws, DEFAULT_CHUNK_SIZE), workers):
        s2 += a
        s4 += b
        s8 += c
    n = float(n_draws)
    m2, m4, m8 = s2 / n, s4 / n, s8 / n
    se2 = math.sqrt(max(m4 - m2 * m2, 0.0) / n)
    se4 = math.sqrt(max(m8 - m4 * m4, 0.0) / n)
    return SingleTermMoments(m2, m4, "monte_carlo", se2, se4)
