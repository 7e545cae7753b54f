"""Deterministic, parallel generation of randomly initialized network outputs.

Random stream layout
--------------------
Weights come from Philox4x32-10 (Salmon et al., Random123, 2011), a
counter-based generator. The key is the 64-bit master seed split into two
32-bit words (low word first). Weight pair ``b`` of layer ``L`` (0 = hidden
weights ``u``, 1 = output weights ``v``) of network ``k`` uses the counter
``(k & 0xffffffff, k >> 32, b, L)``. The four output words give two 53-bit
uniforms ``U0``, ``U1`` and therefore weights ``2b`` and ``2b + 1``:

* uniform(limit):  ``(2 U - 1) * limit``
* normal(std):     Box-Muller, ``sqrt(-2 log(1 - U0)) * (cos, sin)(2 pi U1) * std``

Every network is thus an independent substream addressed by its index, so
results never depend on how the index range is split across workers.
This layout is version 1 and must not change.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _fallback
from .config import ActivationKind, EnsembleSpec, NetworkConfig, ResolvedInit, ValidationError, validate_spec
from .stats import BinnedEcdf, MomentAccumulator

try:
    from . import _kernels
except ImportError:  # pragma: no cover - depends on the build
    _kernels = None

__all__ = [
    "STREAM_LAYOUT_VERSION",
    "DEFAULT_CHUNK_SIZE",
    "available_backends",
    "default_backend",
    "SubstreamSeed",
    "ChunkPlan",
    "EnsembleSummary",
    "forward",
    "draw_weights",
    "simulate_outputs",
    "generate_outputs",
    "sample_network_output",
    "default_grid",
    "run_ensemble",
]

STREAM_LAYOUT_VERSION = 1
DEFAULT_CHUNK_SIZE = 65536
DEFAULT_BINS = 4096
GRID_HALF_WIDTH_SIGMAS = 8.0

_BACKENDS = {"python": _fallback}
if _kernels is not None:
    _BACKENDS["compiled"] = _kernels

_ACT_CODE = {ActivationKind.RELU: 0, ActivationKind.IDENTITY: 1, ActivationKind.TANH: 2}
_FAMILY_CODE = {"uniform": 0, "normal": 1}


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def default_backend() -> str:
    return "compiled" if "compiled" in _BACKENDS else "python"


def _kernel(backend: str | None):
    name = backend or default_backend()
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}") from None


@dataclass(frozen=True)
class SubstreamSeed:
    master_seed: int
    stream_index: int

    @property
    def key(self) -> tuple[int, int]:
        return self.master_seed & 0xFFFFFFFF, (self.master_seed >> 32) & 0xFFFFFFFF

    def counter(self, block: int, layer: int) -> tuple[int, int, int, int]:
        k = self.stream_index
        return k & 0xFFFFFFFF, (k >> 32) & 0xFFFFFFFF, block, layer


@dataclass(frozen=True)
class ChunkPlan:
    n_samples: int
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self):
        if self.n_samples < 1 or self.chunk_size < 1:
            raise ValueError("n_samples and chunk_size must be positive")

    @property
    def n_chunks(self) -> int:
        return -(-self.n_samples // self.chunk_size)

    def chunks(self) -> list[tuple[int, int]]:
        """(start, count) of each chunk, in merge order."""
        return [(s, min(self.chunk_size, self.n_samples - s))
                for s in range(0, self.n_samples, self.chunk_size)]


def forward(config: NetworkConfig, u: Sequence[float], v: Sequence[float], x: float) -> float:
    """``sum_i v_i f(u_i x)``, summed in index order."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != (config.width,) or v.shape != (config.width,):
        raise ValueError(f"expected weight vectors of length {config.width}, got {u.shape} and {v.shape}")
    f = config.activation
    acc = 0.0
    for ui, vi in zip(u.tolist(), v.tolist()):
        acc = acc + vi * f(ui * x)
    return acc


def draw_weights(spec: EnsembleSpec, stream_index: int) -> tuple[np.ndarray, np.ndarray]:
    """The hidden and output weights of network ``stream_index``."""
    net = spec.network
    hid, out = net.resolved_hidden(), net.resolved_output()
    nblocks = (net.width + 1) // 2
    lo = np.array([stream_index & 0xFFFFFFFF], dtype=np.uint64)
    hi = np.array([stream_index >> 32], dtype=np.uint64)
    k0, k1 = spec.seed & 0xFFFFFFFF, spec.seed >> 32
    u = _fallback._weights(lo, hi, nblocks, 0, k0, k1, _FAMILY_CODE[hid.family], hid.scale)
    v = _fallback._weights(lo, hi, nblocks, 1, k0, k1, _FAMILY_CODE[out.family], out.scale)
    return u[0, :net.width], v[0, :net.width]


def simulate_outputs(seed: int, start: int, count: int, width: int, activation: ActivationKind,
                     init_hidden: ResolvedInit, init_output: ResolvedInit, x: float,
                     backend: str | None = None) -> np.ndarray:
    """Outputs of networks ``start .. start + count - 1`` with already resolved inits."""
    out = np.empty(count, dtype=np.float64)
    _kernel(backend).simulate(
        seed, start, out, width, _ACT_CODE[ActivationKind(activation)],
        _FAMILY_CODE[init_hidden.family], init_hidden.scale,
        _FAMILY_CODE[init_output.family], init_output.scale, float(x),
    )
    return out


def generate_outputs(spec: EnsembleSpec, start: int = 0, count: int | None = None,
                     backend: str | None = None) -> np.ndarray:
    net = spec.network
    if count is None:
        count = spec.n_samples - start
    return simulate_outputs(spec.seed, start, count, net.width, net.activation,
                            net.resolved_hidden(), net.resolved_output(), spec.x, backend)


def sample_network_output(spec: EnsembleSpec, stream_index: int, backend: str | None = None) -> float:
    return float(generate_outputs(spec, stream_index, 1, backend)[0])


def default_grid(spec: EnsembleSpec, n_bins: int = DEFAULT_BINS) -> BinnedEcdf:
    """Empty histogram spanning +-8 predicted standard deviations."""
    from .oracle import predicted_variance

    var = predicted_variance(spec.network, spec.x)
    half = GRID_HALF_WIDTH_SIGMAS * math.sqrt(var) if var > 0 else 1.0
    return BinnedEcdf(-half, half, n_bins)


@dataclass
class EnsembleSummary:
    moments: MomentAccumulator
    ecdf: BinnedEcdf

    @property
    def count(self) -> int:
        return self.moments.count

    def to_json(self) -> dict:
        acc = self.moments
        if acc.count >= 2:
            m = acc.finalize()
            var, skew, kurt = m.variance, m.skewness, m.excess_kurtosis
        else:
            var = skew = kurt = None
        return {
            "count": acc.count,
            "mean": acc.mean,
            "variance": var,
            "skewness": skew,
            "excess_kurtosis": kurt,
            "ecdf": self.ecdf.to_json(),
        }


def map_chunks(fn: Callable[[int, int], object], plan: ChunkPlan, workers: int = 1) -> list:
    """Apply ``fn(start, count)`` to every chunk; results come back in chunk order."""
    chunks = plan.chunks()
    if workers <= 1 or len(chunks) == 1:
        return [fn(s, c) for s, c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sc: fn(*sc), chunks))


def run_ensemble(spec: EnsembleSpec, workers: int = 1, grid: BinnedEcdf | None = None,
                 chunk_size: int = DEFAULT_CHUNK_SIZE, backend: str | None = None) -> EnsembleSummary:
    """Feed outputs of networks ``0 .. n_samples - 1`` into moment and ECDF sinks.

    Chunk boundaries depend only on ``chunk_size``; chunk results are merged
    in chunk order, so ``workers`` never changes the result.
    """
    problems = validate_spec(spec)
    if problems:
        raise ValidationError("; ".join(problems))
    net = spec.network
    hid, out = net.resolved_hidden(), net.resolved_output()
    kern = _kernel(backend)
    template = grid if grid is not None else default_grid(spec)
    lo, inv_width, n_bins = template.lo, template.inv_width, template.n_bins

    def one_chunk(start, count):
        y = simulate_outputs(spec.seed, start, count, net.width, net.activation, hid, out, spec.x, backend)
        counts = np.zeros(n_bins, dtype=np.int64)
        mean, m2, m3, m4, under, over = kern.chunk_summary(y, lo, inv_width, counts)
        return MomentAccumulator(count, mean, m2, m3, m4), counts, under, over

    acc = MomentAccumulator()
    ecdf = BinnedEcdf(template.lo, template.hi, n_bins, template.counts.copy(),
                      template.underflow, template.overflow)
    for m, counts, under, over in map_chunks(one_chunk, ChunkPlan(spec.n_samples, chunk_size), workers):
        acc = acc.merge(m)
        ecdf = ecdf.merge(BinnedEcdf(ecdf.lo, ecdf.hi, n_bins, counts, under, over))
    return EnsembleSummary(acc, ecdf)
