"""Network, initialization and experiment configuration.

All types are frozen dataclasses; they are safe to share between threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

__all__ = [
    "ActivationKind",
    "InitScheme",
    "ResolvedInit",
    "NetworkConfig",
    "EnsembleSpec",
    "ValidationError",
    "glorot_limit",
    "resolve_init",
    "validate_spec",
]

MAX_SEED = 2**64 - 1


class ValidationError(ValueError):
    """Raised when a configuration value violates its invariants."""


class ActivationKind(str, enum.Enum):
    RELU = "relu"
    IDENTITY = "identity"
    TANH = "tanh"

    def __call__(self, s):
        if self is ActivationKind.RELU:
            return max(s, 0.0)
        if self is ActivationKind.IDENTITY:
            return s
        return math.tanh(s)


@dataclass(frozen=True)
class InitScheme:
    """Weight initialization scheme.

    ``kind`` is one of ``glorot_uniform`` (no parameter), ``uniform``
    (``scale`` is the half-width ``limit``) or ``normal`` (``scale`` is the
    standard deviation). Every scheme is zero-mean and symmetric.
    """

    kind: str
    scale: float | None = None

    KINDS = ("glorot_uniform", "uniform", "normal")

    @classmethod
    def glorot_uniform(cls) -> "InitScheme":
        return cls("glorot_uniform")

    @classmethod
    def uniform(cls, limit: float) -> "InitScheme":
        return cls("uniform", float(limit))

    @classmethod
    def normal(cls, std: float) -> "InitScheme":
        return cls("normal", float(std))

    def violations(self) -> list[str]:
        if self.kind not in self.KINDS:
            return [f"unknown init scheme {self.kind!r}"]
        if self.kind == "glorot_uniform":
            return [] if self.scale is None else ["glorot_uniform takes no parameter"]
        if self.scale is None or not math.isfinite(self.scale) or self.scale <= 0:
            name = "limit" if self.kind == "uniform" else "std"
            return [f"{self.kind} {name} must be a positive finite number"]
        return []

    def to_json(self) -> dict[str, Any]:
        if self.kind == "glorot_uniform":
            return {"kind": "glorot_uniform"}
        if self.kind == "uniform":
            return {"kind": "uniform", "limit": self.scale}
        return {"kind": "normal", "std": self.scale}

    @classmethod
    def from_json(cls, obj: Any) -> "InitScheme":
        """Accept ``{"kind": ..., "limit"/"std": ...}`` or a ``kind[:scale]`` string."""
        if isinstance(obj, str):
            return cls.parse(obj)
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValidationError(f"cannot parse init scheme from {obj!r}")
        kind = obj["kind"]
        if kind == "glorot_uniform":
            return cls(kind)
        key = "limit" if kind == "uniform" else "std"
        if key not in obj:
            raise ValidationError(f"{kind} init requires field {key!r}")
        return cls(kind, float(obj[key]))

    @classmethod
    def parse(cls, text: str) -> "InitScheme":
        """Parse ``glorot_uniform``, ``uniform:0.5`` or ``normal:0.1``."""
        kind, _, arg = text.partition(":")
        kind = kind.strip()
        if kind == "glorot_uniform" and not arg:
            return cls(kind)
        if kind in ("uniform", "normal") and arg:
            try:
                return cls(kind, float(arg))
            except ValueError:
                pass
        raise ValidationError(
            f"bad init scheme {text!r}; expected glorot_uniform, uniform:LIMIT or normal:STD"
        )


@dataclass(frozen=True)
class ResolvedInit:
    """A concrete weight distribution: ``uniform`` on [-scale, scale] or ``normal`` with std ``scale``."""

    family: str
    scale: float

    @property
    def variance(self) -> float:
        if self.family == "uniform":
            return self.scale**2 / 3.0
        return self.scale**2

    def raw_moment(self, k: int) -> float:
        """E[w**k] for even ``k`` (odd moments vanish)."""
        if k % 2:
            return 0.0
        if self.family == "uniform":
            return self.scale**k / (k + 1)
        # (k-1)!! std^k
        return math.prod(range(k - 1, 0, -2)) * self.scale**k


def glorot_limit(fan_in: int, fan_out: int) -> float:
    """Half-width of the Glorot uniform distribution."""
    return math.sqrt(6.0 / (fan_in + fan_out))


def resolve_init(scheme: InitScheme, fan_in: int, fan_out: int) -> ResolvedInit:
    problems = scheme.violations()
    if problems:
        raise ValidationError("; ".join(problems))
    if scheme.kind == "glorot_uniform":
        return ResolvedInit("uniform", glorot_limit(fan_in, fan_out))
    return ResolvedInit(scheme.kind, float(scheme.scale))


@dataclass(frozen=True)
class NetworkConfig:
    """Single-hidden-layer network ``y = sum_i v_i f(u_i x)`` with zero biases."""

    width: int
    activation: ActivationKind = ActivationKind.RELU
    init_hidden: InitScheme = field(default_factory=InitScheme.glorot_uniform)
    init_output: InitScheme = field(default_factory=InitScheme.glorot_uniform)

    def __post_init__(self):
        object.__setattr__(self, "activation", ActivationKind(self.activation))

    def resolved_hidden(self) -> ResolvedInit:
        return resolve_init(self.init_hidden, 1, self.width)

    def resolved_output(self) -> ResolvedInit:
        return resolve_init(self.init_output, self.width, 1)


@dataclass(frozen=True)
class EnsembleSpec:
    network: NetworkConfig
    x: float = 1.0
    n_samples: int = 1_000_000
    seed: int = 0

    JSON_FIELDS = ("width", "activation", "init_hidden", "init_output", "x", "n_samples", "seed")

    def to_json(self) -> dict[str, Any]:
        net = self.network
        return {
            "width": net.width,
            "activation": net.activation.value,
            "init_hidden": net.init_hidden.to_json(),
            "init_output": net.init_output.to_json(),
            "x": self.x,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "EnsembleSpec":
        unknown = set(obj) - set(cls.JSON_FIELDS)
        if unknown:
            raise ValidationError(f"unknown spec fields: {sorted(unknown)}")
        missing = [k for k in ("width",) if k not in obj]
        if missing:
            raise ValidationError(f"missing spec fields: {missing}")
        try:
            activation = ActivationKind(obj.get("activation", "relu"))
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        net = NetworkConfig(
            width=int(obj["width"]),
            activation=activation,
            init_hidden=InitScheme.from_json(obj.get("init_hidden", "glorot_uniform")),
            init_output=InitScheme.from_json(obj.get("init_output", "glorot_uniform")),
        )
        return cls(
            network=net,
            x=float(obj.get("x", 1.0)),
            n_samples=int(obj.get("n_samples", 1_000_000)),
            seed=int(obj.get("seed", 0)),
        )


def validate_spec(spec: EnsembleSpec) -> list[str]:
    """Return every invariant violation of ``spec``; an empty list means valid."""
    out = []
    net = spec.network
    if not isinstance(net.width, int) or net.width < 1:
        out.append("width must be >= 1")
    if not isinstance(spec.n_samples, int) or spec.n_samples < 1:
        out.append("n_samples must be >= 1")
    if not math.isfinite(spec.x):
        out.append("probe input must be finite")
    if not (0 <= spec.seed <= MAX_SEED):
        out.append("seed must be a 64-bit unsigned integer")
    out.extend(f"init_hidden: {p}" for p in net.init_hidden.violations())
    out.extend(f"init_output: {p}" for p in net.init_output.violations())
    return out
