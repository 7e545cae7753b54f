"""Finite-width corrections to the Gaussian-process limit of one-hidden-layer networks.

Hot loops (weight generation, forward pass, per-chunk statistics) live in the
compiled ``_kernels`` extension when it was built, and in the numpy
``_fallback`` module otherwise; :func:`finitewidth.sampler.default_backend`
reports which one is active.
"""

__version__ = "0.1.0"

from .config import ActivationKind, EnsembleSpec, InitScheme, NetworkConfig  # noqa: E402
from .sampler import default_backend, run_ensemble  # noqa: E402

__all__ = ["ActivationKind", "EnsembleSpec", "InitScheme", "NetworkConfig", "default_backend", "run_ensemble"]
