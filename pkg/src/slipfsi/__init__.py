"""slipfsi: 2D moving-boundary FSI with Navier slip coupling.

Structure half-step, harmonic domain-map update, and a monolithic fluid
half-step with Robin structure inertia, advanced by Lie splitting; every
discrete energy identity the scheme satisfies is re-checked at runtime.
"""

from .backend import backend_name
from .config import emit_config, parse_config
from .driver import SimConfig, run

__version__ = "0.1.0"

__all__ = ["SimConfig", "backend_name", "emit_config", "parse_config", "run", "__version__"]
