"""cqi-sim: unitary observer-model measurement chains, a discretized
free-particle propagator formalism, and the competing probability rules
built on top of them."""

__version__ = "0.1.0"

from . import chain, contspace, epr, hilbert, postulates, zeno  # noqa: F401
from .errors import ConfigError, InvariantViolation, NumericalValidationError  # noqa: F401
