"""Spectral theory of the quantized Bateman damped oscillator, computed and cross-checked."""
from .params import DEFAULT_PARAMS, SystemParams
from .funcalg import Atom, GphFunction, atom
from .spectral import ResonanceIndex

__all__ = ["SystemParams", "DEFAULT_PARAMS", "Atom", "GphFunction", "atom", "ResonanceIndex"]
__version__ = "0.1.0"
