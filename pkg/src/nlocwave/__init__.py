"""Rotating waves in oscillatory media with nonlocal coupling."""

__version__ = "0.1.0"

from . import errors
from .kernel import (
    KernelSymbol,
    decompose,
    eval_symbol,
    rational_symbol,
    rescale,
    tabulated_symbol,
    validate_hypotheses,
)
