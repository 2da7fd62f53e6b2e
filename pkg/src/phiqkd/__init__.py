"""Tilted-POVM state discrimination and the B92 variant built on it."""

from .gsd import (
    OutcomeProbs,
    SignalPair,
    TiltedPovm,
    build_povm,
    find_ctp,
    find_erp,
    helstrom_probs,
    make_signal_pair,
    metrics,
    probs_closed,
    probs_operator,
)
from .keyrate import FiniteKeyParams, b92_secure_rate, secure_rate
from .optimizer import Mode, optimize_phi

__version__ = "0.1.0"
