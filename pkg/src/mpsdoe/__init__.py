"""Sequential design of experiments by myopic posterior sampling.

Core pieces: domain types (`core`), posterior inference (`inference`),
the penalty library (`penalties`, `estimators`), the one-step look-ahead
(`lookahead`), decision policies (`policies`), regret and information-gain
analytics (`analytics`), structural-condition verifiers (`conditions`),
the environment catalog (`catalog`) and the campaign harness (`harness`).
"""
from .core import (
    Action,
    DataSequence,
    DiscreteOutcome,
    RealOutcome,
    TrueInstance,
    concat,
    is_prefix,
    prefix,
)
from .lookahead import LookaheadConfig

__all__ = [
    "Action",
    "DataSequence",
    "DiscreteOutcome",
    "RealOutcome",
    "TrueInstance",
    "concat",
    "prefix",
    "is_prefix",
    "LookaheadConfig",
]

__version__ = "0.1.0"
