"""Failure-probability bounds and exact values for random block codes over
the Gilbert-Elliott channel."""

from .bounds import BoundResult, CodeParams, gallager_bound, rare_bound
from .exact import DecoderSpec, ExactResult, bsc_exact, ge_exact
from .kernels import backend
from .markov import ChannelParams, occupancy_pmf, stationary

__all__ = [
    "BoundResult",
    "ChannelParams",
    "CodeParams",
    "DecoderSpec",
    "ExactResult",
    "backend",
    "bsc_exact",
    "gallager_bound",
    "ge_exact",
    "occupancy_pmf",
    "rare_bound",
    "stationary",
]
