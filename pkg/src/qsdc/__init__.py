"""Simulator and analysis toolkit for single-qubit deterministic secure direct communication."""

from .adversary import BasisPolicy, EveKind, EveStrategySpec, NO_EVE, SHIPPED_ATTACKS
from .analysis import (SecurityParams, enumerate_detection, estimate_survival, survival_n,
                       survival_one)
from .protocol import Mode, ProtocolConfig, run_round, run_session

__all__ = [
    "BasisPolicy", "EveKind", "EveStrategySpec", "NO_EVE", "SHIPPED_ATTACKS",
    "SecurityParams", "enumerate_detection", "estimate_survival", "survival_n", "survival_one",
    "Mode", "ProtocolConfig", "run_round", "run_session",
]
