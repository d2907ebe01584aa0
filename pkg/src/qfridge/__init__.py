"""Finite-time dynamics of three-qubit quantum absorption refrigerators."""

from .dynamics import (
    SteadyState,
    Trajectory,
    energy_balance_residual,
    find_first_minimum,
    propagate,
    steady_state,
)
from .errors import FridgeError
from .liouvillians import Liouvillian, build_liouvillian, strong_coupling_catalog
from .model import (
    BathModel,
    BathSpec,
    FridgeParams,
    coherence_bound,
    effective_temperature,
    thermal_product_state,
)
from .noise import PhaseDistribution, Scenario, analytic_shift, ensemble_evolve
from .protocols import ProtocolResult, run_single_shot, sweep_tradeoff

__all__ = [
    "BathModel",
    "BathSpec",
    "FridgeError",
    "FridgeParams",
    "Liouvillian",
    "PhaseDistribution",
    "ProtocolResult",
    "Scenario",
    "SteadyState",
    "Trajectory",
    "analytic_shift",
    "build_liouvillian",
    "coherence_bound",
    "effective_temperature",
    "energy_balance_residual",
    "ensemble_evolve",
    "find_first_minimum",
    "propagate",
    "run_single_shot",
    "steady_state",
    "strong_coupling_catalog",
    "sweep_tradeoff",
    "thermal_product_state",
]
