"""Tilting-rotor aerial vehicle with a shifting-mass plate: model, control,
contact simulation and static force analysis."""

from .actuation import (
    ActuatorCommand,
    InfeasibleAllocation,
    Wrench,
    WrenchSetpoint5,
    actuation_wrench,
    allocate,
)
from .analysis import (
    PlanarEquilibriumCase,
    TrimInfeasible,
    equilibrium_forces,
    hf_factor,
    sweep_rl,
    trim_solve,
)
from .contact import WallModel, contact_wrench
from .control import CascadeController, ControlGains, Setpoint, WrenchObserver
from .dynamics import BodyState, IntegrationDiverged, integrate_rk4
from .scenario import ScenarioFailed, load_scenario, run_scenario
from .vehicle import ConfigError, LimitViolation, MassState, VehicleParams, load_vehicle

__version__ = "0.1.0"
