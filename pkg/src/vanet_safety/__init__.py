"""Interference, packet delivery and rear-end collision risk in vehicular broadcast."""

__version__ = "0.1.0"

from .errors import (CsBelowValidity, DivergentMoment, OverlapAtStart, ParseError,
                     TooManyInterferers, UnreachableVehicle, ValidationError, WrongFading)
from .propagation import (FadingKind, FadingModel, PathLoss, db_to_linear, fractional_moment,
                          interference_radius, sample_fading)
from .mac import (CsConfig, LinkScenario, PsEstimate, SlotMode, asyncize, count_hidden_nodes,
                  cs_access_probability, cs_components, ps_carrier_sense, ps_enumeration_oracle, ps_nakagami_laplace,
                  ps_nakagami_mc, ps_rayleigh_exact, regularized_upper_gamma)
from .kinematics import (CollisionEvent, VehicleMotion, max_safe_brake_delay, pairwise_collision_time,
                         position_at, simulate_chain, transmission_budget)
from .safety import (ChainScenario, DelayMode, Scheme, SweepResult, SweepRow, TrialOutcome,
                     estimate_collision_probability, reception_delay, run_trial, sample_obstructions,
                     sample_reaction_time, sweep_channel_access)
from .config import parse_config
from .results import RunManifest, emit_results
