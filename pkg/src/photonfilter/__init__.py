"""Stochastic filtering of a quantum system driven by a single-photon pulse.

The monitored output passes a beam splitter; one port is watched by a
homodyne detector, the other by a second homodyne detector or a photon
counter. The conditional state is carried by a small hierarchy of coupled
matrix equations integrated with Euler-Maruyama; the noise-averaged
dynamics come from a deterministic RK4 solve of the same generator.
"""

from .config import RunConfig
from .ensemble import EnsembleSummary, excitation_probability, run_ensemble
from .errors import (ConfigError, DimensionMismatchError,
                     IllConditionedJumpError, InvariantViolationError)
from .filters import (SCHEME_HDHD, SCHEME_HDPC, SCHEMES, FilterContext,
                      HierarchyState, drift, hdhd_increment, hdpc_increment,
                      heisenberg_increment_oracle, heisenberg_increments,
                      hygiene, jump_map, k1_k2_gains, k_gain, nu_intensity)
from .integrate import (MasterCurve, NoiseStream, TimeGrid, TrajectoryRecord,
                        default_observables, ground_initial_state, run_batch,
                        simulate_trajectory, solve_master)
from .operators import (basis_state, commutator, dagger, dissipator,
                        dissipator_star, lindbladian, liouvillian, projector,
                        sigma_minus, sigma_plus)
from .pulses import VacuumPulse, WavePacket
from .slh import (BeamSplitterParams, SlhModel, beam_splitter, concat, lift,
                  make_model, series, vacuum_model, whole_system)

__version__ = "0.1.0"

__all__ = [
    "BeamSplitterParams", "ConfigError", "DimensionMismatchError",
    "EnsembleSummary", "FilterContext", "HierarchyState",
    "IllConditionedJumpError", "InvariantViolationError", "MasterCurve",
    "NoiseStream", "RunConfig", "SCHEMES", "SCHEME_HDHD", "SCHEME_HDPC",
    "SlhModel", "TimeGrid", "TrajectoryRecord", "VacuumPulse", "WavePacket",
    "basis_state", "beam_splitter", "commutator", "concat", "dagger",
    "default_observables", "dissipator", "dissipator_star", "drift",
    "excitation_probability", "ground_initial_state", "hdhd_increment",
    "hdpc_increment", "heisenberg_increment_oracle", "heisenberg_increments",
    "hygiene", "jump_map", "k1_k2_gains", "k_gain", "lift", "lindbladian",
    "liouvillian", "make_model", "nu_intensity", "projector", "run_batch",
    "run_ensemble", "series", "sigma_minus", "sigma_plus",
    "simulate_trajectory", "solve_master", "vacuum_model", "whole_system",
]
