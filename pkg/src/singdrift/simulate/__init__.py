"""Path simulation for the transformed equation, mapped back through H."""

from .engines import (BACKEND, explosion_probe, kernels, simulate_timechange, simulate_walk,
                      terminal_values)
from .scenario import PathBatch, PathSample, Scenario, ScenarioError
from .tables import build_timechange_table, build_walk_table, skew_prob_from_atom

__all__ = ["BACKEND", "PathBatch", "PathSample", "Scenario", "ScenarioError",
           "build_timechange_table", "build_walk_table", "explosion_probe", "kernels",
           "simulate_timechange", "simulate_walk", "skew_prob_from_atom", "terminal_values"]
