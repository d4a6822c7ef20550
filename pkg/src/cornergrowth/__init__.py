"""Simulation tools for exponential last-passage percolation on the planar lattice."""

from .analysis import (
    McSummary,
    RwParams,
    TailFit,
    exit_exponent_experiment,
    no_axis_divergence,
    rw_first_passage_exact,
    rw_never_negative_limit,
    rw_stay_bound_check,
    shape_function,
    variance_formula_check,
)
from .events import (
    boundary_arcs,
    coarse_block,
    crossing_walk,
    cylinder_intersect,
    detect_W,
    geodesic_deviation,
    origin_on_geodesic,
    sandwich_event_check,
)
from .lpp import UpRightPath, brute_force_lpp, geodesic, lpp, reversed_lpp
from .queueing import BiSequence, DriftViolation, WindowTooShort, depart
from .stationary import StationaryBoundary, exit_point, reversed_stationary, stationary_lpp
from .weights import ArrayField, Seed, WeightField, reflect, weight_at

__version__ = "0.1.0"
