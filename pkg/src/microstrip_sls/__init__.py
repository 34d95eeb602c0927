"""Inset-fed microstrip patch synthesis, two-slot characterization and
stochastic-local-search topology planning."""

__version__ = "0.1.0"

from .design import (
    FR4,
    DesignMode,
    DesignRequest,
    PatchGeometry,
    SubstrateSpec,
    analyze_microstrip,
    compute_delta_l,
    compute_eps_eff,
    compute_resonant_length,
    compute_width,
    design_patch,
    synthesize_feed_width,
)
from .em_model import (
    LinkBudget,
    RadiationPattern,
    SweepResult,
    directivity,
    far_field,
    fspl,
    input_impedance,
    link_budget,
    reflection_coefficient,
    slot_admittance,
    sweep,
    vswr,
)
from .planner import (
    Deployment,
    Objective,
    SearchConfig,
    Site,
    TopologyPlan,
    assign_devices,
    brute_force_optimal,
    distance_matrix,
    nearest_neighbor_init,
    stochastic_search,
    tour_length,
    two_opt_descent,
)
