"""End-to-end run summary built purely from library calls."""

from __future__ import annotations

from dataclasses import dataclass

from .design import PatchGeometry, design_patch
from .em_model import directivity, far_field, sweep
from .errors import ValidationError
from .planner import TopologyPlan, assign_devices, distance_matrix, stochastic_search
from .scenario import Scenario


@dataclass(frozen=True)
class RunReport:
    geometry: PatchGeometry
    sweep_summary: tuple[float, float, float]  # (f GHz, |S11| dB, VSWR) at the S11 minimum
    directivity_dbi: float
    plan: TopologyPlan | None = None
    coverage: tuple[int, tuple[str, ...]] | None = None  # (covered count, uncovered ids)


def tower_gain_dbi(geometry: PatchGeometry, f: float, scenario: Scenario) -> float:
    """Broadside directivity of the designed patch, used as scalar tower gain."""
    grid = scenario.pattern
    return directivity(far_field(geometry, f, grid.n_theta, grid.n_phi))


def plan_topology(scenario: Scenario) -> TopologyPlan:
    if scenario.deployment is None:
        raise ValidationError("deployment", "required for planning")
    if scenario.search is None:
        raise ValidationError("search", "required for planning")
    matrix = distance_matrix(scenario.deployment.tower_points())
    return stochastic_search(matrix, scenario.search)


def coverage(scenario: Scenario, geometry: PatchGeometry) -> tuple[int, tuple[str, ...]] | None:
    dep = scenario.deployment
    if dep is None or scenario.link is None or not dep.devices:
        return None
    gain = tower_gain_dbi(geometry, dep.frequency, scenario)
    assignments = assign_devices(dep, scenario.link, gain)
    uncovered = tuple(a.device_id for a in assignments if not a.covered)
    return len(assignments) - len(uncovered), uncovered


def build_report(scenario: Scenario) -> RunReport:
    geometry = design_patch(scenario.design)
    band = scenario.band
    result = sweep(geometry, band.f_start, band.f_stop, band.n_points, z0=scenario.design.z_feed)
    pattern = far_field(
        geometry, scenario.design.f_design, scenario.pattern.n_theta, scenario.pattern.n_phi
    )
    plan = None
    if scenario.deployment is not None and scenario.search is not None:
        plan = plan_topology(scenario)
    return RunReport(
        geometry=geometry,
        sweep_summary=result.minimum(),
        directivity_dbi=directivity(pattern),
        plan=plan,
        coverage=coverage(scenario, geometry),
    )
