"""Command-line front end.

Subcommands: ``design``, ``sweep``, ``pattern``, ``plan`` and ``report``.

Exit codes: 0 success, 1 validation/parse/design error, 2 model-range error,
3 I/O error, 4 ``plan --verify`` found a plan longer than the exhaustive
optimum.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import math
import sys
from pathlib import Path
from typing import Callable, TextIO

import numpy as np
import yaml

from . import __version__
from .design import DesignMode, design_patch
from .em_model import directivity, far_field, sweep
from .errors import MicrostripSLSError, ValidationError
from .planner import BRUTE_FORCE_MAX_N, brute_force_optimal, distance_matrix
from .report import build_report, coverage, plan_topology
from .scenario import Scenario, load_scenario

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_MODEL_RANGE = 2
EXIT_IO = 3
EXIT_VERIFY_FAILED = 4

INTENSITY_FLOOR_DB = -200.0


def _g6(x: float) -> str:
    return f"{x:.6g}"


def _write(path: str | None, text: str, stdout: TextIO) -> None:
    if path is None:
        stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


class _OutputError(MicrostripSLSError):
    exit_code = EXIT_IO


def run_design(scenario: Scenario, out: str | None = None, stdout: TextIO = sys.stdout) -> int:
    geometry = design_patch(scenario.design)
    lines = ["parameter,mm"]
    lines += [f"{name},{value:.3f}" for name, value in geometry.table().items()]
    text = "\n".join(lines) + "\n"
    stdout.write(text)
    if out is not None:
        _write(out, text, stdout)
    return EXIT_OK


def sweep_csv(scenario: Scenario) -> tuple[str, str]:
    """CSV body and a one-line summary for the scenario's band sweep."""
    geometry = design_patch(scenario.design)
    band = scenario.band
    res = sweep(geometry, band.f_start, band.f_stop, band.n_points, z0=scenario.design.z_feed)
    buf = io.StringIO()
    buf.write("freq_ghz,re_zin_ohm,im_zin_ohm,s11_db,vswr\n")
    for f, z, s, v in zip(res.frequencies, res.z_in, res.s11_db, res.vswr):
        buf.write(f"{_g6(f)},{_g6(z.real)},{_g6(z.imag)},{_g6(s)},{_g6(v)}\n")
    f_min, s_min, v_min = res.minimum()
    summary = f"min_s11_db={s_min:.3f} at {f_min:.4f} GHz, vswr={v_min:.3f}"
    n_extra = int(res.extrapolated.sum())
    if n_extra:
        summary += (
            f"\nnote: {n_extra} samples above {1.5 * res.f_resonance:.3f} GHz are "
            "surrogate-model extrapolation"
        )
    return buf.getvalue(), summary


def run_sweep(scenario: Scenario, out: str | None = None, stdout: TextIO = sys.stdout) -> int:
    text, summary = sweep_csv(scenario)
    _write(out, text, stdout)
    if out is not None:
        stdout.write(summary + "\n")
    return EXIT_OK


def pattern_csv(scenario: Scenario, f: float) -> tuple[str, float]:
    geometry = design_patch(scenario.design)
    pat = far_field(geometry, f, scenario.pattern.n_theta, scenario.pattern.n_phi)
    d = directivity(pat)
    with np.errstate(divide="ignore"):
        db = np.maximum(10 * np.log10(pat.intensity), INTENSITY_FLOOR_DB)
    buf = io.StringIO()
    buf.write("theta_deg,phi_deg,intensity_db\n")
    for i, theta in enumerate(pat.theta_grid):
        for j, phi in enumerate(pat.phi_grid):
            buf.write(f"{math.degrees(theta):.3f},{math.degrees(phi):.3f},{db[i, j] + 0.0:.3f}\n")
    buf.write(f"# directivity_dbi={d:.3f}\n")
    return buf.getvalue(), d


def run_pattern(
    scenario: Scenario, f: float | None = None, out: str | None = None, stdout: TextIO = sys.stdout
) -> int:
    freq = scenario.design.f_design if f is None else f
    text, d = pattern_csv(scenario, freq)
    _write(out, text, stdout)
    if out is not None:
        stdout.write(f"directivity_dbi={d:.3f} at {freq:g} GHz\n")
    return EXIT_OK


def plan_csv(scenario: Scenario, verify: bool = False) -> tuple[str, bool]:
    """Plan CSV text and whether verification (if requested) passed."""
    plan = plan_topology(scenario)
    dep = scenario.deployment
    towers = dep.towers
    matrix = distance_matrix(dep.tower_points())
    buf = io.StringIO()
    buf.write("step,tower_id,x_m,y_m,edge_m\n")
    prev = None
    for step, k in enumerate(plan.order):
        edge = 0.0 if prev is None else float(matrix[prev, k])
        t = towers[k]
        buf.write(f"{step},{t.id},{t.x:.3f},{t.y:.3f},{edge:.3f}\n")
        prev = k
    if plan.objective.value == "closed_tour" and len(plan.order) > 1:
        first = towers[plan.order[0]]
        edge = float(matrix[prev, plan.order[0]])
        buf.write(f"{len(plan.order)},{first.id},{first.x:.3f},{first.y:.3f},{edge:.3f}\n")
    buf.write(f"# total_length_m={plan.total_length:.3f}\n")
    buf.write(f"# objective={plan.objective.value}\n")
    buf.write(f"# restarts={plan.restarts_used}\n")
    buf.write(f"# evaluations={plan.evaluations}\n")
    buf.write(f"# locally_optimal={str(plan.locally_optimal).lower()}\n")
    cov = coverage(scenario, design_patch(scenario.design))
    if cov is not None:
        covered, uncovered = cov
        buf.write(f"# covered_devices={covered}\n")
        buf.write(f"# uncovered_devices={';'.join(uncovered)}\n")
    ok = True
    if verify:
        if len(towers) > BRUTE_FORCE_MAX_N:
            raise ValidationError(
                "deployment.towers", f"--verify supports at most {BRUTE_FORCE_MAX_N} towers"
            )
        oracle = brute_force_optimal(matrix, plan.objective)
        ok = plan.total_length <= oracle.total_length + 1e-9
        buf.write(f"# brute_force_optimum_m={oracle.total_length:.3f}\n")
        buf.write(f"# verified={str(ok).lower()}\n")
    return buf.getvalue(), ok


def run_plan(
    scenario: Scenario, out: str | None = None, verify: bool = False, stdout: TextIO = sys.stdout
) -> int:
    text, ok = plan_csv(scenario, verify)
    _write(out, text, stdout)
    if out is not None:
        stdout.writelines(line[2:] + "\n" for line in text.splitlines() if line.startswith("# "))
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def _report_dict(value):
    if dataclasses.is_dataclass(value):
        return {f.name: _report_dict(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, (list, tuple)):
        return [_report_dict(v) for v in value]
    if hasattr(value, "value") and isinstance(value.value, str):
        return value.value
    if isinstance(value, (float, np.floating)):
        return round(float(value), 6)
    return value


def run_report(scenario: Scenario, out: str | None = None, stdout: TextIO = sys.stdout) -> int:
    report = build_report(scenario)
    _write(out, yaml.safe_dump(_report_dict(report), sort_keys=False), stdout)
    return EXIT_OK


def _apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    if args.mode is not None:
        design = dataclasses.replace(scenario.design, mode=DesignMode(args.mode))
        scenario = dataclasses.replace(scenario, design=design)
    if args.seed is not None and scenario.search is not None:
        scenario = dataclasses.replace(scenario, search=dataclasses.replace(scenario.search, seed=args.seed))
    return scenario


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario YAML file")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--seed", type=int, help="override search.seed")
    common.add_argument("--mode", choices=[m.value for m in DesignMode], help="override design.mode")

    parser = argparse.ArgumentParser(prog="microstrip-sls", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("design", parents=[common], help="print the patch parameter table (mm)")
    sub.add_parser("sweep", parents=[common], help="impedance / S11 / VSWR sweep as CSV")
    p = sub.add_parser("pattern", parents=[common], help="far-field pattern as CSV")
    p.add_argument("--freq", type=float, help="frequency in GHz (default: design.f_design)")
    p = sub.add_parser("plan", parents=[common], help="tower topology and device coverage")
    p.add_argument("--verify", action="store_true", help="check against the exhaustive optimum")
    sub.add_parser("report", parents=[common], help="full run summary as YAML")
    return parser


def main(argv: list[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if args.seed is not None and args.seed < 0:
        stderr.write("error: --seed must be unsigned\n")
        return EXIT_INVALID

    commands: dict[str, Callable[[Scenario], int]] = {
        "design": lambda s: run_design(s, args.out, stdout),
        "sweep": lambda s: run_sweep(s, args.out, stdout),
        "pattern": lambda s: run_pattern(s, args.freq, args.out, stdout),
        "plan": lambda s: run_plan(s, args.out, args.verify, stdout),
        "report": lambda s: run_report(s, args.out, stdout),
    }
    try:
        scenario = _apply_overrides(load_scenario(Path(args.scenario)), args)
        return commands[args.command](scenario)
    except MicrostripSLSError as exc:
        stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
