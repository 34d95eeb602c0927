"""Scenario files: YAML in, validated dataclasses out, and back again.

Schema (``schema_version: 1``)::

    schema_version: 1
    design:                    # required
      f_design: 2.45           # GHz
      mode: paper              # paper | resonant
      z_feed: 50.0             # ohm
      substrate: {eps_r: 4.7, h: 1.6, t_copper: 0.035, loss_tangent: 0.0}  # mm
    band: {f_start: 2.4, f_stop: 24.0, n_points: 500}                      # GHz
    pattern: {n_theta: 46, n_phi: 72}
    deployment:                # optional; metres
      frequency: 2.45
      towers: [{id: T1, x: 0.0, y: 0.0}, ...]
      devices: [{id: D1, x: 5.0, y: 1.0}, ...]
    search:                    # optional
      objective: open_path     # open_path | closed_tour
      restarts: 20
      seed: 0
      annealing: {t_initial: 0.5, cooling: 0.9, steps_per_temp: 100, t_final: 0.001}
    link: {p_tx: 20.0, sensitivity: -90.0, g_rx: 0.0}   # dBm, dBm, dBi

Every section except ``design`` may be omitted and is then defaulted
(``deployment``, ``search`` and ``link`` default to absent).
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from .design import DesignMode, DesignRequest, SubstrateSpec
from .errors import MicrostripSLSError, ScenarioIOError, ScenarioParseError, ValidationError
from .planner import Annealing, Deployment, LinkParams, Objective, SearchConfig, Site

SCHEMA_VERSION = 1


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads YAML 1.2 floats such as ``1e9``."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


@dataclass(frozen=True)
class Band:
    f_start: float = 2.4
    f_stop: float = 24.0
    n_points: int = 500


@dataclass(frozen=True)
class PatternGrid:
    n_theta: int = 46
    n_phi: int = 72


@dataclass(frozen=True)
class Scenario:
    design: DesignRequest
    band: Band = Band()
    pattern: PatternGrid = PatternGrid()
    deployment: Deployment | None = None
    search: SearchConfig | None = None
    link: LinkParams | None = None


class _Reader:
    """Pulls typed fields out of a mapping, reporting errors by dotted path."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ValidationError(path, "expected a mapping")
        self.data = dict(data)
        self.path = path

    def _name(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def number(self, key: str, default: Any = ..., *, check=None, why: str = "") -> float:
        if key not in self.data:
            if default is ...:
                raise ValidationError(self._name(key), "required field missing")
            return default
        value = self.data.pop(key)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(self._name(key), f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value) or (check is not None and not check(value)):
            raise ValidationError(self._name(key), f"{why or 'invalid value'}, got {value}")
        return value

    def integer(self, key: str, default: Any = ..., *, minimum: int = 0) -> int:
        if key not in self.data:
            if default is ...:
                raise ValidationError(self._name(key), "required field missing")
            return default
        value = self.data.pop(key)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(self._name(key), f"expected an integer, got {value!r}")
        if value < minimum:
            raise ValidationError(self._name(key), f"must be >= {minimum}, got {value}")
        return value

    def choice(self, key: str, enum_cls, default):
        if key not in self.data:
            return default
        value = self.data.pop(key)
        try:
            return enum_cls(value)
        except ValueError:
            allowed = ", ".join(m.value for m in enum_cls)
            raise ValidationError(self._name(key), f"expected one of {allowed}, got {value!r}") from None

    def section(self, key: str) -> "_Reader | None":
        if key not in self.data or self.data[key] is None:
            self.data.pop(key, None)
            return None
        return _Reader(self.data.pop(key), self._name(key))

    def raw(self, key: str, default=None):
        return self.data.pop(key, default)

    def done(self) -> None:
        if self.data:
            extra = sorted(self.data)[0]
            raise ValidationError(self._name(str(extra)), "unknown field")


def _parse_substrate(r: _Reader | None) -> SubstrateSpec:
    if r is None:
        return SubstrateSpec(eps_r=4.7, h=1.6)
    sub = SubstrateSpec(
        eps_r=r.number("eps_r", 4.7, check=lambda v: v >= 1, why="must be >= 1"),
        h=r.number("h", 1.6, check=lambda v: v > 0, why="must be > 0"),
        t_copper=r.number("t_copper", 0.035, check=lambda v: v >= 0, why="must be >= 0"),
        loss_tangent=r.number("loss_tangent", 0.0, check=lambda v: v >= 0, why="must be >= 0"),
    )
    r.done()
    return sub


def _parse_design(r: _Reader) -> DesignRequest:
    f = r.number("f_design", check=lambda v: v > 0, why="must be > 0")
    z = r.number("z_feed", 50.0, check=lambda v: v > 0, why="must be > 0")
    mode = r.choice("mode", DesignMode, DesignMode.PAPER)
    substrate = _parse_substrate(r.section("substrate"))
    r.done()
    return DesignRequest(f_design=f, substrate=substrate, z_feed=z, mode=mode)


def _parse_band(r: _Reader | None) -> Band:
    if r is None:
        return Band()
    band = Band(
        f_start=r.number("f_start", 2.4, check=lambda v: v > 0, why="must be > 0"),
        f_stop=r.number("f_stop", 24.0, check=lambda v: v > 0, why="must be > 0"),
        n_points=r.integer("n_points", 500, minimum=2),
    )
    r.done()
    if not band.f_start < band.f_stop:
        raise ValidationError("band.f_stop", "must exceed band.f_start")
    return band


def _parse_pattern(r: _Reader | None) -> PatternGrid:
    if r is None:
        return PatternGrid()
    grid = PatternGrid(r.integer("n_theta", 46, minimum=8), r.integer("n_phi", 72, minimum=8))
    r.done()
    return grid


def _parse_sites(items: Any, path: str) -> list[Site]:
    if items is None:
        return []
    if not isinstance(items, list):
        raise ValidationError(path, "expected a list")
    sites = []
    for k, item in enumerate(items):
        r = _Reader(item, f"{path}[{k}]")
        ident = r.raw("id")
        if ident is None or isinstance(ident, (dict, list)):
            raise ValidationError(f"{path}[{k}].id", "required scalar id")
        sites.append(Site(str(ident), r.number("x"), r.number("y")))
        r.done()
    return sites


def _parse_deployment(r: _Reader | None) -> Deployment | None:
    if r is None:
        return None
    towers = _parse_sites(r.raw("towers"), "deployment.towers")
    devices = _parse_sites(r.raw("devices"), "deployment.devices")
    freq = r.number("frequency", 2.45, check=lambda v: v > 0, why="must be > 0")
    r.done()
    if not towers:
        raise ValidationError("deployment.towers", "at least one tower required")
    ids = [s.id for s in towers + devices]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ValidationError("deployment", f"duplicate site id {dupes[0]!r}")
    return Deployment(tuple(towers), tuple(devices), freq)


def _parse_search(r: _Reader | None) -> SearchConfig | None:
    if r is None:
        return None
    objective = r.choice("objective", Objective, Objective.OPEN_PATH)
    restarts = r.integer("restarts", 20, minimum=1)
    seed = r.integer("seed", 0, minimum=0)
    a = r.section("annealing")
    annealing = None
    if a is not None:
        t0 = a.number("t_initial", 0.5, check=lambda v: v > 0, why="must be > 0")
        annealing = Annealing(
            t_initial=t0,
            cooling=a.number("cooling", 0.9, check=lambda v: 0 < v < 1, why="must lie in (0, 1)"),
            steps_per_temp=a.integer("steps_per_temp", 100, minimum=1),
            t_final=a.number("t_final", 1e-3, check=lambda v: 0 < v < t0, why="must lie in (0, t_initial)"),
        )
        a.done()
    r.done()
    return SearchConfig(objective, restarts, seed, annealing)


def _parse_link(r: _Reader | None) -> LinkParams | None:
    if r is None:
        return None
    link = LinkParams(
        p_tx=r.number("p_tx", 20.0),
        sensitivity=r.number("sensitivity", -90.0),
        g_rx=r.number("g_rx", 0.0),
    )
    r.done()
    return link


def scenario_from_dict(data: Any) -> Scenario:
    root = _Reader(data, "")
    version = root.raw("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError("schema_version", f"unsupported version {version!r}")
    design = root.section("design")
    if design is None:
        raise ValidationError("design", "required section missing")
    try:
        scenario = Scenario(
            design=_parse_design(design),
            band=_parse_band(root.section("band")),
            pattern=_parse_pattern(root.section("pattern")),
            deployment=_parse_deployment(root.section("deployment")),
            search=_parse_search(root.section("search")),
            link=_parse_link(root.section("link")),
        )
    except ValidationError:
        raise
    except MicrostripSLSError as exc:
        raise ValidationError("scenario", str(exc)) from exc
    root.done()
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioIOError(f"cannot read scenario {path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.load(text, Loader=_Loader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark is not None else None
        raise ScenarioParseError(exc.problem or str(exc), line) from exc
    except yaml.YAMLError as exc:
        raise ScenarioParseError(str(exc)) from exc
    return scenario_from_dict(data)


def _plain(value: Any) -> Any:
    if dataclasses.is_dataclass(value):
        return {f.name: _plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, (DesignMode, Objective)):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def scenario_to_dict(scenario: Scenario) -> dict:
    out: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    for f in dataclasses.fields(scenario):
        value = getattr(scenario, f.name)
        if value is not None:
            out[f.name] = _plain(value)
    return out


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    text = yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ScenarioIOError(f"cannot write scenario {path}: {exc.strerror or exc}") from exc
