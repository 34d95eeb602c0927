"""Stochastic local search over tower/device distance matrices.

Towers are linked in a single chain (``OpenPath``) or loop (``ClosedTour``)
of minimum total Euclidean length. The search is random-restart 2-opt
descent, optionally preceded by a simulated-annealing walk, with an
exhaustive enumerator as the reference oracle for small instances.

Randomness comes from numpy's PCG64 generator. Restart ``r`` draws from a
generator seeded with ``seed + r``, so restarts can run in any order (or in
parallel) and the reduction to the best plan is always the same.
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .em_model import link_budget
from .errors import InputError, SizeGuardError

IMPROVEMENT_TOL = 1e-9  # m
BRUTE_FORCE_MAX_N = 10
MIN_LINK_DISTANCE = 0.1  # m


class Objective(str, enum.Enum):
    OPEN_PATH = "open_path"
    CLOSED_TOUR = "closed_tour"


@dataclass(frozen=True)
class Site:
    id: str
    x: float
    y: float


@dataclass(frozen=True)
class Deployment:
    towers: tuple[Site, ...]
    devices: tuple[Site, ...] = ()
    frequency: float = 2.45  # GHz

    def __post_init__(self):
        object.__setattr__(self, "towers", tuple(self.towers))
        object.__setattr__(self, "devices", tuple(self.devices))
        if not self.towers:
            raise InputError("deployment needs at least one tower")
        ids = [s.id for s in self.towers + self.devices]
        if len(set(ids)) != len(ids):
            raise InputError("tower and device ids must be unique")
        for s in self.towers + self.devices:
            if not (math.isfinite(s.x) and math.isfinite(s.y)):
                raise InputError(f"site {s.id!r} has a non-finite coordinate")

    def tower_points(self) -> list[tuple[float, float]]:
        return [(t.x, t.y) for t in self.towers]


@dataclass(frozen=True)
class Annealing:
    t_initial: float = 0.5
    cooling: float = 0.9
    steps_per_temp: int = 100
    t_final: float = 1e-3

    def __post_init__(self):
        if not 0 < self.cooling < 1:
            raise InputError(f"cooling must lie in (0, 1), got {self.cooling}")
        if not (self.t_initial > 0 and 0 < self.t_final < self.t_initial):
            raise InputError("need 0 < t_final < t_initial")
        if self.steps_per_temp < 1:
            raise InputError("steps_per_temp must be >= 1")


@dataclass(frozen=True)
class SearchConfig:
    objective: Objective = Objective.OPEN_PATH
    restarts: int = 20
    seed: int = 0
    annealing: Annealing | None = None

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))
        if self.restarts < 1:
            raise InputError(f"restarts must be >= 1, got {self.restarts}")
        if self.seed < 0:
            raise InputError(f"seed must be unsigned, got {self.seed}")


@dataclass(frozen=True)
class TopologyPlan:
    order: tuple[int, ...]
    total_length: float  # m
    objective: Objective
    evaluations: int
    restarts_used: int
    locally_optimal: bool


# --- distance matrix -----------------------------------------------------------


def distance_matrix(points: Sequence[tuple[float, float]]) -> np.ndarray:
    """Pairwise Euclidean distances (m) as a symmetric ``n x n`` array."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise InputError("need at least one point")
    if not np.all(np.isfinite(pts)):
        raise InputError("coordinates must be finite")
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    # hypot is symmetric in its arguments' signs, but make it structural
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return d


def _check_order(order: Sequence[int], n: int) -> list[int]:
    order = [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise InputError(f"order is not a permutation of 0..{n - 1}")
    return order


def tour_length(order: Sequence[int], matrix: np.ndarray, objective: Objective) -> float:
    n = len(matrix)
    order = _check_order(order, n)
    total = sum(matrix[a, b] for a, b in zip(order, order[1:]))
    if Objective(objective) is Objective.CLOSED_TOUR and n > 1:
        total += matrix[order[-1], order[0]]
    return float(total)


def nearest_neighbor_init(matrix: np.ndarray, start: int = 0) -> list[int]:
    """Greedy construction; ties go to the lowest index."""
    n = len(matrix)
    if not 0 <= start < n:
        raise InputError(f"start index {start} out of range for n={n}")
    order = [start]
    visited = np.zeros(n, dtype=bool)
    visited[start] = True
    for _ in range(n - 1):
        row = np.where(visited, np.inf, matrix[order[-1]])
        nxt = int(np.argmin(row))
        order.append(nxt)
        visited[nxt] = True
    return order


# --- 2-opt -------------------------------------------------------------------


def _reversal_delta(order: list[int], d: np.ndarray, i: int, j: int, closed: bool) -> float:
    """Length change from reversing ``order[i..j]`` (inclusive)."""
    n = len(order)
    a, b = order[i], order[j]
    delta = 0.0
    if i > 0 or closed:
        p = order[i - 1]
        delta += d[p, b] - d[p, a]
    if j < n - 1 or closed:
        q = order[(j + 1) % n]
        delta += d[a, q] - d[b, q]
    return delta


def _moves(n: int, closed: bool):
    for i in range(n - 1):
        for j in range(i + 1, n):
            # reversing everything is a no-op for paths and a mirror for tours
            if i == 0 and j == n - 1:
                continue
            if closed and i == 0:
                # same edge pair as reversing the complement order[j+1..n-1]
                continue
            yield i, j


def _descend(order: list[int], d: np.ndarray, closed: bool) -> tuple[list[int], int]:
    order = list(order)
    n = len(order)
    evaluations = 0
    improved = True
    while improved:
        improved = False
        for i, j in _moves(n, closed):
            evaluations += 1
            if _reversal_delta(order, d, i, j, closed) < -IMPROVEMENT_TOL:
                order[i : j + 1] = order[i : j + 1][::-1]
                improved = True
    return order, evaluations


def two_opt_descent(order: Sequence[int], matrix: np.ndarray, objective: Objective) -> list[int]:
    """First-improvement 2-opt, scanning ``i`` then ``j`` ascending, to a local optimum."""
    order = _check_order(order, len(matrix))
    closed = Objective(objective) is Objective.CLOSED_TOUR
    return _descend(order, matrix, closed)[0]


def is_two_opt_optimal(order: Sequence[int], matrix: np.ndarray, objective: Objective) -> bool:
    """Exhaustive audit: recompute every segment reversal from scratch."""
    order = _check_order(order, len(matrix))
    base = tour_length(order, matrix, objective)
    n = len(order)
    for i in range(n - 1):
        for j in range(i + 1, n):
            cand = order[:i] + order[i : j + 1][::-1] + order[j + 1 :]
            if tour_length(cand, matrix, objective) < base - IMPROVEMENT_TOL:
                return False
    return True


# --- stochastic search -----------------------------------------------------------


def _anneal(order: list[int], d: np.ndarray, closed: bool, cfg: Annealing, rng) -> tuple[list[int], int]:
    n = len(order)
    moves = list(_moves(n, closed))
    if not moves:
        return order, 0
    off_diag = d[~np.eye(n, dtype=bool)]
    scale = float(off_diag.mean()) or 1.0
    order = list(order)
    evaluations = 0
    t = cfg.t_initial
    while t >= cfg.t_final:
        picks = rng.integers(len(moves), size=cfg.steps_per_temp)
        draws = rng.random(cfg.steps_per_temp)
        for k, u in zip(picks, draws):
            i, j = moves[k]
            delta = _reversal_delta(order, d, i, j, closed)
            evaluations += 1
            if delta <= 0 or u < math.exp(-delta / (t * scale)):
                order[i : j + 1] = order[i : j + 1][::-1]
        t *= cfg.cooling
    return order, evaluations


def _run_restart(d: np.ndarray, config: SearchConfig, r: int) -> tuple[float, list[int], int]:
    closed = config.objective is Objective.CLOSED_TOUR
    n = len(d)
    rng = np.random.Generator(np.random.PCG64(config.seed + r))
    if r == 0:
        start = nearest_neighbor_init(d, 0)
    else:
        start = [int(i) for i in rng.permutation(n)]
    evaluations = 0
    if config.annealing is not None:
        start, evaluations = _anneal(start, d, closed, config.annealing, rng)
    order, ev = _descend(start, d, closed)
    return tour_length(order, d, config.objective), order, evaluations + ev + 1


def stochastic_search(
    matrix: np.ndarray, config: SearchConfig, workers: int | None = None
) -> TopologyPlan:
    """Best-of-restarts local search.

    Restart 0 starts from the nearest-neighbour chain out of node 0; every
    other restart starts from a random permutation. With ``workers > 1`` the
    restarts run in a process pool; the result is identical either way.
    """
    d = np.asarray(matrix, dtype=float)
    if d.ndim != 2 or len(d) == 0:
        raise InputError("distance matrix must be non-empty and square")
    indices = range(config.restarts)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_restart, [d] * config.restarts, [config] * config.restarts, indices))
    else:
        results = [_run_restart(d, config, r) for r in indices]
    # ties keep the lowest restart index
    best = min(range(len(results)), key=lambda r: (results[r][0], r))
    length, order, _ = results[best]
    return TopologyPlan(
        order=tuple(order),
        total_length=length,
        objective=config.objective,
        evaluations=sum(res[2] for res in results),
        restarts_used=config.restarts,
        locally_optimal=is_two_opt_optimal(order, d, config.objective),
    )


@lru_cache(maxsize=None)
def _permutations(m: int) -> np.ndarray:
    perms = list(itertools.permutations(range(m)))
    return np.array(perms, dtype=np.int8).reshape(len(perms), m)


def brute_force_optimal(matrix: np.ndarray, objective: Objective) -> TopologyPlan:
    """Globally optimal order by exhaustive enumeration (n <= 10).

    Closed tours fix node 0 first to skip rotations. Among equal-length
    orders the lexicographically smallest is returned.
    """
    d = np.asarray(matrix, dtype=float)
    n = len(d)
    objective = Objective(objective)
    if n == 0:
        raise InputError("need at least one node")
    if n > BRUTE_FORCE_MAX_N:
        raise SizeGuardError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    closed = objective is Objective.CLOSED_TOUR
    starts = [0] if closed else list(range(n))
    best_len, best_order, evaluations = math.inf, [0], 0
    tails = _permutations(n - 1)
    for s in starts:
        rest = np.array([i for i in range(n) if i != s], dtype=np.intp)
        orders = np.concatenate([np.full((len(tails), 1), s), rest[tails]], axis=1)
        lengths = d[orders[:, :-1], orders[:, 1:]].sum(axis=1)
        if closed:
            lengths = lengths + d[orders[:, -1], orders[:, 0]]
        evaluations += len(orders)
        k = int(np.argmin(lengths))
        if lengths[k] < best_len:
            best_len, best_order = float(lengths[k]), [int(i) for i in orders[k]]
    return TopologyPlan(
        order=tuple(best_order),
        total_length=tour_length(best_order, d, objective),
        objective=objective,
        evaluations=evaluations,
        restarts_used=0,
        locally_optimal=True,
    )


# --- device assignment -----------------------------------------------------------


@dataclass(frozen=True)
class LinkParams:
    p_tx: float = 20.0  # dBm
    sensitivity: float = -90.0  # dBm
    g_rx: float = 0.0  # dBi


@dataclass(frozen=True)
class Assignment:
    device_id: str
    tower_id: str | None
    distance: float | None  # m
    p_rx: float | None  # dBm

    @property
    def covered(self) -> bool:
        return self.tower_id is not None


def assign_devices(
    deployment: Deployment,
    link: LinkParams,
    tower_gain: float | Callable[[Site, Site], float],
) -> list[Assignment]:
    """Map each device to the nearest tower with a feasible link.

    ``tower_gain`` is either a scalar gain in dBi (typically the patch's
    broadside directivity) or a callable ``(tower, device) -> dBi`` for
    angle-dependent lookups. Distances below 0.1 m are floored.
    """
    gain_of = tower_gain if callable(tower_gain) else (lambda _t, _d: float(tower_gain))
    out = []
    for dev in deployment.devices:
        ranked = sorted(
            range(len(deployment.towers)),
            key=lambda k: (math.hypot(deployment.towers[k].x - dev.x, deployment.towers[k].y - dev.y), k),
        )
        chosen = Assignment(dev.id, None, None, None)
        for k in ranked:
            tower = deployment.towers[k]
            dist = max(math.hypot(tower.x - dev.x, tower.y - dev.y), MIN_LINK_DISTANCE)
            budget = link_budget(
                link.p_tx, gain_of(tower, dev), link.g_rx, dist, deployment.frequency, link.sensitivity
            )
            if budget.feasible:
                chosen = Assignment(dev.id, tower.id, dist, budget.p_rx)
                break
        out.append(chosen)
    return out
