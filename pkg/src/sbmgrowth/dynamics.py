"""Growth dynamics: every round all edges are redrawn, then a batch of new
nodes is recruited by weighted-degree preferential attachment, each copying
its recruiter's color.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import _kernels
from .core import ModelParams, Population, PopulationOverflow, SeedSpec, floor_ceil_product, validate_params
from .sbm import RED, ColoredVertexSet, WeightedGraph, color_weights, sample_graph, write_edgelist

DEFAULT_POPULATION_CAP = 10**7

TRAJECTORY_HEADER = ("t", "n", "n_red", "phi", "m_t", "m_red", "R_t", "B_t")


@dataclass
class DynState:
    t: int
    vertices: ColoredVertexSet
    rng: np.random.Generator

    @property
    def population(self) -> Population:
        return self.vertices.population


@dataclass(frozen=True)
class StepRecord:
    t: int
    n: int
    n_red: int
    phi: float
    m_t: int
    m_red: int
    r_weight: float
    b_weight: float
    # True when the round's graph had zero total weight and recruiters were drawn uniformly
    uniform_fallback: bool = False
    graph: Optional[WeightedGraph] = field(default=None, repr=False, compare=False)

    def csv_row(self) -> list[str]:
        return [
            str(self.t),
            str(self.n),
            str(self.n_red),
            f"{self.phi:.17g}",
            str(self.m_t),
            str(self.m_red),
            f"{self.r_weight:.17g}",
            f"{self.b_weight:.17g}",
        ]


def arrivals_count(n_prev: int, lam: float, rng: np.random.Generator) -> int:
    """Randomized rounding of ``lam * n_prev``: the ceiling with probability
    equal to the fractional part, else the floor. Integer products are
    returned without consuming randomness."""
    lo, hi = floor_ceil_product(lam, n_prev)
    if lo == hi:
        return lo
    frac = lam * n_prev - lo
    return hi if rng.random() < frac else lo


def _draw_recruiters(degrees: np.ndarray, m: int, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    n = degrees.shape[0]
    if m == 0:
        return np.empty(0, dtype=np.int64), False
    if not np.any(degrees > 0):
        return rng.integers(0, n, size=m), True
    prob, alias = _kernels.alias_build(degrees)
    idx = rng.integers(0, n, size=m)
    coin = rng.random(m)
    return _kernels.alias_draw(prob, alias, idx, coin), False


def sample_recruiters(g: WeightedGraph, vertices: ColoredVertexSet, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` independent draws (with replacement) of 0-based vertex indices,
    each chosen with probability proportional to its weighted degree.

    If the graph carries no weight at all the draws are uniform over the
    vertices instead.
    """
    if g.n != vertices.n:
        raise ValueError("graph and vertex set sizes differ")
    if m < 0:
        raise ValueError("m must be non-negative")
    idx, _ = _draw_recruiters(g.degrees(), m, rng)
    return idx


def initial_state(initial: Population, rng: np.random.Generator) -> DynState:
    return DynState(0, ColoredVertexSet.from_population(initial), rng)


def step(state: DynState, params: ModelParams, *, keep_graph: bool = False) -> tuple[DynState, StepRecord]:
    """Advance one round.

    With ``keep_graph`` the record carries the round's graph after
    recruitment: the refreshed edges plus one edge of weight ``alpha`` from
    each recruiter to its recruit.
    """
    verts = state.vertices
    rng = state.rng
    g = sample_graph(verts, params, rng)
    cw = color_weights(g, verts)
    m = arrivals_count(verts.n, params.lam, rng)
    recruiters, fallback = _draw_recruiters(g.degrees(), m, rng)
    new_colors = verts.colors[recruiters]
    m_red = int(np.count_nonzero(new_colors == RED))
    nxt = verts.extend(new_colors)

    graph = None
    if keep_graph:
        recruits = np.arange(verts.n, verts.n + m, dtype=np.int64)
        grown = WeightedGraph(nxt.n, g.i, g.j, g.w)
        graph = grown.with_edges(recruiters, recruits, np.full(m, params.alpha))

    n_red = verts.n_red + m_red
    record = StepRecord(
        t=state.t + 1,
        n=nxt.n,
        n_red=n_red,
        phi=n_red / nxt.n,
        m_t=m,
        m_red=m_red,
        r_weight=cw.r,
        b_weight=cw.b_,
        uniform_fallback=fallback,
        graph=graph,
    )
    return DynState(state.t + 1, nxt, rng), record


def run_trajectory(
    initial: Population,
    params: ModelParams,
    t_max: int,
    seed: SeedSpec,
    *,
    population_cap: int = DEFAULT_POPULATION_CAP,
    graph_dir=None,
) -> list[StepRecord]:
    """Records for rounds ``0..t_max``; round 0 holds the initial population.

    Raises PopulationOverflow before any round that could push the population
    past ``population_cap``. With ``graph_dir`` each round's graph is written
    there as ``graph_t{t:05}.txt``.
    """
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    params = validate_params(params, initial.n)
    state = initial_state(initial, seed.generator())
    records = [StepRecord(0, initial.n, initial.n_red, initial.phi, 0, 0, 0.0, 0.0)]
    if graph_dir is not None:
        graph_dir = Path(graph_dir)
        graph_dir.mkdir(parents=True, exist_ok=True)
    for _ in range(t_max):
        n = state.vertices.n
        if n + floor_ceil_product(params.lam, n)[1] > population_cap:
            raise PopulationOverflow(f"round {state.t + 1} could exceed the population cap {population_cap} (n={n})")
        state, rec = step(state, params, keep_graph=graph_dir is not None)
        if graph_dir is not None:
            write_edgelist(graph_dir / f"graph_t{rec.t:05}.txt", rec.graph, state.vertices)
            rec = replace(rec, graph=None)
        records.append(rec)
    return records


def _trial(args):
    initial, params, t_max, seed, cap = args
    return run_trajectory(initial, params, t_max, seed, population_cap=cap)


def run_trials(
    initial: Population,
    params: ModelParams,
    t_max: int,
    master_seed: int,
    trials: int,
    *,
    workers: int = 1,
    population_cap: int = DEFAULT_POPULATION_CAP,
) -> list[list[StepRecord]]:
    """Independent trajectories on streams ``0..trials-1``, returned in stream
    order. ``workers`` changes wall time only."""
    jobs = [(initial, params, t_max, SeedSpec(master_seed, k), population_cap) for k in range(trials)]
    if workers <= 1 or trials <= 1:
        return [_trial(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial, jobs))


def trajectory_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    for rec in records:
        w.writerow(rec.csv_row())
    return buf.getvalue()


def write_trajectory_csv(path, records) -> None:
    Path(path).write_text(trajectory_csv(records))
