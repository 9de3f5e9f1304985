"""Sampling one round's weighted graph from the two-community block model.

Every unordered pair ``{i, j}`` with ``i != j`` becomes an edge with
probability ``p[c_i][c_j] / n`` and weight ``zeta[c_i][c_j]``; every vertex
gets a self-loop (a solo project) with probability ``a / n`` and weight
``alpha``. All draws are independent.

A self-loop contributes its weight once to the weighted degree of its vertex.
Under that convention the expected red weight is exactly
``n_R**2 * a*alpha/n + n_R*n_B * b*beta/n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .core import Color, ModelParams, Population

# Above this many vertices sample_graph uses geometric skips instead of one
# Bernoulli draw per potential edge.
SKIP_THRESHOLD = 512

RED = np.int8(Color.RED)
BLUE = np.int8(Color.BLUE)


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ColoredVertexSet:
    """Vertex colors in arrival order (0-based positions, values 1=red, 2=blue)."""

    colors: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.colors, dtype=np.int8)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("a vertex set needs at least one vertex")
        if not np.all((c == RED) | (c == BLUE)):
            raise ValueError("colors must be 1 (red) or 2 (blue)")
        object.__setattr__(self, "colors", _frozen(c))

    @classmethod
    def from_population(cls, pop: Population) -> "ColoredVertexSet":
        """Red vertices first, then blue. The model is exchangeable, so order
        only affects vertex labels."""
        return cls(np.concatenate([np.full(pop.n_red, RED), np.full(pop.n_blue, BLUE)]))

    @property
    def n(self) -> int:
        return int(self.colors.shape[0])

    @property
    def n_red(self) -> int:
        return int(np.count_nonzero(self.colors == RED))

    @property
    def n_blue(self) -> int:
        return self.n - self.n_red

    @property
    def population(self) -> Population:
        return Population(self.n_red, self.n_blue)

    def red_indices(self) -> np.ndarray:
        return np.flatnonzero(self.colors == RED)

    def blue_indices(self) -> np.ndarray:
        return np.flatnonzero(self.colors == BLUE)

    def extend(self, new_colors) -> "ColoredVertexSet":
        return ColoredVertexSet(np.concatenate([self.colors, np.asarray(new_colors, dtype=np.int8)]))

    def swapped(self) -> "ColoredVertexSet":
        return ColoredVertexSet(np.where(self.colors == RED, BLUE, RED).astype(np.int8))

    def __eq__(self, other):
        return isinstance(other, ColoredVertexSet) and np.array_equal(self.colors, other.colors)

    def __len__(self):
        return self.n


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Edge list with ``i <= j`` (0-based), sorted by ``(i, j)``; self-loops have ``i == j``."""

    n: int
    i: np.ndarray
    j: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.i, dtype=np.int64)
        j = np.asarray(self.j, dtype=np.int64)
        w = np.asarray(self.w, dtype=np.float64)
        if not (i.shape == j.shape == w.shape) or i.ndim != 1:
            raise ValueError("edge arrays must be one-dimensional and of equal length")
        if i.size and (i.min() < 0 or j.max() >= self.n or np.any(i > j)):
            raise ValueError("edges must satisfy 0 <= i <= j < n")
        for name, arr in (("i", i), ("j", j), ("w", w)):
            object.__setattr__(self, name, _frozen(arr))

    @property
    def num_edges(self) -> int:
        return int(self.i.shape[0])

    @property
    def is_loop(self) -> np.ndarray:
        return self.i == self.j

    def edges(self):
        """Iterate ``(i, j, w)`` tuples (0-based)."""
        return zip(self.i.tolist(), self.j.tolist(), self.w.tolist())

    def degrees(self) -> np.ndarray:
        return _kernels.weighted_degrees(self.n, self.i, self.j, self.w)

    def with_edges(self, i, j, w) -> "WeightedGraph":
        """A new graph with extra vertices/edges appended (used for recruitment edges)."""
        ii = np.concatenate([self.i, np.minimum(i, j)])
        jj = np.concatenate([self.j, np.maximum(i, j)])
        ww = np.concatenate([self.w, np.asarray(w, dtype=np.float64)])
        n = int(max(self.n, int(jj.max()) + 1 if jj.size else 0))
        order = np.lexsort((jj, ii))
        return WeightedGraph(n, ii[order], jj[order], ww[order])

    def __eq__(self, other):
        return (
            isinstance(other, WeightedGraph)
            and self.n == other.n
            and np.array_equal(self.i, other.i)
            and np.array_equal(self.j, other.j)
            and np.array_equal(self.w, other.w)
        )


@dataclass(frozen=True)
class ColorWeights:
    """Total red weight ``r`` and blue weight ``b_``.

    ``rr`` and ``bb`` sum edge weights over ordered pairs of same-colored
    endpoints (a non-loop edge counted twice, a loop once); ``rb`` sums
    red-blue edge weights once. Hence ``r = rr + rb`` and ``b_ = bb + rb``.
    """

    r: float
    b_: float
    rr: float
    rb: float
    bb: float

    @property
    def total(self) -> float:
        return self.r + self.b_

    @property
    def red_share(self) -> float:
        return self.r / self.total


# -- sampling ---------------------------------------------------------------


def _bernoulli_slots(num_slots: int, p: float, rng: np.random.Generator) -> np.ndarray:
    if num_slots == 0:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero(rng.random(num_slots) < p).astype(np.int64)


def _skip_slots(num_slots: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices of successes among ``num_slots`` Bernoulli(p) trials, drawn by
    jumping geometric gaps between successes (expected O(num_slots * p))."""
    if num_slots == 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(num_slots, dtype=np.int64)
    log_q = math.log1p(-p)
    expected = num_slots * p
    chunk = int(expected + 4.0 * math.sqrt(expected) + 16)
    out = []
    pos = -1
    while True:
        u = rng.random(chunk)
        # gap >= 1 is the number of trials up to and including the next success
        gaps = np.floor(np.log1p(-u) / log_q) + 1.0
        np.minimum(gaps, float(num_slots + 1), out=gaps)
        steps = pos + np.cumsum(gaps.astype(np.int64))
        keep = steps[steps < num_slots]
        out.append(keep)
        if keep.size < steps.size:
            break
        pos = int(steps[-1])
    return np.concatenate(out)


def _draw_slots(num_slots, p, rng, use_skip):
    return _skip_slots(num_slots, p, rng) if use_skip else _bernoulli_slots(num_slots, p, rng)


def sample_graph(
    vertices: ColoredVertexSet,
    params: ModelParams,
    rng: np.random.Generator,
    *,
    skip_threshold: int = SKIP_THRESHOLD,
) -> WeightedGraph:
    """Draw one weighted graph on ``vertices``.

    Potential edges are split into three homogeneous blocks: red-red pairs
    with red self-loops, blue-blue pairs with blue self-loops, and red-blue
    pairs. Within a block every slot has the same probability, so each block
    is sampled as an i.i.d. Bernoulli sequence (directly for ``n <=
    skip_threshold``, by geometric skips above it).
    """
    n = vertices.n
    p_same = params.a / n
    p_cross = params.b / n
    if p_same > 1.0 or p_cross > 1.0:
        raise ValueError(f"edge probability exceeds 1 at n={n}; validate parameters first")
    use_skip = n > skip_threshold
    red = vertices.red_indices()
    blue = vertices.blue_indices()
    nr, nb = red.size, blue.size

    parts_i, parts_j, parts_w = [], [], []
    for idx, m in ((red, nr), (blue, nb)):
        slots = _draw_slots(m * (m + 1) // 2, p_same, rng, use_skip)
        row, col = _kernels.triangle_decode(slots)
        parts_i.append(idx[row])
        parts_j.append(idx[col])
        parts_w.append(np.full(slots.size, params.alpha))
    slots = _draw_slots(nr * nb, p_cross, rng, use_skip)
    ri = red[slots // nb] if nb else slots
    bj = blue[slots % nb] if nb else slots
    parts_i.append(np.minimum(ri, bj))
    parts_j.append(np.maximum(ri, bj))
    parts_w.append(np.full(slots.size, params.beta))

    i = np.concatenate(parts_i).astype(np.int64)
    j = np.concatenate(parts_j).astype(np.int64)
    w = np.concatenate(parts_w)
    order = np.lexsort((j, i))
    return WeightedGraph(n, i[order], j[order], w[order])


def weighted_degree(g: WeightedGraph, u: int) -> float:
    """Sum of weights of edges incident to ``u`` (0-based); self-loops count once."""
    if not 0 <= u < g.n:
        raise IndexError(f"vertex {u} out of range for n={g.n}")
    touches = (g.i == u) | (g.j == u)
    return float(np.sum(g.w[touches]))


def color_weights(g: WeightedGraph, vertices: ColoredVertexSet) -> ColorWeights:
    if g.n != vertices.n:
        raise ValueError("graph and vertex set sizes differ")
    ci = vertices.colors[g.i]
    cj = vertices.colors[g.j]
    loop = g.i == g.j
    both_red = (ci == RED) & (cj == RED)
    both_blue = (ci == BLUE) & (cj == BLUE)
    cross = ci != cj
    # ordered-pair sums: non-loop edges twice, loops once
    mult = np.where(loop, 1.0, 2.0)
    rr = float(np.sum(g.w[both_red] * mult[both_red]))
    bb = float(np.sum(g.w[both_blue] * mult[both_blue]))
    rb = float(np.sum(g.w[cross]))
    return ColorWeights(r=rr + rb, b_=bb + rb, rr=rr, rb=rb, bb=bb)


# -- slot tables for tiny-n oracles and batched sampling --------------------


@dataclass(frozen=True)
class SlotTable:
    """All ``n(n+1)/2`` potential edges with their probability, weight and
    contribution to the red and blue totals."""

    i: np.ndarray
    j: np.ndarray
    prob: np.ndarray
    weight: np.ndarray
    red_contrib: np.ndarray
    blue_contrib: np.ndarray

    @property
    def size(self) -> int:
        return int(self.i.shape[0])


def slot_table(vertices: ColoredVertexSet, params: ModelParams) -> SlotTable:
    n = vertices.n
    i, j = (x.astype(np.int64) for x in np.triu_indices(n))
    ci, cj = vertices.colors[i], vertices.colors[j]
    same = ci == cj
    prob = np.minimum(np.where(same, params.a, params.b) / n, 1.0)
    weight = np.where(same, params.alpha, params.beta)
    mult = np.where(i == j, 1.0, 2.0)
    red_contrib = np.where(same, np.where(ci == RED, weight * mult, 0.0), weight)
    blue_contrib = np.where(same, np.where(ci == BLUE, weight * mult, 0.0), weight)
    return SlotTable(i, j, prob, weight, red_contrib, blue_contrib)


def sample_color_weights_batch(
    vertices: ColoredVertexSet, params: ModelParams, rng: np.random.Generator, size: int
) -> tuple[np.ndarray, np.ndarray]:
    """``size`` independent ``(R, B)`` draws via one Bernoulli per edge slot.

    Same distribution as ``color_weights(sample_graph(...))``; meant for tiny
    graphs where per-graph Python overhead would dominate.
    """
    table = slot_table(vertices, params)
    hits = rng.random((size, table.size)) < table.prob
    return hits @ table.red_contrib, hits @ table.blue_contrib


# -- edge-list text format --------------------------------------------------


def format_edgelist(g: WeightedGraph, vertices: ColoredVertexSet) -> str:
    """Header ``"n n_red"`` then one ``"i j w"`` line per edge, 1-based, 17 significant digits."""
    lines = [f"{g.n} {vertices.n_red}"]
    lines.extend(f"{i + 1} {j + 1} {w:.17g}" for i, j, w in g.edges())
    return "\n".join(lines) + "\n"


def write_edgelist(path, g: WeightedGraph, vertices: ColoredVertexSet) -> None:
    Path(path).write_text(format_edgelist(g, vertices))


def read_edgelist(path) -> tuple[WeightedGraph, int]:
    """Inverse of :func:`write_edgelist`; returns the graph and the header's red count."""
    rows = Path(path).read_text().split("\n")
    n, n_red = (int(x) for x in rows[0].split())
    body = [r.split() for r in rows[1:] if r.strip()]
    i = np.array([int(r[0]) - 1 for r in body], dtype=np.int64)
    j = np.array([int(r[1]) - 1 for r in body], dtype=np.int64)
    w = np.array([float(r[2]) for r in body], dtype=np.float64)
    return WeightedGraph(n, i, j, w), n_red
