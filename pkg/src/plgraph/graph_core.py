"""Finite ball truncations of spherically symmetric trees and integer lattices.

A :class:`GraphBall` holds a finite piece of an infinite, locally finite
weighted graph: the *interior* (where equations are imposed) and the *halo*
(the exact one-step outer boundary, where Dirichlet data lives).  Vertices are
stored in a fixed lexicographic order and every vertex function ("field") is a
numpy array aligned with that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

DEFAULT_VERTEX_CAP = 5_000_000


class VertexCapError(ValueError):
    """Raised when a requested ball would exceed the vertex-count cap."""


# ---------------------------------------------------------------------------
# family specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Branching:
    """Branching function of a spherically symmetric tree.

    ``kind == "constant"`` gives ``b(r) = b0``; ``kind == "power"`` gives
    ``b(r) = (r + 1) ** p``.
    """

    kind: str = "constant"
    b0: int = 2
    p: int = 1

    def __post_init__(self):
        if self.kind == "constant":
            if int(self.b0) != self.b0 or self.b0 < 1:
                raise ValueError(f"constant branching needs an integer b0 >= 1, got {self.b0}")
        elif self.kind == "power":
            if int(self.p) != self.p or self.p < 0:
                raise ValueError(f"power branching needs an integer p >= 0, got {self.p}")
        else:
            raise ValueError(f"unknown branching kind {self.kind!r}")

    def __call__(self, r: int) -> int:
        if self.kind == "constant":
            return int(self.b0)
        return (int(r) + 1) ** int(self.p)

    def values(self, r: np.ndarray) -> np.ndarray:
        """Vectorised ``b(r)`` as floats (used by the radial solvers)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "constant":
            return np.full(r.shape, float(self.b0))
        return (r + 1.0) ** self.p

    @property
    def growth_exponent(self) -> int:
        """``p`` for power branching, 0 for constant branching."""
        return int(self.p) if self.kind == "power" else 0

    @property
    def label(self) -> str:
        return f"constant:{self.b0}" if self.kind == "constant" else f"power:{self.p}"

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "b0": int(self.b0)}
        return {"kind": "power", "p": int(self.p)}

    @classmethod
    def from_dict(cls, d: dict) -> "Branching":
        kind = d["kind"]
        if kind == "constant":
            return cls("constant", b0=int(d["b0"]))
        if kind == "power":
            return cls("power", p=int(d["p"]))
        raise ValueError(f"unknown branching kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Branching":
        """Parse the short CLI form ``constant:2`` or ``power:2``."""
        kind, _, value = text.partition(":")
        if not value:
            raise ValueError(f"branching must look like 'constant:2' or 'power:2', got {text!r}")
        if kind == "constant":
            return cls("constant", b0=int(value))
        if kind == "power":
            return cls("power", p=int(value))
        raise ValueError(f"unknown branching kind {kind!r}")


@dataclass(frozen=True)
class TreeSpec:
    branching: Branching
    radius: int

    def to_dict(self) -> dict:
        return {"family": "tree", "branching": self.branching.to_dict(), "radius": self.radius}


@dataclass(frozen=True)
class LatticeSpec:
    n: int
    radius: float

    def to_dict(self) -> dict:
        return {"family": "lattice", "n": self.n, "radius": self.radius}


def spec_from_dict(d: dict) -> TreeSpec | LatticeSpec:
    """Build a family spec from its JSON document form."""
    family = d.get("family")
    if family == "tree":
        return TreeSpec(Branching.from_dict(d["branching"]), int(d["radius"]))
    if family == "lattice":
        return LatticeSpec(int(d["n"]), float(d["radius"]))
    raise ValueError(f"unknown graph family {family!r}")


def with_radius(spec: TreeSpec | LatticeSpec, radius: float) -> TreeSpec | LatticeSpec:
    if isinstance(spec, TreeSpec):
        return TreeSpec(spec.branching, int(radius))
    return LatticeSpec(spec.n, float(radius))


# ---------------------------------------------------------------------------
# the ball itself
# ---------------------------------------------------------------------------


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GraphBall:
    """Finite truncation of an infinite weighted graph.

    Attributes
    ----------
    ids : ndarray (N, k) of int
        Vertex identifiers; ``(layer, index)`` for trees, coordinates for lattices.
    weights : csr_matrix (N, N)
        Edge weights restricted to the ball's vertex set.
    mu : ndarray (N,)
        Node measure.
    interior, halo : ndarray (N,) of bool
        Solve region and its one-step outer boundary.
    layer : ndarray (N,) of int
        Combinatorial distance to the center set.
    distance : ndarray (N,)
        Distance used by potentials and barriers: the layer on trees, ``|x|``
        on lattices.
    center : ndarray of int
        Indices of the center set.
    """

    ids: np.ndarray
    weights: sp.csr_matrix
    mu: np.ndarray
    interior: np.ndarray
    halo: np.ndarray
    layer: np.ndarray
    distance: np.ndarray
    center: np.ndarray
    family: str = "custom"
    spec: TreeSpec | LatticeSpec | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_vertices(self) -> int:
        return self.ids.shape[0]

    @cached_property
    def degree(self) -> np.ndarray:
        """``deg(x) = sum_y w(x, y)`` within the ball (exact for interior vertices)."""
        return _freeze(np.asarray(self.weights.sum(axis=1)).ravel())

    @cached_property
    def interior_index(self) -> np.ndarray:
        return _freeze(np.flatnonzero(self.interior))

    @cached_property
    def halo_index(self) -> np.ndarray:
        return _freeze(np.flatnonzero(self.halo))

    @cached_property
    def _lookup(self) -> dict:
        return {tuple(int(c) for c in row): i for i, row in enumerate(self.ids)}

    def index(self, vertex) -> int:
        """Position of a vertex identifier in the ball's ordering."""
        try:
            return self._lookup[tuple(int(c) for c in np.atleast_1d(vertex))]
        except KeyError:
            raise KeyError(f"vertex {vertex!r} is not in the ball") from None

    def vertex_id(self, i: int) -> tuple:
        return tuple(int(c) for c in self.ids[i])

    def vertex_label(self, i: int) -> str:
        return ":".join(str(int(c)) for c in self.ids[i])

    def labels(self) -> list[str]:
        return [":".join(map(str, row)) for row in self.ids.tolist()]

    def parse_label(self, label: str) -> int:
        return self.index(tuple(int(p) for p in label.split(":")))

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor indices and weights of vertex ``i`` (positive weights only)."""
        w = self.weights
        lo, hi = w.indptr[i], w.indptr[i + 1]
        cols, vals = w.indices[lo:hi], w.data[lo:hi]
        keep = vals > 0
        return cols[keep], vals[keep]

    @property
    def n_dim(self) -> int | None:
        return self.spec.n if isinstance(self.spec, LatticeSpec) else None

    @property
    def max_layer(self) -> int:
        return int(self.layer.max())

    def field(self, fill: float = 0.0) -> np.ndarray:
        return np.full(self.n_vertices, float(fill))


def _make_ball(ids, rows, cols, vals, mu, interior, halo, layer, distance, center,
               family, spec) -> GraphBall:
    n = ids.shape[0]
    w = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    w = (w + w.T).tocsr()
    w.sort_indices()
    return GraphBall(
        ids=_freeze(ids),
        weights=w,
        mu=_freeze(np.asarray(mu, dtype=float)),
        interior=_freeze(interior),
        halo=_freeze(halo),
        layer=_freeze(layer),
        distance=_freeze(np.asarray(distance, dtype=float)),
        center=_freeze(np.asarray(center, dtype=np.int64)),
        family=family,
        spec=spec,
    )


def tree_layer_sizes(branching: Branching, radius: int) -> list[int]:
    """``|S_r|`` for ``r = 0..radius+1`` (exact integers)."""
    sizes = [1]
    for r in range(radius + 1):
        sizes.append(sizes[-1] * branching(r))
    return sizes


def build_tree_ball(spec: TreeSpec, cap: int = DEFAULT_VERTEX_CAP) -> GraphBall:
    """Ball of combinatorial radius ``R`` around the root of a spherically symmetric tree.

    Interior is layers ``0..R``, the halo is layer ``R + 1``.  Vertex ``(r, i)``
    has parent ``(r - 1, i // b(r - 1))``.
    """
    R = int(spec.radius)
    if R < 0:
        raise ValueError(f"tree radius must be >= 0, got {spec.radius}")
    sizes = tree_layer_sizes(spec.branching, R)
    total = sum(sizes)
    if total > cap:
        raise VertexCapError(f"tree ball would have {total} vertices (cap {cap})")

    offsets = np.cumsum([0] + sizes)
    layer = np.repeat(np.arange(R + 2), sizes)
    index = np.concatenate([np.arange(s) for s in sizes])
    ids = np.column_stack([layer, index]).astype(np.int64)

    rows, cols = [], []
    for r in range(1, R + 2):
        child = np.arange(sizes[r])
        parent = child // spec.branching(r - 1)
        rows.append(offsets[r - 1] + parent)
        cols.append(offsets[r] + child)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)

    return _make_ball(
        ids, rows, cols, np.ones(rows.size),
        mu=np.ones(total),
        interior=layer <= R,
        halo=layer == R + 1,
        layer=layer,
        distance=layer.astype(float),
        center=[0],
        family="tree",
        spec=spec,
    )


def build_lattice_ball(spec: LatticeSpec, cap: int = DEFAULT_VERTEX_CAP) -> GraphBall:
    """Ball ``{x in Z^n : |x| < R}`` plus its lattice halo, with ``mu = 2n``."""
    n, R = int(spec.n), float(spec.radius)
    if n < 1:
        raise ValueError(f"lattice dimension must be >= 1, got {n}")
    if R < 1:
        raise ValueError(f"lattice radius must be >= 1, got {R}")
    m = math.ceil(R) + 1
    side = 2 * m + 1
    if side**n > 8 * cap:
        raise VertexCapError(f"lattice box of side {side} in dimension {n} exceeds the cap {cap}")

    axes = np.arange(-m, m + 1)
    grid = np.stack(np.meshgrid(*([axes] * n), indexing="ij"), axis=-1).reshape(-1, n)
    sq = (grid.astype(np.int64) ** 2).sum(axis=1)
    inside = sq < R * R
    strides = [side ** (n - 1 - k) for k in range(n)]

    near = inside.copy()
    box_int = np.flatnonzero(inside)
    for k in range(n):
        for s in (strides[k], -strides[k]):
            near[box_int + s] = True
    keep = np.flatnonzero(near)
    if keep.size > cap:
        raise VertexCapError(f"lattice ball would have {keep.size} vertices (cap {cap})")

    compact = np.full(grid.shape[0], -1, dtype=np.int64)
    compact[keep] = np.arange(keep.size)
    ids = grid[keep].astype(np.int64)

    rows, cols = [], []
    for k in range(n):
        # +e_k neighbors; coordinates on the +m face have none inside the box
        ok = grid[keep, k] < m
        src = keep[ok]
        dst = compact[src + strides[k]]
        good = dst >= 0
        rows.append(compact[src[good]])
        cols.append(dst[good])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)

    sq_keep = sq[keep]
    interior = inside[keep]
    origin = compact[np.ravel_multi_index(tuple([m] * n), (side,) * n)]
    ball = _make_ball(
        ids, rows, cols, np.ones(rows.size),
        mu=np.full(keep.size, 2.0 * n),
        interior=interior,
        halo=~interior,
        layer=np.abs(ids).sum(axis=1),
        distance=np.sqrt(sq_keep.astype(float)),
        center=[origin],
        family="lattice",
        spec=spec,
    )
    return ball


def build_ball(spec: TreeSpec | LatticeSpec, cap: int = DEFAULT_VERTEX_CAP) -> GraphBall:
    if isinstance(spec, TreeSpec):
        return build_tree_ball(spec, cap)
    return build_lattice_ball(spec, cap)


# ---------------------------------------------------------------------------
# degrees and validation
# ---------------------------------------------------------------------------


def outer_inner_degree(ball: GraphBall, x) -> tuple[float, float]:
    """Outer and inner degree of an interior vertex off the center set.

    Returns ``(D+(x), D-(x))``: the ``mu``-normalised weight from ``x`` into the
    next outer and the next inner sphere.
    """
    i = x if isinstance(x, (int, np.integer)) else ball.index(x)
    if not ball.interior[i]:
        raise ValueError(f"vertex {ball.vertex_id(i)} is not interior; its neighborhood is incomplete")
    r = ball.layer[i]
    if r < 1:
        raise ValueError("outer/inner degrees are defined only off the center set (layer >= 1)")
    nb, w = ball.neighbors(i)
    lay = ball.layer[nb]
    return float(w[lay == r + 1].sum() / ball.mu[i]), float(w[lay == r - 1].sum() / ball.mu[i])


def layer_degrees(ball: GraphBall) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex ``(D+, D-)`` arrays; NaN off the interior, ``D-`` is 0 on the center set."""
    w = ball.weights.tocoo()
    lay = ball.layer
    outward = lay[w.col] == lay[w.row] + 1
    inward = lay[w.col] == lay[w.row] - 1
    n = ball.n_vertices
    dplus = np.bincount(w.row[outward], weights=w.data[outward], minlength=n) / ball.mu
    dminus = np.bincount(w.row[inward], weights=w.data[inward], minlength=n) / ball.mu
    dplus[~ball.interior] = np.nan
    dminus[~ball.interior] = np.nan
    return dplus, dminus


def _components(adj: sp.csr_matrix) -> int:
    from scipy.sparse.csgraph import connected_components

    return connected_components(adj, directed=False)[0]


def validate(ball: GraphBall) -> list[str]:
    """Check the ball's structural invariants; an empty list means valid."""
    problems: list[str] = []
    label = ball.vertex_label
    w = ball.weights.tocsr()
    coo = w.tocoo()

    if np.any(coo.data < 0):
        problems.append("negative edge weight")
    diag = w.diagonal()
    for i in np.flatnonzero(diag != 0):
        problems.append(f"loop: w({label(i)}, {label(i)}) = {diag[i]}")

    asym = (w - w.T).tocoo()
    pairs = {(min(i, j), max(i, j)) for i, j, v in zip(asym.row, asym.col, asym.data) if v != 0}
    for i, j in sorted(pairs):
        problems.append(f"symmetry: w({label(i)}, {label(j)}) != w({label(j)}, {label(i)})")

    for i in np.flatnonzero(ball.mu <= 0):
        problems.append(f"measure: mu({label(i)}) = {ball.mu[i]} is not positive")

    if np.any(ball.interior & ball.halo):
        problems.append("interior and halo overlap")

    pos = coo.data > 0
    rows, cols = coo.row[pos], coo.col[pos]
    from_int = ball.interior[rows]

    known = ball.interior | ball.halo
    leaks = np.unique(rows[from_int & ~known[cols]])
    for i in leaks:
        problems.append(f"closure: interior vertex {label(i)} has a neighbor outside interior and halo")

    idx = ball.interior_index
    if idx.size and _components(w[idx][:, idx] > 0) != 1:
        problems.append("connectivity: interior is not connected")

    lay = ball.layer
    bad = from_int & (lay[rows] >= 1) & (np.abs(lay[cols] - lay[rows]) != 1)
    for i in np.unique(rows[bad]):
        problems.append(f"layering: vertex {label(i)} has a neighbor outside layers r-1, r+1")

    n_edges = np.bincount(rows, minlength=ball.n_vertices)
    unit = np.bincount(rows, weights=(coo.data[pos] == 1).astype(float), minlength=ball.n_vertices)
    if ball.family == "tree" and isinstance(ball.spec, TreeSpec):
        b = ball.spec.branching
        expected = np.array([b(int(r)) for r in range(ball.max_layer + 1)], dtype=np.int64)
        want = expected[lay[idx]] + (lay[idx] > 0)
        for i in idx[(n_edges[idx] != want) | (unit[idx] != want)]:
            problems.append(f"degree: tree vertex {label(i)} has {n_edges[i]} edges")
        for i in np.flatnonzero(ball.mu != 1):
            problems.append(f"measure: tree vertex {label(i)} has mu != 1")
    elif ball.family == "lattice" and isinstance(ball.spec, LatticeSpec):
        n = ball.spec.n
        for i in idx[(n_edges[idx] != 2 * n) | (unit[idx] != 2 * n)]:
            problems.append(f"degree: lattice vertex {label(i)} has {n_edges[i]} unit edges, expected {2 * n}")
        for i in np.flatnonzero(ball.mu != 2 * n):
            problems.append(f"measure: mu({label(i)}) = {ball.mu[i]}, expected {2 * n}")
    return problems


def is_weakly_spherically_symmetric(ball: GraphBall, rtol: float = 1e-12) -> bool:
    """True when ``D+`` and ``D-`` are constant on every interior layer and no
    interior edge stays inside a layer."""
    dplus, dminus = layer_degrees(ball)
    lay = ball.layer
    idx = ball.interior_index
    w = ball.weights.tocoo()
    same = (lay[w.row] == lay[w.col]) & ball.interior[w.row] & (w.data > 0)
    if np.any(same):
        return False
    for r in np.unique(lay[idx]):
        sel = idx[lay[idx] == r]
        for d in (dplus[sel], dminus[sel]):
            if not np.allclose(d, d[0], rtol=rtol, atol=0.0):
                return False
    return True


def probe_indices(ball: GraphBall, probes: Sequence | None) -> list[int]:
    """Resolve probe vertex identifiers; ``None`` means the center set."""
    if not probes:
        return [int(i) for i in ball.center]
    return [ball.index(p) for p in probes]
