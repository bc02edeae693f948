"""Weighted Laplacian, Schrödinger residuals and sub/supersolution classification."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .graph_core import GraphBall

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Potential:
    """Power-law potential ``V(x) = c0 * (1 + dist(x, center)) ** -alpha``.

    ``metric`` selects the distance: ``"combinatorial"`` uses the graph
    distance to the center set, ``"euclidean"`` uses ``|x|`` (lattices only).
    ``floor``, when set, is a lower bound imposed on the center set.
    """

    c0: float = 1.0
    alpha: float = 1.0
    metric: str = "combinatorial"
    kind: str = "power"
    floor: float | None = None

    def __post_init__(self):
        if self.kind != "power":
            raise ValueError(f"only power-law potentials are supported, got {self.kind!r}")
        if self.metric not in ("combinatorial", "euclidean"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.floor is not None and self.floor <= 0:
            raise ValueError("floor must be strictly positive")

    def of_distance(self, dist) -> np.ndarray:
        return self.c0 * (1.0 + np.asarray(dist, dtype=float)) ** (-self.alpha)

    def evaluate(self, ball: GraphBall) -> np.ndarray:
        if self.metric == "combinatorial":
            dist = ball.layer
        elif ball.family == "tree":
            raise ValueError("a euclidean potential needs lattice coordinates")
        else:
            dist = ball.distance
        v = self.of_distance(dist)
        if self.floor is not None:
            v[ball.center] = np.maximum(v[ball.center], self.floor)
        return v

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "c0": self.c0, "alpha": self.alpha, "metric": self.metric}
        if self.floor is not None:
            d["floor"] = self.floor
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Potential":
        return cls(
            c0=float(d.get("c0", 1.0)),
            alpha=float(d.get("alpha", 1.0)),
            metric=d.get("metric", "combinatorial"),
            kind=d.get("kind", "power"),
            floor=d.get("floor"),
        )


def potential_values(ball: GraphBall, V) -> np.ndarray:
    """Tabulate ``V`` on the ball; accepts a :class:`Potential`, a scalar or an array."""
    if isinstance(V, Potential):
        return V.evaluate(ball)
    v = np.asarray(V, dtype=float)
    if v.ndim == 0:
        return np.full(ball.n_vertices, float(v))
    if v.shape != (ball.n_vertices,):
        raise ValueError(f"potential has shape {v.shape}, ball has {ball.n_vertices} vertices")
    return v


def _as_field(ball: GraphBall, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        return np.full(ball.n_vertices, float(f))
    if f.shape != (ball.n_vertices,):
        raise ValueError(f"field has shape {f.shape}, ball has {ball.n_vertices} vertices")
    if not np.all(np.isfinite(f)):
        raise ValueError("field has non-finite values")
    return f


def laplacian_apply(ball: GraphBall, f, x) -> float:
    """``(1/mu(x)) * sum_y (f(y) - f(x)) w(x, y)`` at one interior vertex."""
    i = x if isinstance(x, (int, np.integer)) else ball.index(x)
    if not ball.interior[i]:
        raise ValueError(f"vertex {ball.vertex_id(i)} is not interior")
    f = np.asarray(f, dtype=float)
    nb, w = ball.neighbors(i)
    return float(np.dot(f[nb] - f[i], w) / ball.mu[i])


def laplacian(ball: GraphBall, f) -> np.ndarray:
    """Laplacian of ``f`` at every interior vertex (ordered as ``ball.interior_index``)."""
    f = _as_field(ball, f)
    idx = ball.interior_index
    w = ball.weights[idx]
    return (w @ f - ball.degree[idx] * f[idx]) / ball.mu[idx]


def schrodinger_residual(ball: GraphBall, V, u, f=0.0) -> np.ndarray:
    """``Delta u - V u - f`` on the interior.

    ``f`` may be a scalar, a full field, or an array over the interior.
    """
    u = _as_field(ball, u)
    idx = ball.interior_index
    v = potential_values(ball, V)[idx]
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        f = np.full(idx.size, float(f))
    elif f.shape == (ball.n_vertices,):
        f = f[idx]
    elif f.shape != (idx.size,):
        raise ValueError(f"data f has shape {f.shape}")
    return laplacian(ball, u) - v * u[idx] - f


class Classification(str, enum.Enum):
    SUBSOLUTION = "subsolution"
    SUPERSOLUTION = "supersolution"
    SOLUTION = "solution"
    NEITHER = "neither"


def classify(residual, tolerance: float = DEFAULT_TOLERANCE) -> Classification:
    """Sign test on a residual ``Lu - f``: ``>= -tol`` is sub, ``<= tol`` is super."""
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    r = np.asarray(residual, dtype=float)
    if r.size == 0:
        return Classification.SOLUTION
    sub = r.min() >= -tolerance
    sup = r.max() <= tolerance
    if sub and sup:
        return Classification.SOLUTION
    if sub:
        return Classification.SUBSOLUTION
    if sup:
        return Classification.SUPERSOLUTION
    return Classification.NEITHER


def is_subsolution(c: Classification) -> bool:
    return c in (Classification.SUBSOLUTION, Classification.SOLUTION)


def is_supersolution(c: Classification) -> bool:
    return c in (Classification.SUPERSOLUTION, Classification.SOLUTION)
