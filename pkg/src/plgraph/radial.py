"""One-dimensional reduction for spherically symmetric data on weakly
spherically symmetric graphs.

A radial function ``f(r)`` on such a graph has Laplacian

    D+(r) [f(r+1) - f(r)] + D-(r) [f(r-1) - f(r)],     r >= 1,

and at the root we use ``D+(0) [f(1) - f(0)]`` (``D-(0) = 0``), which is what the
vertex formula gives on a tree.  Dirichlet problems with radial data then reduce
to a tridiagonal system.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from .graph_core import Branching, GraphBall, is_weakly_spherically_symmetric, layer_degrees
from .operators import laplacian, potential_values


@dataclass(frozen=True)
class RadialProfile:
    """Radial values on layers ``0..R+1`` together with the layer degrees.

    ``dplus[r]`` and ``dminus[r]`` are the outer/inner degrees of layer ``r``;
    ``dminus[0]`` is 0 and ``dplus[R+1]`` is unused.
    """

    values: np.ndarray
    dplus: np.ndarray
    dminus: np.ndarray

    def __post_init__(self):
        n = len(self.values)
        if len(self.dplus) != n or len(self.dminus) != n:
            raise ValueError("values, dplus and dminus must have the same length")
        if n < 2:
            raise ValueError("a radial profile needs at least layers 0 and 1")
        if np.any(self.dplus[:-1] <= 0):
            raise ValueError("outer degree must be positive below the halo layer")
        if np.any(self.dminus[1:] <= 0):
            raise ValueError("inner degree must be positive off the root")

    @property
    def radius(self) -> int:
        """Truncation depth ``R``; the halo layer is ``R + 1``."""
        return len(self.values) - 2

    def with_values(self, values) -> "RadialProfile":
        values = np.asarray(values, dtype=float)
        if values.shape != self.values.shape:
            raise ValueError(f"expected {self.values.shape[0]} layer values, got {values.shape}")
        return replace(self, values=values)


def tree_profile(branching: Branching, radius: int, values=None) -> RadialProfile:
    """Degrees of a spherically symmetric tree: ``D+ = b(r)``, ``D- = 1`` off the root."""
    r = np.arange(radius + 2)
    dplus = branching.values(r)
    dminus = np.where(r > 0, 1.0, 0.0)
    if values is None:
        values = np.zeros(radius + 2)
    elif callable(values):
        values = np.asarray(values(r.astype(float)), dtype=float)
    return RadialProfile(np.asarray(values, dtype=float), dplus, dminus)


def profile_from_ball(ball: GraphBall, values=None) -> RadialProfile:
    """Read per-layer degrees off a weakly spherically symmetric ball."""
    if not is_weakly_spherically_symmetric(ball):
        raise ValueError("ball is not weakly spherically symmetric with respect to its center set")
    dplus_v, dminus_v = layer_degrees(ball)
    idx = ball.interior_index
    R = int(ball.layer[idx].max())
    dplus = np.zeros(R + 2)
    dminus = np.zeros(R + 2)
    for r in range(R + 1):
        first = idx[ball.layer[idx] == r][0]
        dplus[r] = dplus_v[first]
        dminus[r] = dminus_v[first] if r > 0 else 0.0
    dplus[R + 1] = np.nan
    dminus[R + 1] = np.nan
    if values is None:
        values = np.zeros(R + 2)
    return RadialProfile(np.asarray(values, dtype=float), dplus, dminus)


def radial_laplacian(profile: RadialProfile, r: int) -> float:
    R = profile.radius
    if not 0 <= r <= R:
        raise ValueError(f"layer {r} is outside 0..{R}; the halo layer has no radial Laplacian")
    f = profile.values
    out = profile.dplus[r] * (f[r + 1] - f[r])
    if r > 0:
        out += profile.dminus[r] * (f[r - 1] - f[r])
    return float(out)


def radial_laplacian_all(profile: RadialProfile) -> np.ndarray:
    """Radial Laplacian on layers ``0..R`` at once."""
    f = profile.values
    R = profile.radius
    out = profile.dplus[: R + 1] * (f[1:] - f[:-1])
    out[1:] += profile.dminus[1 : R + 1] * (f[: R] - f[1 : R + 1])
    return out


def _layer_array(x, n: int) -> np.ndarray:
    if callable(x):
        return np.asarray(x(np.arange(n, dtype=float)), dtype=float)
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        return np.full(n, float(a))
    if a.shape[0] < n:
        raise ValueError(f"need at least {n} layer values, got {a.shape[0]}")
    return a[:n]


def radial_dirichlet_solve(profile: RadialProfile, V, f, boundary: float, R: int | None = None) -> RadialProfile:
    """Solve the radial problem on layers ``0..R`` with ``u(R+1) = boundary``.

    The equations are ``D+(r)[u(r+1) - u(r)] + D-(r)[u(r-1) - u(r)] - V(r) u(r) = f(r)``.
    ``V`` and ``f`` may be scalars, per-layer arrays, or callables of ``r``.
    """
    if R is None:
        R = profile.radius
    if R > profile.radius:
        raise ValueError(f"profile only covers layers up to {profile.radius + 1}")
    n = R + 1
    dp = profile.dplus[:n]
    dm = profile.dminus[:n].copy()
    dm[0] = 0.0
    v = _layer_array(V, n)
    rhs = _layer_array(f, n).copy()
    if np.any(v < 0):
        raise ValueError("potential must be nonnegative")

    ab = np.zeros((3, n))
    ab[0, 1:] = dp[:-1]
    ab[1] = -(dp + dm + v)
    ab[2, :-1] = dm[1:]
    rhs[-1] -= dp[-1] * boundary
    u = solve_banded((1, 1), ab, rhs, check_finite=True)
    if not np.all(np.isfinite(u)):
        raise np.linalg.LinAlgError("singular radial system")

    values = np.append(u, float(boundary))
    out = RadialProfile(values, profile.dplus[: n + 1].copy(), profile.dminus[: n + 1].copy())
    resid = radial_laplacian_all(out) - v * u - _layer_array(f, n)
    scale = 1.0 + np.abs(values).max()
    # rows are scaled by D+ + D- + V; compare against that size
    if not np.all(np.abs(resid) <= 1e-12 * scale * (dp + dm + v + 1.0)):
        raise RuntimeError(f"radial solve residual {np.abs(resid).max():.3e} exceeds tolerance")
    return out


def radial_residual(profile: RadialProfile, V, f=0.0) -> np.ndarray:
    n = profile.radius + 1
    return radial_laplacian_all(profile) - _layer_array(V, n) * profile.values[:n] - _layer_array(f, n)


def lift(ball: GraphBall, profile: RadialProfile) -> np.ndarray:
    """Spread layer values over the ball's vertices."""
    if ball.max_layer > profile.radius + 1:
        raise ValueError("profile is shorter than the ball")
    return profile.values[ball.layer]


def lift_and_check(ball: GraphBall, profile: RadialProfile, V=None) -> float:
    """Largest gap between the full-graph and the radial residual on the interior.

    With ``V`` omitted this compares Laplacians only.
    """
    if not is_weakly_spherically_symmetric(ball):
        raise ValueError("ball is not weakly spherically symmetric; the radial reduction does not apply")
    u = lift(ball, profile)
    idx = ball.interior_index
    full = laplacian(ball, u)
    lay = ball.layer[idx]
    radial = radial_laplacian_all(profile)[lay]
    if V is not None:
        v = potential_values(ball, V)[idx]
        full = full - v * u[idx]
        radial = radial - v * profile.values[lay]
    return float(np.max(np.abs(full - radial))) if idx.size else 0.0
