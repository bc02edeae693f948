"""Finite Dirichlet problems ``Lu = f`` in the interior, ``u = g`` on the halo.

The interior equations, multiplied by ``-mu(x)``, give the symmetric system

    (deg(x) + mu(x) V(x)) u(x) - sum_{y interior} w(x, y) u(y)
        = -mu(x) f(x) + sum_{y halo} w(x, y) g(y),

which is positive definite for ``V >= 0`` on a connected interior with a
nonempty halo.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .barriers import BarrierSpec, shift, verify
from .graph_core import GraphBall
from .operators import (
    DEFAULT_TOLERANCE,
    classify,
    is_subsolution,
    is_supersolution,
    potential_values,
    schrodinger_residual,
)

log = logging.getLogger(__name__)

SOLVER_RTOL = 1e-12
DIRECT_CAP = 500


@dataclass
class DirichletProblem:
    ball: GraphBall
    V: object
    f: object = 0.0
    g: object = 0.0

    def potential(self) -> np.ndarray:
        v = potential_values(self.ball, self.V)
        if np.any(v[self.ball.interior] < 0):
            raise ValueError("potential must be nonnegative on the interior")
        return v

    def f_field(self) -> np.ndarray:
        return _extend(self.ball, self.f, self.ball.interior_index, "f")

    def g_field(self) -> np.ndarray:
        return _extend(self.ball, self.g, self.ball.halo_index, "g")


def _extend(ball: GraphBall, x, where: np.ndarray, name: str) -> np.ndarray:
    """Accept a scalar, a full-length field, or values on ``where`` only."""
    out = np.zeros(ball.n_vertices)
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        out[where] = float(x)
    elif x.shape == (ball.n_vertices,):
        out[where] = x[where]
    elif x.shape == (where.size,):
        out[where] = x
    else:
        raise ValueError(f"{name} has shape {x.shape}; expected a scalar, {ball.n_vertices} or {where.size} values")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} has non-finite values")
    return out


@dataclass
class LinearSystem:
    A: sp.csr_matrix
    b: np.ndarray
    unknowns: np.ndarray
    problem: DirichletProblem


@dataclass
class SolveReport:
    u: np.ndarray
    iterations: int
    relative_residual: float
    converged: bool
    min_u: float
    max_u: float
    method: str
    equation_residual: float = float("nan")

    def to_json(self) -> dict:
        return {
            "iterations": int(self.iterations),
            "relative_residual": float(self.relative_residual),
            "converged": bool(self.converged),
            "min_u": float(self.min_u),
            "max_u": float(self.max_u),
            "method": self.method,
            "equation_residual": float(self.equation_residual),
        }


class SolverError(RuntimeError):
    pass


def assemble(p: DirichletProblem) -> LinearSystem:
    ball = p.ball
    idx = ball.interior_index
    if idx.size == 0:
        raise ValueError("interior is empty")
    known = ball.interior | ball.halo
    rows = ball.weights[idx]
    if np.any(~known[rows.indices[rows.data > 0]]):
        raise ValueError("an interior vertex has a neighbor outside interior and halo")

    v = p.potential()
    f = p.f_field()
    g = p.g_field()
    W_ii = rows[:, idx]
    W_ih = rows[:, ball.halo_index]
    diag = ball.degree[idx] + ball.mu[idx] * v[idx]
    A = (sp.diags(diag) - W_ii).tocsr()
    A.sort_indices()
    b = -ball.mu[idx] * f[idx] + W_ih @ g[ball.halo_index]
    return LinearSystem(A, b, idx, p)


def conjugate_gradient(A: sp.csr_matrix, b: np.ndarray, rtol: float = SOLVER_RTOL,
                       maxiter: int | None = None, x0: np.ndarray | None = None):
    """Jacobi-preconditioned conjugate gradient for SPD ``A``.

    Returns ``(x, iterations, relative_residual, converged)`` where the residual
    is the true ``||b - Ax|| / ||b||``.
    """
    n = b.size
    maxiter = 10 * n if maxiter is None else maxiter
    bnorm = np.linalg.norm(b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        x[:] = 0.0
        return x, 0, 0.0, True
    dinv = 1.0 / A.diagonal()
    r = b - A @ x
    z = dinv * r
    p = z.copy()
    rz = r @ z
    k = 0
    while k < maxiter:
        if np.linalg.norm(r) <= rtol * bnorm:
            break
        Ap = A @ p
        step = rz / (p @ Ap)
        x += step * p
        r -= step * Ap
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
        k += 1
        if k % 50 == 0:
            # recompute to stop drift of the recursive residual
            r = b - A @ x
    rel = np.linalg.norm(b - A @ x) / bnorm
    return x, k, float(rel), bool(rel <= rtol * 1.01)


def direct_solve(A: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    return np.atleast_1d(spla.spsolve(A.tocsc(), b))


def solve(system: LinearSystem, method: str = "auto", rtol: float = SOLVER_RTOL,
          raise_on_failure: bool = True) -> SolveReport:
    """Solve an assembled system.

    ``auto`` uses direct elimination below :data:`DIRECT_CAP` unknowns and
    conjugate gradient above it.
    """
    A, b = system.A, system.b
    n = b.size
    if method == "auto":
        method = "direct" if n < DIRECT_CAP else "cg"
    if method == "direct":
        x = direct_solve(A, b)
        bnorm = np.linalg.norm(b)
        rel = float(np.linalg.norm(b - A @ x) / bnorm) if bnorm else 0.0
        iters, ok = 0, bool(np.all(np.isfinite(x)))
    elif method == "cg":
        x, iters, rel, ok = conjugate_gradient(A, b, rtol)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not ok:
        msg = f"{method} solve did not converge: relative residual {rel:.3e} after {iters} iterations"
        if raise_on_failure:
            raise SolverError(msg)
        log.warning(msg)

    p = system.problem
    u = p.g_field()
    u[system.unknowns] = x
    eq = schrodinger_residual(p.ball, p.V, u, p.f_field())
    ui = u[system.unknowns]
    return SolveReport(u, iters, rel, ok, float(ui.min()), float(ui.max()), method,
                       float(np.abs(eq).max()))


def solve_problem(p: DirichletProblem, method: str = "auto", **kw) -> SolveReport:
    return solve(assemble(p), method, **kw)


def comparison_scale(p: DirichletProblem, *fields) -> float:
    vals = [1.0, float(np.abs(p.g_field()).max(initial=0.0))]
    vals += [float(np.abs(np.asarray(x, dtype=float)).max(initial=0.0)) for x in fields]
    return max(vals)


# ---------------------------------------------------------------------------
# comparison and the Phragmén-Lindelöf certificate
# ---------------------------------------------------------------------------


@dataclass
class ComparisonReport:
    passed: bool
    worst_gap: float
    worst_vertex: str
    tolerance: float


def comparison_check(p: DirichletProblem, u_sub, u_super, tolerance: float = DEFAULT_TOLERANCE) -> ComparisonReport:
    """Check ``u_sub <= u_super`` on the interior for a sub/supersolution pair.

    Both fields are first classified against ``Lu = f``; ``u_sub <= u_super``
    must already hold on the halo.  The tolerance is scaled by the size of the
    data and of the fields.
    """
    ball = p.ball
    u_sub = np.asarray(u_sub, dtype=float)
    u_super = np.asarray(u_super, dtype=float)
    tol = tolerance * comparison_scale(p, u_sub, u_super)
    f = p.f_field()
    c_sub = classify(schrodinger_residual(ball, p.V, u_sub, f), tol)
    if not is_subsolution(c_sub):
        raise ValueError(f"u_sub is not a subsolution (classified {c_sub.value})")
    c_sup = classify(schrodinger_residual(ball, p.V, u_super, f), tol)
    if not is_supersolution(c_sup):
        raise ValueError(f"u_super is not a supersolution (classified {c_sup.value})")
    h = ball.halo_index
    if np.any(u_sub[h] > u_super[h] + tol):
        raise ValueError("u_sub exceeds u_super on the halo")
    idx = ball.interior_index
    gap = u_sub[idx] - u_super[idx]
    k = int(np.argmax(gap))
    return ComparisonReport(bool(gap[k] <= tol), float(gap[k]), ball.vertex_label(idx[k]), tol)


@dataclass
class AlphaCheck:
    alpha: float
    halo_ok: bool
    interior_ok: bool | None
    worst_gap: float | None


@dataclass
class PLCertificate:
    """Outcome of the comparison ``u <= -alpha * Zbar`` on one finite ball.

    This is a statement at the ball's radius only; a failing halo test means the
    growth condition is not visible at this radius, not that it fails.
    """

    certified: bool
    smallest_alpha: float | None
    checks: list[AlphaCheck] = field(default_factory=list)
    envelope: np.ndarray | None = None
    max_ratio: float | None = None
    note: str = ""
    radius: float = 0.0


def pl_certificate(ball: GraphBall, V, u, barrier: BarrierSpec, alpha_schedule,
                   tolerance: float = DEFAULT_TOLERANCE) -> PLCertificate:
    """Compare a subsolution ``u`` of ``Lu = 0`` with the shifted barriers ``-alpha * Zbar``."""
    if barrier.direction != "sub":
        raise ValueError("the certificate needs a sub-barrier family")
    rep = verify(barrier, ball, V, tolerance)
    if not rep.passed:
        raise ValueError(f"barrier {barrier.family} fails verification (margin {rep.margin:.3e})")
    Z = barrier.evaluate(ball)
    zbar = shift(Z, float(Z.max()))
    u = np.asarray(u, dtype=float)
    h = ball.halo_index
    radius = float(ball.distance[h].min()) if h.size else float(ball.distance.max())

    checks = []
    passing = []
    for a in sorted(map(float, alpha_schedule), reverse=True):
        if a <= 0:
            raise ValueError("alpha schedule must be positive")
        za = -a * zbar
        halo_ok = bool(np.all(u[h] < za[h]))
        if not halo_ok:
            checks.append(AlphaCheck(a, False, None, None))
            continue
        p = DirichletProblem(ball, V, 0.0, za)
        cmp = comparison_check(p, u, za, tolerance)
        checks.append(AlphaCheck(a, True, cmp.passed, cmp.worst_gap))
        if cmp.passed:
            passing.append(a)

    if not passing:
        return PLCertificate(False, None, checks,
                             note=f"halo hypothesis u < -alpha*Zbar not met at radius {radius:g} for any alpha",
                             radius=radius)
    a_min = min(passing)
    idx = ball.interior_index
    ratio = float(np.max(u[idx] / np.abs(zbar[idx])))
    return PLCertificate(True, a_min, checks, envelope=-a_min * zbar, max_ratio=ratio,
                         note=f"u <= {a_min:g} * |Zbar| on the ball of radius {radius:g}",
                         radius=radius)
