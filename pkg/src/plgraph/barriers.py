"""Closed-form barrier families, pointwise verification and constant search.

Every barrier here is a function of a single distance: the layer ``r`` on trees
or ``|x|`` on the lattice.  Sub-barriers ``Z`` are checked against
``(1/V) Delta Z >= -1``; super-barriers ``h`` against ``(1/V) Delta h <= -1``.
Verification is done on a finite domain, either a :class:`GraphBall` or a
:class:`TreeRadial` (layers of a spherically symmetric tree, where the
Laplacian of a radial function is exact through the layer recurrence).

A pass certifies the inequality on that domain only; the report carries the
verified radius.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .graph_core import Branching
from .operators import DEFAULT_TOLERANCE, Potential, laplacian, potential_values
from .radial import radial_laplacian_all, tree_profile

SUB_FAMILIES = ("tree_power", "tree_log", "growth_gauge", "lattice_power", "lattice_log")
SUPER_FAMILIES = ("lattice_inverse", "tree_inverse")
FAMILIES = SUB_FAMILIES + SUPER_FAMILIES
TREE_FAMILIES = ("tree_power", "tree_log", "tree_inverse")
LATTICE_FAMILIES = ("lattice_power", "lattice_log", "lattice_inverse")

# scale parameter searched by default
SEARCH_PARAMETER = {
    "tree_power": "M",
    "tree_log": "M",
    "lattice_power": "K",
    "lattice_log": "K",
    "lattice_inverse": "sigma",
}


class ParameterDomainError(ValueError):
    """Barrier parameters outside the range where the family is claimed to work."""


class SearchError(RuntimeError):
    """No parameter value in the search window passes verification."""


@dataclass(frozen=True)
class TreeRadial:
    """Layers ``0..radius`` of a spherically symmetric tree (halo at ``radius + 1``)."""

    branching: Branching
    radius: int


@dataclass(frozen=True)
class BarrierSpec:
    family: str
    alpha: float = 0.0
    M: float | None = None
    K: float | None = None
    beta: float | None = None
    gamma: float | None = None
    sigma: float | None = None
    metric: str | None = None
    strict: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown barrier family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "growth_gauge" and self.metric not in (None, "combinatorial", "euclidean"):
            raise ValueError(f"unknown metric {self.metric!r}")

    @property
    def direction(self) -> str:
        return "sub" if self.family in SUB_FAMILIES else "super"

    @property
    def on_lattice(self) -> bool:
        if self.family == "growth_gauge":
            return self.metric == "euclidean"
        return self.family in LATTICE_FAMILIES

    @property
    def effective_beta(self) -> float | None:
        if self.family == "tree_power" and self.beta is None:
            return 1.0 - self.alpha
        return self.beta

    def with_param(self, name: str, value: float) -> "BarrierSpec":
        return replace(self, **{name: value})

    def params(self) -> dict:
        keys = {
            "tree_power": ("M", "beta"),
            "tree_log": ("M",),
            "growth_gauge": (),
            "lattice_power": ("K", "beta"),
            "lattice_log": ("K",),
            "lattice_inverse": ("sigma", "K", "gamma"),
            "tree_inverse": ("beta",),
        }[self.family]
        out = {"alpha": self.alpha}
        for k in keys:
            out[k] = self.effective_beta if k == "beta" else getattr(self, k)
        return out

    # -- parameter domains --------------------------------------------------

    def check(self, n: int | None = None, branching: Branching | None = None) -> None:
        """Raise :class:`ParameterDomainError` if a needed parameter is missing or,
        in strict mode, outside the family's admissible range."""
        fam, a = self.family, self.alpha
        need = [k for k, v in self.params().items() if v is None]
        if need:
            raise ParameterDomainError(f"{fam} needs parameter(s) {', '.join(need)}")
        if not self.strict:
            return
        bad = []
        if a < 0:
            bad.append("alpha must be >= 0")
        if fam == "tree_power":
            if not 0 <= a < 1:
                bad.append("tree_power needs 0 <= alpha < 1")
            if self.beta is not None and abs(self.beta - (1.0 - a)) > 1e-12:
                bad.append("tree_power needs beta = 1 - alpha")
            if self.M <= 0:
                bad.append("M must be > 0")
        elif fam == "tree_log":
            if not 0 <= a <= 1:
                bad.append("tree_log needs 0 <= alpha <= 1")
            if self.M <= 0:
                bad.append("M must be > 0")
        elif fam == "growth_gauge":
            top = 2.0 if self.on_lattice else 1.0
            if not 0 <= a <= top:
                bad.append(f"growth_gauge needs 0 <= alpha <= {top:g}")
        elif fam == "lattice_power":
            if not 0 <= a < 2:
                bad.append("lattice_power needs 0 <= alpha < 2")
            if not 0 < self.beta < (2 - a) / 2:
                bad.append(f"lattice_power needs 0 < beta < (2 - alpha)/2 = {(2 - a) / 2:g}")
            if self.K <= 0:
                bad.append("K must be > 0")
        elif fam == "lattice_log":
            if not 0 <= a <= 2:
                bad.append("lattice_log needs 0 <= alpha <= 2")
            if self.K <= 0:
                bad.append("K must be > 0")
        elif fam == "lattice_inverse":
            g = self.gamma
            if g <= 0:
                bad.append("gamma must be > 0")
            if n is not None and not g < (n - 2) / 2:
                bad.append(f"lattice_inverse needs gamma < (n - 2)/2 = {(n - 2) / 2:g}")
            if not g <= (a - 2) / 2:
                bad.append(f"lattice_inverse needs gamma <= (alpha - 2)/2 = {(a - 2) / 2:g}")
            if not self.K > (g + 1) / 2:
                bad.append(f"lattice_inverse needs K > (gamma + 1)/2 = {(g + 1) / 2:g}")
            if self.sigma <= 0:
                bad.append("sigma must be > 0")
        elif fam == "tree_inverse":
            p = branching.growth_exponent if branching is not None else None
            if self.beta <= 0:
                bad.append("beta must be > 0")
            if p is not None and not self.beta < a + p - 1:
                bad.append(f"tree_inverse needs beta < alpha + p - 1 = {a + p - 1:g}")
        if bad:
            raise ParameterDomainError("; ".join(bad))

    # -- values -------------------------------------------------------------

    def values(self, dist, sq=None, n: int | None = None) -> np.ndarray:
        """Barrier as a function of distance.  ``sq`` is the exact squared
        norm on lattices (defaults to ``dist**2``)."""
        d = np.asarray(dist, dtype=float)
        d2 = d * d if sq is None else np.asarray(sq, dtype=float)
        fam = self.family
        if fam == "tree_power":
            return -self.M * d ** self.effective_beta - 1.0
        if fam == "tree_log":
            return -self.M * np.log(2.0 + d)
        if fam == "lattice_power":
            return -self.K * d2 ** self.beta - 1.0
        if fam == "lattice_log":
            return -self.K * np.log(d2 + 2.0)
        if fam == "lattice_inverse":
            return self.sigma / (self.K + d2) ** self.gamma
        if fam == "tree_inverse":
            return (1.0 + d) ** (-self.beta)
        return self._gauge(d, n)

    def _gauge(self, d: np.ndarray, n: int | None) -> np.ndarray:
        a = self.alpha
        if self.on_lattice:
            exponent, cut = 2.0 - a, 2.0
            # smallest lattice norm beyond the cut: |(3)| in Z^1, |(2, 1)| otherwise
            first = 3.0 if n == 1 else math.sqrt(5.0)
            critical = a == 2.0
        else:
            exponent, cut, first = 1.0 - a, 1.0, 2.0
            critical = a == 1.0

        def g(t):
            return -np.log(t) if critical else -(t**exponent)

        out = np.empty_like(d)
        far = d > cut
        out[far] = g(d[far])
        out[~far] = g(first)
        return out

    def evaluate(self, domain) -> np.ndarray:
        """Tabulate the barrier on every vertex of a ball (or every layer of a radial domain)."""
        if isinstance(domain, TreeRadial):
            if self.on_lattice:
                raise ValueError(f"{self.family} lives on the lattice, not on a tree")
            self.check(branching=domain.branching)
            return self.values(np.arange(domain.radius + 2, dtype=float))
        ball = domain
        if self.on_lattice:
            if ball.family != "lattice":
                raise ValueError(f"{self.family} needs a lattice ball")
            n = ball.ids.shape[1]
            self.check(n=n)
            sq = (ball.ids.astype(np.int64) ** 2).sum(axis=1)
            return self.values(ball.distance, sq=sq, n=n)
        if ball.family == "lattice" and self.family in TREE_FAMILIES:
            raise ValueError(f"{self.family} needs a tree ball")
        branching = ball.spec.branching if ball.family == "tree" else None
        self.check(branching=branching)
        return self.values(ball.layer)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def evaluate(spec: BarrierSpec, domain) -> np.ndarray:
    return spec.evaluate(domain)


def shift(Z, H: float) -> np.ndarray:
    """``Z - H - 1`` for an upper bound ``H`` of ``Z``; the result is ``<= -1``."""
    Z = np.asarray(Z, dtype=float)
    if H < Z.max():
        raise ValueError(f"H = {H} is below sup Z = {Z.max()}")
    return Z - H - 1.0


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class BarrierReport:
    passed: bool
    margin: float
    worst_vertex: str
    worst_distance: float
    R0: float | None
    direction: str
    verified_radius: float
    parameter: dict = field(default_factory=dict)
    family: str | None = None
    n_checked: int = 0

    def to_json(self) -> dict:
        return {
            "pass": bool(self.passed),
            "margin": float(self.margin),
            "worst_vertex": self.worst_vertex,
            "R0": None if self.R0 is None else float(self.R0),
            "parameter": self.parameter,
            "family": self.family,
            "direction": self.direction,
            "verified_radius": float(self.verified_radius),
        }


def _domain_data(domain, V):
    """Distances, labels, potential and a Laplacian callable for a domain."""
    if isinstance(domain, TreeRadial):
        R = domain.radius
        layers = np.arange(R + 1, dtype=float)
        pot = V if isinstance(V, Potential) else None
        if pot is not None:
            v = pot.of_distance(layers)
        else:
            v = np.broadcast_to(np.asarray(V, dtype=float), (R + 2,))[: R + 1].astype(float)
        prof = tree_profile(domain.branching, R)

        def lap(values):
            return radial_laplacian_all(prof.with_values(values))

        labels = [str(r) for r in range(R + 1)]
        return layers, v, lap, labels.__getitem__

    ball = domain
    idx = ball.interior_index
    v = potential_values(ball, V)[idx]

    def lap(values):
        return laplacian(ball, values)

    return ball.distance[idx], v, lap, lambda k: ball.vertex_label(idx[k])


def _r0(dist: np.ndarray, failing: np.ndarray) -> float | None:
    if not failing.any():
        return float(dist.min())
    worst = dist[failing].max()
    beyond = dist[dist > worst]
    return float(beyond.min()) if beyond.size else None


def verify_field(values, domain, V, direction: str, tolerance: float = DEFAULT_TOLERANCE,
                 r_min: float | None = None, parameter: dict | None = None,
                 family: str | None = None) -> BarrierReport:
    """Check ``(1/V) Delta Z >= -1`` (sub) or ``(1/V) Delta h <= -1`` (super) on a tabulated field.

    For ``super`` the inequality may only hold far out: the report gives ``R0``,
    the smallest distance from which it holds on the rest of the domain.  With
    ``r_min`` set, the pass decision is taken on ``dist >= r_min``; otherwise on
    ``dist >= R0``.
    """
    if direction not in ("sub", "super"):
        raise ValueError(f"direction must be 'sub' or 'super', got {direction!r}")
    dist, v, lap, label = _domain_data(domain, V)
    if np.any(v <= 0):
        raise ValueError("verification divides by V; V must be positive on the interior")
    q = lap(np.asarray(values, dtype=float)) / v + 1.0
    parameter = parameter or {}

    if direction == "sub":
        k = int(np.argmin(q))
        margin = float(q[k])
        return BarrierReport(margin >= -tolerance, margin, label(k), float(dist[k]), None, "sub",
                             float(dist.max()), parameter, family, q.size)

    R0 = _r0(dist, q > tolerance)
    cut = r_min if r_min is not None else R0
    if cut is None:
        region = np.zeros(q.size, dtype=bool)
    else:
        region = dist >= cut
    if region.any():
        sel = np.flatnonzero(region)
        k = int(sel[np.argmax(q[sel])])
        margin = float(q[k])
    else:
        k = int(np.argmax(q))
        margin = float(q[k])
    passed = bool(region.any()) and margin <= tolerance
    return BarrierReport(passed, margin, label(k), float(dist[k]), R0, "super",
                         float(dist.max()), parameter, family, int(region.sum()))


def default_r_min(spec: BarrierSpec) -> float | None:
    # the lattice super-barrier is claimed for |x| >= 1; the tree one only far out
    return 1.0 if spec.family == "lattice_inverse" else None


_UNSET = object()


def verify(spec: BarrierSpec, domain, V, tolerance: float = DEFAULT_TOLERANCE,
           r_min=_UNSET) -> BarrierReport:
    """Evaluate the barrier and check its differential inequality on ``domain``."""
    if r_min is _UNSET:
        r_min = default_r_min(spec)
    values = spec.evaluate(domain)
    return verify_field(values, domain, V, spec.direction, tolerance, r_min,
                        parameter=spec.params(), family=spec.family)


@dataclass
class SearchResult:
    parameter: str
    value: float
    margin: float
    report: BarrierReport
    iterations: int


def search_parameter(spec: BarrierSpec, domain, V, which: str | None = None,
                     window: tuple[float, float] = (0.0, 10.0), iterations: int = 60,
                     tolerance: float = 0.0, r_min=_UNSET) -> SearchResult:
    """Bisect for the largest passing ``M``/``K`` (sub) or smallest passing ``sigma`` (super).

    Margins are affine in these scale parameters, so pass/fail is monotone and
    the bracket after ``iterations`` halvings is ``2**-iterations`` of the window.
    """
    which = which or SEARCH_PARAMETER.get(spec.family)
    if which is None:
        raise ValueError(f"{spec.family} has no scale parameter to search")
    lo, hi = map(float, window)
    if not 0 <= lo < hi:
        raise ValueError(f"bad search window {window}")

    def run(x):
        return verify(spec.with_param(which, x), domain, V, tolerance, r_min)

    if spec.direction == "sub":
        top = run(hi)
        if top.passed:
            return SearchResult(which, hi, top.margin, top, 0)
        found = None
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            rep = run(mid)
            if rep.passed:
                lo, found = mid, rep
            else:
                hi = mid
        if found is None:
            raise SearchError(f"no {which} in {window} passes for {spec.family}")
        return SearchResult(which, lo, found.margin, found, iterations)

    top = run(hi)
    if not top.passed:
        raise SearchError(f"no {which} in {window} passes for {spec.family}")
    best = top
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        rep = run(mid)
        if rep.passed:
            hi, best = mid, rep
        else:
            lo = mid
    return SearchResult(which, hi, best.margin, best, iterations)
