"""Exhaustion experiments: bounded solutions as limits over growing balls.

On each ball we solve ``Lu = 0`` with ``u = gamma`` on the halo.  The probe
values are nonincreasing in the radius (comparison principle).  A positive
limit is numerical evidence for a nonconstant bounded solution tending to
``gamma``; a limit of 0 is evidence for uniqueness.  Neither is a proof.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .barriers import BarrierSpec
from .dirichlet import DirichletProblem, solve_problem
from .graph_core import (
    Branching,
    GraphBall,
    LatticeSpec,
    TreeSpec,
    build_ball,
    probe_indices,
    spec_from_dict,
    with_radius,
)
from .operators import Potential
from .radial import radial_dirichlet_solve, tree_profile

log = logging.getLogger(__name__)

CONVERGENCE_STEP = 1e-6
MONOTONE_SLACK = 1e-9
PHASE_THRESHOLD = 1e-3
TREE_RADII = (100, 1000, 10000)
LATTICE_RADII = (10, 20, 40)


class MonotonicityError(RuntimeError):
    """Probe values increased with the radius beyond round-off."""


@dataclass
class ExhaustionRun:
    graph: TreeSpec | LatticeSpec
    potential: Potential
    gamma: float = 1.0
    radii: list = field(default_factory=list)
    probes: list | None = None
    method: str = "auto"
    out: str | None = None

    def __post_init__(self):
        if not self.radii:
            self.radii = list(LATTICE_RADII if isinstance(self.graph, LatticeSpec) else (5, 10, 15))
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError(f"radii must be strictly increasing, got {self.radii}")

    @classmethod
    def from_config(cls, cfg: dict) -> "ExhaustionRun":
        probes = cfg.get("probes")
        return cls(
            graph=spec_from_dict({**cfg["graph"], "radius": cfg["graph"].get("radius", 1)}),
            potential=Potential.from_dict(cfg["potential"]),
            gamma=float(cfg.get("gamma", 1.0)),
            radii=list(cfg.get("radii") or []),
            probes=[tuple(p) if isinstance(p, (list, tuple)) else (p,) for p in probes] if probes else None,
            method=cfg.get("method", "auto"),
            out=cfg.get("out"),
        )


@dataclass
class ExhaustionResult:
    rows: list[dict]
    converged: dict
    limits: dict
    monotone: bool
    solve_reports: list = field(default_factory=list)

    def probe_series(self, probe_id: str) -> list[float]:
        return [r["u_probe"] for r in self.rows if r["probe_id"] == probe_id]


CSV_COLUMNS = ("R", "probe_id", "u_probe", "min_u", "max_u", "delta_prev")


def exhaustion_run(cfg: ExhaustionRun) -> ExhaustionResult:
    rows: list[dict] = []
    previous: dict[str, float] = {}
    converged: dict[str, bool] = {}
    reports = []
    for R in cfg.radii:
        ball = build_ball(with_radius(cfg.graph, R))
        rep = solve_problem(DirichletProblem(ball, cfg.potential, 0.0, cfg.gamma), cfg.method)
        reports.append(rep.to_json() | {"R": R, "n_unknowns": int(ball.interior.sum())})
        for i in probe_indices(ball, cfg.probes):
            pid = ball.vertex_label(i)
            val = float(rep.u[i])
            delta = val - previous[pid] if pid in previous else None
            if delta is not None and delta > MONOTONE_SLACK * max(1.0, abs(cfg.gamma)):
                raise MonotonicityError(f"probe {pid}: u rose by {delta:.3e} from the previous radius to R = {R}")
            if delta is not None:
                converged[pid] = abs(delta) < CONVERGENCE_STEP
            previous[pid] = val
            rows.append({"R": R, "probe_id": pid, "u_probe": val, "min_u": rep.min_u,
                         "max_u": rep.max_u, "delta_prev": delta})
        log.info("R=%s solved (%s unknowns, %s iterations)", R, int(ball.interior.sum()), rep.iterations)
    return ExhaustionResult(rows, converged, dict(previous), True, reports)


# ---------------------------------------------------------------------------
# trees via the radial recurrence
# ---------------------------------------------------------------------------


def radial_exhaustion(branching: Branching, potential: Potential, gamma: float, radii) -> list[float]:
    """Root values ``u_R(0)`` of the radial exhaustion for each radius."""
    radii = list(radii)
    prof = tree_profile(branching, max(radii))
    V = potential.of_distance
    return [float(radial_dirichlet_solve(prof, V, 0.0, gamma, R).values[0]) for R in radii]


@dataclass
class PhaseCell:
    branching: str
    alpha: float
    radii: list
    u_root: list
    classification: str
    threshold: float

    def to_row(self) -> dict:
        row = {"branching": self.branching, "alpha": self.alpha}
        for R, u in zip(self.radii, self.u_root):
            row[f"u0_R{R}"] = u
        row["classification"] = self.classification
        row["threshold"] = self.threshold
        return row


def classify_cell(values: list[float], threshold: float = PHASE_THRESHOLD) -> str:
    """``nonunique`` if the last probe value is above ``threshold``; ``unique``
    if it is below and still decreasing; otherwise ``inconclusive``."""
    last = values[-1]
    if last > threshold:
        return "nonunique"
    decaying = len(values) > 1 and values[-1] < values[-2]
    return "unique" if decaying else "inconclusive"


def tree_phase_sweep(branchings, alphas, gamma: float = 1.0, radii=TREE_RADII, c0: float = 1.0,
                     threshold: float = PHASE_THRESHOLD) -> list[PhaseCell]:
    cells = []
    for b in branchings:
        for a in alphas:
            vals = radial_exhaustion(b, Potential(c0, a), gamma, radii)
            cells.append(PhaseCell(b.label, float(a), list(radii), vals, classify_cell(vals, threshold), threshold))
    return cells


# ---------------------------------------------------------------------------
# growth ratios
# ---------------------------------------------------------------------------


def growth_ratio_profile(u, gauge: BarrierSpec, ball: GraphBall | None = None) -> dict:
    """``r -> max over layer r of u / |gauge|``.

    With ``ball`` omitted, ``u`` is taken as a per-layer radial array.  Lattice
    vertices are grouped by ``floor(|x|)``.
    """
    if gauge.family != "growth_gauge":
        raise ValueError("growth ratios need a growth_gauge spec")
    u = np.asarray(u, dtype=float)
    if ball is None:
        r = np.arange(u.size, dtype=float)
        z = gauge.values(r)
        ratios = u / np.abs(z)
        return {int(k): float(v) for k, v in zip(r, ratios)}
    z = gauge.evaluate(ball)
    ratios = u / np.abs(z)
    if ball.family == "lattice":
        key = np.floor(ball.distance).astype(int)
    else:
        key = ball.layer
    out = {}
    order = np.argsort(key, kind="stable")
    keys, starts = np.unique(key[order], return_index=True)
    for k, chunk in zip(keys, np.split(ratios[order], starts[1:])):
        out[int(k)] = float(chunk.max())
    return out
