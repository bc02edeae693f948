import numpy as np
import pytest

from plgraph.barriers import BarrierSpec
from plgraph.experiments import (
    CSV_COLUMNS,
    ExhaustionRun,
    classify_cell,
    exhaustion_run,
    growth_ratio_profile,
    radial_exhaustion,
    tree_phase_sweep,
)
from plgraph.dirichlet import DirichletProblem, solve_problem
from plgraph.graph_core import Branching, LatticeSpec, TreeSpec, build_ball
from plgraph.operators import Potential
from plgraph.radial import radial_dirichlet_solve, tree_profile


def test_exhaustion_rows_and_monotone():
    run = ExhaustionRun(LatticeSpec(3, 1), Potential(1.0, 1.0, "euclidean"), 1.0, [2, 4, 6],
                        probes=[(0, 0, 0), (1, 0, 0)])
    res = exhaustion_run(run)
    assert len(res.rows) == 6
    assert all(set(r) == set(CSV_COLUMNS) for r in res.rows)
    for pid in ("0:0:0", "1:0:0"):
        s = res.probe_series(pid)
        assert all(b <= a + 1e-12 for a, b in zip(s, s[1:]))
    assert res.rows[0]["delta_prev"] is None
    assert set(res.limits) == {"0:0:0", "1:0:0"} and res.monotone


def test_exhaustion_tree_matches_radial():
    b = Branching("constant", b0=2)
    V = Potential(1.0, 1.0)
    res = exhaustion_run(ExhaustionRun(TreeSpec(b, 1), V, 1.0, [2, 4, 6]))
    np.testing.assert_allclose(res.probe_series("0:0"), radial_exhaustion(b, V, 1.0, [2, 4, 6]), atol=1e-12)


def test_run_validation_and_config():
    with pytest.raises(ValueError):
        ExhaustionRun(LatticeSpec(3, 1), Potential(1.0, 1.0), radii=[4, 2])
    run = ExhaustionRun.from_config({
        "graph": {"family": "lattice", "n": 2},
        "potential": {"kind": "power", "c0": 1.0, "alpha": 3.0, "metric": "euclidean"},
        "gamma": 2.0, "radii": [3, 5], "probes": [[0, 0]],
    })
    assert run.graph == LatticeSpec(2, 1) and run.gamma == 2.0 and run.probes == [(0, 0)]


def test_linearity_in_gamma():
    run = lambda g: exhaustion_run(  # noqa: E731
        ExhaustionRun(LatticeSpec(3, 1), Potential(1.0, 3.0, "euclidean"), g, [3, 5])).limits["0:0:0"]
    assert run(2.0) == pytest.approx(2 * run(1.0), rel=1e-12)


def test_classify_cell():
    assert classify_cell([0.5, 0.3]) == "nonunique"
    assert classify_cell([0.01, 1e-4]) == "unique"
    assert classify_cell([1e-4, 1e-4]) == "inconclusive"
    assert classify_cell([1e-4]) == "inconclusive"


def test_phase_sweep_small():
    cells = tree_phase_sweep([Branching("constant", b0=2), Branching("power", p=2)], [1.0], radii=[1000, 10000])
    assert [c.classification for c in cells] == ["unique", "nonunique"]
    row = cells[1].to_row()
    assert list(row) == ["branching", "alpha", "u0_R1000", "u0_R10000", "classification", "threshold"]
    assert row["u0_R1000"] == pytest.approx(0.36119427, abs=1e-8)
    # b = 2 at R = 1000 is still above the threshold: the decay is O(1/R)
    assert classify_cell(cells[0].u_root[:1]) == "nonunique"


def test_growth_ratio_radial_and_lattice():
    gauge = BarrierSpec("growth_gauge", alpha=0.5)
    prof = growth_ratio_profile(np.ones(5), gauge)
    assert prof[0] == pytest.approx(1 / np.sqrt(2)) and prof[4] == pytest.approx(0.5)
    ball = build_ball(LatticeSpec(3, 5))
    u = solve_problem(DirichletProblem(ball, Potential(1.0, 1.0, "euclidean"), 0.0, 1.0)).u
    out = growth_ratio_profile(u, BarrierSpec("growth_gauge", alpha=1.0, metric="euclidean"), ball)
    assert sorted(out) == list(range(0, 6)) and all(v > 0 for v in out.values())
    with pytest.raises(ValueError):
        growth_ratio_profile(u, BarrierSpec("tree_log", alpha=1.0, M=1.0), ball)


def test_growth_ratio_trivial_cases():
    gauge = BarrierSpec("growth_gauge", alpha=1.0)
    r = np.arange(50, dtype=float)
    z = gauge.values(r)
    assert all(v == 0 for v in growth_ratio_profile(np.zeros(50), gauge).values())
    np.testing.assert_allclose(list(growth_ratio_profile(-z, gauge).values()), 1.0)


def test_bounded_solution_ratio_below_inverse_log():
    # 0 <= u <= 1, so u / |Z| <= 1 / log r beyond the constant core
    b = Branching("constant", b0=2)
    u = radial_dirichlet_solve(tree_profile(b, 1000), Potential(1.0, 1.0).of_distance, 0.0, 1.0).values
    ratios = growth_ratio_profile(u, BarrierSpec("growth_gauge", alpha=1.0))
    r = np.arange(2, 1002)
    assert np.all(np.array([ratios[k] for k in r]) <= 1 / np.log(r) + 1e-15)
    assert ratios[1001] == pytest.approx(1 / np.log(1001))


def test_z3_contrast():
    def last(alpha):
        run = ExhaustionRun(LatticeSpec(3, 1), Potential(1.0, alpha, "euclidean"), 1.0, [10, 20, 30, 40])
        return exhaustion_run(run).limits["0:0:0"]

    assert last(3.0) > 10 * last(1.0)
