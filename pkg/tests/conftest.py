import itertools

import numpy as np
import pytest

from plgraph.dirichlet import DirichletProblem
from plgraph.graph_core import Branching, LatticeSpec, TreeSpec, build_ball, build_lattice_ball, build_tree_ball

# lines reported by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def binary_tree():
    return build_tree_ball(TreeSpec(Branching("constant", b0=2), 4))


@pytest.fixture(scope="session")
def square_tree():
    return build_tree_ball(TreeSpec(Branching("power", p=2), 3))


@pytest.fixture(scope="session")
def cube_ball():
    return build_lattice_ball(LatticeSpec(3, 4.0))


@pytest.fixture(scope="session")
def plane_ball():
    return build_lattice_ball(LatticeSpec(2, 5.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def lattice_neighbors(x):
    """Brute-force Z^n neighbors of a coordinate tuple."""
    x = tuple(x)
    for k in range(len(x)):
        for s in (-1, 1):
            y = list(x)
            y[k] += s
            yield tuple(y)


def brute_lattice(n, R):
    """Interior and halo of the Euclidean lattice ball by enumeration."""
    m = int(np.ceil(R)) + 1
    interior = {x for x in itertools.product(range(-m, m + 1), repeat=n) if sum(c * c for c in x) < R * R}
    halo = {y for x in interior for y in lattice_neighbors(x)} - interior
    return interior, halo


def random_ball(g: np.random.Generator):
    """A small tree or lattice ball (at most a few hundred interior vertices)."""
    if g.random() < 0.5:
        b = Branching("constant", b0=int(g.integers(1, 4))) if g.random() < 0.7 else Branching("power", p=2)
        R = int(g.integers(1, 4 if b.kind == "power" else 6))
        return build_ball(TreeSpec(b, R))
    n = int(g.integers(1, 4))
    return build_ball(LatticeSpec(n, float(g.uniform(1.0, {1: 40.0, 2: 8.0, 3: 4.0}[n]))))


def random_problem(g: np.random.Generator, signs: bool = True):
    """Random data; with ``signs`` the maximum-principle hypotheses f <= 0, g >= 0 hold."""
    ball = random_ball(g)
    N = ball.n_vertices
    V = g.uniform(0, 2, N) * (g.random(N) < 0.8)
    f = -g.exponential(1.0, N) if signs else g.normal(size=N)
    gb = g.exponential(1.0, N) if signs else g.normal(size=N)
    return DirichletProblem(ball, V, f, gb)
