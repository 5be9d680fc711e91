import numpy as np
import pytest

from campaign_mpe import scenario_io, solver
from campaign_mpe.core import Axis, Campaign, Commander, Objective, OrderKind
from campaign_mpe.transitions import ImprovementEntry, ProbabilityModel


def fig1_campaign(discount=0.9, model=None):
    """Six objectives on axes (0,1), (2,3), (4,5); commander 0 runs the first
    axis, commander 1 the other two."""
    objectives = [Objective(o, 1.0, f"O{o}") for o in range(6)]
    axes = [Axis(0, (0, 1)), Axis(1, (2, 3)), Axis(2, (4, 5))]
    commanders = [Commander(0, (0,)), Commander(1, (1, 2))]
    if model is None:
        model = ProbabilityModel.uniform(6, attack=0.3, reinforce=0.4)
    return Campaign(objectives, axes, commanders, discount, model)


FIG1_STATE = (2, 2, 1, 2, 1, 1)


def random_campaign(seed, max_objectives=12, max_axes=3):
    """Seeded random campaign whose probability model satisfies the
    monotonicity and defense-dominance assumptions by construction: all
    attack probabilities stay below 0.5 and improvements condition only on
    the acting player's own controlled neighbors."""
    rng = np.random.default_rng(seed)
    n_axes = int(rng.integers(1, max_axes + 1))
    while True:
        sizes = rng.integers(2, 5, size=n_axes)
        if sizes.sum() <= max_objectives:
            break
    n = int(sizes.sum())
    objectives = [Objective(o, float(rng.uniform(0.5, 2.0)), f"O{o}")
                  for o in range(n)]
    axes, start = [], 0
    for i, size in enumerate(sizes):
        axes.append(Axis(i, tuple(range(start, start + int(size)))))
        start += int(size)
    axis_ids = list(rng.permutation(n_axes))
    n_commanders = int(rng.integers(1, n_axes + 1))
    groups = [axis_ids[i::n_commanders] for i in range(n_commanders)]
    commanders = [Commander(i, tuple(g)) for i, g in enumerate(groups)]

    def rows(lo, hi):
        return {p: list(rng.uniform(lo, hi, n)) for p in (1, 2)}

    improvements = []
    for axis in axes:
        objs = axis.objectives
        for k in range(len(objs) - 1):
            improvements.append(ImprovementEntry(
                1, objs[k + 1], OrderKind.ATTACK, frozenset({objs[k]}),
                float(rng.uniform(0.05, 0.15))))
            improvements.append(ImprovementEntry(
                2, objs[k], OrderKind.ATTACK, frozenset({objs[k + 1]}),
                float(rng.uniform(0.05, 0.15))))
            improvements.append(ImprovementEntry(
                1, objs[k], OrderKind.REINFORCE, frozenset({objs[k + 1]}),
                float(rng.uniform(0.05, 0.15))))
    model = ProbabilityModel(rows(0.05, 0.20), rows(0.20, 0.50), improvements)
    discount = float(rng.uniform(0.70, 0.92))
    return Campaign(objectives, axes, commanders, discount, model)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bundled():
    def load(name):
        return scenario_io.load_scenario(scenario_io.bundled_scenario_path(name))
    return load


@pytest.fixture(scope="session")
def solved(bundled):
    """Memoized solver runs shared across the whole test session."""
    cache = {}

    def run(name, algo="avi", epsilon=1e-3):
        key = (name, algo, epsilon)
        if key not in cache:
            campaign, initial = bundled(name)
            fn = solver.accelerated_vi if algo == "avi" else solver.shapley_vi
            values, policy, report = fn(campaign, epsilon)
            cache[key] = (campaign, initial, values, policy, report)
        return cache[key]

    return run
