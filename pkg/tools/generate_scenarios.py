"""Regenerate the bundled example scenarios.

Deterministic (seeded); run from the repository root:

    python tools/generate_scenarios.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from campaign_mpe.core import Axis, Campaign, Commander, Objective, OrderKind
from campaign_mpe.scenario_io import save_scenario
from campaign_mpe.transitions import ImprovementEntry, Override, ProbabilityModel

OUT = Path(__file__).resolve().parents[1] / "src" / "campaign_mpe" / "scenarios"

# name, axis sizes, commander axis groups, discount
SHAPES = [
    ("campaign06", (2, 4), [(0, 1)], 0.9),
    ("campaign10", (2, 4, 4), [(0,), (1, 2)], 0.9),
    ("campaign14", (3, 3, 4, 4), [(0,), (1,), (2, 3)], 0.85),
    ("campaign18", (4, 4, 5, 5), [(0,), (1,), (2, 3)], 0.8),
    ("campaign22", (4, 4, 4, 5, 5), [(0,), (1, 2), (3, 4)], 0.7),
]


def build(name, sizes, groups, discount, seed):
    rng = np.random.default_rng(seed)
    n = sum(sizes)
    objectives = [Objective(o, round(float(rng.uniform(0.5, 2.0)), 3), f"O{o}")
                  for o in range(n)]
    axes, start = [], 0
    for i, size in enumerate(sizes):
        axes.append(Axis(i, tuple(range(start, start + size))))
        start += size
    commanders = [Commander(i, g) for i, g in enumerate(groups)]

    def rows(lo, hi):
        return {p: [round(float(v), 4) for v in rng.uniform(lo, hi, n)]
                for p in (1, 2)}

    # bases and boosts are capped so both players' attack probabilities stay
    # below 0.5 everywhere, which keeps the defended-retention vs retake
    # comparison satisfied by construction
    improvements = []
    for axis in axes:
        objs = axis.objectives
        for k in range(len(objs) - 1):
            improvements.append(ImprovementEntry(
                player=1, target=objs[k + 1], kind=OrderKind.ATTACK,
                condition=frozenset({objs[k]}),
                boost=round(float(rng.uniform(0.05, 0.15)), 4)))
            improvements.append(ImprovementEntry(
                player=2, target=objs[k], kind=OrderKind.ATTACK,
                condition=frozenset({objs[k + 1]}),
                boost=round(float(rng.uniform(0.05, 0.15)), 4)))
        for k in range(len(objs) - 1):
            improvements.append(ImprovementEntry(
                player=1, target=objs[k], kind=OrderKind.REINFORCE,
                condition=frozenset({objs[k + 1]}),
                boost=round(float(rng.uniform(0.05, 0.15)), 4)))
            improvements.append(ImprovementEntry(
                player=2, target=objs[k + 1], kind=OrderKind.REINFORCE,
                condition=frozenset({objs[k]}),
                boost=round(float(rng.uniform(0.05, 0.15)), 4)))

    model = ProbabilityModel(rows(0.10, 0.20), rows(0.25, 0.45), improvements)
    campaign = Campaign(objectives, axes, commanders, discount, model)
    # every axis split mid-chain: prefix held by Player 1, rest by Player 2
    initial = []
    for size in sizes:
        k = (size + 1) // 2
        initial += [1] * k + [2] * (size - k)
    return campaign, tuple(initial)


def build_nonisotone():
    """Three single-objective axes with tabulated attack probabilities and no
    reinforcement; gaining the first objective worsens Player 1's value."""
    objectives = [Objective(o, 1.0, f"O{o}") for o in range(3)]
    axes = [Axis(i, (i,)) for i in range(3)]
    commanders = [Commander(i, (i,)) for i in range(3)]
    s, sp = (1, 1, 2), (2, 1, 2)
    overrides = [
        Override(s, 1, 2, alpha=1.0),
        Override(s, 2, 0, alpha=1.0),
        Override(s, 2, 1, alpha=1.0),
        Override(sp, 1, 0, alpha=1.0),
        Override(sp, 1, 2, alpha=1.0),
        Override(sp, 2, 1, alpha=1.0),
    ]
    zero = {1: [0.0] * 3, 2: [0.0] * 3}
    model = ProbabilityModel(zero, {1: [0.0] * 3, 2: [0.0] * 3},
                             overrides=overrides)
    campaign = Campaign(objectives, axes, commanders, 0.9, model)
    return campaign, s


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for seed, (name, sizes, groups, discount) in enumerate(SHAPES, start=1):
        campaign, initial = build(name, sizes, groups, discount, seed)
        save_scenario(campaign, initial, OUT / f"{name}.json", name)
        print(f"{name}: {campaign.num_achievable} states")
    campaign, initial = build_nonisotone()
    save_scenario(campaign, initial, OUT / "nonisotone3.json", "nonisotone3")
    print(f"nonisotone3: {campaign.num_achievable} states")


if __name__ == "__main__":
    main()
