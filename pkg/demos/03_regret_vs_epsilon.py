#!/usr/bin/env python3
"""Regret against the privacy level, with the closed-form bound overlaid.

Replays the same Bernoulli stream under tunings for a grid of epsilon
targets. Regret should trend down as epsilon grows (privacy loosens) and
sit far below the worst-case theory curve, which is what the asymptotic
analysis prices in. Uses modest sizes so it finishes in about a minute;
scale T and reps up for smoother curves.
"""

import math

import numpy as np

from l2p import bernoulli_experts, monte_carlo, tune_ope

T, d, delta, reps = 20_000, 10, 1e-6, 30
stream = bernoulli_experts(d, T, np.linspace(0.35, 0.65, d), seed=4)

print(f"T={T} d={d} delta={delta} reps={reps}")
print(f"{'eps':>6} {'B':>4} {'eta':>10} {'mean regret':>12} {'std':>8} {'theory':>10}")
for eps in (0.05, 0.1, 0.2, 0.5, 1.0):
    config = tune_ope(T, d, eps, delta)
    mc = monte_carlo(config, "mw", stream, reps, base_seed=11, keep_transcripts=False)
    theory = math.sqrt(T * math.log(d)) + T ** (1 / 3) * math.log(d) * math.log(
        T / delta
    ) / eps ** (2 / 3)
    print(
        f"{eps:>6} {config.B:>4} {config.eta:>10.2e} "
        f"{mc.mean_regret:>12.1f} {mc.std_regret:>8.1f} {theory:>10.0f}"
    )

print()
print("the same sweep is available as a CSV artifact via:")
print("  l2p sweep --config run.json --epsilon-grid 0.05 0.1 0.2 0.5 1.0")
