"""Algorithm-vs-adversary games: regret, replicates, baselines.

Regret is always measured against the best fixed decision in hindsight.
Replicates are embarrassingly parallel: replicate ``i`` derives its own
generator from ``replicate_seed(base_seed, i)`` and results are folded
in replicate order, so summaries do not depend on the thread count.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .adversaries import LossStream
from .measures import MeasureState, mw_sequence, rmw_sequence
from .seeding import replicate_seed
from .transform import L2PConfig, PreparedRun, Transcript

REP_CSV_COLUMNS = (
    "rep",
    "seed",
    "T",
    "B",
    "eta",
    "p",
    "regret",
    "switches_x",
    "switches_y",
    "total_loss",
    "comparator_loss",
)


@dataclass(frozen=True)
class GameResult:
    """One full game: transcript, losses, and the exact regret identity.

    ``transcript`` may be dropped (None) by replicated drivers to bound
    memory; the switch and fake-switch counts survive either way.
    """

    transcript: Transcript | None
    total_loss: float
    comparator_loss: float
    regret: float
    switch_count_x: int
    switch_count_y: int
    seed: int
    wallclock: float
    fake_switch_count: int = 0


def best_in_hindsight_ope(stream: LossStream) -> tuple[int, float]:
    """Best fixed expert; ties break toward the lowest index."""
    totals = stream.values.sum(axis=0)
    best = int(np.argmin(totals))
    return best, float(totals[best])


def best_in_hindsight_oco_ball(stream: LossStream, radius: float) -> tuple[np.ndarray, float]:
    """Best fixed point in the ball for linear losses: -R * G/|G|, loss -R |G|."""
    total = stream.values.sum(axis=0)
    norm = float(np.linalg.norm(total))
    if norm == 0.0:
        return np.zeros(stream.d), 0.0
    return -radius * total / norm, -radius * norm


def measure_sequence(config: L2PConfig, measure_kind: str, stream: LossStream) -> list[MeasureState]:
    """Precompute the per-batch measures for a (config, stream) pair.

    The measures depend only on the losses, never on the run's coins, so
    one sequence serves every replicate.
    """
    if measure_kind == "mw":
        return mw_sequence(stream.values, config.eta, config.B)
    if measure_kind == "rmw":
        if config.beta is None:
            raise ValueError("ball runs need beta/lam/radius on the config")
        return rmw_sequence(stream.values, config.beta, config.lam, config.radius, config.B)
    raise ValueError(f"unknown measure kind {measure_kind!r}")


def comparator_loss(measure_kind: str, stream: LossStream, config: L2PConfig) -> float:
    if measure_kind == "mw":
        return best_in_hindsight_ope(stream)[1]
    return best_in_hindsight_oco_ball(stream, config.radius)[1]


def play_game(
    config: L2PConfig,
    measure_kind: str,
    stream: LossStream,
    seed: int,
    prepared: PreparedRun | None = None,
    keep_transcript: bool = True,
) -> GameResult:
    """One seeded run against a fixed stream, with its regret."""
    if prepared is None:
        prepared = PreparedRun(
            config, measure_sequence(config, measure_kind, stream), stream.values
        )
    start = time.perf_counter()
    transcript = prepared.run(np.random.default_rng(seed))
    elapsed = time.perf_counter() - start
    total = transcript.total_loss
    comp = comparator_loss(measure_kind, stream, config)
    return GameResult(
        transcript=transcript if keep_transcript else None,
        total_loss=total,
        comparator_loss=comp,
        regret=total - comp,
        switch_count_x=transcript.switch_count_x,
        switch_count_y=transcript.switch_count_y,
        seed=seed,
        wallclock=elapsed,
        fake_switch_count=transcript.fake_switch_count,
    )


def _std(values: np.ndarray) -> float:
    return 0.0 if values.size <= 1 else float(values.std(ddof=1))


@dataclass(frozen=True)
class MonteCarloSummary:
    results: tuple[GameResult, ...]
    mean_regret: float
    std_regret: float
    mean_switches_x: float
    std_switches_x: float
    mean_switches_y: float
    config: L2PConfig

    def rep_rows(self) -> list[list]:
        rows = []
        for i, r in enumerate(self.results):
            rows.append(
                [
                    i,
                    r.seed,
                    self.config.T,
                    self.config.B,
                    repr(self.config.eta),
                    repr(self.config.p),
                    repr(r.regret),
                    r.switch_count_x,
                    r.switch_count_y,
                    repr(r.total_loss),
                    repr(r.comparator_loss),
                ]
            )
        return rows

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REP_CSV_COLUMNS)
        writer.writerows(self.rep_rows())

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_reps": len(self.results),
                "mean_regret": self.mean_regret,
                "std_regret": self.std_regret,
                "mean_switches_x": self.mean_switches_x,
                "std_switches_x": self.std_switches_x,
                "mean_switches_y": self.mean_switches_y,
            },
            sort_keys=True,
        )


def monte_carlo(
    config: L2PConfig,
    measure_kind: str,
    stream: LossStream,
    n_reps: int,
    base_seed: int,
    threads: int = 1,
    keep_transcripts: bool = True,
) -> MonteCarloSummary:
    """Replicated runs on one fixed stream with derived per-rep seeds."""
    if n_reps < 1:
        raise ValueError("need at least one replicate")
    prepared = PreparedRun(config, measure_sequence(config, measure_kind, stream), stream.values)
    seeds = [replicate_seed(base_seed, i) for i in range(n_reps)]

    def one(seed: int) -> GameResult:
        return play_game(
            config, measure_kind, stream, seed,
            prepared=prepared, keep_transcript=keep_transcripts,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    regrets = np.array([r.regret for r in results])
    sx = np.array([r.switch_count_x for r in results], dtype=np.float64)
    sy = np.array([r.switch_count_y for r in results], dtype=np.float64)
    return MonteCarloSummary(
        results=tuple(results),
        mean_regret=float(regrets.mean()),
        std_regret=_std(regrets),
        mean_switches_x=float(sx.mean()),
        std_switches_x=_std(sx),
        mean_switches_y=float(sy.mean()),
        config=config,
    )


def strawman_fixed_switch(stream: LossStream, switch_budget: int, seed: int) -> GameResult:
    """Limited-switching baseline: uniform expert, resampled on a fixed schedule.

    Resamples exactly at rounds floor(k T / S) for k = 0..S-1 and plays
    the drawn expert until the next scheduled switch. The simplest
    member of the limited-switching family the epoch stream defeats.
    """
    T, d = stream.T, stream.d
    if not 1 <= switch_budget <= T:
        raise ValueError("switch budget must lie in [1, T]")
    rng = np.random.default_rng(seed)
    switch_rounds = sorted({(k * T) // switch_budget for k in range(switch_budget)})
    start = time.perf_counter()
    total = 0.0
    bounds = switch_rounds + [T]
    for k in range(len(switch_rounds)):
        expert = int(rng.integers(d))
        lo, hi = bounds[k], bounds[k + 1]
        total += float(stream.values[lo:hi, expert].sum())
    elapsed = time.perf_counter() - start
    _, comp = best_in_hindsight_ope(stream)
    return GameResult(
        transcript=None,
        total_loss=total,
        comparator_loss=comp,
        regret=total - comp,
        switch_count_x=len(switch_rounds),
        switch_count_y=0,
        seed=seed,
        wallclock=elapsed,
    )
