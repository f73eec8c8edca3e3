"""Batched correlated-sampling switcher with a parallel reference chain.

The engine plays one model per batch of ``B`` rounds. At each batch
boundary it keeps the previous model with probability

    min(1, cur(x_prev) / (e^{2 B eta} prev(x_prev))
           * prev(y_prev) / cur(y_prev))

where ``y`` is a second chain of models that never feeds back into the
played chain and is refreshed by an independent data-free coin.
Dividing by the reference point makes the keep probability depend only
on the most recent batch of losses, and the ``e^{2 B eta}`` deflation
caps how much any single batch can move it. A data-free
Bernoulli(p)-complement coin forces occasional fake refreshes of both
chains, so an observer cannot tell a data-driven switch from a
scheduled one.

Everything is computed on unnormalized measures in log-space and
exponentiated once: normalization constants cancel in the ratios, and
the min() then acts on an exact quantity.

Randomness contract (frozen for reproducibility): at each batch s >= 2
the engine consumes three uniforms, in the order S, S', A, then at most
one resample draw for the played chain followed by at most one for the
reference chain. Identical seed, config and losses give bit-identical
transcripts.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .measures import ETA_MAX, MeasureState, MwMeasure, log_batch_ratio


class ConfigError(ValueError):
    """Configuration violates a hard constraint; the run cannot start."""


@dataclass(frozen=True)
class ConfigReport:
    """Validation outcome: hard errors stop a run, warnings only mark it."""

    hard_errors: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.hard_errors

    @property
    def preconditions_met(self) -> bool:
        return not self.hard_errors and not self.warnings


@dataclass(frozen=True)
class L2PConfig:
    """All tuned parameters of one run.

    ``eta`` is the nominal divergence step; for the ball instantiation
    ``eta_accounted`` carries the (larger) divergence bound the measure
    actually satisfies, and both the engine's acceptance cap and the
    accountant use it when present. ``beta``, ``lam``, ``radius`` and
    ``lipschitz`` are only set for ball (OCO) runs.
    """

    T: int
    B: int
    eta: float
    p: float
    delta0: float
    delta1: float
    beta: float | None = None
    lam: float | None = None
    radius: float | None = None
    lipschitz: float | None = None
    eta_accounted: float | None = None

    @property
    def n_batches(self) -> int:
        return -(-self.T // self.B)

    @property
    def eta_effective(self) -> float:
        return self.eta if self.eta_accounted is None else self.eta_accounted

    @cached_property
    def report(self) -> ConfigReport:
        hard: list[str] = []
        soft: list[str] = []
        if self.T < 1:
            hard.append("T must be a positive integer")
        if self.B < 1:
            hard.append("B must be a positive integer")
        if not 0.0 < self.eta <= ETA_MAX:
            hard.append(f"eta must lie in (0, {ETA_MAX}]")
        if not 0.0 <= self.p <= 1.0:
            hard.append("p must lie in [0, 1]")
        if self.delta0 < 0.0:
            hard.append("delta0 must be nonnegative")
        if not 0.0 < self.delta1 < 1.0:
            hard.append("delta1 must lie in (0, 1)")
        oco_fields = (self.beta, self.lam, self.radius, self.lipschitz)
        if any(v is not None for v in oco_fields):
            if any(v is None or v <= 0.0 for v in oco_fields):
                hard.append("ball runs need beta, lam, radius and lipschitz, all positive")
        if hard:
            return ConfigReport(tuple(hard), ())
        if self.T * self.p / self.B < 1.0:
            soft.append("switch-rate precondition T*p/B >= 1 not met")
        log_term = math.log(1.0 / self.delta1)
        eta_eff = self.eta_effective
        if self.p == 0.0 or eta_eff * self.B * log_term / max(self.p, 1e-300) > 1.0:
            soft.append("ratio-concentration precondition eta*B*log(1/delta1)/p <= 1 not met")
        if eta_eff > ETA_MAX:
            soft.append("accounted eta exceeds the divergence cap; budget is nominal only")
        if self.p in (0.0, 1.0):
            soft.append(f"degenerate fake-switch probability p={self.p:g}; run is not private")
        return ConfigReport((), tuple(soft))

    def validate(self) -> ConfigReport:
        return self.report


@dataclass(frozen=True, slots=True)
class BatchRecord:
    """One batch of the released transcript. Coins are None for s=1."""

    s: int
    x: int | np.ndarray
    S: int | None
    Sprime: int | None
    A: int | None
    switched_x: int
    switched_y: int
    batch_loss: float


# CSV column order is part of the file contract; never reorder.
CSV_COLUMNS = ("s", "x", "S", "Sprime", "A", "switched_x", "switched_y", "batch_loss")


def _format_model(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return ",".join(repr(float(v)) for v in np.asarray(x).ravel())


@dataclass(frozen=True, eq=False)
class Transcript:
    """Released record of one run plus in-memory diagnostics.

    Column storage: ``models[s-1]`` is the played model of batch s,
    ``coins`` holds (S, S', A) per batch with -1 sentinels in batch 1,
    and ``switched`` holds the (switched_x, switched_y) bits. ``ys``
    and ``raw_log_ratios`` (the log correlated-sampling ratio before
    the acceptance cap, one entry per batch s >= 2) are diagnostics for
    audits and are never serialized.
    """

    models: tuple
    coins: np.ndarray
    switched: np.ndarray
    batch_losses: np.ndarray
    round_losses: np.ndarray
    ys: tuple = field(default=(), repr=False)
    raw_log_ratios: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_batches(self) -> int:
        return len(self.models)

    @cached_property
    def records(self) -> tuple[BatchRecord, ...]:
        out = []
        for i, x in enumerate(self.models):
            S, Sp, A = (None, None, None) if i == 0 else map(int, self.coins[i])
            out.append(
                BatchRecord(
                    i + 1,
                    x,
                    S,
                    Sp,
                    A,
                    int(self.switched[i, 0]),
                    int(self.switched[i, 1]),
                    float(self.batch_losses[i]),
                )
            )
        return tuple(out)

    @property
    def total_loss(self) -> float:
        return float(self.round_losses.sum())

    @property
    def switch_count_x(self) -> int:
        return int(self.switched[:, 0].sum())

    @property
    def switch_count_y(self) -> int:
        return int(self.switched[:, 1].sum())

    @property
    def fake_switch_count(self) -> int:
        """Batches with a data-free refresh on either chain (A=0 or S'=0)."""
        c = self.coins[1:]
        return int(np.count_nonzero((c[:, 1] == 0) | (c[:, 2] == 0)))

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i, x in enumerate(self.models):
            coins = ["", "", ""] if i == 0 else [int(v) for v in self.coins[i]]
            writer.writerow(
                [i + 1, _format_model(x)]
                + coins
                + [
                    int(self.switched[i, 0]),
                    int(self.switched[i, 1]),
                    repr(float(self.batch_losses[i])),
                ]
            )


def acceptance_probability(
    prev: MeasureState,
    cur: MeasureState,
    x_prev,
    y_prev,
    B: int,
    eta: float,
) -> float:
    """Keep probability for the played chain at one batch boundary.

    Equals ``min(1, exp(r(x) - r(y) - 2 B eta))`` with ``r`` the
    unnormalized log batch ratio; invariant to rescaling both measures.
    """
    log_ratio = (
        log_batch_ratio(prev, cur, x_prev)
        - log_batch_ratio(prev, cur, y_prev)
        - 2.0 * B * eta
    )
    return 1.0 if log_ratio >= 0.0 else math.exp(log_ratio)


class PreparedRun:
    """One (config, stream) pair, precomputed once and run many times.

    The per-batch measures and every data-dependent table (log-weights,
    sampling CDFs, per-batch loss sums) are functions of the losses
    alone, so replicates share them; only the coin and resample draws
    differ between runs.
    """

    def __init__(self, config: L2PConfig, measures: list[MeasureState], loss_values: np.ndarray):
        report = config.report
        if not report.ok:
            raise ConfigError("; ".join(report.hard_errors))
        loss_values = np.asarray(loss_values, dtype=np.float64)
        if loss_values.shape[0] != config.T:
            raise ValueError("loss matrix rows must equal T")
        if len(measures) != config.n_batches:
            raise ValueError(
                f"expected {config.n_batches} per-batch measures, got {len(measures)}"
            )
        self.config = config
        self.measures = measures
        self.loss_values = loss_values
        self.is_mw = isinstance(measures[0], MwMeasure)
        n = config.n_batches
        starts = np.arange(n) * config.B
        self.batch_sums = np.add.reduceat(loss_values, starts, axis=0)
        if self.is_mw:
            lw = np.vstack([m.log_weights for m in measures])
            self.log_weights = lw
            probs = np.exp(lw - logsumexp(lw, axis=1, keepdims=True))
            probs /= probs.sum(axis=1, keepdims=True)
            cdfs = np.cumsum(probs, axis=1)
            cdfs[:, -1] = 1.0
            self.cdfs = cdfs
        else:
            self.grad_sums = np.vstack([m.grad_sum for m in measures])
            self.beta = measures[0].beta

    def _sample(self, s: int, rng: np.random.Generator):
        """Draw from the normalized batch-s measure (1-indexed)."""
        if self.is_mw:
            idx = int(self.cdfs[s - 1].searchsorted(rng.random(), side="right"))
            return min(idx, self.cdfs.shape[1] - 1)
        return self.measures[s - 1].sample(rng)

    def _log_ratio(self, s: int, x) -> float:
        """log of batch-s measure over batch-(s-1) measure at x, unnormalized."""
        if self.is_mw:
            col = self.log_weights[:, x]
            return float(col[s - 1] - col[s - 2])
        delta_g = self.grad_sums[s - 1] - self.grad_sums[s - 2]
        return float(-self.beta * (delta_g @ x))

    def run(self, rng: np.random.Generator) -> Transcript:
        config = self.config
        T, B, n = config.T, config.B, config.n_batches
        eta = config.eta_effective
        cap = 2.0 * B * eta
        keep_y = 1.0 - config.p

        x = self._sample(1, rng)
        y = self._sample(1, rng)
        models: list = [x]
        ys: list = [y]
        coins = np.full((n, 3), -1, dtype=np.int8)
        switched = np.zeros((n, 2), dtype=np.int8)
        batch_losses = np.empty(n)
        round_losses = np.empty(T)
        raw_log_ratios = np.empty(n - 1)

        for s in range(2, n + 1):
            lr = self._log_ratio(s, x) - self._log_ratio(s, y)
            raw_log_ratios[s - 2] = lr
            acc = 1.0 if lr >= cap else math.exp(lr - cap)
            u = rng.random(3)
            S = u[0] < acc
            Sp = u[1] < keep_y
            A = u[2] < keep_y
            coins[s - 1] = (S, Sp, A)
            if not (S and Sp):
                x = self._sample(s, rng)
                switched[s - 1, 0] = 1
            if not A:
                y = self._sample(s, rng)
                switched[s - 1, 1] = 1
            models.append(x)
            ys.append(y)

        for s in range(1, n + 1):
            x = models[s - 1]
            lo, hi = (s - 1) * B, min(s * B, T)
            if self.is_mw:
                round_losses[lo:hi] = self.loss_values[lo:hi, x]
                batch_losses[s - 1] = self.batch_sums[s - 1, x]
            else:
                round_losses[lo:hi] = self.loss_values[lo:hi] @ x
                batch_losses[s - 1] = self.batch_sums[s - 1] @ x

        return Transcript(
            tuple(models),
            coins,
            switched,
            batch_losses,
            round_losses,
            tuple(ys),
            raw_log_ratios,
        )


def run_l2p(
    config: L2PConfig,
    measures: list[MeasureState],
    loss_values: np.ndarray,
    rng: np.random.Generator,
) -> Transcript:
    """Run the switcher once over precomputed per-batch measures.

    ``measures[s-1]`` must be the measure in force for batch ``s``
    (reflecting exactly the losses of batches ``1..s-1``);
    ``loss_values`` is the (T, d) matrix of per-round expert losses or
    gradients. The acceptance cap always uses the full ``2 B eta``
    exponent, also on a short final batch. Replicated callers should
    build one :class:`PreparedRun` and call ``run`` per seed instead.
    """
    return PreparedRun(config, measures, loss_values).run(rng)
