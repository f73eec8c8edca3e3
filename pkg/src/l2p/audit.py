"""Empirical checks of the distributional and privacy claims, at toy scale.

Each audit compares a Monte-Carlo statistic of real engine runs against
the theoretical bound plus an explicitly separated sampling slack, and
reports both numbers so "claim violated" and "not enough samples" stay
distinguishable.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .accountant import config_budget
from .adversaries import LossStream
from .harness import measure_sequence
from .measures import mw_sequence
from .seeding import replicate_seed
from .transform import L2PConfig, PreparedRun, Transcript

_MIN_BUCKET = 100
_WILSON_Z = 2.0


@dataclass(frozen=True)
class AuditReport:
    """Outcome of one audit: pass iff statistic <= threshold."""

    name: str
    n_samples: int
    statistic: float
    threshold: float
    passed: bool
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.passed != (self.statistic <= self.threshold):
            raise ValueError("pass flag must equal (statistic <= threshold)")

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "name": self.name,
                "n_samples": self.n_samples,
                "statistic": self.statistic,
                "threshold": self.threshold,
                "passed": self.passed,
                "notes": list(self.notes),
            },
            sort_keys=True,
        )


def _report(name, n, stat, thr, notes=()) -> AuditReport:
    return AuditReport(name, n, float(stat), float(thr), bool(stat <= thr), tuple(notes))


def _run_many(config: L2PConfig, stream: LossStream, n_runs: int, base_seed: int):
    prepared = PreparedRun(config, measure_sequence(config, "mw", stream), stream.values)
    for i in range(n_runs):
        yield prepared.run(np.random.default_rng(replicate_seed(base_seed, i)))


def exact_batch_distributions(stream: LossStream, eta: float, B: int) -> np.ndarray:
    """Oracle: the exact normalized expert distribution at each batch start."""
    return np.vstack([s.probabilities for s in mw_sequence(stream.values, eta, B)])


def marginal_tv_test(
    config: L2PConfig, stream: LossStream, s: int, n_runs: int, base_seed: int = 0
) -> AuditReport:
    """TV distance between the empirical law of the batch-s model and the oracle.

    With zero measure slack the played model's marginal is exactly the
    current normalized measure, so the whole allowance is Monte-Carlo
    slack 3*sqrt(d/n_runs).
    """
    if stream.is_oco or config.delta0 != 0.0:
        raise ValueError("marginal audit needs the expert instantiation with delta0=0")
    if stream.d > 8 or s > 10:
        raise ValueError("marginal audit is exact-oracle only: d <= 8 and s <= 10")
    if n_runs < 10_000:
        raise ValueError("need at least 1e4 runs for a meaningful TV estimate")
    if not 1 <= s <= config.n_batches:
        raise ValueError("batch index out of range")
    counts = np.zeros(stream.d)
    for transcript in _run_many(config, stream, n_runs, base_seed):
        counts[transcript.records[s - 1].x] += 1
    empirical = counts / n_runs
    exact = exact_batch_distributions(stream, config.eta, config.B)[s - 1]
    tv = 0.5 * float(np.abs(empirical - exact).sum())
    slack = 3.0 * math.sqrt(stream.d / n_runs)
    return _report(
        f"marginal_tv[s={s}]",
        n_runs,
        tv,
        0.0 + slack,
        (f"claim bound 0 (delta0=0), monte-carlo slack {slack:.4g}",),
    )


def marginal_tv_profile(
    config: L2PConfig, stream: LossStream, n_runs: int, base_seed: int = 0
) -> list[AuditReport]:
    """Marginal TV check at every batch index from one shared set of runs.

    Same statistic and threshold as :func:`marginal_tv_test`; each run
    contributes one model per batch, so a single fleet of ``n_runs``
    runs measures all marginals at once.
    """
    if stream.is_oco or config.delta0 != 0.0:
        raise ValueError("marginal audit needs the expert instantiation with delta0=0")
    if stream.d > 8 or config.n_batches > 10:
        raise ValueError("marginal audit is exact-oracle only: d <= 8 and s <= 10")
    if n_runs < 10_000:
        raise ValueError("need at least 1e4 runs for a meaningful TV estimate")
    counts = np.zeros((config.n_batches, stream.d))
    for transcript in _run_many(config, stream, n_runs, base_seed):
        for i, x in enumerate(transcript.models):
            counts[i, x] += 1
    exact = exact_batch_distributions(stream, config.eta, config.B)
    slack = 3.0 * math.sqrt(stream.d / n_runs)
    reports = []
    for s in range(1, config.n_batches + 1):
        tv = 0.5 * float(np.abs(counts[s - 1] / n_runs - exact[s - 1]).sum())
        reports.append(
            _report(
                f"marginal_tv[s={s}]",
                n_runs,
                tv,
                slack,
                (f"claim bound 0 (delta0=0), monte-carlo slack {slack:.4g}",),
            )
        )
    return reports


def ratio_range_check(
    config: L2PConfig, stream: LossStream, n_runs: int, base_seed: int = 0
) -> AuditReport:
    """Fraction of raw correlated-sampling ratios outside [e^{-2B eta}, e^{2B eta}]."""
    if stream.is_oco:
        raise ValueError("ratio audit targets the expert instantiation")
    cap = 2.0 * config.B * config.eta_effective
    outside = 0
    total = 0
    for transcript in _run_many(config, stream, n_runs, base_seed):
        lr = transcript.raw_log_ratios
        total += lr.size
        outside += int(np.count_nonzero(np.abs(lr) > cap + 1e-12))
    frac = outside / max(total, 1)
    slack = 3.0 * math.sqrt(config.B / (config.T * n_runs))
    return _report(
        "ratio_range",
        total,
        frac,
        config.delta1 + slack,
        (f"claim bound {config.delta1:g}, monte-carlo slack {slack:.4g}",),
    )


def _bucket(transcript: Transcript):
    pattern = tuple(r.switched_x for r in transcript.records[1:])
    return pattern, int(transcript.records[-1].x)


def _wilson(count: int, n: int) -> float:
    z2 = _WILSON_Z * _WILSON_Z
    return (count + z2 / 2.0) / (n + z2)


def empirical_epsilon(
    config: L2PConfig,
    stream: LossStream,
    neighbor: LossStream,
    n_runs: int,
    base_seed: int = 0,
    min_bucket: int = _MIN_BUCKET,
) -> AuditReport:
    """Transcript-bucketing lower-bound estimate of the realized epsilon.

    Buckets each run by (switch pattern, final model), shrinks the two
    empirical bucket masses toward 1/2 a la Wilson, and takes the worst
    absolute log-ratio over buckets seen at least ``min_bucket`` times.
    Passes when the estimate stays under the accountant's epsilon plus
    three combined standard errors. Raw ratios on rare buckets explode,
    hence the count filter; an empty filter yields an inconclusive pass.
    """
    if stream.d != 2 or config.T > 20 or config.B > 2:
        raise ValueError("bucketing audit needs d=2, T <= 20, B <= 2")
    if stream.T != neighbor.T or stream.d != neighbor.d:
        raise ValueError("neighbor stream has mismatched shape")
    counts_a: Counter = Counter()
    counts_b: Counter = Counter()
    for transcript in _run_many(config, stream, n_runs, base_seed):
        counts_a[_bucket(transcript)] += 1
    for transcript in _run_many(config, neighbor, n_runs, base_seed + 1):
        counts_b[_bucket(transcript)] += 1
    eps_budget = config_budget(config).epsilon
    best = 0.0
    best_se = 0.0
    qualifying = 0
    for key in set(counts_a) | set(counts_b):
        ca, cb = counts_a.get(key, 0), counts_b.get(key, 0)
        if max(ca, cb) < min_bucket:
            continue
        qualifying += 1
        pa, pb = _wilson(ca, n_runs), _wilson(cb, n_runs)
        stat = abs(math.log(pa / pb))
        if stat > best:
            best = stat
            best_se = math.sqrt(
                (1.0 - pa) / (n_runs * pa) + (1.0 - pb) / (n_runs * pb)
            )
    notes = [f"accountant epsilon {eps_budget:.4g}", f"{qualifying} buckets past filter"]
    if qualifying == 0:
        notes.append("inconclusive: no bucket reached the count filter")
    return _report(
        "empirical_epsilon", 2 * n_runs, best, eps_budget + 3.0 * best_se, notes
    )


def switch_statistics(results, config: L2PConfig) -> AuditReport:
    """Fraction of runs whose fake-switch count exceeds 2 T p log(1/delta1) / B.

    The engine's analysis gives each run probability at most delta1 of
    exceeding the bound; the threshold adds binomial slack plus a 3/n
    allowance so that a handful of unlucky runs in a small sample does
    not flip the audit.
    """
    results = list(results)
    n = len(results)
    if n < 100:
        raise ValueError("need at least 100 runs from an identical config")
    bound = 2.0 * config.T * config.p * math.log(1.0 / config.delta1) / config.B
    exceed = sum(1 for r in results if r.fake_switch_count > bound)
    frac = exceed / n
    d1 = config.delta1
    slack = 3.0 * math.sqrt(d1 * (1.0 - d1) / n) + 3.0 / n
    return _report(
        "switch_statistics",
        n,
        frac,
        d1 + slack,
        (f"bound {bound:.4g} fake switches per run",),
    )
