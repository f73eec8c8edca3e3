"""Privacy arithmetic: run budgets, composition, group privacy, tuners.

Every function here is pure and uses natural logarithms. The run budget
for the switching engine with step size ``eta``, fake-switch rate ``p``,
horizon ``T``, batch ``B`` and slacks ``delta0``, ``delta1`` is

    eps   = 2 eta / p + eta + 3 T eta^2 p log(1/delta1) / (2 B)
            + sqrt(6 T eta^2 p log^2(1/delta1) / B)
    delta = 2 T (2/eta + log(1/delta1)/p) e B delta0 + 2 T delta1

valid when T p / B >= 1 and eta B log(1/delta1) / p <= 1. The budget is
always computed; unmet preconditions only clear ``preconditions_met``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .transform import L2PConfig
from .measures import ETA_MAX, effective_eta_rmw

_E = math.e
_P_CAP = 1.0 - 1e-9
_MAX_SHRINKS = 10


class TunerError(RuntimeError):
    """No parameter setting met the target budget within the shrink allowance."""


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) pair with provenance notes.

    ``floor`` is only set by the composition routines: the basic
    composition bound ``min(formula, sum of epsilons)``, which is also a
    valid budget and can undercut the formula value.
    """

    epsilon: float
    delta: float
    preconditions_met: bool = True
    notes: tuple[str, ...] = ()
    floor: float | None = None

    def __post_init__(self):
        if self.epsilon < 0.0 or math.isnan(self.epsilon):
            raise ValueError("epsilon must be nonnegative")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")

    def to_dict(self) -> dict:
        out = {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "preconditions_met": self.preconditions_met,
            "notes": list(self.notes),
        }
        if self.floor is not None:
            out["floor"] = self.floor
        return out


def _capped_delta(value: float, notes: list[str]) -> float:
    if value > 1.0 or math.isnan(value):
        notes.append("delta exceeded 1; reported as 1 (vacuous)")
        return 1.0
    return value


def l2p_privacy(
    eta: float, p: float, T: int, B: int, delta0: float, delta1: float
) -> PrivacyBudget:
    """Budget of one run of the switching engine."""
    notes: list[str] = []
    log1 = math.log(1.0 / delta1)
    if eta == 0.0:
        eps = 0.0
        notes.append("eta=0: degenerate, all epsilon terms vanish")
    elif p == 0.0:
        eps = math.inf
        notes.append("p=0: no fake switches, epsilon unbounded")
    else:
        eps = (
            2.0 * eta / p
            + eta
            + 3.0 * T * eta * eta * p * log1 / (2.0 * B)
            + math.sqrt(6.0 * T * eta * eta * p * log1 * log1 / B)
        )
    if delta0 == 0.0:
        delta_mass = 0.0
    elif eta == 0.0 or p == 0.0:
        delta_mass = math.inf
    else:
        delta_mass = 2.0 * T * (2.0 / eta + log1 / p) * _E * B * delta0
    delta = _capped_delta(delta_mass + 2.0 * T * delta1, notes)

    pre_switch = T * p / B >= 1.0
    pre_ratio = eta == 0.0 or (p > 0.0 and eta * B * log1 / p <= 1.0)
    if not pre_switch:
        notes.append("precondition T*p/B >= 1 not met")
    if not pre_ratio:
        notes.append("precondition eta*B*log(1/delta1)/p <= 1 not met")
    if math.isinf(eps):
        notes.append("epsilon is infinite")
        eps = math.inf
    return PrivacyBudget(eps, delta, pre_switch and pre_ratio, tuple(notes))


def advanced_composition(epsilons, deltas, tilde_delta: float) -> PrivacyBudget:
    """k-fold composition bound plus the basic-composition floor.

    The formula value is ``sum(eps) + min(sqrt(2 sum(eps^2) log(e +
    sqrt(sum(eps^2))/d~)), sqrt(2 sum(eps^2) log(1/d~)))`` and can exceed
    plain summation; ``floor`` reports ``min(formula, sum(eps))`` so
    callers can take the tighter of the two.
    """
    epsilons = [float(e) for e in epsilons]
    deltas = [float(d) for d in deltas]
    if len(epsilons) != len(deltas):
        raise ValueError("epsilons and deltas must have equal length")
    if not 0.0 < tilde_delta < 1.0:
        raise ValueError("tilde_delta must lie in (0, 1)")
    if not epsilons:
        return PrivacyBudget(0.0, tilde_delta, True, (), floor=0.0)
    if any(e <= 0.0 for e in epsilons):
        raise ValueError("per-mechanism epsilons must be positive")
    if any(not 0.0 <= d < 1.0 for d in deltas):
        raise ValueError("per-mechanism deltas must lie in [0, 1)")
    eps_sum = sum(epsilons)
    sq = sum(e * e for e in epsilons)
    slack = min(
        math.sqrt(2.0 * sq * math.log(_E + math.sqrt(sq) / tilde_delta)),
        math.sqrt(2.0 * sq * math.log(1.0 / tilde_delta)),
    )
    eps = eps_sum + slack
    prod = 1.0
    for d in deltas:
        prod *= 1.0 - d
    delta = 1.0 - (1.0 - tilde_delta) * prod
    return PrivacyBudget(eps, delta, True, (), floor=min(eps, eps_sum))


def modified_advanced_composition(
    epsilons, deltas, tilde_delta: float, lambdas
) -> PrivacyBudget:
    """Composition with conditioning slack: delta grows by ``2 sum(lambdas)``.

    Used when each mechanism is only private conditional on a
    per-round event of probability at least ``1 - lambda_t``.
    """
    lambdas = [float(v) for v in lambdas]
    if any(not 0.0 <= v <= 1.0 for v in lambdas):
        raise ValueError("lambdas must lie in [0, 1]")
    base = advanced_composition(epsilons, deltas, tilde_delta)
    notes = list(base.notes)
    delta = _capped_delta(base.delta + 2.0 * sum(lambdas), notes)
    return replace(base, delta=delta, notes=tuple(notes))


def group_privacy(eps: float, delta: float, k: int) -> PrivacyBudget:
    """Budget against inputs differing in ``k`` elements: (k eps, k e^{(k-1) eps} delta)."""
    if k < 1 or int(k) != k:
        raise ValueError("group size must be a positive integer")
    if eps < 0.0 or not 0.0 <= delta <= 1.0:
        raise ValueError("need eps >= 0 and delta in [0, 1]")
    k = int(k)
    notes: list[str] = []
    try:
        grown = k * math.exp((k - 1) * eps) * delta
    except OverflowError:
        grown = math.inf
    return PrivacyBudget(k * eps, _capped_delta(grown, notes), True, tuple(notes))


def cdp_to_approx(rho: float, delta: float) -> PrivacyBudget:
    """Convert a rho-concentrated-DP guarantee to (3 sqrt(rho log(1/delta)), delta)."""
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    if not 0.0 < delta < 0.25:
        raise ValueError("delta must lie in (0, 1/4)")
    return PrivacyBudget(3.0 * math.sqrt(rho * math.log(1.0 / delta)), delta)


def _check_tuner_inputs(T: int, d: int, eps: float, delta: float) -> None:
    if T < 1:
        raise ValueError("T must be at least 1")
    if d < 2:
        raise ValueError("need at least two experts / dimensions")
    if eps <= 0.0:
        raise ValueError("target epsilon must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("target delta must lie in (0, 1)")


def tune_ope(T: int, d: int, eps: float, delta: float) -> L2PConfig:
    """Closed-form experts tuning, self-verified through the accountant.

    Sets B = max(1, round(1/eps)), eta = min(eps0, eps)^{2/3} /
    (T^{1/3} log(T/delta)) with eps0 = T^{-1/4} log^{3/4}(d),
    p = min(10 eta / eps, 1 - 1e-9), delta1 = delta / (2T), delta0 = 0.
    ``p`` is floored at B/T: below that the switch-rate precondition
    T p / B >= 1 cannot hold, and the floor only binds when it costs at
    most eps/5 of the budget. If the recomputed budget misses the
    target, or T p / B < 1, eta is halved (p re-derived) for at most 10
    shrinks before giving up.
    """
    _check_tuner_inputs(T, d, eps, delta)
    eps0 = T ** -0.25 * math.log(d) ** 0.75
    eta = min(eps0, eps) ** (2.0 / 3.0) / (T ** (1.0 / 3.0) * math.log(T / delta))
    eta = min(eta, ETA_MAX)
    B = max(1, round(1.0 / eps))
    delta1 = delta / (2.0 * T)
    for _ in range(_MAX_SHRINKS + 1):
        p = min(max(10.0 * eta / eps, B / T), _P_CAP)
        budget = l2p_privacy(eta, p, T, B, 0.0, delta1)
        if budget.epsilon <= eps and budget.delta <= delta and T * p / B >= 1.0:
            return L2PConfig(T=T, B=B, eta=eta, p=p, delta0=0.0, delta1=delta1)
        eta /= 2.0
    raise TunerError(
        f"no feasible experts tuning for T={T}, eps={eps:g} within {_MAX_SHRINKS} shrinks"
    )


def tune_oco(
    T: int, d: int, eps: float, delta: float, lipschitz: float, diameter: float
) -> L2PConfig:
    """Ball tuning for linear losses, self-verified through the accountant.

    The nominal step is eta = eps^{2/3} / (T^{1/3} log(T/delta)) with
    B = max(1, round(1 / (2 eps log(1/delta)))) and p = min(eta/eps,
    1 - 1e-9); the measure parameters are lam = (L/D) max(sqrt(T),
    sqrt(d log T)/eta) and beta = eta^2 lam / (20 L^2) on the ball of
    radius D/2. The accountant is always fed the recomputed divergence
    ``eta' = effective_eta_rmw(beta, lam, L, delta0)``, which exceeds the
    nominal eta, so the verification loop halves the nominal eta (with p
    frozen at its initial value: p scales with eta, so re-deriving it
    would leave eta'/p invariant and the loop could never terminate).
    ``delta0`` is chosen so the budget's delta0 term spends at most a
    quarter of the target and ``delta1 = delta / (4T)`` at most half.
    """
    _check_tuner_inputs(T, d, eps, delta)
    if lipschitz <= 0.0 or diameter <= 0.0:
        raise ValueError("lipschitz and diameter must be positive")
    eta = min(eps ** (2.0 / 3.0) / (T ** (1.0 / 3.0) * math.log(T / delta)), ETA_MAX)
    B = max(1, round(1.0 / (2.0 * eps * math.log(1.0 / delta))))
    p = min(max(eta / eps, B / T), _P_CAP)
    delta1 = delta / (4.0 * T)
    radius = diameter / 2.0
    log1 = math.log(1.0 / delta1)
    for _ in range(_MAX_SHRINKS + 1):
        lam = (lipschitz / diameter) * max(math.sqrt(T), math.sqrt(d * math.log(T)) / eta)
        beta = eta * eta * lam / (20.0 * lipschitz * lipschitz)
        delta0 = delta / (8.0 * T * (2.0 / eta + log1 / p) * _E * B)
        eta_acc = effective_eta_rmw(beta, lam, lipschitz, delta0)
        budget = l2p_privacy(eta_acc, p, T, B, delta0, delta1)
        if budget.epsilon <= eps and budget.delta <= delta and T * p / B >= 1.0:
            return L2PConfig(
                T=T,
                B=B,
                eta=eta,
                p=p,
                delta0=delta0,
                delta1=delta1,
                beta=beta,
                lam=lam,
                radius=radius,
                lipschitz=lipschitz,
                eta_accounted=eta_acc,
            )
        eta /= 2.0
    raise TunerError(
        f"no feasible ball tuning for T={T}, eps={eps:g} within {_MAX_SHRINKS} shrinks"
    )


def config_budget(config: L2PConfig) -> PrivacyBudget:
    """Recompute the budget a config actually enjoys (accounted eta when set)."""
    return l2p_privacy(
        config.eta_effective, config.p, config.T, config.B, config.delta0, config.delta1
    )
