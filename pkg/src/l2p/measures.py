"""Lazy measure families driving the private switching layer.

A "measure" is an unnormalized density over the decision set that is
updated multiplicatively after each loss, so the log-density change per
round is a data-independent function of that round's loss alone. That
structure is what the switching layer exploits: every ratio it needs is
a ratio of unnormalized measures, so normalization constants never have
to be computed (or leaked).

Two families are implemented:

* :class:`MwMeasure` -- multiplicative weights over ``d`` experts, kept
  in log-space (linear-space weights underflow after a few thousand
  rounds).
* :class:`RmwMeasure` -- a quadratically regularized measure over the
  Euclidean ball of radius ``radius``, specialized to linear losses.
  With gradient sum ``G`` the unnormalized log-density is
  ``-beta * (<G, x> + lam * |x|^2)``, i.e. a Gaussian with mean
  ``-G / (2 lam)`` and isotropic variance ``1 / (2 beta lam)`` truncated
  to the ball.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp, ndtr, ndtri

# Divergence parameter cap required by the switching layer's analysis.
ETA_MAX = 0.1

# Ball sampler: rejection attempts before falling back to hit-and-run,
# and hit-and-run mixing steps per dimension.
REJECTION_CAP = 10_000
HIT_AND_RUN_STEPS_PER_DIM = 200

# Norm checks tolerate float32 round-trips of serialized streams.
_NORM_SLACK = 1e-6


class SamplerError(RuntimeError):
    """Ball sampler produced no usable point; parameters are infeasible."""


def _as_float_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class LossVector:
    """One round of per-expert losses, each entry in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_float_vector(self.values, "loss values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("expert losses must lie in [0, 1]")
        object.__setattr__(self, "values", arr)

    @property
    def d(self) -> int:
        return self.values.size

    def value_at(self, x: int) -> float:
        return float(self.values[x])


@dataclass(frozen=True)
class LinearLoss:
    """A linear loss ``x -> <gradient, x>`` with ``|gradient| <= lipschitz_bound``."""

    gradient: np.ndarray
    lipschitz_bound: float

    def __post_init__(self):
        grad = _as_float_vector(self.gradient, "gradient")
        bound = float(self.lipschitz_bound)
        if bound <= 0.0:
            raise ValueError("lipschitz bound must be positive")
        if float(np.linalg.norm(grad)) > bound * (1.0 + _NORM_SLACK):
            raise ValueError("gradient norm exceeds the Lipschitz bound")
        object.__setattr__(self, "gradient", grad)
        object.__setattr__(self, "lipschitz_bound", bound)

    @property
    def d(self) -> int:
        return self.gradient.size

    def value_at(self, x: np.ndarray) -> float:
        return float(self.gradient @ np.asarray(x, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class MwMeasure:
    """Multiplicative-weights measure: ``log_weights[x] = -eta * cumloss[x]``."""

    log_weights: np.ndarray
    eta: float

    def __post_init__(self):
        lw = _as_float_vector(self.log_weights, "log weights")
        eta = float(self.eta)
        if not 0.0 < eta <= ETA_MAX:
            raise ValueError(f"eta must lie in (0, {ETA_MAX}]")
        object.__setattr__(self, "log_weights", lw)
        object.__setattr__(self, "eta", eta)

    @property
    def d(self) -> int:
        return self.log_weights.size

    def log_unnorm(self, x: int) -> float:
        return float(self.log_weights[x])

    @cached_property
    def probabilities(self) -> np.ndarray:
        """Normalized density, computed once per state via log-sum-exp."""
        p = np.exp(self.log_weights - logsumexp(self.log_weights))
        return p / p.sum()

    @cached_property
    def _cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.probabilities)
        cdf[-1] = 1.0  # guard against cumulative round-off at the top
        return cdf

    def sample(self, rng: np.random.Generator) -> int:
        idx = int(np.searchsorted(self._cdf, rng.random(), side="right"))
        return min(idx, self.d - 1)


@dataclass(frozen=True, eq=False)
class RmwMeasure:
    """Regularized measure over the ball: ``-beta * (<G, x> + lam |x|^2)``."""

    grad_sum: np.ndarray
    beta: float
    lam: float
    radius: float

    def __post_init__(self):
        g = _as_float_vector(self.grad_sum, "gradient sum")
        for name in ("beta", "lam", "radius"):
            val = float(getattr(self, name))
            if val <= 0.0:
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, val)
        object.__setattr__(self, "grad_sum", g)

    @property
    def d(self) -> int:
        return self.grad_sum.size

    def log_unnorm(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        return float(-self.beta * (self.grad_sum @ x + self.lam * (x @ x)))

    @property
    def gaussian_mean(self) -> np.ndarray:
        return -self.grad_sum / (2.0 * self.lam)

    @property
    def gaussian_sigma(self) -> float:
        return math.sqrt(1.0 / (2.0 * self.beta * self.lam))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Exact draw by rejection; hit-and-run fallback when rejection stalls."""
        mean = self.gaussian_mean
        sigma = self.gaussian_sigma
        for _ in range(REJECTION_CAP):
            z = mean + sigma * rng.standard_normal(self.d)
            if float(z @ z) <= self.radius * self.radius:
                return z
        return self._hit_and_run(rng)

    def _hit_and_run(self, rng: np.random.Generator) -> np.ndarray:
        mean = self.gaussian_mean
        sigma = self.gaussian_sigma
        r = self.radius
        z = mean.copy()
        norm = float(np.linalg.norm(z))
        if norm >= r:
            z *= (r / norm) * (1.0 - 1e-9)
        for _ in range(HIT_AND_RUN_STEPS_PER_DIM * self.d):
            u = rng.standard_normal(self.d)
            u /= float(np.linalg.norm(u))
            # chord through the ball along direction u: t in [t_lo, t_hi]
            zu = float(z @ u)
            disc = zu * zu + r * r - float(z @ z)
            if disc <= 0.0:
                continue
            root = math.sqrt(disc)
            t_lo, t_hi = -zu - root, -zu + root
            # restricted density along the chord is a 1-d Gaussian
            t_mean = float((mean - z) @ u)
            a = (t_lo - t_mean) / sigma
            b = (t_hi - t_mean) / sigma
            fa, fb = float(ndtr(a)), float(ndtr(b))
            if fb - fa < 1e-15:
                # whole chord in one far tail; step to the nearer endpoint
                t = t_lo if a > 0 else t_hi
            else:
                t = t_mean + sigma * float(ndtri(fa + rng.random() * (fb - fa)))
                t = min(max(t, t_lo), t_hi)
            z = z + t * u
        if not np.all(np.isfinite(z)) or float(z @ z) > r * r * (1.0 + 1e-9):
            raise SamplerError("hit-and-run fallback left the ball or diverged")
        return z


MeasureState = MwMeasure | RmwMeasure
Loss = LossVector | LinearLoss


def mw_init(d: int, eta: float) -> MwMeasure:
    """Uniform measure over ``d`` experts (all log-weights zero)."""
    if d < 1:
        raise ValueError("need at least one expert")
    return MwMeasure(np.zeros(int(d)), eta)


def mw_update(state: MwMeasure, loss: LossVector) -> MwMeasure:
    if loss.d != state.d:
        raise ValueError("loss dimension does not match the measure")
    return MwMeasure(state.log_weights - state.eta * loss.values, state.eta)


def rmw_init(d: int, beta: float, lam: float, radius: float) -> RmwMeasure:
    if d < 1:
        raise ValueError("dimension must be at least 1")
    return RmwMeasure(np.zeros(int(d)), beta, lam, radius)


def rmw_update(state: RmwMeasure, loss: LinearLoss) -> RmwMeasure:
    if loss.d != state.d:
        raise ValueError("gradient dimension does not match the measure")
    return RmwMeasure(state.grad_sum + loss.gradient, state.beta, state.lam, state.radius)


def update(state: MeasureState, loss: Loss) -> MeasureState:
    """Advance either measure family by one loss."""
    if isinstance(state, MwMeasure):
        if not isinstance(loss, LossVector):
            raise TypeError("expert measure expects a LossVector")
        return mw_update(state, loss)
    if isinstance(state, RmwMeasure):
        if not isinstance(loss, LinearLoss):
            raise TypeError("ball measure expects a LinearLoss")
        return rmw_update(state, loss)
    raise TypeError(f"unknown measure state {type(state)!r}")


def sample(state: MeasureState, rng: np.random.Generator):
    """Draw one point from the normalized density of ``state``."""
    return state.sample(rng)


def log_batch_ratio(prev: MeasureState, cur: MeasureState, x) -> float:
    """log of ``cur(x) / prev(x)`` on unnormalized measures.

    For the experts measure this is the log-weight difference, i.e.
    ``-eta`` times the batch losses of expert ``x``; for the ball measure
    the quadratic term cancels and it is ``-beta * <G_cur - G_prev, x>``.
    """
    if type(prev) is not type(cur):
        raise TypeError("measure states must come from the same family")
    if prev.d != cur.d:
        raise ValueError("measure states differ in dimension")
    if isinstance(prev, MwMeasure):
        return float(cur.log_weights[x] - prev.log_weights[x])
    xv = np.asarray(x, dtype=np.float64)
    return float(-cur.beta * ((cur.grad_sum - prev.grad_sum) @ xv))


def effective_eta_rmw(beta: float, lam: float, lipschitz: float, delta0: float) -> float:
    """Divergence parameter the accountant must use for the ball measure.

    One update moves the normalized density by at most
    ``2 beta L^2 / lam + sqrt(8 beta L^2 log(2/delta0) / lam)`` in
    delta0-approximate max divergence, which is strictly larger than the
    nominal step size for any small ``delta0``.
    """
    if beta <= 0 or lam <= 0 or lipschitz <= 0:
        raise ValueError("beta, lam and lipschitz must be positive")
    if not 0.0 < delta0 < 1.0:
        raise ValueError("delta0 must lie in (0, 1)")
    bl2 = beta * lipschitz * lipschitz
    return 2.0 * bl2 / lam + math.sqrt(8.0 * bl2 * math.log(2.0 / delta0) / lam)


def mw_sequence(loss_values: np.ndarray, eta: float, batch: int) -> list[MwMeasure]:
    """Per-batch expert measures for a full loss matrix, built in one pass.

    Row ``s`` of the result is the measure in force for batch ``s + 1``,
    i.e. the one determined by all losses before that batch starts.
    """
    loss_values = np.asarray(loss_values, dtype=np.float64)
    T, d = loss_values.shape
    n_batches = -(-T // batch)
    cum = np.zeros((n_batches, d))
    if n_batches > 1:
        sums = np.cumsum(loss_values, axis=0)
        starts = np.arange(1, n_batches) * batch
        cum[1:] = sums[starts - 1]
    return [MwMeasure(-eta * row, eta) for row in cum]


def rmw_sequence(
    gradients: np.ndarray, beta: float, lam: float, radius: float, batch: int
) -> list[RmwMeasure]:
    """Per-batch ball measures for a full gradient matrix."""
    gradients = np.asarray(gradients, dtype=np.float64)
    T, d = gradients.shape
    n_batches = -(-T // batch)
    cum = np.zeros((n_batches, d))
    if n_batches > 1:
        sums = np.cumsum(gradients, axis=0)
        starts = np.arange(1, n_batches) * batch
        cum[1:] = sums[starts - 1]
    return [RmwMeasure(row, beta, lam, radius) for row in cum]


def sequence_by_updates(initial: MeasureState, losses, batch: int) -> list[MeasureState]:
    """Reference builder: advance one loss at a time, snapshot at batch starts.

    Slow but direct; used to cross-check the vectorized builders.
    """
    states = [initial]
    cur = initial
    for t, loss in enumerate(losses, start=1):
        cur = update(cur, loss)
        if t % batch == 0 and t < len(losses):
            states.append(cur)
    return states
