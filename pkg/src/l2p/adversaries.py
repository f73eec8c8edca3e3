"""Oblivious loss-sequence generators.

Streams are materialized up front: the whole sequence is a deterministic
function of (kind, parameters, seed), which both enforces obliviousness
and makes neighboring-stream experiments exactly reproducible. Two
streams are neighbors when they differ in exactly one round.
"""

from __future__ import annotations

import csv
import struct
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .measures import LinearLoss, LossVector

_MAGIC = b"L2PS"
_VERSION = 1

_OPE_KINDS = ("bernoulli", "epoch_lower_bound")
_OCO_KINDS = ("iid-sphere", "drift")


@dataclass(frozen=True, eq=False)
class LossStream:
    """A full horizon of losses: rows of ``values`` are rounds.

    For expert streams each row is a loss vector in [0,1]^d; for linear
    streams each row is a gradient with norm at most ``lipschitz``.
    ``n_epochs``/``epoch_len`` are set only by the epoch construction.
    """

    kind: str
    d: int
    T: int
    seed: int
    values: np.ndarray
    lipschitz: float | None = None
    n_epochs: int | None = None
    epoch_len: int | None = None
    clamped: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.T, self.d):
            raise ValueError("values must have shape (T, d)")
        if self.is_oco:
            if self.lipschitz is None or self.lipschitz <= 0:
                raise ValueError("linear streams need a positive lipschitz bound")
            norms = np.linalg.norm(vals, axis=1)
            if norms.max(initial=0.0) > self.lipschitz * (1 + 1e-6):
                raise ValueError("gradient norm exceeds the lipschitz bound")
        else:
            if vals.min(initial=0.0) < 0 or vals.max(initial=0.0) > 1:
                raise ValueError("expert losses must lie in [0, 1]")
        object.__setattr__(self, "values", vals)

    @property
    def is_oco(self) -> bool:
        return self.kind in _OCO_KINDS

    def loss_at(self, t: int):
        if self.is_oco:
            return LinearLoss(self.values[t], self.lipschitz)
        return LossVector(self.values[t])


def bernoulli_experts(d: int, T: int, means, seed: int) -> LossStream:
    """Independent Bernoulli(means[x]) loss per expert and round."""
    means = np.asarray(means, dtype=np.float64)
    if means.shape != (d,):
        raise ValueError("means must have length d")
    if means.min() < 0 or means.max() > 1:
        raise ValueError("means must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    values = (rng.random((T, d)) < means).astype(np.float64)
    return LossStream("bernoulli", d, T, seed, values)


def epoch_lower_bound_stream(T: int, eps: float, d: int, seed: int) -> LossStream:
    """Piecewise-constant fair-coin losses: the hard instance for low switching.

    Splits the horizon into ``E = round((T*eps)^(4/3))`` epochs (clamped
    to [1, T], short last epoch) and draws one Ber(1/2)^d loss per
    epoch, repeated for every round of that epoch. A low-switching
    learner must either sit out an epoch at expected loss 1/2 per round
    or spend privacy budget on a switch inside it.
    """
    if (T * eps) ** (2.0 / 3.0) < 1.0:
        raise ValueError("need (T*eps)^(2/3) >= 1 for the epoch construction")
    raw = round((T * eps) ** (4.0 / 3.0))
    clamped = raw > T
    if clamped:
        warnings.warn(f"epoch count {raw} exceeds T={T}; clamped to T", stacklevel=2)
    E = min(max(int(raw), 1), T)
    epoch_len = -(-T // E)
    rng = np.random.default_rng(seed)
    draws = (rng.random((E, d)) < 0.5).astype(np.float64)
    values = np.repeat(draws, epoch_len, axis=0)[:T]
    return LossStream(
        "epoch_lower_bound", d, T, seed, values, n_epochs=E, epoch_len=epoch_len, clamped=clamped
    )


def linear_oco_stream(d: int, T: int, lipschitz: float, seed: int, kind: str) -> LossStream:
    """Linear-loss gradients: iid on the sphere, or a deterministic slow drift."""
    if lipschitz <= 0:
        raise ValueError("lipschitz must be positive")
    if kind == "iid-sphere":
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((T, d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        values = lipschitz * g / norms
    elif kind == "drift":
        theta = 2.0 * np.pi * np.arange(T) / max(T, 1)
        values = np.zeros((T, d))
        values[:, 0] = np.cos(theta)
        if d > 1:
            values[:, 1] = np.sin(theta)
        values *= lipschitz
    else:
        raise ValueError(f"unknown linear stream kind {kind!r}")
    return LossStream(kind, d, T, seed, values, lipschitz=lipschitz)


def neighbor_of(stream: LossStream, index: int, replacement) -> LossStream:
    """Copy of ``stream`` with round ``index`` replaced.

    ``replacement`` may be a loss object or a raw vector; it is validated
    against the stream's loss type.
    """
    if not 0 <= index < stream.T:
        raise ValueError(f"index {index} outside [0, {stream.T})")
    if isinstance(replacement, (LossVector, LinearLoss)):
        row = replacement.gradient if isinstance(replacement, LinearLoss) else replacement.values
    else:
        row = np.asarray(replacement, dtype=np.float64)
    if row.shape != (stream.d,):
        raise ValueError("replacement has the wrong dimension")
    values = stream.values.copy()
    values[index] = row
    return replace(stream, values=values)


def save_stream(stream: LossStream, path) -> None:
    """Binary dump: header (kind, d, T, seed, aux fields), then float32 rows."""
    kind_bytes = stream.kind.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(struct.pack("<I", len(kind_bytes)))
        fh.write(kind_bytes)
        fh.write(
            struct.pack(
                "<qqqdqqB",
                stream.d,
                stream.T,
                stream.seed,
                stream.lipschitz if stream.lipschitz is not None else float("nan"),
                stream.n_epochs if stream.n_epochs is not None else -1,
                stream.epoch_len if stream.epoch_len is not None else -1,
                int(stream.clamped),
            )
        )
        fh.write(stream.values.astype("<f4").tobytes())


def load_stream(path) -> LossStream:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a loss-stream file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _VERSION:
            raise ValueError(f"unsupported stream file version {version}")
        (kind_len,) = struct.unpack("<I", fh.read(4))
        kind = fh.read(kind_len).decode("utf-8")
        d, T, seed, lip, n_epochs, epoch_len, clamped = struct.unpack("<qqqdqqB", fh.read(49))
        values = np.frombuffer(fh.read(4 * T * d), dtype="<f4").reshape(T, d).astype(np.float64)
    return LossStream(
        kind,
        d,
        T,
        seed,
        values,
        lipschitz=None if np.isnan(lip) else lip,
        n_epochs=None if n_epochs < 0 else int(n_epochs),
        epoch_len=None if epoch_len < 0 else int(epoch_len),
        clamped=bool(clamped),
    )


def stream_to_csv(stream: LossStream, fh) -> None:
    """Debug dump: one row per round, one column per expert/coordinate."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["t"] + [f"v{j}" for j in range(stream.d)])
    for t in range(stream.T):
        writer.writerow([t] + [repr(float(v)) for v in stream.values[t]])
