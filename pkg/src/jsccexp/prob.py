"""Probability containers, validation and log-domain helpers.

Everything is computed in nats. Conversion to bits happens only where results
are displayed (see :func:`to_bits`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NotNormalizable,
    SumOutOfTolerance,
)

SUM_TOL = 1e-6
LOG2E = 1.0 / math.log(2.0)


def to_bits(x):
    return x * LOG2E


def from_bits(x):
    return x / LOG2E


def _normalized(raw, what="distribution", tol=SUM_TOL):
    p = np.array(raw, dtype=float)
    if p.ndim != 1:
        raise DimensionMismatch(f"{what} must be a vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise NotNormalizable(f"{what} has non-finite entries")
    if np.any(p < 0):
        raise NegativeEntry(f"{what} has negative entry at index {int(np.argmin(p))}")
    s = p.sum()
    if s <= 0:
        raise NotNormalizable(f"{what} is all zero")
    if abs(s - 1.0) > tol:
        raise SumOutOfTolerance(f"{what} sums to {float(s):.12g}, not 1")
    p = p / s
    p.setflags(write=False)
    return p


@dataclass(frozen=True, eq=False)
class SourceSpec:
    """Per-letter distribution of a discrete memoryless source."""

    probs: np.ndarray

    @property
    def size(self):
        return len(self.probs)

    @property
    def support_size(self):
        return int(np.count_nonzero(self.probs))

    @property
    def logp(self):
        with np.errstate(divide="ignore"):
            return np.log(self.probs)

    def __repr__(self):
        return f"SourceSpec({self.probs.tolist()})"


@dataclass(frozen=True, eq=False)
class InputDistribution:
    """A point on the probability simplex over the channel input alphabet."""

    probs: np.ndarray

    @property
    def size(self):
        return len(self.probs)

    def key(self):
        return tuple(self.probs.tolist())

    def __eq__(self, other):
        return isinstance(other, InputDistribution) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"InputDistribution({self.probs.tolist()})"


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Row-stochastic transition matrix ``W[x, y] = W(y|x)``."""

    matrix: np.ndarray

    @property
    def n_inputs(self):
        return self.matrix.shape[0]

    @property
    def n_outputs(self):
        return self.matrix.shape[1]

    @property
    def logw(self):
        with np.errstate(divide="ignore"):
            return np.log(self.matrix)

    def __repr__(self):
        return f"ChannelSpec({self.matrix.tolist()})"


def validate_source(raw) -> SourceSpec:
    """Check and renormalize a source distribution.

    Raises :class:`NegativeEntry`, :class:`NotNormalizable` (all zero) or
    :class:`SumOutOfTolerance` when the sum is off by more than 1e-6.
    """
    p = _normalized(raw, "source distribution")
    if len(p) < 2:
        raise DimensionMismatch("source alphabet needs at least two letters")
    return SourceSpec(p)


def validate_input(raw, n_inputs=None) -> InputDistribution:
    q = _normalized(raw, "input distribution")
    if n_inputs is not None and len(q) != n_inputs:
        raise DimensionMismatch(f"input distribution has {len(q)} entries, channel has {n_inputs} inputs")
    return InputDistribution(q)


def validate_channel(raw) -> ChannelSpec:
    w = np.array(raw, dtype=float)
    if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
        raise DimensionMismatch(f"channel must be a non-empty matrix, got shape {w.shape}")
    rows = [_normalized(row, f"channel row {i}") for i, row in enumerate(w)]
    w = np.vstack(rows)
    w.setflags(write=False)
    return ChannelSpec(w)


def uniform_input(n_inputs) -> InputDistribution:
    return InputDistribution(np.full(n_inputs, 1.0 / n_inputs))


def _check_dims(q: InputDistribution, w: ChannelSpec):
    if q.size != w.n_inputs:
        raise DimensionMismatch(f"input distribution has {q.size} entries, channel has {w.n_inputs} inputs")


def entropy(source: SourceSpec) -> float:
    """Shannon entropy in nats, with 0 log 0 = 0."""
    p = source.probs[source.probs > 0]
    return float(-np.sum(p * np.log(p)))


def mutual_information(q: InputDistribution, w: ChannelSpec) -> float:
    """I(Q;W) in nats by direct double summation."""
    _check_dims(q, w)
    py = q.probs @ w.matrix
    total = 0.0
    for x in range(w.n_inputs):
        if q.probs[x] == 0:
            continue
        for y in range(w.n_outputs):
            wxy = w.matrix[x, y]
            if wxy > 0:
                total += q.probs[x] * wxy * math.log(wxy / py[y])
    return max(total, 0.0)


@dataclass(frozen=True)
class LogValue:
    """A nonnegative real stored as its natural logarithm.

    Zero is represented by ``log = -inf`` and reported by :attr:`is_zero`.
    """

    log: float

    @classmethod
    def from_float(cls, x):
        if x < 0:
            raise NegativeEntry("LogValue holds nonnegative reals only")
        return cls(math.log(x) if x > 0 else -math.inf)

    @property
    def is_zero(self):
        return self.log == -math.inf

    def __float__(self):
        return math.exp(self.log)

    def __add__(self, other):
        other = other if isinstance(other, LogValue) else LogValue.from_float(other)
        return LogValue(float(logsumexp([self.log, other.log])))

    __radd__ = __add__

    def __mul__(self, other):
        other = other if isinstance(other, LogValue) else LogValue.from_float(other)
        if self.is_zero or other.is_zero:
            return LogValue(-math.inf)
        return LogValue(self.log + other.log)

    __rmul__ = __mul__

    def __pow__(self, a):
        if self.is_zero:
            return LogValue(-math.inf if a > 0 else 0.0)
        return LogValue(self.log * a)

    def __lt__(self, other):
        return self.log < other.log

    def __le__(self, other):
        return self.log <= other.log
