"""Finite-blocklength random-coding bound for class-dependent codeword distributions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .gallager import CompositionTable, _e0, class_one_mask, class_source_function
from .prob import ChannelSpec, InputDistribution, SourceSpec, _check_dims

RHO_GRID = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class PartitionSpec:
    """Threshold partition {P(v) < γ^k} / {P(v) ≥ γ^k} with one distribution per class."""

    gamma: float
    q1: InputDistribution
    q2: InputDistribution
    k: int

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.q1.size != self.q2.size:
            raise ValueError("class distributions must share an input alphabet")

    @classmethod
    def single(cls, q, k):
        """One class holding every message (γ = 0 empties class 1)."""
        return cls(0.0, q, q, k)

    def distribution(self, cls_index):
        return self.q1 if cls_index == 1 else self.q2


@dataclass(frozen=True)
class ClassTerm:
    cls_index: int
    empty: bool
    rho: float | None
    exponent: float  # max over rho of n E0 - Es^(i); +inf for an empty class
    log_mass: float  # log P(A_k^(i))


@dataclass(frozen=True)
class FiniteBound:
    log_bound: float
    prefactor: float
    n_classes: int
    terms: tuple[ClassTerm, ...] = field(default=())

    @property
    def raw(self):
        return math.exp(self.log_bound)

    @property
    def clamped(self):
        return min(1.0, self.raw)


def _golden(f, a, b, tol=1e-9):
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def class_term(source: SourceSpec, w: ChannelSpec, partition: PartitionSpec, n, cls_index,
               table=None) -> ClassTerm:
    """max_{ρ∈[0,1]} {n E₀(ρ,W,Qᵢ) − Eₛ^{(i)}(ρ,P^k)} for one class."""
    table = table or CompositionTable.build(source, partition.k)
    mask = table.class_mask(partition.gamma, cls_index, partition.k)
    lm = table.log_mult[mask] + table.log_prob[mask]
    log_mass = float(logsumexp(lm)) if mask.any() else -math.inf
    # empty class: its term exp(-inf) vanishes
    if not np.isfinite(log_mass):
        return ClassTerm(cls_index, True, None, math.inf, -math.inf)
    q = partition.distribution(cls_index)
    args = (source, partition.k, partition.gamma, cls_index, table)

    def f(rho):
        return n * _e0(rho, w.logw, q.probs) - class_source_function(rho, *args)

    vals = f(RHO_GRID)
    i = int(np.argmax(vals))
    # objective is concave in rho: golden search on the two cells around the grid max
    a, b = RHO_GRID[max(i - 1, 0)], RHO_GRID[min(i + 1, len(RHO_GRID) - 1)]
    rho, v = _golden(lambda r: float(f(r)), a, b)
    if vals[i] >= v:
        rho, v = float(RHO_GRID[i]), float(vals[i])
    return ClassTerm(cls_index, False, float(rho), float(v), log_mass)


def theorem1_bound(source: SourceSpec, w: ChannelSpec, partition: PartitionSpec, n) -> FiniteBound:
    """Upper bound on the error probability of the best code in the class-based ensemble.

    bound = (3N−1)/2 · Σᵢ exp(−maxᵢ), N = number of non-empty classes. The
    canonical output is ``log_bound``; it may exceed log 1.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    for q in (partition.q1, partition.q2):
        _check_dims(q, w)
    table = CompositionTable.build(source, partition.k)
    terms = tuple(class_term(source, w, partition, n, i, table) for i in (1, 2))
    live = [t for t in terms if not t.empty]
    nk = len(live)
    prefactor = (3 * nk - 1) / 2
    log_bound = math.log(prefactor) + float(logsumexp([-t.exponent for t in live]))
    return FiniteBound(log_bound, prefactor, nk, terms)


@dataclass(frozen=True)
class ClassSummary:
    size: int
    probability: float
    compositions: np.ndarray


@dataclass(frozen=True)
class PartitionSummary:
    k: int
    gamma: float
    classes: tuple[ClassSummary, ClassSummary]

    def as_dict(self):
        return {
            "k": self.k,
            "gamma": self.gamma,
            "classes": [
                {"class": i, "size": c.size, "probability": c.probability,
                 "compositions": c.compositions.tolist()}
                for i, c in enumerate(self.classes, start=1)
            ],
        }


def _multinomial(counts):
    out, rest = 1, int(sum(counts))
    for c in counts:
        out *= math.comb(rest, int(c))
        rest -= int(c)
    return out


def realize_partition(source: SourceSpec, k, gamma) -> PartitionSummary:
    """Exact sizes, probabilities and composition lists of both threshold classes."""
    table = CompositionTable.build(source, k)
    classes = []
    for i in (1, 2):
        mask = table.class_mask(gamma, i, k)
        comps = table.counts[mask]
        size = sum(_multinomial(c) for c in comps)
        lw = table.log_mult[mask] + table.log_prob[mask]
        prob = float(np.exp(logsumexp(lw))) if mask.any() else 0.0
        classes.append(ClassSummary(size, prob, comps))
    return PartitionSummary(k, gamma, tuple(classes))


def sequence_class(seq, source: SourceSpec, k, gamma):
    """Class index (1 or 2) of one source sequence, from its letter counts."""
    counts = np.bincount(np.asarray(seq), minlength=source.size)
    with np.errstate(invalid="ignore"):
        lp = float(np.where(counts > 0, counts * source.logp, 0.0).sum())
    return 1 if class_one_mask(np.array([lp]), k, gamma)[0] else 2
