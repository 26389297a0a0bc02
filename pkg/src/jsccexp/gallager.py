"""Gallager source/channel functions and their two-class refinements."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import EnumerationCapExceeded, GammaNonpositive
from .prob import ChannelSpec, InputDistribution, SourceSpec, _check_dims

COMPOSITION_CAP = 10**7
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RhoGrid:
    """Sorted sample points for the ρ variable; always contains 0 and 1."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.unique(np.asarray(self.points, dtype=float))
        if pts[0] != 0.0 or not np.any(pts == 1.0):
            pts = np.unique(np.concatenate([[0.0, 1.0], pts]))
        if pts[0] < 0:
            raise ValueError("grid points must be nonnegative")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, step=1e-3, upper=1.0):
        n = int(round(upper / step))
        return cls(np.linspace(0.0, upper, n + 1))

    def with_windows(self, centers, half_width=2e-3, step=1e-5):
        """Return a copy with a fine sub-grid around each center."""
        extra = [self.points]
        lo, hi = self.points[0], self.points[-1]
        for c in centers:
            a, b = max(lo, c - half_width), min(hi, c + half_width)
            extra.append(np.arange(a, b + step / 2, step))
        return RhoGrid(np.concatenate(extra))

    @property
    def step(self):
        return float(np.min(np.diff(self.points)))

    def __len__(self):
        return len(self.points)


def source_function(rho, source: SourceSpec):
    """Eₛ(ρ,p) = (1+ρ) log Σ_v p(v)^{1/(1+ρ)}; accepts scalar or array ρ."""
    rho = np.asarray(rho, dtype=float)
    lp = source.logp[source.probs > 0]
    s = 1.0 / (1.0 + rho)
    out = (1.0 + rho) * logsumexp(np.multiply.outer(s, lp), axis=-1)
    out = np.where(rho == 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def channel_function(rho, w: ChannelSpec, q: InputDistribution):
    """E₀(ρ,W,Q) = −log Σ_y (Σ_x Q(x) W(y|x)^{1/(1+ρ)})^{1+ρ}."""
    _check_dims(q, w)
    return _e0(np.asarray(rho, dtype=float), w.logw, q.probs)


def _e0(rho, logw, qprobs):
    rho = np.asarray(rho, dtype=float)
    s = 1.0 / (1.0 + rho)
    mask = qprobs > 0
    lq = np.log(qprobs[mask])
    lw = logw[mask]
    # log alpha_y = logsumexp_x (log Q + s log W); shape rho.shape + (|Y|,)
    with np.errstate(invalid="ignore"):
        terms = lq[:, None] + np.multiply.outer(s, lw)
    la = logsumexp(terms, axis=-2)
    out = -logsumexp((1.0 + rho)[..., None] * la, axis=-1)
    out = np.where(rho == 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=64)
def _compositions(k, m):
    count = math.comb(k + m - 1, m - 1)
    if count > COMPOSITION_CAP:
        raise EnumerationCapExceeded(count, COMPOSITION_CAP, "composition count")
    if m == 1:
        comps = np.array([[k]], dtype=np.int64)
    else:
        bars = np.array(list(combinations(range(k + m - 1), m - 1)), dtype=np.int64)
        bars = bars.reshape(-1, m - 1)
        padded = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), k + m - 1)])
        comps = np.diff(padded, axis=1) - 1
    comps.setflags(write=False)
    return comps


def compositions(k, m):
    """All length-``m`` count vectors summing to ``k`` (stars and bars order)."""
    return _compositions(int(k), int(m))


def log_multinomial(comps):
    comps = np.asarray(comps)
    k = comps.sum(axis=-1)
    return gammaln(k + 1) - gammaln(comps + 1).sum(axis=-1)


@dataclass(frozen=True, eq=False)
class CompositionTable:
    """Source compositions at blocklength k with their per-sequence log-probability."""

    counts: np.ndarray
    log_mult: np.ndarray
    log_prob: np.ndarray  # log P(v) of any one sequence with these counts

    @classmethod
    def build(cls, source: SourceSpec, k):
        comps = compositions(k, source.size)
        lp = source.logp
        with np.errstate(invalid="ignore"):
            logpv = np.where(comps > 0, comps * lp, 0.0).sum(axis=1)
        return cls(comps, log_multinomial(comps), logpv)

    def class_mask(self, gamma, cls_index, k=None):
        """Boolean mask of compositions in class 1 (P(v) < γ^k) or class 2."""
        k = int(self.counts[0].sum()) if k is None else k
        in_one = class_one_mask(self.log_prob, k, gamma)
        return in_one if cls_index == 1 else ~in_one


def class_one_mask(log_prob, k, gamma):
    if gamma <= 0:
        return np.zeros(np.shape(log_prob), dtype=bool)
    thresh = k * math.log(gamma)
    return log_prob < thresh - TIE_TOL * max(1.0, abs(thresh))


def class_source_function(rho, source: SourceSpec, k, gamma, cls_index, table=None):
    """Eₛ^{(i)}(ρ,P^k) for the threshold classes {P(v) < γ^k} / {P(v) ≥ γ^k}.

    Evaluated exactly by grouping sequences by composition. An empty class
    gives ``-inf``.
    """
    if cls_index not in (1, 2):
        raise ValueError("class index must be 1 or 2")
    table = table or CompositionTable.build(source, k)
    mask = table.class_mask(gamma, cls_index, k) & np.isfinite(table.log_prob)
    rho = np.asarray(rho, dtype=float)
    if not mask.any():
        out = np.full(rho.shape, -np.inf)
    else:
        s = 1.0 / (1.0 + rho)
        lm = table.log_mult[mask]
        lpv = table.log_prob[mask]
        out = (1.0 + rho) * logsumexp(lm + np.multiply.outer(s, lpv), axis=-1)
    return float(out) if out.ndim == 0 else out


def linearized_source_function(rho, rho0, gamma_prime, source: SourceSpec):
    """Tangent-like line through (ρ₀, Eₛ(ρ₀)) whose slope depends on log γ′."""
    if gamma_prime <= 0:
        raise GammaNonpositive(f"gamma_prime must be positive, got {gamma_prime}")
    es0 = source_function(rho0, source)
    return es0 + (es0 - math.log(gamma_prime)) * (np.asarray(rho, dtype=float) - rho0) / (1.0 + rho0)


def lemma1_bound(rho, rho0, gamma_prime, source: SourceSpec, cls_index):
    """Per-letter upper bound on (1/k) Eₛ^{(i)} valid for every k.

    Class 1 uses Eₛ(ρ) above ρ₀ and the linearization at or below it; class 2
    the other way round (the linearization covers ρ ≥ ρ₀).
    """
    rho = np.asarray(rho, dtype=float)
    es = source_function(rho, source)
    r = linearized_source_function(rho, rho0, gamma_prime, source)
    if cls_index == 1:
        out = np.where(rho > rho0, es, r)
    elif cls_index == 2:
        out = np.where(rho < rho0, es, r)
    else:
        raise ValueError("class index must be 1 or 2")
    return float(out) if out.ndim == 0 else out
