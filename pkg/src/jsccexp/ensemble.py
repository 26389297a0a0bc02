"""Ensemble-average MAP error probability: exact enumeration and Monte Carlo.

Decoding is MAP over source messages with ties counted as errors: the
transmitted message v is decoded correctly only if every other message v̄
satisfies P(v̄)W(y|x(v̄)) < P(v)W(y|x(v)). Comparisons are made in the log
domain with a relative tolerance of 1e-9, so numerically equal metrics count
as ties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import stats
from statsmodels.stats.proportion import proportion_confint

from .errors import DegenerateSeries, EnumerationCapExceeded
from .finite import PartitionSpec
from .gallager import CompositionTable, class_one_mask
from .prob import ChannelSpec, SourceSpec, _check_dims

TIE_POLICY = "ties-as-error"
TIE_RTOL = 1e-9
EXACT_CAP = 2**24
TABLE_CAP = 2**24
BATCH = 2**17


@dataclass(frozen=True)
class EnsembleConfig:
    source: SourceSpec
    channel: ChannelSpec
    k: int
    n: int
    partition: PartitionSpec
    seed: int = 0
    trials: int = 10**5

    def __post_init__(self):
        if self.partition.k != self.k:
            raise ValueError("partition blocklength does not match k")
        for q in (self.partition.q1, self.partition.q2):
            _check_dims(q, self.channel)


@dataclass(frozen=True)
class ErrorEstimate:
    estimate: float
    half_width: float = 0.0
    exact: bool = False
    interval: tuple[float, float] | None = None
    trials: int | None = None
    errors: int | None = None
    best_codebook: float | None = None
    tie_policy: str = TIE_POLICY

    def as_dict(self):
        d = {"estimate": self.estimate, "half_width": self.half_width, "exact": self.exact,
             "tie_policy": self.tie_policy}
        if self.interval is not None:
            d["interval"] = list(self.interval)
            d["trials"] = self.trials
            d["errors"] = self.errors
        if self.best_codebook is not None:
            d["best_codebook"] = self.best_codebook
        return d


def _tie_floor(m):
    """Smallest competitor metric that counts as beating or tying ``m``."""
    with np.errstate(invalid="ignore"):
        return np.where(np.isfinite(m), m - TIE_RTOL * np.maximum(1.0, np.abs(m)), m)


def _block_tables(cfg: EnsembleConfig):
    """Log-probabilities of every x ∈ X^n under both class distributions and log W^n."""
    w = cfg.channel
    nx, ny, n = w.n_inputs, w.n_outputs, cfg.n
    if nx**n * ny**n > TABLE_CAP:
        raise EnumerationCapExceeded(nx**n * ny**n, TABLE_CAP, "|X|^n·|Y|^n table")
    xs = np.array(list(product(range(nx), repeat=n)), dtype=np.int64).reshape(-1, n)
    ys = np.array(list(product(range(ny), repeat=n)), dtype=np.int64).reshape(-1, n)
    logw = w.logw
    with np.errstate(invalid="ignore"):
        lwn = logw[xs[:, None, :], ys[None, :, :]].sum(axis=-1)  # (X^n, Y^n)
    lq = []
    for q in (cfg.partition.q1, cfg.partition.q2):
        with np.errstate(divide="ignore"):
            lq.append(np.log(q.probs)[xs].sum(axis=1))
    return xs, ys, lwn, lq


def _messages(cfg: EnsembleConfig):
    src = cfg.source
    seqs = np.array(list(product(range(src.size), repeat=cfg.k)), dtype=np.int64).reshape(-1, cfg.k)
    logp = src.logp[seqs].sum(axis=1)
    cls = np.where(class_one_mask(logp, cfg.k, cfg.partition.gamma), 0, 1)
    return seqs, logp, cls


def exact_ensemble_error(cfg: EnsembleConfig) -> ErrorEstimate:
    """Average and best-codebook MAP error by enumerating every codebook.

    Each codebook assigns one x ∈ X^n to each of the |V|^k messages and is
    weighted by Π_v Q_{c(v)}^n(x(v)).
    """
    w = cfg.channel
    nx, n = w.n_inputs, cfg.n
    M = cfg.source.size**cfg.k
    base = nx**n
    total = base**M
    if total > EXACT_CAP:
        raise EnumerationCapExceeded(total, EXACT_CAP, "codebook count")
    _, _, lwn, lq = _block_tables(cfg)
    _, logp, cls = _messages(cfg)
    lqm = np.stack([lq[c] for c in cls])  # (M, X^n)
    wn = np.exp(lwn)
    avg = 0.0
    best = math.inf
    powers = base ** np.arange(M, dtype=np.int64)
    chunk = max(1, 2**22 // (M * M * lwn.shape[1]))
    for start in range(0, total, chunk):
        ids = np.arange(start, min(start + chunk, total), dtype=np.int64)
        cb = (ids[:, None] // powers[None, :]) % base  # (B, M)
        logprob_cb = lqm[np.arange(M)[None, :], cb].sum(axis=1)
        metric = logp[None, :, None] + lwn[cb]  # (B, M, Y^n)
        floor = _tie_floor(metric)
        beats = (metric[:, None, :, :] >= floor[:, :, None, :]).sum(axis=2)  # (B, M, Y^n), counts self
        err = beats >= 2
        weight = np.exp(logp)[None, :, None] * wn[cb]
        eps = (weight * err).sum(axis=(1, 2))
        live = np.isfinite(logprob_cb)
        avg += float(np.sum(np.exp(logprob_cb[live]) * eps[live]))
        if live.any():
            best = min(best, float(eps[live].min()))
    return ErrorEstimate(min(max(avg, 0.0), 1.0), exact=True, best_codebook=best)


class _Competition:
    """Pre-sorted tables giving Pr_{x̄∼Q_c^n}[log W^n(y|x̄) ≥ τ] for every y and class c."""

    def __init__(self, lwn, lq):
        self.ny = lwn.shape[1]
        self.nxn = lwn.shape[0]
        finite = lwn[np.isfinite(lwn)]
        self.lo = float(finite.min()) - 1.0
        self.hi = float(finite.max()) + 1.0
        self.span = self.hi - self.lo + 1.0
        vals = np.where(np.isfinite(lwn), lwn, self.lo).T  # (Y^n, X^n)
        order = np.argsort(vals, axis=1, kind="stable")
        sv = np.take_along_axis(vals, order, axis=1)
        self.keys = (sv + self.span * np.arange(self.ny)[:, None]).ravel()
        self.tails = []
        for lqc in lq:
            pr = np.exp(lqc)[order]  # (Y^n, X^n)
            tail = np.cumsum(pr[:, ::-1], axis=1)[:, ::-1]
            self.tails.append(np.hstack([tail, np.zeros((self.ny, 1))]))

    def tail(self, c, y, thresh):
        """Pr[log W^n(y|x̄) ≥ thresh] with x̄ ~ Q_c^n, vectorized over (y, thresh)."""
        t = np.clip(thresh, self.lo + 0.5, self.hi)
        key = t + self.span * y
        idx = np.searchsorted(self.keys, key, side="left") - y * self.nxn
        out = self.tails[c][y, idx]
        return np.where(thresh > self.hi, 0.0, out)


def _groups(cfg: EnsembleConfig):
    table = CompositionTable.build(cfg.source, cfg.k)
    cls = np.where(class_one_mask(table.log_prob, cfg.k, cfg.partition.gamma), 0, 1)
    counts = np.exp(table.log_mult)
    return table, cls, counts


def _log_no_beat(comp: _Competition, table, gcls, gcount, own_group, y, tau):
    """log Pr[no other message beats or ties metric τ] given the channel output y."""
    floor = _tie_floor(tau)
    acc = np.zeros(len(tau))
    for g in range(len(table.log_prob)):
        lpg = table.log_prob[g]
        if not np.isfinite(lpg):
            continue
        m = gcount[g] - (own_group == g)
        pi = comp.tail(gcls[g], y, floor - lpg)
        with np.errstate(divide="ignore", invalid="ignore"):
            acc += np.where(m > 0, m * np.log1p(-np.minimum(pi, 1.0)), 0.0)
    return acc


def conditional_ensemble_error(cfg: EnsembleConfig) -> ErrorEstimate:
    """Ensemble-average error from the per-(v, x, y) conditional error probability.

    Given the transmitted message, its codeword and the output, the other
    codewords are independent, so the error probability is
    1 − Π_{v̄≠v}(1 − Pr[v̄ beats or ties]); this is summed exactly over
    compositions of v, x ∈ X^n and y ∈ Y^n without enumerating codebooks.
    """
    _, _, lwn, lq = _block_tables(cfg)
    comp = _Competition(lwn, lq)
    table, gcls, gcount = _groups(cfg)
    total = 0.0
    ny = lwn.shape[1]
    yy = np.tile(np.arange(ny), lwn.shape[0])
    for g in range(len(table.log_prob)):
        lpg = table.log_prob[g]
        if not np.isfinite(lpg):
            continue
        c = gcls[g]
        # joint weight of (x, y) for a message of this composition
        lj = (lq[c][:, None] + lwn).ravel()
        live = np.isfinite(lj)
        tau = (lpg + lwn).ravel()[live]
        lnb = _log_no_beat(comp, table, gcls, gcount, g, yy[live], tau)
        perr = -np.expm1(lnb)
        total += gcount[g] * math.exp(lpg) * float(np.sum(np.exp(lj[live]) * perr))
    return ErrorEstimate(min(max(total, 0.0), 1.0), exact=True)


def _rng(seed, batch):
    ss = np.random.SeedSequence(seed, spawn_key=(batch,))
    return np.random.Generator(np.random.Philox(ss))


def _batches(trials):
    b = 0
    while b * BATCH < trials:
        yield b, min(BATCH, trials - b * BATCH)
        b += 1


def _wilson(errors, trials):
    lo, hi = proportion_confint(errors, trials, alpha=0.05, method="wilson")
    return float(lo), float(hi)


def _estimate(errors, trials):
    lo, hi = _wilson(errors, trials)
    return ErrorEstimate(errors / trials, half_width=(hi - lo) / 2, interval=(lo, hi),
                         trials=trials, errors=int(errors))


def monte_carlo_error(cfg: EnsembleConfig, method="conditional") -> ErrorEstimate:
    """Monte Carlo estimate of the ensemble-average MAP error with a Wilson 95% interval.

    ``method="conditional"`` draws (v, x(v), y) and then the error indicator
    with its exact conditional probability given (v, x, y); the competing
    codewords never need to be materialized. ``method="codebook"`` draws a
    whole codebook per trial and runs the MAP decoder; it is only practical
    for a handful of messages.

    Trials are split in fixed batches of 2**17, each with its own Philox
    stream derived from ``(seed, batch index)``, so results do not depend on
    how batches are scheduled.
    """
    if cfg.trials < 1:
        raise ValueError("need at least one trial")
    if method == "codebook":
        return _mc_codebook(cfg)
    if method != "conditional":
        raise ValueError(f"unknown method {method!r}")
    w, n = cfg.channel, cfg.n
    xs, _, lwn, lq = _block_tables(cfg)
    comp = _Competition(lwn, lq)
    table, gcls, gcount = _groups(cfg)
    m = cfg.source.size
    dims = (cfg.k + 1,) * m
    lookup = np.full(int(np.prod(dims)), -1, dtype=np.int64)
    lookup[np.ravel_multi_index(table.counts.T, dims)] = np.arange(len(table.counts))
    cdf = np.cumsum(w.matrix, axis=1)
    cdf[:, -1] = 1.0
    ypow = w.n_outputs ** np.arange(n)[::-1]
    xpow = w.n_inputs ** np.arange(n)[::-1]
    qs = (cfg.partition.q1.probs, cfg.partition.q2.probs)
    errors = 0
    for b, size in _batches(cfg.trials):
        rng = _rng(cfg.seed, b)
        counts = rng.multinomial(cfg.k, cfg.source.probs, size=size)
        g = lookup[np.ravel_multi_index(counts.T, dims)]
        c = gcls[g]
        x = np.empty((size, n), dtype=np.int64)
        for ci in (0, 1):
            sel = c == ci
            if sel.any():
                x[sel] = rng.choice(w.n_inputs, size=(int(sel.sum()), n), p=qs[ci])
        u = rng.random((size, n))
        y = (u[..., None] > cdf[x]).sum(axis=-1)
        y = np.minimum(y, w.n_outputs - 1)
        xi = x @ xpow
        yi = y @ ypow
        tau = table.log_prob[g] + lwn[xi, yi]
        lnb = _log_no_beat(comp, table, gcls, gcount, g, yi, tau)
        p_err = -np.expm1(lnb)
        errors += int(np.count_nonzero(rng.random(size) < p_err))
    return _estimate(errors, cfg.trials)


def _mc_codebook(cfg: EnsembleConfig) -> ErrorEstimate:
    w, n = cfg.channel, cfg.n
    seqs, logp, cls = _messages(cfg)
    M = len(seqs)
    if M * n * cfg.trials > 10**9:
        raise EnumerationCapExceeded(M * n * cfg.trials, 10**9, "codebook Monte Carlo work")
    qs = (cfg.partition.q1.probs, cfg.partition.q2.probs)
    cdf = np.cumsum(w.matrix, axis=1)
    cdf[:, -1] = 1.0
    pv = np.exp(logp)
    logw = w.logw
    errors = 0
    for b, size in _batches(cfg.trials):
        rng = _rng(cfg.seed, b)
        book = np.empty((size, M, n), dtype=np.int64)
        for ci in (0, 1):
            sel = np.flatnonzero(cls == ci)
            if sel.size:
                book[:, sel] = rng.choice(w.n_inputs, size=(size, sel.size, n), p=qs[ci])
        v = rng.choice(M, size=size, p=pv)
        x = book[np.arange(size), v]
        u = rng.random((size, n))
        y = np.minimum((u[..., None] > cdf[x]).sum(axis=-1), w.n_outputs - 1)
        with np.errstate(invalid="ignore"):
            metric = logp[None, :] + logw[book, y[:, None, :]].sum(axis=-1)  # (size, M)
        own = metric[np.arange(size), v]
        floor = _tie_floor(own)
        beats = (metric >= floor[:, None]).sum(axis=1)  # includes v itself
        errors += int(np.count_nonzero(beats >= 2))
    return _estimate(errors, cfg.trials)


@dataclass(frozen=True)
class SlopeEstimate:
    slope: float
    stderr: float
    intercept: float


def empirical_exponent(ns, estimates) -> SlopeEstimate:
    """Least-squares slope of −log(error) against n."""
    ns = np.asarray(ns, dtype=float)
    p = np.array([e.estimate if isinstance(e, ErrorEstimate) else float(e) for e in estimates])
    if len(ns) < 3 or len(ns) != len(p):
        raise DegenerateSeries("need at least three (n, estimate) pairs")
    if np.any(p <= 0):
        raise DegenerateSeries("series contains a zero error estimate")
    fit = stats.linregress(ns, -np.log(p))
    return SlopeEstimate(float(fit.slope), float(fit.stderr), float(fit.intercept))
