"""Asymptotic exponents: source/channel reliability and the joint exponents.

All values are in nats per channel use (per source letter for
:func:`source_reliability`). Every function returns an :class:`ExponentResult`
except :func:`critical_rate` and :func:`solve_threshold`.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegeneratePair
from .gallager import RhoGrid, _e0, lemma1_bound, source_function
from .hull import (
    ALL_SIMPLEX,
    DistributionSet,
    HullCurve,
    _as_set,
    concave_hull,
    maximize_e0,
    maximize_e0_many,
)
from .prob import ChannelSpec, InputDistribution, SourceSpec, entropy

RHO_TOL = 1e-7
RATE_TOL = 1e-6
SOURCE_RHO_CAP = 1e4
SP_RHO_CAP = 1e3
CRIT_STEP = 1e-5
TIGHT_TOL = 1e-6
BRIDGE_TOL = 1e-9


@dataclass(frozen=True)
class ExponentResult:
    """An exponent value together with the arguments that attain it."""

    value: float
    rho: float | None = None
    q: InputDistribution | None = None
    pair: tuple[InputDistribution, InputDistribution] | None = None
    lam: float | None = None
    rho1: float | None = None
    rho2: float | None = None
    rate: float | None = None
    gamma0: float | None = None
    gamma: float | None = None
    infinite: bool = False
    tight: bool | None = None
    degenerate: bool | None = None

    def __float__(self):
        return math.inf if self.infinite else self.value


def check_rate(t):
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"transmission rate must be positive and finite, got {t}")
    return t


def golden_max(f, a, b, tol=RHO_TOL):
    """Golden-section search for the maximum of a unimodal ``f`` on [a, b]."""
    invphi = (math.sqrt(5) - 1) / 2
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
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
    fx = f(x)
    best = max((fx, x), (fc, c), (fd, d))
    return best[1], best[0]


def _grid_then_golden(f, xs, fx, tol=RHO_TOL):
    """Pick the best grid sample, then golden-search its neighbouring cells."""
    i = int(np.argmax(fx))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, len(xs) - 1)]
    x, v = golden_max(f, a, b, tol)
    if fx[i] >= v:
        return float(xs[i]), float(fx[i])
    return float(x), float(v)


class E0Model:
    """E₀(ρ,W,𝒬) sampled on a ρ-grid, its concave hull, and point evaluation.

    Point evaluation away from the grid reruns the optimizer warm-started from
    the nearest sample (whole simplex) or evaluates the finite set directly.
    """

    def __init__(self, w: ChannelSpec, dset=None, step=1e-3, refine=True, grid=None):
        self.w = w
        self.dset = _as_set(dset)
        self.step = step
        self.hull: HullCurve = concave_hull(w, self.dset, grid or RhoGrid.uniform(step), refine=refine)
        self._bridges = self.hull.bridges(BRIDGE_TOL)
        self._ext = None

    # -- pointwise E0 --------------------------------------------------------
    def value(self, rho):
        """(E₀(ρ,W,𝒬), maximizing distribution as an array)."""
        if not self.dset.is_simplex:
            v, q = maximize_e0_many([rho], self.w, self.dset)
            return float(v[0]), q[0]
        if rho == 0:
            return 0.0, self.hull.argmax[0]
        rr, qq = self._samples()
        i = int(np.argmin(np.abs(rr - rho)))
        if rr[i] == rho:
            return float(self._samples_e0()[i]), qq[i]
        q0 = 0.9 * qq[i] + 0.1 / self.w.n_inputs
        v, q = maximize_e0_many([rho], self.w, self.dset, q0=q0[None], restarts=0)
        return float(v[0]), q[0]

    def __call__(self, rho):
        return self.value(rho)[0]

    def _samples(self):
        if self._ext is None:
            return self.hull.rho, self.hull.argmax
        return self._ext[0], self._ext[2]

    def _samples_e0(self):
        return self.hull.e0 if self._ext is None else self._ext[1]

    def extended(self, rho_max=SP_RHO_CAP, n=240):
        """Samples on [0, rho_max]: the hull grid plus a geometric tail beyond 1."""
        if self._ext is None:
            tail = np.geomspace(1.0, rho_max, n + 1)[1:]
            if self.dset.is_simplex:
                q1 = self.hull.argmax[-1]
                q0 = np.tile(0.9 * q1 + 0.1 / self.w.n_inputs, (len(tail), 1))
                v, q = maximize_e0_many(tail, self.w, self.dset, q0=q0, restarts=0)
            else:
                v, q = maximize_e0_many(tail, self.w, self.dset)
            self._ext = (
                np.concatenate([self.hull.rho, tail]),
                np.concatenate([self.hull.e0, v]),
                np.concatenate([self.hull.argmax, q]),
            )
        return self._ext[0], self._ext[1]

    # -- hull ----------------------------------------------------------------
    def hull_support(self, rho):
        """(hull value, lam, rho1, rho2) at ``rho``.

        Inside a non-concave stretch the value is the chord between the two
        supporting samples; elsewhere the hull coincides with E₀ and the
        function is evaluated exactly, with rho1 = rho2 = rho.
        """
        h = self.hull
        for a, b in self._bridges:
            r1, r2 = h.rho[a], h.rho[b]
            if r1 < rho < r2:
                lam = (r2 - rho) / (r2 - r1)
                return float(lam * h.e0[a] + (1 - lam) * h.e0[b]), float(lam), float(r1), float(r2)
        return self(rho), 1.0, float(rho), float(rho)

    def hull_value(self, rho):
        return self.hull_support(rho)[0]

    def argmax_at(self, rho):
        return InputDistribution(np.array(self.value(rho)[1]))


_MODELS: OrderedDict = OrderedDict()
_MODEL_CACHE_SIZE = 32


def e0_model(w: ChannelSpec, dset=None, step=1e-3) -> E0Model:
    """Cached :class:`E0Model` keyed on channel, distribution set and grid step."""
    dset = _as_set(dset)
    key = (w.matrix.shape, w.matrix.tobytes(), dset.key(), step)
    m = _MODELS.get(key)
    if m is None:
        m = E0Model(w, dset, step)
        _MODELS[key] = m
        if len(_MODELS) > _MODEL_CACHE_SIZE:
            _MODELS.popitem(last=False)
    else:
        _MODELS.move_to_end(key)
    return m


def clear_cache():
    _MODELS.clear()


# -- source side ---------------------------------------------------------------

def source_reliability(R, source: SourceSpec) -> ExponentResult:
    """e(R,p) = sup_{ρ≥0} {ρR − Eₛ(ρ,p)}, per source letter.

    Infinite (flagged) above log of the support size.
    """
    if R < 0:
        raise ValueError("rate must be nonnegative")
    h = entropy(source)
    if R <= h:
        return ExponentResult(0.0, rho=0.0)
    m = source.support_size
    logm = math.log(m)
    if R > logm + 1e-12:
        return ExponentResult(math.inf, rho=math.inf, infinite=True)
    if R >= logm - 1e-12:
        # sup is approached as rho -> inf; the limit is D(uniform on support || p)
        lp = source.logp[source.probs > 0]
        return ExponentResult(float(-logm - lp.mean()), rho=math.inf)

    def g(rho):
        return rho * R - source_function(rho, source)

    rho, v = golden_max(g, 0.0, SOURCE_RHO_CAP, tol=1e-10)
    if rho > SOURCE_RHO_CAP * (1 - 1e-6) and g(SOURCE_RHO_CAP) > g(SOURCE_RHO_CAP * (1 - 1e-3)):
        return ExponentResult(math.inf, rho=math.inf, infinite=True)
    return ExponentResult(max(v, 0.0), rho=rho)


# -- channel side --------------------------------------------------------------

def _channel_exponent(R, model: E0Model, rhos, vals, refine=True):
    obj = vals - rhos * R
    i = int(np.argmax(obj))
    if obj[i] <= 1e-15:
        return 0.0, 0.0
    if not refine:
        return float(obj[i]), float(rhos[i])
    rho, v = _grid_then_golden(lambda r: model(r) - r * R, rhos, obj)
    return v, rho


def random_coding_exponent(R, w: ChannelSpec, dset=None, step=1e-3, refine=True) -> ExponentResult:
    """Er(R,W) = max_{ρ∈[0,1]} {E₀(ρ,W) − ρR}."""
    if R < 0:
        raise ValueError("rate must be nonnegative")
    model = e0_model(w, dset, step)
    v, rho = _channel_exponent(R, model, model.hull.rho, model.hull.e0, refine)
    return ExponentResult(v, rho=rho, q=model.argmax_at(rho) if rho > 0 else None)


def sphere_packing_exponent(R, w: ChannelSpec, dset=None, step=1e-3, refine=True) -> ExponentResult:
    """Esp(R,W) = sup_{ρ≥0} {E₀(ρ,W) − ρR}; ρ is capped at 1e3 and a maximum
    at the cap is reported as infinite."""
    if R < 0:
        raise ValueError("rate must be nonnegative")
    model = e0_model(w, dset, step)
    rhos, vals = model.extended(SP_RHO_CAP)
    obj = vals - rhos * R
    i = int(np.argmax(obj))
    if i == len(rhos) - 1 and obj[-1] > obj[-2]:
        return ExponentResult(math.inf, rho=math.inf, infinite=True)
    v, rho = _channel_exponent(R, model, rhos, vals, refine)
    return ExponentResult(v, rho=rho)


def critical_rate(w: ChannelSpec, dset=None, h=CRIT_STEP) -> float:
    """Slope of E₀(·,W) at ρ = 1 by a central difference."""
    hi = maximize_e0(1.0 + h, w, dset)[0]
    lo = maximize_e0(1.0 - h, w, dset)[0]
    return max((hi - lo) / (2 * h), 0.0)


# -- joint exponents -----------------------------------------------------------

def gallager_jscc_exponent(source: SourceSpec, w: ChannelSpec, t, dset=None, step=1e-3) -> ExponentResult:
    """max_{ρ∈[0,1]} {E₀(ρ,W,𝒬) − t Eₛ(ρ,p)} with a single codeword distribution."""
    t = check_rate(t)
    model = e0_model(w, dset, step)
    rhos = model.hull.rho
    obj = model.hull.e0 - t * source_function(rhos, source)
    rho, v = _grid_then_golden(lambda r: model(r) - t * source_function(r, source), rhos, obj)
    return ExponentResult(max(v, 0.0), rho=rho, q=model.argmax_at(rho))


def _dual(source, model: E0Model, t):
    rhos = model.hull.rho
    obj = np.interp(rhos, model.hull.vertex_rho, model.hull.vertex_value) - t * source_function(rhos, source)

    def f(r):
        return model.hull_value(r) - t * source_function(r, source)

    # hull minus a convex function is concave, so the grid stage only seeds the bracket
    rho, v = _grid_then_golden(f, rhos, obj)
    hv, lam, r1, r2 = model.hull_support(rho)
    return max(v, 0.0), rho, lam, r1, r2


def csiszar_jscc_exponent_dual(source: SourceSpec, w: ChannelSpec, t, dset=None, step=1e-3) -> ExponentResult:
    """max_{ρ∈[0,1]} {Ē₀(ρ,W,𝒬) − t Eₛ(ρ,p)} where Ē₀ is the concave hull in ρ."""
    t = check_rate(t)
    model = e0_model(w, dset, step)
    v, rho, lam, r1, r2 = _dual(source, model, t)
    pair = None
    if r1 != r2:
        pair = (model.argmax_at(r1), model.argmax_at(r2))
    return ExponentResult(v, rho=rho, lam=lam, rho1=r1, rho2=r2, pair=pair,
                          q=None if pair else model.argmax_at(rho), degenerate=pair is None)


def ensemble_ceiling(source: SourceSpec, w: ChannelSpec, t, dset=None, step=1e-3) -> ExponentResult:
    """Upper bound on the exact exponent of any class-based ensemble drawing
    from ``dset``; same formula as the dual form restricted to ``dset``."""
    return csiszar_jscc_exponent_dual(source, w, t, dset, step)


def _rate_range(source, t):
    lo = t * entropy(source)
    hi = t * math.log(source.support_size)
    return lo, hi


def _golden_min_rate(obj, lo, hi):
    if hi - lo <= RATE_TOL:
        return lo, obj(lo)
    r, v = golden_max(lambda R: -obj(R), lo, hi, tol=RATE_TOL)
    # the objective is convex; the endpoints can still win when the minimum is on the boundary
    cands = [(-v, r), (obj(lo), lo), (obj(hi), hi)]
    v, r = min(cands)
    return r, v


def csiszar_jscc_exponent_primal(source: SourceSpec, w: ChannelSpec, t, step=1e-3) -> ExponentResult:
    """min over tH(V) ≤ R ≤ t log|supp| of t·e(R/t,p) + Er(R,W); reports R*."""
    t = check_rate(t)
    model = e0_model(w, None, step)
    rhos, vals = model.hull.vertex_rho, model.hull.vertex_value
    lo, hi = _rate_range(source, t)

    def obj(R):
        e = source_reliability(R / t, source)
        if e.infinite:
            return math.inf
        return t * e.value + _channel_exponent(R, model, rhos, vals, refine=False)[0]

    r_star, _ = _golden_min_rate(obj, lo, hi)
    er = random_coding_exponent(r_star, w, None, step)
    es = source_reliability(r_star / t, source)
    return ExponentResult(t * es.value + er.value, rho=er.rho, rate=r_star)


def jscc_sphere_packing_exponent(source: SourceSpec, w: ChannelSpec, t, step=1e-3) -> ExponentResult:
    """min over R of t·e(R/t,p) + Esp(R,W); ``tight`` says Esp = Er at R*."""
    t = check_rate(t)
    model = e0_model(w, None, step)
    rhos, vals = model.extended(SP_RHO_CAP)
    lo, hi = _rate_range(source, t)

    def obj(R):
        e = source_reliability(R / t, source)
        if e.infinite:
            return math.inf
        i = int(np.argmax(vals - rhos * R))
        if i == len(rhos) - 1:
            return math.inf
        return t * e.value + _channel_exponent(R, model, rhos, vals, refine=False)[0]

    r_star, _ = _golden_min_rate(obj, lo, hi)
    sp = sphere_packing_exponent(r_star, w, None, step)
    er = random_coding_exponent(r_star, w, None, step)
    es = source_reliability(r_star / t, source)
    if sp.infinite:
        return ExponentResult(math.inf, rate=r_star, infinite=True, tight=False)
    return ExponentResult(t * es.value + sp.value, rho=sp.rho, rate=r_star,
                          tight=abs(sp.value - er.value) <= TIGHT_TOL)


# -- two-class construction ----------------------------------------------------

def solve_threshold(source: SourceSpec, t, rho0, rho1, rho2, e0_at_rho1, e0_at_rho2) -> float:
    """Threshold γ₀ whose linearized source function has the chord slope of E₀.

    log γ₀ = Eₛ(ρ₀) − (1+ρ₀)/t · (E₀(ρ₂) − E₀(ρ₁)) / (ρ₂ − ρ₁).
    """
    t = check_rate(t)
    if abs(rho2 - rho1) < 1e-9:
        raise DegeneratePair(f"rho1={rho1} and rho2={rho2} coincide")
    slope = (e0_at_rho2 - e0_at_rho1) / (rho2 - rho1)
    log_g = source_function(rho0, source) - (1.0 + rho0) / t * slope
    return math.exp(log_g)


def two_class_exponent(source: SourceSpec, w: ChannelSpec, t, q1: InputDistribution,
                       q2: InputDistribution, step=1e-3, grid=None) -> ExponentResult:
    """Exponent of the threshold two-class ensemble drawing from {q1, q2}.

    Besides the value, reports ρ₀* (``rho``), the supporting ρ₁* ≤ ρ₀* ≤ ρ₂*,
    the class distributions (``pair`` = (class 1, class 2)), γ₀ and γ = min(1, γ₀).
    Class 1 holds the low-probability messages and uses the distribution
    supporting the hull at ρ₁*.
    """
    t = check_rate(t)
    dset = DistributionSet.of(q1, q2)
    if grid is not None:
        model = E0Model(w, dset, grid=grid, refine=False)
    else:
        model = e0_model(w, dset, step)
    v, rho0, lam, r1, r2 = _dual(source, model, t)
    if r1 == r2 or q1 == q2:
        return ExponentResult(v, rho=rho0, q=model.argmax_at(rho0), lam=1.0, rho1=rho0, rho2=rho0,
                              degenerate=True)
    Q1, Q2 = model.argmax_at(r1), model.argmax_at(r2)
    e1 = float(_e0(r1, w.logw, Q1.probs))
    e2 = float(_e0(r2, w.logw, Q2.probs))
    g0 = solve_threshold(source, t, rho0, r1, r2, e1, e2)
    return ExponentResult(v, rho=rho0, pair=(Q1, Q2), lam=lam, rho1=r1, rho2=r2,
                          gamma0=g0, gamma=min(1.0, g0), degenerate=False)


def class_exponents(source: SourceSpec, w: ChannelSpec, t, res: ExponentResult):
    """Asymptotic per-class exponents E₀(ρᵢ,W,Qᵢ) − t·Ēₛ^{(i)}(ρᵢ,ρ₀,γ₀) at the construction point."""
    out = []
    for i, (q, r) in enumerate(zip(res.pair, (res.rho1, res.rho2)), start=1):
        e0 = float(_e0(r, w.logw, q.probs))
        out.append(e0 - t * lemma1_bound(r, res.rho, res.gamma0, source, i))
    return out


def best_pair_search(source: SourceSpec, w: ChannelSpec, t, grid: RhoGrid | None = None,
                     step=1e-3) -> ExponentResult:
    """Two-class construction attaining the full-simplex dual exponent.

    The pair is read off the hull support at the dual argmax; when that point
    is not inside a non-concave stretch the construction is single-class.
    """
    t = check_rate(t)
    model = e0_model(w, None, step) if grid is None else E0Model(w, None, grid=grid)
    _, rho0, lam, r1, r2 = _dual(source, model, t)
    if r1 == r2:
        q = model.argmax_at(rho0)
        res = two_class_exponent(source, w, t, q, q, grid=RhoGrid(model.hull.rho))
        return replace(res, degenerate=True)
    q1, q2 = model.argmax_at(r1), model.argmax_at(r2)
    return two_class_exponent(source, w, t, q1, q2, grid=RhoGrid(model.hull.rho))
