"""Maximization of E₀ over input distributions and its concave hull in ρ."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import DimensionMismatch, NoConvergence, OptimizerDisagreement
from .gallager import RhoGrid, _e0
from .prob import ChannelSpec, InputDistribution, mutual_information, uniform_input

log = logging.getLogger(__name__)

VALUE_TOL = 1e-11
KKT_TOL = 1e-7
# stopping rule is stricter than the final check: near an argmax switch E0 is so
# flat in Q that a 1e-7 ratio spread still leaves ~1e-7 nats on the table
KKT_STOP = 1e-9
ITER_CAP = 10**5
ARIMOTO_BUDGET = 20000
RESTARTS = 8
RESTART_AGREE = 1e-8
ACTIVE_MIN = 1e-6
PRUNE_EVERY = 50
PRUNE_MASS = 1e-3
PRUNE_GAP = 1e-7


class DistributionSet:
    """Either the whole simplex or an explicit finite list of distributions."""

    def __init__(self, members=None):
        if members is not None:
            members = tuple(members)
            if not members:
                raise ValueError("a finite distribution set must be non-empty")
            sizes = {q.size for q in members}
            if len(sizes) != 1:
                raise DimensionMismatch("distributions in a set must share an alphabet")
        self.members = members

    @classmethod
    def simplex(cls):
        return cls(None)

    @classmethod
    def of(cls, *qs):
        return cls(qs)

    @property
    def is_simplex(self):
        return self.members is None

    def key(self):
        return "simplex" if self.is_simplex else tuple(q.key() for q in self.members)

    def __eq__(self, other):
        return isinstance(other, DistributionSet) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "DistributionSet.simplex()" if self.is_simplex else f"DistributionSet.of{self.members!r}"


ALL_SIMPLEX = DistributionSet.simplex()


def _as_set(dset):
    if dset is None:
        return ALL_SIMPLEX
    if isinstance(dset, InputDistribution):
        return DistributionSet.of(dset)
    return dset


def _arimoto(w: ChannelSpec, rho, Q, cap, tol=VALUE_TOL):
    """Batched multiplicative updates; rows of ``Q`` pair with entries of ``rho``.

    Returns (values, Q, converged mask, iterations used).
    """
    rho = np.asarray(rho, dtype=float)
    Q = np.array(Q, dtype=float)
    Ws = w.matrix[None] ** (1.0 / (1.0 + rho))[:, None, None]
    val = np.full(len(rho), -np.inf)
    conv = np.zeros(len(rho), dtype=bool)
    active = np.arange(len(rho))
    it = 0
    while active.size and it < cap:
        it += 1
        q, ws, r = Q[active], Ws[active], rho[active]
        a = np.einsum("nx,nxy->ny", q, ws)
        beta = np.einsum("nxy,ny->nx", ws, a ** r[:, None])
        F = np.einsum("nx,nx->n", q, beta)
        v = -np.log(F)
        ratio = beta / F[:, None]
        ok = (np.abs(v - val[active]) < tol) & _kkt_ok(q, ratio, KKT_STOP)
        val[active] = v
        qn = q * ratio ** (-1.0 / r[:, None])
        if it % PRUNE_EVERY == 0:
            # letters the gradient keeps pushing out decay only geometrically
            # slowly near the boundary; drop them, and revive any zero letter
            # whose gradient turns favourable
            qn = np.where((qn < PRUNE_MASS) & (ratio > 1.0 + PRUNE_GAP), 0.0, qn)
            qn = np.where((qn == 0) & (ratio < 1.0 - KKT_STOP), PRUNE_MASS, qn)
        qn /= qn.sum(axis=1, keepdims=True)
        Q[active] = np.where(ok[:, None], q, qn)
        conv[active[ok]] = True
        active = active[~ok]
    return val, Q, conv, it


def _kkt_ok(q, ratio, tol=KKT_TOL):
    # dE0/dQ(x) is proportional to -ratio(x); optimum has ratio >= 1 with equality on the support
    act = q > ACTIVE_MIN
    lo = ratio.min(axis=1)
    hi_act = np.where(act, ratio, -np.inf).max(axis=1)
    return (hi_act - lo <= tol) & (lo >= 1.0 - tol)


def _kkt_single(w, rho, q):
    ws = w.matrix ** (1.0 / (1.0 + rho))
    a = q @ ws
    beta = ws @ a**rho
    F = q @ beta
    return bool(_kkt_ok(q[None], (beta / F)[None])[0])


def _polish(w: ChannelSpec, rho, q0):
    """Sequential quadratic programming on the convex form min Σ_y (Q W^s)_y^{1+ρ}."""
    ws = w.matrix ** (1.0 / (1.0 + rho))
    nx = w.n_inputs

    def f(q):
        return float(np.sum(np.maximum(q @ ws, 0.0) ** (1.0 + rho)))

    def g(q):
        return (1.0 + rho) * ws @ np.maximum(q @ ws, 0.0) ** rho

    res = minimize(
        f, q0, jac=g, method="SLSQP",
        bounds=[(0.0, 1.0)] * nx,
        constraints=[{"type": "eq", "fun": lambda q: q.sum() - 1.0, "jac": lambda q: np.ones(nx)}],
        options={"ftol": 1e-16, "maxiter": 2000},
    )
    q = np.clip(res.x, 0.0, None)
    q[q < 1e-13] = 0.0
    q /= q.sum()
    return q


def _simplex_max(w: ChannelSpec, rhos, q0=None, restarts=RESTARTS, seed=0):
    """Maximize E₀(ρ,W,·) over the simplex for every ρ in ``rhos``.

    ``q0`` (shape (len(rhos), |X|)) replaces the uniform starting point; random
    interior restarts are added on top and must agree within 1e-8.
    """
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    nx = w.n_inputs
    B = len(rhos)
    R = 1 + restarts
    starts = np.empty((B, R, nx))
    starts[:, 0] = 1.0 / nx if q0 is None else q0
    if restarts:
        rng = np.random.default_rng(seed)
        starts[:, 1:] = rng.dirichlet(np.ones(nx), size=(B, restarts))
    rr = np.repeat(rhos, R)
    flat = starts.reshape(B * R, nx)
    pos = rr > 0
    vals = np.zeros(B * R)
    Qs = flat.copy()
    if pos.any():
        v, Q, conv, _ = _arimoto(w, rr[pos], flat[pos], ARIMOTO_BUDGET)
        idx = np.flatnonzero(pos)
        for j in np.flatnonzero(~conv):
            Q[j] = _polish(w, rr[pos][j], Q[j])
            v[j] = _e0(rr[pos][j], w.logw, Q[j])
            if not _kkt_single(w, rr[pos][j], Q[j]):
                v2, Q2, c2, _ = _arimoto(w, rr[pos][j:j + 1], Q[j:j + 1], ITER_CAP - ARIMOTO_BUDGET)
                if not c2[0]:
                    raise NoConvergence(f"E0 maximization at rho={rr[pos][j]} did not converge")
                v[j], Q[j] = v2[0], Q2[0]
        vals[idx] = v
        Qs[idx] = Q
    vals = vals.reshape(B, R)
    Qs = Qs.reshape(B, R, nx)
    spread = vals.max(axis=1) - vals.min(axis=1)
    if np.any(spread > RESTART_AGREE):
        bad = int(np.argmax(spread))
        raise OptimizerDisagreement(
            f"restarts disagree by {spread[bad]:.3g} nats at rho={rhos[bad]}")
    best = vals.argmax(axis=1)
    return vals[np.arange(B), best], Qs[np.arange(B), best]


def _finite_max(w: ChannelSpec, rhos, members):
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    # lexicographic order first so that argmax ties resolve to the smallest vector
    order = sorted(range(len(members)), key=lambda i: members[i].key())
    table = np.array([_e0(rhos, w.logw, members[i].probs) for i in order])  # (|set|, B)
    table = np.atleast_2d(table)
    best = np.argmax(table >= table.max(axis=0) - 1e-14, axis=0)
    vals = table[best, np.arange(len(rhos))]
    Qs = np.array([members[order[b]].probs for b in best])
    return vals, Qs


def maximize_e0_many(rhos, w: ChannelSpec, dset=None, **kw):
    """Vectorized :func:`maximize_e0`; returns (values, argmax rows)."""
    dset = _as_set(dset)
    if dset.is_simplex:
        return _simplex_max(w, rhos, **kw)
    if dset.members[0].size != w.n_inputs:
        raise DimensionMismatch("distribution set does not match the channel input alphabet")
    return _finite_max(w, rhos, dset.members)


def maximize_e0(rho, w: ChannelSpec, dset=None, **kw):
    """max_Q E₀(ρ,W,Q) over ``dset`` (default: the whole simplex).

    Returns ``(value, InputDistribution)``.
    """
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    vals, Qs = maximize_e0_many([rho], w, dset, **kw)
    if rho == 0 and _as_set(dset).is_simplex:
        return 0.0, uniform_input(w.n_inputs)
    return float(vals[0]), InputDistribution(Qs[0])


@dataclass(frozen=True, eq=False)
class HullPoint:
    value: float
    lam: float
    rho1: float
    rho2: float


@dataclass(frozen=True, eq=False)
class HullCurve:
    """Upper concave envelope of sampled E₀(ρ,W,𝒬).

    ``rho``/``e0``/``argmax`` hold the underlying samples, ``vertices`` the
    indices of those samples that are hull vertices.
    """

    rho: np.ndarray
    e0: np.ndarray
    argmax: np.ndarray
    vertices: np.ndarray

    @property
    def vertex_rho(self):
        return self.rho[self.vertices]

    @property
    def vertex_value(self):
        return self.e0[self.vertices]

    def evaluate(self, rho) -> HullPoint:
        """Hull value at ``rho`` with its supporting pair and mixing weight.

        ``lam`` is the weight on ``rho1``: lam*rho1 + (1-lam)*rho2 = rho.
        """
        vr, vv = self.vertex_rho, self.vertex_value
        if rho < vr[0] or rho > vr[-1]:
            raise ValueError(f"rho={rho} outside hull range [{vr[0]}, {vr[-1]}]")
        j = int(np.searchsorted(vr, rho, side="left"))
        if j < len(vr) and vr[j] == rho:
            return HullPoint(float(vv[j]), 1.0, float(rho), float(rho))
        r1, r2 = vr[j - 1], vr[j]
        lam = (r2 - rho) / (r2 - r1)
        return HullPoint(float(lam * vv[j - 1] + (1 - lam) * vv[j]), float(lam), float(r1), float(r2))

    def __call__(self, rho):
        return np.interp(rho, self.vertex_rho, self.vertex_value)

    def sample_index(self, rho):
        i = int(np.argmin(np.abs(self.rho - rho)))
        return i

    def bridges(self, tol=1e-9):
        """Hull edges under which some sample sags by more than ``tol``.

        These are the non-concave stretches of the sampled function; edges
        that only skip samples because of rounding noise are ignored.
        """
        out = []
        for a, b in zip(self.vertices[:-1], self.vertices[1:]):
            if b - a < 2:
                continue
            x, y = self.rho[a:b + 1], self.e0[a:b + 1]
            chord = y[0] + (y[-1] - y[0]) * (x - x[0]) / (x[-1] - x[0])
            if np.max(chord - y) > tol:
                out.append((int(a), int(b)))
        return out


def upper_hull_indices(x, y):
    """Indices of the upper concave envelope of points sorted by ``x`` (monotone chain)."""
    hull = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b when it lies on or below the chord a->i
            t1 = (x[b] - x[a]) * (y[i] - y[a])
            t2 = (y[b] - y[a]) * (x[i] - x[a])
            if t1 - t2 >= -1e-14 * (abs(t1) + abs(t2)):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.array(hull, dtype=int)


def _switch_points(rho, Q, tol=1e-3):
    jumps = np.abs(np.diff(Q, axis=0)).max(axis=1) > tol
    return [0.5 * (rho[i] + rho[i + 1]) for i in np.flatnonzero(jumps)]


def concave_hull(w: ChannelSpec, dset=None, grid: RhoGrid | None = None, refine=True,
                 refine_step=1e-5, refine_half_width=2e-3) -> HullCurve:
    """E₀(ρ,W,𝒬) on ``grid`` and its upper concave envelope.

    With ``refine`` a second pass samples a fine window around every hull
    vertex that ends a non-concave stretch and around every argmax switch.
    """
    grid = grid or RhoGrid.uniform(1e-3)
    rho = grid.points
    vals, Qs = maximize_e0_many(rho, w, dset)
    curve = _make_curve(rho, vals, Qs)
    if refine:
        centers = set(_switch_points(rho, Qs))
        for a, b in curve.bridges():
            centers.update((rho[a], rho[b]))
        if centers:
            fine = grid.with_windows(sorted(centers), refine_half_width, refine_step)
            new = np.setdiff1d(fine.points, rho)
            kw = {}
            if _as_set(dset).is_simplex:
                # restarts already cross-checked the coarse pass; warm-start from its argmax
                near = np.clip(np.searchsorted(rho, new), 0, len(rho) - 1)
                # blend with uniform: multiplicative updates never revive a zero letter
                kw = {"q0": 0.9 * Qs[near] + 0.1 / w.n_inputs, "restarts": 0}
            v2, Q2 = maximize_e0_many(new, w, dset, **kw)
            allr = np.concatenate([rho, new])
            order = np.argsort(allr)
            curve = _make_curve(allr[order], np.concatenate([vals, v2])[order],
                                np.concatenate([Qs, Q2])[order])
    return curve


def _make_curve(rho, vals, Qs):
    for a in (rho, vals, Qs):
        a.setflags(write=False)
    return HullCurve(rho, vals, Qs, upper_hull_indices(rho, vals))


def capacity(w: ChannelSpec, tol=1e-10, cap=ITER_CAP):
    """Channel capacity in nats by Blahut-Arimoto iteration.

    Returns ``(C, capacity-achieving InputDistribution)``. Stops when the upper
    and lower capacity estimates are within ``tol``.
    """
    W = w.matrix
    logw = w.logw
    q = np.full(w.n_inputs, 1.0 / w.n_inputs)
    for _ in range(cap):
        py = q @ W
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(W > 0, W * (logw - np.log(py)), 0.0).sum(axis=1)  # D(W(.|x) || PY)
        lower = float(q @ d)
        upper = float(d.max())
        if upper - lower < tol:
            c = mutual_information(InputDistribution(q), w)
            return c, InputDistribution(q)
        q = q * np.exp(d - d.max())
        q /= q.sum()
    raise NoConvergence("Blahut-Arimoto capacity iteration hit the iteration cap")
