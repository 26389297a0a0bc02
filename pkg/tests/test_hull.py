import math

import numpy as np
import pytest

from jsccexp.errors import DimensionMismatch
from jsccexp.gallager import RhoGrid, channel_function
from jsccexp.hull import (
    DistributionSet,
    capacity,
    concave_hull,
    maximize_e0,
    maximize_e0_many,
    upper_hull_indices,
)
from jsccexp.prob import mutual_information, uniform_input, validate_channel, validate_input

from conftest import bsc


def _dirichlet_brute(rho, w, rng, n=10**5):
    qs = rng.dirichlet(np.ones(w.n_inputs), size=n)
    # vertices and edge midpoints cover boundary optima
    eye = np.eye(w.n_inputs)
    mids = [(eye[i] + eye[j]) / 2 for i in range(w.n_inputs) for j in range(i + 1, w.n_inputs)]
    qs = np.vstack([qs, eye, mids])
    s = 1 / (1 + rho)
    a = qs @ w.matrix**s
    return float(np.max(-np.log(np.sum(a ** (1 + rho), axis=1))))


def test_optimizer_beats_dirichlet_brute_force(rng):
    for _ in range(8):
        w = validate_channel(rng.dirichlet(np.ones(3) * 0.6, size=3))
        for rho in (0.2, 0.7, 1.0):
            v, q = maximize_e0(rho, w)
            brute = _dirichlet_brute(rho, w, rng)
            assert v >= brute - 1e-12
            assert v - brute <= 1e-4
            assert channel_function(rho, w, q) == pytest.approx(v, abs=1e-12)


def test_bsc_uniform_is_optimal():
    w = bsc(0.1)
    for rho in (0.1, 0.5, 1.0):
        v, q = maximize_e0(rho, w)
        assert np.allclose(q.probs, [0.5, 0.5], atol=1e-6)
        assert v == pytest.approx(channel_function(rho, w, uniform_input(2)), abs=1e-12)


def test_rho_zero_gives_zero():
    v, q = maximize_e0(0.0, bsc(0.2))
    assert v == 0.0 and q == uniform_input(2)


def test_finite_set_exact_max():
    w = validate_channel([[0.9, 0.1], [0.2, 0.8]])
    members = [validate_input([0.3, 0.7]), validate_input([0.6, 0.4]), validate_input([0.5, 0.5])]
    rhos = np.linspace(0, 1, 11)
    vals, qs = maximize_e0_many(rhos, w, DistributionSet.of(*members))
    table = np.array([channel_function(rhos, w, q) for q in members])
    assert np.allclose(vals, table.max(axis=0), atol=0)


def test_finite_set_dimension_check():
    with pytest.raises(DimensionMismatch):
        maximize_e0(0.5, bsc(0.1), DistributionSet.of(validate_input([0.2, 0.3, 0.5])))


def test_capacity_bsc_closed_form():
    eps = 0.11
    h = -eps * math.log(eps) - (1 - eps) * math.log(1 - eps)
    c, q = capacity(bsc(eps))
    assert c == pytest.approx(math.log(2) - h, abs=1e-10)
    assert mutual_information(q, bsc(eps)) == pytest.approx(c, abs=1e-10)


def test_capacity_z_channel():
    # Z channel with crossover 1/2: C = log(5/4)
    w = validate_channel([[1.0, 0.0], [0.5, 0.5]])
    c, q = capacity(w)
    assert c == pytest.approx(math.log(1.25), abs=1e-9)
    assert q.probs[1] == pytest.approx(0.4, abs=1e-6)


def test_upper_hull_indices_simple():
    x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    y = np.array([0.0, 2.0, 1.0, 3.5, 4.0])
    assert upper_hull_indices(x, y).tolist() == [0, 1, 3, 4]


def _check_hull(curve):
    h = curve(curve.rho)
    assert np.all(h >= curve.e0 - 1e-12)
    vr, vv = curve.vertex_rho, curve.vertex_value
    slopes = np.diff(vv) / np.diff(vr)
    assert np.all(np.diff(slopes) <= 1e-9)


def test_hull_dominates_and_is_concave_random(rng):
    for _ in range(3):
        w = validate_channel(rng.dirichlet(np.ones(3) * 0.5, size=4))
        _check_hull(concave_hull(w, grid=RhoGrid.uniform(1e-2), refine=False))


def test_hull_example_channel(example_channel):
    curve = concave_hull(example_channel)
    _check_hull(curve)
    bridges = curve.bridges()
    assert len(bridges) == 1
    a, b = bridges[0]
    assert 0.24 < curve.rho[a] < 0.26 and 0.38 < curve.rho[b] < 0.40
    p = curve.evaluate(0.3)
    assert p.rho1 < 0.3 < p.rho2
    assert p.lam * p.rho1 + (1 - p.lam) * p.rho2 == pytest.approx(0.3)


def test_hull_equals_function_for_bsc():
    curve = concave_hull(bsc(0.1), grid=RhoGrid.uniform(1e-2))
    assert curve.bridges() == []
    assert np.allclose(curve(curve.rho), curve.e0, atol=1e-12)
