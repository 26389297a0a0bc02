import math

import numpy as np
import pytest
from scipy.optimize import brentq

from jsccexp.errors import DegeneratePair
from jsccexp.exponents import (
    best_pair_search,
    class_exponents,
    critical_rate,
    csiszar_jscc_exponent_dual,
    csiszar_jscc_exponent_primal,
    ensemble_ceiling,
    gallager_jscc_exponent,
    jscc_sphere_packing_exponent,
    random_coding_exponent,
    solve_threshold,
    source_reliability,
    sphere_packing_exponent,
    two_class_exponent,
)
from jsccexp.gallager import RhoGrid, channel_function, source_function
from jsccexp.hull import DistributionSet, capacity
from jsccexp.prob import (
    LOG2E,
    entropy,
    uniform_input,
    validate_channel,
    validate_input,
    validate_source,
)

from conftest import bsc

STEP = 5e-3  # coarse grid for randomized checks


def hb(d):
    return -d * math.log(d) - (1 - d) * math.log(1 - d)


def kl_b(a, b):
    return a * math.log(a / b) + (1 - a) * math.log((1 - a) / (1 - b))


# -- source reliability ---------------------------------------------------------

def test_source_reliability_binary_closed_form():
    p = 0.1
    src = validate_source([1 - p, p])
    for R in np.linspace(hb(p) + 0.02, math.log(2) - 0.02, 6):
        q = brentq(lambda a: hb(a) - R, p, 0.5)
        assert source_reliability(R, src).value == pytest.approx(kl_b(q, p), abs=1e-7)


def test_source_reliability_regions():
    src = validate_source([0.972, 0.028])
    assert source_reliability(entropy(src), src).value == 0.0
    assert source_reliability(0.5 * entropy(src), src).value == 0.0
    at_log = source_reliability(math.log(2), src)
    assert at_log.value == pytest.approx(0.5 * math.log(0.5 / 0.972) + 0.5 * math.log(0.5 / 0.028), rel=1e-9)
    assert source_reliability(math.log(2) + 1e-3, src).infinite
    u = validate_source([0.5, 0.5])
    assert source_reliability(math.log(2), u).value == pytest.approx(0.0, abs=1e-12)


def test_source_reliability_dense_grid_oracle():
    src = validate_source([0.972, 0.028])
    R = 0.6827 / 2 / LOG2E
    rhos = np.arange(0, 100, 1e-4)
    grid = np.max(rhos * R - source_function(rhos, src))
    got = source_reliability(R, src)
    assert got.value > 0
    assert got.value == pytest.approx(grid, abs=1e-7)


def test_source_reliability_convex_nondecreasing():
    src = validate_source([0.8, 0.15, 0.05])
    Rs = np.linspace(entropy(src), math.log(3) - 1e-3, 40)
    e = np.array([source_reliability(R, src).value for R in Rs])
    assert np.all(np.diff(e) >= -1e-10)
    assert np.all(np.diff(e, 2) >= -1e-8)


# -- channel exponents ------------------------------------------------------------

def test_er_above_capacity_is_zero():
    w = bsc(0.1)
    c, _ = capacity(w)
    r = random_coding_exponent(c + 1e-3, w)
    assert r.value == pytest.approx(0.0, abs=1e-12)
    assert r.rho == pytest.approx(0.0, abs=1e-6)
    assert sphere_packing_exponent(c + 1e-3, w).value == pytest.approx(0.0, abs=1e-12)


def test_er_zero_rate_noiseless():
    r = random_coding_exponent(0.0, validate_channel(np.eye(2)))
    assert r.value == pytest.approx(math.log(2), abs=1e-12)
    assert r.rho == pytest.approx(1.0)


def test_er_bsc_dense_grid():
    eps = 0.05
    w = bsc(eps)
    rhos = np.linspace(0, 1, 200001)
    e0 = channel_function(rhos, w, uniform_input(2))
    for R in (0.05, 0.2, 0.4):
        assert random_coding_exponent(R, w).value == pytest.approx(np.max(e0 - rhos * R), abs=1e-9)


def test_sphere_packing_bsc_parametric():
    eps = 0.1
    R = 0.2 / LOG2E
    d = brentq(lambda a: hb(a) - (math.log(2) - R), eps, 0.5)
    assert sphere_packing_exponent(R, bsc(eps)).value == pytest.approx(kl_b(d, eps), abs=1e-6)


def test_critical_rate_bsc_closed_form():
    eps = 0.1
    d = math.sqrt(eps) / (math.sqrt(eps) + math.sqrt(1 - eps))
    assert critical_rate(bsc(eps)) == pytest.approx(math.log(2) - hb(d), abs=1e-7)


def test_critical_rate_trivial_channels():
    assert critical_rate(validate_channel(np.eye(2))) == pytest.approx(math.log(2), abs=1e-8)
    assert critical_rate(validate_channel([[0.3, 0.7], [0.3, 0.7]])) == pytest.approx(0.0, abs=1e-10)


def test_er_equals_esp_above_rcr_and_below_everywhere():
    w = validate_channel([[0.8, 0.15, 0.05], [0.1, 0.7, 0.2], [0.25, 0.25, 0.5]])
    rcr = critical_rate(w)
    c, _ = capacity(w)
    for R in np.linspace(0.02, c - 1e-3, 8):
        er = random_coding_exponent(R, w)
        sp = sphere_packing_exponent(R, w)
        assert sp.infinite or sp.value >= er.value - 1e-10
        if R >= rcr + 1e-3:
            assert sp.value == pytest.approx(er.value, abs=1e-8)


# -- joint exponents --------------------------------------------------------------

def test_deterministic_source_gallager_is_e0_at_one():
    src = validate_source([1.0, 0.0])
    w = bsc(0.1)
    g = gallager_jscc_exponent(src, w, 1.0)
    assert g.value == pytest.approx(channel_function(1.0, w, uniform_input(2)), abs=1e-10)
    assert csiszar_jscc_exponent_primal(src, w, 1.0).value == pytest.approx(g.value, abs=1e-9)


def test_useless_channel_gives_zero():
    w = validate_channel([[0.3, 0.7], [0.3, 0.7]])
    src = validate_source([0.6, 0.4])
    g = gallager_jscc_exponent(src, w, 1.0)
    assert g.value == 0.0 and g.rho == pytest.approx(0.0, abs=1e-6)
    assert jscc_sphere_packing_exponent(src, w, 1.0).value == pytest.approx(0.0, abs=1e-12)


def test_noiseless_uniform_half_rate():
    src = validate_source([0.5, 0.5])
    w = validate_channel(np.eye(2))
    g = gallager_jscc_exponent(src, w, 0.5)
    d = csiszar_jscc_exponent_dual(src, w, 0.5)
    p = csiszar_jscc_exponent_primal(src, w, 0.5)
    assert g.value == pytest.approx(0.5 * math.log(2), abs=1e-12)
    assert d.value == pytest.approx(g.value, abs=1e-12)
    assert p.value == pytest.approx(g.value, abs=1e-9)
    # a noiseless channel below capacity has an unbounded sphere-packing exponent
    assert jscc_sphere_packing_exponent(src, w, 0.5).infinite


def test_bsc_dual_equals_gallager():
    src = validate_source([0.9, 0.1])
    w = bsc(0.1)
    g = gallager_jscc_exponent(src, w, 1.0)
    d = csiszar_jscc_exponent_dual(src, w, 1.0)
    assert d.value == pytest.approx(g.value, abs=1e-10)
    assert d.pair is None


def test_single_q_set_matches_eq13_form():
    src = validate_source([0.8, 0.2])
    w = validate_channel([[0.9, 0.05, 0.05], [0.1, 0.6, 0.3]])
    q = validate_input([0.3, 0.7])
    rhos = np.linspace(0, 1, 100001)
    direct = np.max(channel_function(rhos, w, q) - 1.3 * source_function(rhos, src))
    g = gallager_jscc_exponent(src, w, 1.3, DistributionSet.of(q))
    assert g.value == pytest.approx(direct, abs=1e-9)
    assert ensemble_ceiling(src, w, 1.3, DistributionSet.of(q)).value == pytest.approx(g.value, abs=1e-9)
    assert two_class_exponent(src, w, 1.3, q, q).value == pytest.approx(g.value, abs=1e-9)


def test_argmax_reproduces_value(example_source, example_channel):
    g = gallager_jscc_exponent(example_source, example_channel, 2.0)
    again = channel_function(g.rho, example_channel, g.q) - 2.0 * source_function(g.rho, example_source)
    assert again == pytest.approx(g.value, abs=1e-9)


def test_solve_threshold_trivial_cases():
    src = validate_source([0.9, 0.1])
    t, rho0 = 1.5, 0.4
    es0 = source_function(rho0, src)
    slope = t * es0 / (1 + rho0)
    assert solve_threshold(src, t, rho0, 0.2, 0.6, 0.0, slope * 0.4) == pytest.approx(1.0, abs=1e-12)
    assert solve_threshold(src, t, rho0, 0.2, 0.6, 0.3, 0.3) == pytest.approx(math.exp(es0), rel=1e-12)
    with pytest.raises(DegeneratePair):
        solve_threshold(src, t, rho0, 0.3, 0.3, 0.1, 0.1)


def _random_instance(rng, nx=3):
    w = validate_channel(rng.dirichlet(np.ones(3) * 0.6, size=nx))
    src = validate_source(rng.dirichlet(np.ones(2)))
    c, _ = capacity(w)
    t = float(rng.uniform(0.3, 0.9) * c / max(entropy(src), 1e-3))
    return src, w, t


def test_two_class_beats_each_single(rng):
    for _ in range(50):
        src, w, t = _random_instance(rng)
        q1 = validate_input(rng.dirichlet(np.ones(3)))
        q2 = validate_input(rng.dirichlet(np.ones(3)))
        tc = two_class_exponent(src, w, t, q1, q2, step=STEP)
        s1 = gallager_jscc_exponent(src, w, t, DistributionSet.of(q1), step=STEP)
        s2 = gallager_jscc_exponent(src, w, t, DistributionSet.of(q2), step=STEP)
        assert tc.value >= max(s1.value, s2.value) - 1e-9


def test_ordering_chain_random(rng):
    for _ in range(6):
        src, w, t = _random_instance(rng)
        g = gallager_jscc_exponent(src, w, t, step=STEP)
        bp = best_pair_search(src, w, t, step=STEP)
        d = csiszar_jscc_exponent_dual(src, w, t, step=STEP)
        sp = jscc_sphere_packing_exponent(src, w, t, step=STEP)
        assert g.value <= bp.value + 1e-9
        assert bp.value <= d.value + 1e-9
        assert sp.infinite or d.value <= sp.value + 1e-9


def test_best_pair_on_concave_channel_collapses():
    src = validate_source([0.9, 0.1])
    bp = best_pair_search(src, bsc(0.1), 1.0, step=STEP)
    assert bp.degenerate
    g = gallager_jscc_exponent(src, bsc(0.1), 1.0, step=STEP)
    assert bp.value == pytest.approx(g.value, abs=1e-9)


def test_threshold_equalizes_class_exponents(example_source, example_channel):
    bp = best_pair_search(example_source, example_channel, 2.0)
    e1, e2 = class_exponents(example_source, example_channel, 2.0, bp)
    assert e1 == pytest.approx(e2, abs=1e-6)
    assert e1 == pytest.approx(bp.value, abs=1e-6)
    assert bp.gamma == min(1.0, bp.gamma0)


def test_rate_must_be_positive():
    with pytest.raises(ValueError):
        gallager_jscc_exponent(validate_source([0.5, 0.5]), bsc(0.1), 0.0)
