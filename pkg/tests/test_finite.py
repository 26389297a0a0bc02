import itertools
import math

import numpy as np
import pytest

from jsccexp.exponents import best_pair_search, csiszar_jscc_exponent_dual, gallager_jscc_exponent
from jsccexp.finite import PartitionSpec, realize_partition, sequence_class, theorem1_bound
from jsccexp.gallager import channel_function, source_function
from jsccexp.hull import DistributionSet
from jsccexp.prob import uniform_input, validate_input, validate_source

from conftest import bsc

SRC = validate_source([0.9, 0.1])


def test_single_class_matches_direct_formula():
    w = bsc(0.1)
    q = uniform_input(2)
    k, n = 6, 5
    b = theorem1_bound(SRC, w, PartitionSpec.single(q, k), n)
    rhos = np.linspace(0, 1, 200001)
    direct = np.max(n * channel_function(rhos, w, q) - k * source_function(rhos, SRC))
    assert b.n_classes == 1 and b.prefactor == 1.0
    assert b.log_bound == pytest.approx(-direct, abs=1e-9)
    assert b.terms[0].empty


def test_two_classes_prefactor():
    part = PartitionSpec(0.5, uniform_input(2), validate_input([0.8, 0.2]), 3)
    b = theorem1_bound(SRC, bsc(0.1), part, 4)
    assert b.n_classes == 2 and b.prefactor == 2.5
    assert b.clamped == min(1.0, b.raw)
    assert math.exp(b.terms[0].log_mass) + math.exp(b.terms[1].log_mass) == pytest.approx(1.0)


def test_gamma_one_and_zero_edge_classes():
    # gamma = 0: class 1 empty; gamma = 1: every positive-probability message below 1 is class 1
    q = uniform_input(2)
    b0 = theorem1_bound(SRC, bsc(0.1), PartitionSpec(0.0, q, q, 4), 3)
    b1 = theorem1_bound(SRC, bsc(0.1), PartitionSpec(1.0, q, q, 4), 3)
    assert b0.terms[0].empty and not b0.terms[1].empty
    assert b1.terms[1].empty and not b1.terms[0].empty
    assert b0.log_bound == pytest.approx(b1.log_bound, abs=1e-12)


def test_bound_converges_to_exponent():
    w = bsc(0.1)
    q = uniform_input(2)
    e = gallager_jscc_exponent(SRC, w, 1.0, DistributionSet.of(q)).value
    for n in (100, 200, 400):
        b = theorem1_bound(SRC, w, PartitionSpec.single(q, n), n)
        assert -b.log_bound / n == pytest.approx(e, rel=0.02)


def test_realize_partition_counts_and_probabilities():
    src = validate_source([0.6, 0.3, 0.1])
    k, gamma = 5, 0.4
    rep = realize_partition(src, k, gamma)
    c1, c2 = rep.classes
    assert c1.size + c2.size == 3**k
    assert c1.probability + c2.probability == pytest.approx(1.0, abs=1e-12)
    # brute force over all sequences
    size1 = sum(sequence_class(s, src, k, gamma) == 1 for s in itertools.product(range(3), repeat=k))
    assert size1 == c1.size
    prob1 = sum(math.prod(src.probs[list(s)]) for s in itertools.product(range(3), repeat=k)
                if math.prod(src.probs[list(s)]) < gamma**k)
    assert prob1 == pytest.approx(c1.probability, abs=1e-12)
    d = rep.as_dict()
    assert d["classes"][0]["size"] == c1.size


def test_partition_spec_validation():
    q = uniform_input(2)
    with pytest.raises(ValueError):
        PartitionSpec(1.5, q, q, 3)
    with pytest.raises(ValueError):
        PartitionSpec(0.5, q, uniform_input(3), 3)
    with pytest.raises(ValueError):
        theorem1_bound(SRC, bsc(0.1), PartitionSpec.single(q, 3), 0)


def test_k1_n1_dense_grid():
    w = bsc(0.1)
    q = uniform_input(2)
    part = PartitionSpec(0.5, q, q, 1)
    b = theorem1_bound(SRC, w, part, 1)
    rhos = np.arange(0, 1 + 5e-6, 1e-5)
    e0 = channel_function(rhos, w, q)
    # class 1 = {v: P(v) < 0.5} = {1}, class 2 = {0}
    terms = [np.max(e0 - (1 + rhos) * np.log(p ** (1 / (1 + rhos)))) for p in (0.1, 0.9)]
    direct = math.log(2.5) + np.logaddexp(-terms[0], -terms[1])
    assert b.log_bound == pytest.approx(direct, abs=1e-9)


def test_bound_nonincreasing_in_n():
    part = PartitionSpec(0.5, uniform_input(2), validate_input([0.8, 0.2]), 6)
    logs = [theorem1_bound(SRC, bsc(0.1), part, n).log_bound for n in range(1, 30)]
    assert np.all(np.diff(logs) <= 1e-12)


@pytest.fixture(scope="module")
def example_pair(example_source, example_channel):
    bp = best_pair_search(example_source, example_channel, 2.0)
    ecs = csiszar_jscc_exponent_dual(example_source, example_channel, 2.0).value
    return bp, ecs


def test_two_class_bound_beats_single(example_source, example_channel, example_pair):
    bp, _ = example_pair
    for n in (50, 100):
        part = PartitionSpec(bp.gamma, bp.pair[0], bp.pair[1], 2 * n)
        two = theorem1_bound(example_source, example_channel, part, n).log_bound
        for q in bp.pair:
            one = theorem1_bound(example_source, example_channel, PartitionSpec.single(q, 2 * n), n).log_bound
            assert two < one


def test_log_bound_slope_matches_two_class_exponent(example_source, example_channel, example_pair):
    bp, ecs = example_pair
    ns = np.arange(100, 401, 50)
    logs = [theorem1_bound(example_source, example_channel,
                           PartitionSpec(bp.gamma, bp.pair[0], bp.pair[1], 2 * n), n).log_bound for n in ns]
    slope = -np.polyfit(ns, logs, 1)[0]
    assert slope == pytest.approx(bp.value, rel=0.02)
