import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpart.formulations import build_bipartition_qubo
from qpart.qubo import Qubo, brute_force
from qpart.samples import Sample, SampleSet, dedup_insert
from qpart.tabu import TabuConfig, sample_qubo

from conftest import path_graph, random_connected_graph
from test_qubo import random_qubo


def s(bits, e):
    return Sample(np.array(bits, dtype=np.uint8), e)


def test_single_variable():
    ss = sample_qubo(Qubo(1, {(0, 0): -1.0}), TabuConfig(restarts=3))
    assert list(ss.first.bits) == [1] and ss.first.energy == -1.0
    assert all(s.energy >= -1.0 for s in ss)


def test_p4_both_minima():
    ss = sample_qubo(build_bipartition_qubo(path_graph(4)), TabuConfig(restarts=10, seed=1))
    assert ss.first.energy == 1.0
    minima = {tuple(x.bits) for x in ss if x.energy == 1.0}
    assert minima == {(1, 1, 0, 0), (0, 0, 1, 1)}


def test_sample_set_invariants():
    rng = np.random.default_rng(4)
    q = random_qubo(rng, 30, density=0.2, terms=2)
    ss = sample_qubo(q, TabuConfig(restarts=6, target_samples=25, seed=9))
    assert 1 <= len(ss) <= 25
    e = ss.energies
    assert np.all(np.diff(e) >= 0)
    assert len({x.key for x in ss}) == len(ss)
    for x in ss:
        assert x.energy == pytest.approx(q.energy(x.bits), abs=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2**63 + 5])
def test_deterministic_across_worker_counts(seed):
    rng = np.random.default_rng(8)
    q = random_qubo(rng, 40, density=0.15, terms=1)
    runs = [sample_qubo(q, TabuConfig(restarts=7, seed=seed, workers=w)) for w in (1, 2, 4, 1)]
    for other in runs[1:]:
        assert other == runs[0]
        assert [x.num_occurrences for x in other] == [x.num_occurrences for x in runs[0]]


def test_different_seeds_differ():
    rng = np.random.default_rng(8)
    q = random_qubo(rng, 40, density=0.15)
    a = sample_qubo(q, TabuConfig(restarts=3, seed=1))
    b = sample_qubo(q, TabuConfig(restarts=3, seed=2))
    assert a != b


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_more_restarts_never_worse(seed, k):
    rng = np.random.default_rng(seed)
    q = random_qubo(rng, 25, density=0.3)
    few = sample_qubo(q, TabuConfig(restarts=k, seed=seed, stall_limit=60))
    many = sample_qubo(q, TabuConfig(restarts=2 * k, seed=seed, stall_limit=60))
    assert many.first.energy <= few.first.energy


def test_time_limit_returns_well_formed_set():
    g = random_connected_graph(np.random.default_rng(0), 400, 0.01)
    q = build_bipartition_qubo(g)
    ss = sample_qubo(q, TabuConfig(restarts=10**6, time_limit=0.3, workers=1))
    assert len(ss) >= 1
    assert ss.first.energy == pytest.approx(q.energy(ss.first.bits))


def test_config_validation_and_defaults():
    with pytest.raises(ValueError):
        TabuConfig(restarts=0)
    with pytest.raises(ValueError):
        TabuConfig(target_samples=0)
    r = TabuConfig().resolved(400)
    assert r.tenure == 20 and r.stall_limit == 20000 and r.restarts >= 1
    assert TabuConfig().resolved(100).tenure == 10
    assert TabuConfig().resolved(4).tenure == 3


def test_tenure_larger_than_problem_still_runs():
    q = build_bipartition_qubo(path_graph(4))
    assert sample_qubo(q, TabuConfig(tenure=50, restarts=4)).first.energy == 1.0


def test_dedup_insert_examples():
    base = SampleSet([s([0, 1], 1.0), s([1, 1], 2.0)])
    dup = dedup_insert(base, s([0, 1], 1.0), cap=2)
    assert len(dup) == 2 and dup[0].num_occurrences == 2

    dropped = dedup_insert(base, s([0, 0], 5.0), cap=2)
    assert [tuple(x.bits) for x in dropped] == [(0, 1), (1, 1)]

    first = dedup_insert(base, s([1, 0], -3.0), cap=3)
    assert tuple(first.first.bits) == (1, 0) and len(first) == 3


def test_sample_set_orders_ties_by_bits():
    ss = SampleSet([s([1, 0], 0.0), s([0, 1], 0.0), s([1, 1], -1.0)])
    assert [tuple(x.bits) for x in ss] == [(1, 1), (0, 1), (1, 0)]
    assert ss.truncate(1) == SampleSet([s([1, 1], -1.0)])


def test_sample_bits_read_only():
    x = s([0, 1], 0.0)
    with pytest.raises(ValueError):
        x.bits[0] = 1


@pytest.mark.parametrize("seed", range(3))
def test_tabu_matches_brute_force_small(seed):
    rng = np.random.default_rng(100 + seed)
    q = random_qubo(rng, 14, density=0.6)
    best = brute_force(q).first.energy
    assert sample_qubo(q, TabuConfig(restarts=20, seed=seed)).first.energy == pytest.approx(best)
