import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lindbench.correlations import (area_law_scan, corner_cut, correlation_record, covariance_corr, decay_scan,
                                    half_cut, mutual_info, sandwich_check, trace_corr)
from lindbench.errors import SupportError
from lindbench.lattice import LatticeGeometry, builtin, graph_adjacency, instantiate
from lindbench.lindblad import fixed_point
from lindbench.operators import Operator, SiteFactorization, partial_trace, vn_entropy

import oracles
from conftest import random_density

Q2 = SiteFactorization.uniform([0, 1])
BELL = np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2

# (C, T, I) of the closed graph_state_prep fixed point on the 3-path with A = {0}: the end qubits are
# correlated through the middle one, so the values do not decay from d = 1 to d = 2.  Frozen from a
# first run and matched by a hand-built statevector of CZ₀₁CZ₁₂|+++⟩.
GRAPH3_DECAY = {1: (1.0, 1.0, 1.0), 2: (1.0, 1.0, 1.0)}


def state(m):
    return Operator(m, Q2)


def test_trace_corr_examples(rng):
    prod = np.kron(random_density(rng, 2), random_density(rng, 2))
    assert trace_corr(state(prod), [0]) < 1e-12
    assert abs(trace_corr(state(BELL), [0]) - 1.5) < 1e-12
    classical = np.diag([0.5, 0, 0, 0.5])
    assert abs(trace_corr(state(classical), [0]) - 1) < 1e-12
    with pytest.raises(SupportError):
        trace_corr(state(BELL), [0, 1])
    with pytest.raises(SupportError):
        trace_corr(state(BELL), [5])


def test_covariance_corr_examples(rng):
    prod = np.kron(random_density(rng, 2), random_density(rng, 2))
    assert covariance_corr(state(prod), [0]) < 1e-9
    assert abs(covariance_corr(state(BELL), [0]) - 1) < 1e-9
    for _ in range(100):
        rho = state(random_density(rng, 4))
        assert covariance_corr(rho, [0], restarts=4) <= trace_corr(rho, [0]) + 1e-9


def test_mutual_info_examples(rng):
    prod = np.kron(random_density(rng, 2), random_density(rng, 2))
    assert abs(mutual_info(state(prod), [0])) < 1e-10
    assert abs(mutual_info(state(BELL), [0]) - 2) < 1e-12
    assert abs(mutual_info(state(BELL), [0], base=math.e) - 2 * math.log(2)) < 1e-12
    for _ in range(20):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        rho = state(np.outer(v, v.conj()))
        assert abs(mutual_info(rho, [0]) - 2 * vn_entropy(partial_trace(rho, [0]), 2)) < 1e-9


def test_mutual_info_symmetric(rng):
    f = SiteFactorization((0, 1), (2, 3))
    for _ in range(20):
        rho = Operator(random_density(rng, 6), f)
        assert abs(mutual_info(rho, [0]) - mutual_info(rho, [1])) < 1e-10


def test_sandwich_examples(rng):
    prod = np.kron(random_density(rng, 2), random_density(rng, 2))
    v = sandwich_check(state(prod), [0])
    assert v and v.T < 1e-12
    v = sandwich_check(state(BELL), [0])
    assert v and abs(v.lower - 0.5625) < 1e-12 and abs(v.I - 2) < 1e-12 and abs(v.upper - 9) < 1e-12
    assert v.clamped


def test_sandwich_random_sweep(rng):
    for _ in range(200):
        rank = int(rng.integers(1, 5))
        assert sandwich_check(state(random_density(rng, 4, rank)), [0])


def test_decay_scan_product_model():
    geom = LatticeGeometry.chain(4)
    pairs = [([(0,)], [(k,)]) for k in (1, 2, 3)]
    scan = decay_scan(builtin("independent_depolarizing"), geom, pairs)
    assert all(r.T_val < 1e-10 for r in scan.records)
    assert [r.d_AB for r in scan.records] == [1, 2, 3]


def test_decay_scan_ising_ring():
    geom = LatticeGeometry.chain(4)
    f = builtin("dissipative_ising", J=1.0, h=0.3, beta=0.7)
    scan = decay_scan(f, geom, [([(0,)], [(3,)]), ([(0,)], [(1,)])])
    far, near = scan.records
    assert far.T_val <= near.T_val + 1e-12
    # on the periodic 4-ring sites 0 and 3 are wrap neighbours, so the two values coincide
    assert abs(far.T_val - near.T_val) < 1e-10
    # on the 5-ring the second-nearest pair is genuinely farther apart and less correlated
    ring = decay_scan(f, LatticeGeometry.chain(5), [([(0,)], [(k,)]) for k in (1, 2, 3, 4)])
    t = [r.T_val for r in ring.records]
    assert t[1] < t[0] and abs(t[1] - t[2]) < 1e-10 and abs(t[0] - t[3]) < 1e-10


def test_decay_scan_graph_state_regression():
    geom = LatticeGeometry.chain(3)
    scan = decay_scan(builtin("graph_state_prep"), geom, [([(0,)], [(1,)]), ([(0,)], [(2,)])])
    for rec in scan.records:
        c, t, i = GRAPH3_DECAY[rec.d_AB]
        assert abs(rec.C_val - c) < 1e-8 and abs(rec.T_val - t) < 1e-8 and abs(rec.I_val - i) < 1e-8
    assert scan.fit["monotone"]


def test_record_invariants(rng):
    geom = LatticeGeometry.chain(3)
    rho = fixed_point(instantiate(builtin("dissipative_ising", h=0.2, g=0.4), geom))
    rec = correlation_record(rho, geom, [(0,)], [(2,)])
    assert rec.C_val <= rec.T_val + 1e-6 and 0 <= rec.T_val <= 2 and rec.I_val >= -1e-12
    assert rec.T_val ** 2 / 4 <= rec.I_val + 1e-6
    with pytest.raises(SupportError):
        correlation_record(rho, geom, [(0,)], [(0,), (1,)])


def test_area_law_product_zero():
    for cut in ("half", "corner"):
        scan = area_law_scan(builtin("independent_depolarizing"), [2, 3, 4], cut)
        assert all(abs(r.I_val) < 1e-10 for r in scan.records)


def test_area_law_graph_path_matches_cut_rank():
    scan = area_law_scan(builtin("graph_state_prep"), [2, 3, 4], "half")
    for rec, n in zip(scan.records, (2, 3, 4)):
        geom = LatticeGeometry.chain(n)
        cut = [geom.sites.index(x) for x in half_cut(geom)]
        oracle = oracles.graph_state_cut_information(oracles.path_adjacency(n), cut)
        assert oracle == 2
        assert abs(rec.I_val - oracle) < 1e-8
        assert abs(rec.I_val - 2 * rec.S_A) < 1e-9
        assert rec.boundary == 1
    assert abs(scan.fit["boundary"]["slope"] - 2) < 1e-8


def test_area_law_graph_square():
    geom = LatticeGeometry.box((2, 2))
    scan = area_law_scan(builtin("graph_state_prep"), [geom], "half")
    cut = [geom.sites.index(x) for x in half_cut(geom)]
    oracle = oracles.graph_state_cut_information(graph_adjacency(geom), cut)
    assert abs(scan.records[0].I_val - oracle) < 1e-8
    assert scan.records[0].boundary == 2


def test_gf2_rank_oracle():
    assert oracles.gf2_rank([[1, 1], [1, 1]]) == 1
    assert oracles.gf2_rank(np.eye(3, dtype=int)) == 3
    assert oracles.gf2_rank([[1, 1, 0], [0, 1, 1], [1, 0, 1]]) == 2


def test_cut_rules():
    g = LatticeGeometry.box((4, 2))
    assert len(half_cut(g)) == 4
    assert corner_cut(g) == ((0, 0),)
    assert half_cut(LatticeGeometry.chain(1)) == ((0,),)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 4))
def test_sandwich_property(seed, rank):
    rng = np.random.default_rng(seed)
    rho = state(random_density(rng, 4, rank))
    v = sandwich_check(rho, [0])
    assert v
    assert covariance_corr(rho, [0], restarts=2, seed=seed) <= v.T + 1e-6
