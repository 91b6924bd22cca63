import math

import numpy as np
import pytest

from lindbench import bench
from lindbench.errors import DecompositionError, PreconditionError
from lindbench.lattice import (LatticeGeometry, LocalTerm, dissipative_ising, graph_state_prep,
                               independent_amplitude_damping, independent_depolarizing)
from lindbench.operators import Z


GRID = np.concatenate([[0.0], np.geomspace(1e-3, 2.0, 12)])


def test_lr_null_calibration_is_zero():
    g1, g2, o, terms, nu, v, geom = bench.perturbed_chain_instance(3)
    res = bench.lr_localization(g2, g2, o, GRID, [], nu, v, geom=geom)
    assert res.passed
    assert max(res.measured) <= bench.NULL_TOL


def test_lr_bound_holds_and_vanishes_at_zero():
    g1, g2, o, terms, nu, v, geom = bench.perturbed_chain_instance(3)
    res = bench.lr_localization(g1, g2, o, GRID, terms, nu, v, geom=geom)
    assert res.passed
    assert res.measured[0] == pytest.approx(0.0, abs=1e-14)
    assert all(m <= b + 1e-12 for m, b in zip(res.measured, res.bound))
    assert res.extra["lhs_slope"] == pytest.approx(2.0, abs=0.1)


def test_lr_missing_terms_raise():
    g1, g2, o, terms, nu, v, geom = bench.perturbed_chain_instance(3)
    with pytest.raises(DecompositionError):
        bench.lr_localization(g1, g2, o, GRID, [], nu, v, geom=geom)


def test_lr_curve_is_continuous():
    g1, g2, o, terms, nu, v, geom = bench.perturbed_chain_instance(3)
    grid = np.linspace(0.0, 1.0, 41)
    res = bench.lr_localization(g1, g2, o, grid, terms, nu, v, geom=geom)
    norm = max(np.linalg.norm(g.sparse.toarray(), 2) for g in (g1, g2))
    jumps = np.abs(np.diff(res.measured))
    assert np.all(jumps <= 2 * norm * np.diff(grid) + 1e-12)


def test_boundary_localization_empty_rule_is_zero():
    f = independent_depolarizing()
    geoms = [LatticeGeometry.chain(n, -(n // 2)) for n in (1, 3)]
    res = bench.boundary_localization(f, geoms, [(0,)], Z, GRID)
    assert res.passed
    assert max(max(row) for row in res.measured) == 0.0


def test_boundary_localization_ising_decreases_with_r():
    f = dissipative_ising(h=0.3, beta=0.7)
    geoms = [LatticeGeometry.chain(n, -(n // 2)) for n in (1, 3, 5)]
    grid = np.concatenate([[0.0], np.geomspace(1e-2, 5.0, 10)])
    res = bench.boundary_localization(f, geoms, [(0,)], Z, grid)
    assert res.extra["r"] == [1, 2, 3]
    assert res.passed
    rows = np.array(res.measured)
    assert np.all(rows[:, 0] == 0.0)
    assert np.all(rows[1] <= rows[0] + 1e-12)
    assert rows[0, -1] > 1e-3


def test_ff_localization_amplitude_damping_is_zero():
    f = independent_amplitude_damping()
    geom = LatticeGeometry.chain(4)
    res = bench.ff_localization(f, geom, [(0,)], [1, 2], GRID)
    assert res.passed
    assert np.abs(np.array(res.measured)).max() <= 1e-10


def test_ff_localization_graph_chain_nonincreasing_in_m():
    f = graph_state_prep()
    geom = LatticeGeometry.chain(4)
    res = bench.ff_localization(f, geom, [(0,)], [1, 2], GRID, seed=3)
    assert res.passed
    m1, m2 = np.array(res.measured)
    assert np.all(m2 <= m1 + 1e-10)
    assert m1[0] == 0.0


def test_ff_localization_requires_frustration_free():
    f = dissipative_ising(g=0.5)
    with pytest.raises(PreconditionError):
        bench.ff_localization(f, LatticeGeometry.chain(3), [(0,)], [1], GRID)


def test_indistinguishability_ising_monotone_and_exact_at_full_box():
    f = dissipative_ising(h=0.3, beta=0.7)
    geom = LatticeGeometry.chain(5)
    res = bench.indistinguishability(f, geom, [(2,)], [0, 1, 2])
    assert res.passed
    assert res.measured[-1] <= 1e-10
    assert res.measured[0] >= res.measured[1] >= res.measured[2]
    assert res.measured[0] > 1e-3


def test_indistinguishability_product_fixed_point_is_zero():
    res = bench.indistinguishability(independent_depolarizing(), LatticeGeometry.chain(3), [(1,)], [0, 1])
    assert res.passed
    assert max(res.measured) <= 1e-10


def test_stability_zero_eps_and_linear_response():
    f = independent_depolarizing()
    geom = LatticeGeometry.chain(3)
    t = np.geomspace(1e-3, 10.0, 20)
    res = bench.stability(f, geom, bench.bit_flip_perturbation(), [0.0, 1e-3, 1e-2, 1e-1], Z, [(0,)], t)
    assert res.measured[0] == 0.0
    assert res.extra["slope"] == pytest.approx(1.0, abs=0.15)
    assert res.passed


def test_stability_without_single_site_terms_is_a_precondition_error():
    with pytest.raises(PreconditionError):
        bench.stability(dissipative_ising(), LatticeGeometry.chain(3), bench.bit_flip_perturbation(),
                        [0.0, 0.1], Z, [(0,)], GRID)


def test_stability_rejects_oversized_perturbation():
    def huge(term):
        if len(term.sites) != 1:
            return None
        return LocalTerm(term.sites, np.zeros((2, 2), dtype=complex), (10.0 * Z,))
    with pytest.raises(PreconditionError):
        bench.stability(independent_depolarizing(), LatticeGeometry.chain(2), huge, [0.0, 0.1], Z, [(0,)], GRID)


def test_global_observable_growth_increases_with_size():
    res = bench.global_observable_growth(independent_amplitude_damping(), [1, 2, 3], bench.bit_flip_perturbation(),
                                         0.1, np.geomspace(1e-3, 10.0, 25))
    assert res.passed
    assert res.measured[0] < res.measured[1] < res.measured[2]


def test_global_observable_growth_is_flat_for_depolarizing():
    # the divergence of Z^{⊗n} is e^{−nt} − e^{−n(1+2κε)t}, whose sup over t does not depend on n
    t = np.geomspace(1e-2, 10.0, 400)
    res = bench.global_observable_growth(independent_depolarizing(), [1, 2, 3], bench.bit_flip_perturbation(), 0.1, t)
    x = np.geomspace(1e-4, 40.0, 200000)
    sup = np.max(np.exp(-x) - np.exp(-1.1 * x))
    assert np.allclose(res.measured, sup, rtol=1e-3)


def test_local_rapid_product_family_is_size_independent():
    res = bench.local_rapid_check(independent_depolarizing(), [2, 3], [(0,)], restarts=8)
    assert res.passed
    assert res.extra["max_abs_difference"] <= 1e-6
    assert res.measured[0] == pytest.approx(math.log(100), abs=1e-3)


def test_perturbations_are_unital_duals():
    for rule in (bench.bit_flip_perturbation(0.5), bench.depolarizing_perturbation(1.0)):
        term = rule(LocalTerm(((0,),), np.zeros((2, 2), dtype=complex), ()))
        g = term.generator()
        dual_of_identity = g.sparse.conj().T @ np.eye(2).reshape(-1, order="F")
        assert np.abs(dual_of_identity).max() <= 1e-12
        assert rule(LocalTerm(((0,), (1,)), np.zeros((4, 4), dtype=complex), ())) is None
