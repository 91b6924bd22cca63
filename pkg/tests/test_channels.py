import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lindbench.channels import (Superoperator, apply, bloch_grid_norm, choi, diamond_bounds, diamond_upper,
                                dual, is_cptp, is_hermiticity_preserving, is_trace_preserving, is_unital,
                                norm_1to1, unvec, vec)
from lindbench.errors import DomainError, FactorizationError
from lindbench.operators import X, Operator, SiteFactorization

from conftest import random_density, random_kraus, random_unitary

Q1 = SiteFactorization.uniform([0])
Q2 = SiteFactorization.uniform([0, 1])


def depolarizing_difference(t):
    """T_t − T_∞ for the rate-1 qubit depolarizing semigroup: ρ ↦ e^{−t}(ρ − tr(ρ)𝟙/2)."""
    return Superoperator.from_map(lambda r: math.exp(-t) * (r - np.trace(r) * np.eye(2) / 2), Q1)


def test_vec_is_column_stacking():
    m = np.arange(4).reshape(2, 2)
    assert list(vec(m)) == [0, 2, 1, 3]
    assert np.array_equal(unvec(vec(m)), m)


def test_conjugation_convention(rng):
    a, b, x = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
    s = Superoperator.conjugation(a, b, Q1)
    assert np.allclose(apply(s, Operator(x, Q1)).matrix, a @ x @ b)


def test_apply_examples(rng):
    assert np.allclose(apply(Superoperator.identity(Q1), Operator(X, Q1)).matrix, X)
    u = random_unitary(rng, 4)
    rho = random_density(rng, 4)
    s = Superoperator.conjugation(u, u.conj().T, Q2)
    assert np.allclose(apply(s, Operator(rho, Q2)).matrix, u @ rho @ u.conj().T, atol=1e-12)
    with pytest.raises(FactorizationError):
        apply(s, Operator(X, Q1))


def test_apply_linear(rng):
    s = Superoperator(rng.normal(size=(4, 4)), Q1)
    x, y = (Operator(rng.normal(size=(2, 2)), Q1) for _ in range(2))
    lhs = apply(s, x * 2.5 + y * -1j).matrix
    rhs = 2.5 * apply(s, x).matrix - 1j * apply(s, y).matrix
    assert np.abs(lhs - rhs).max() < 1e-12


def test_kraus_round_trip(rng):
    ks = random_kraus(rng, 2, 3)
    s = Superoperator.from_kraus(ks, Q1)
    rho = random_density(rng, 2)
    direct = sum(k @ rho @ k.conj().T for k in ks)
    assert np.abs(apply(s, Operator(rho, Q1)).matrix - direct).max() < 1e-12
    tab = Superoperator.from_map(lambda r: sum(k @ r @ k.conj().T for k in ks), Q1)
    assert np.abs(tab.matrix - s.matrix).max() < 1e-12


def test_dual_pairing(rng):
    for _ in range(20):
        s = Superoperator(rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16)), Q2)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        lhs = np.trace(apply(dual(s), Operator(a, Q2)).matrix.conj().T @ b)
        rhs = np.trace(a.conj().T @ apply(s, Operator(b, Q2)).matrix)
        assert abs(lhs - rhs) < 1e-10


def test_dual_examples(rng):
    ident = Superoperator.identity(Q1)
    assert np.allclose(dual(ident).matrix, ident.matrix)
    s = Superoperator(rng.normal(size=(4, 4)), Q1)
    assert np.array_equal(dual(dual(s)).matrix, s.matrix)
    for _ in range(10):
        cp = Superoperator.from_kraus(random_kraus(rng, 2, 2), Q1)
        assert is_trace_preserving(cp)
        assert np.abs(apply(dual(cp), Operator(np.eye(2), Q1)).matrix - np.eye(2)).max() < 1e-10
        assert is_unital(dual(cp))


def test_cptp_examples():
    assert is_cptp(Superoperator.identity(Q1))
    transpose = Superoperator.from_map(lambda r: r.T, Q1)
    v = is_cptp(transpose)
    assert not v
    assert abs(v.min_eigenvalue + 0.5) < 1e-12
    assert v.trace_defect < 1e-12
    # explicit 4x4 Choi of the transpose map is the swap, eigenvalues {1, 1, 1, -1}
    assert np.allclose(np.linalg.eigvalsh(choi(transpose).matrix), [-1, 1, 1, 1])


def test_cptp_trace_defect_reported():
    half = Superoperator.identity(Q1) * 0.5
    v = is_cptp(half)
    assert not v and abs(v.trace_defect - 0.5) < 1e-12


def test_norm_1to1_examples(rng):
    for _ in range(5):
        cp = Superoperator.from_kraus(random_kraus(rng, 2, 3), Q1)
        assert abs(norm_1to1(cp) - 1) < 1e-6
    assert abs(norm_1to1(Superoperator.identity(Q2)) - 1) < 1e-12
    s = depolarizing_difference(1.0)
    assert abs(norm_1to1(s) - math.exp(-1)) < 1e-4
    assert abs(bloch_grid_norm(s) - math.exp(-1)) < 1e-4


def test_norm_1to1_matches_bloch_grid(rng):
    for _ in range(10):
        a = Superoperator.from_kraus(random_kraus(rng, 2, 2), Q1)
        b = Superoperator.from_kraus(random_kraus(rng, 2, 2), Q1)
        s = a - b
        grid = bloch_grid_norm(s)
        ascent = norm_1to1(s, restarts=32, seed=3)
        assert ascent >= grid - 1e-3  # the grid only samples the sphere
        assert ascent <= grid + 1e-3


def test_norm_refuses_non_hermiticity_preserving():
    s = Superoperator.conjugation(np.eye(2), np.eye(2) * 1j, Q1)
    assert not is_hermiticity_preserving(s)
    with pytest.raises(DomainError):
        norm_1to1(s)
    with pytest.raises(DomainError):
        diamond_bounds(s)


def test_diamond_examples(rng):
    lo, up = diamond_bounds(Superoperator.identity(Q1))
    assert abs(lo - 1) < 1e-6 and abs(up - 1) < 1e-6
    for _ in range(5):
        cp = Superoperator.from_kraus(random_kraus(rng, 2, 3), Q1)
        lo, up = diamond_bounds(cp)
        assert lo >= 1 - 1e-6 and up >= 1 - 1e-9 and lo <= up
    lo, up = diamond_bounds(depolarizing_difference(1.0))
    assert lo >= math.exp(-1) - 1e-9 and lo <= up + 1e-12


def test_diamond_transpose_is_two():
    # ‖T‖_⋄ = d for the transpose map; the maximally entangled start attains it
    lo, up = diamond_bounds(Superoperator.from_map(lambda r: r.T, Q1))
    assert abs(lo - 2) < 1e-9 and abs(up - 2) < 1e-9


def test_diamond_upper_is_an_upper_bound(rng):
    for _ in range(10):
        s = Superoperator.from_kraus(random_kraus(rng, 2, 2), Q1) - Superoperator.from_kraus(random_kraus(rng, 2, 2), Q1)
        lo, up = diamond_bounds(s, restarts=8)
        assert lo <= diamond_upper(s) + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 4))
def test_random_channels_pass_all_checks(seed, k):
    rng = np.random.default_rng(seed)
    cp = Superoperator.from_kraus(random_kraus(rng, 2, k), Q1)
    assert is_cptp(cp)
    assert abs(norm_1to1(cp, restarts=8, seed=seed) - 1) < 1e-5
    lo, up = diamond_bounds(cp, restarts=4, seed=seed)
    assert 1 - 1e-5 <= lo <= up + 1e-12
