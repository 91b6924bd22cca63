import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lindbench.errors import DomainError, FactorizationError, NotAStateError, SupportError
from lindbench.operators import (I2, Z, Operator, SiteFactorization, binary_entropy, embed, identity,
                                 maximally_mixed, on_site, partial_trace, permute, relative_entropy,
                                 schatten_norm, tensor, trace_norm, vn_entropy)

from conftest import random_density, random_unitary


def op(m, *sites):
    return Operator(np.asarray(m, dtype=complex), SiteFactorization.uniform(sites, int(round(len(m) ** (1 / len(sites))))))


def test_factorization_invariants():
    f = SiteFactorization((0, 1, 2), (2, 3, 2))
    assert f.dim == 12
    with pytest.raises(SupportError):
        SiteFactorization((0, 0), (2, 2))
    with pytest.raises(FactorizationError):
        SiteFactorization((0,), (1,))
    assert f.restrict([2, 0]).site_ids == (0, 2)


def test_operator_shape_and_state_flag():
    with pytest.raises(FactorizationError):
        Operator(np.eye(3), SiteFactorization.uniform([0]))
    with pytest.raises(NotAStateError):
        Operator(np.diag([1.2, -0.2]), SiteFactorization.uniform([0]), is_state=True)
    Operator(np.diag([1.0, 0.0]), SiteFactorization.uniform([0]), is_state=True)


def test_tensor_identities():
    a, b = op(I2, 0), op(I2, 1)
    assert np.allclose(tensor(a, b).matrix, np.eye(4))
    p0, p1 = op(np.diag([1, 0]), 0), op(np.diag([0, 1]), 1)
    ket01 = np.zeros(4)
    ket01[1] = 1
    assert np.allclose(tensor(p0, p1).matrix, np.outer(ket01, ket01))
    with pytest.raises(SupportError):
        tensor(a, op(I2, 0))


def test_tensor_trace_multiplicative(rng):
    for _ in range(50):
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        y = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        t = tensor(op(x, 0), op(y, 1)).trace()
        assert abs(t - np.trace(x) * np.trace(y)) < 1e-12


def test_partial_trace_of_product(rng):
    a = op(random_density(rng, 2) * 3, "a")
    b = op(random_density(rng, 4), "b", "c")
    got = partial_trace(tensor(a, b), ["b", "c"])
    assert np.allclose(got.matrix, b.matrix * a.trace(), atol=1e-12)
    assert got.sites == ("b", "c")


def test_partial_trace_bell_and_full():
    bell = np.zeros(4)
    bell[[0, 3]] = 1 / math.sqrt(2)
    rho = op(np.outer(bell, bell), 0, 1)
    assert np.allclose(partial_trace(rho, [1]).matrix, np.eye(2) / 2)
    full = partial_trace(rho, [])
    assert full.matrix.shape == (1, 1) and abs(full.matrix[0, 0] - 1) < 1e-12
    with pytest.raises(SupportError):
        partial_trace(rho, [7])


def test_partial_trace_nonadjacent_sites(rng):
    # tr over the middle site of a⊗b⊗c keeps a⊗c in order, checked against einsum
    m = random_density(rng, 8)
    x = op(m, 0, 1, 2)
    ref = np.einsum("ajcbjd->acbd", m.reshape(2, 2, 2, 2, 2, 2)).reshape(4, 4)
    assert np.allclose(partial_trace(x, [0, 2]).matrix, ref)


def test_schatten_norms(rng):
    assert abs(schatten_norm(np.eye(3), 1) - 3) < 1e-12
    assert abs(schatten_norm(np.diag([1, 0]) - np.eye(2) / 2, 1) - 1) < 1e-12
    for _ in range(20):
        x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        assert abs(schatten_norm(x, 2) ** 2 - np.trace(x.conj().T @ x).real) < 1e-10
    with pytest.raises(DomainError):
        schatten_norm(np.eye(2), 0.5)


def test_schatten_monotone_in_p(rng):
    for _ in range(100):
        x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        s1, s2, sinf = schatten_norm(x, 1), schatten_norm(x, 2), schatten_norm(x, math.inf)
        assert s1 >= s2 - 1e-12 and s2 >= sinf - 1e-12


def test_entropy_examples():
    assert abs(vn_entropy(np.diag([1.0, 0.0]), 2)) < 1e-12
    assert abs(vn_entropy(np.eye(2) / 2, 2) - 1) < 1e-12
    assert abs(vn_entropy(np.diag([0.75, 0.25]), 2) - 0.811278124459) < 1e-9
    assert abs(binary_entropy(0.25) - 0.811278124459) < 1e-9
    with pytest.raises(NotAStateError):
        vn_entropy(np.diag([1.1, -0.1]))


def test_entropy_clamps_small_negative_noise():
    assert vn_entropy(np.diag([1.0 + 5e-10, -5e-10])) == pytest.approx(0.0, abs=1e-8)


def test_entropy_unitary_invariance(rng):
    for d in (2, 3, 4):
        rho = random_density(rng, d)
        u = random_unitary(rng, d)
        assert abs(vn_entropy(rho) - vn_entropy(u @ rho @ u.conj().T)) < 1e-9


def test_relative_entropy_examples(rng):
    rho = random_density(rng, 3)
    assert abs(relative_entropy(rho, rho)) < 1e-10
    assert abs(relative_entropy(np.diag([1.0, 0]), np.eye(2) / 2) - math.log(2)) < 1e-12
    assert abs(relative_entropy(np.diag([1.0, 0]), np.eye(2) / 2, 2) - 1) < 1e-12
    assert relative_entropy(np.diag([1.0, 0]), np.diag([0.0, 1])) == math.inf


def test_pinsker(rng):
    for _ in range(100):
        for d in (2, 3):
            r, s = random_density(rng, d), random_density(rng, d)
            assert relative_entropy(r, s) >= 0.5 * trace_norm(r - s) ** 2 - 1e-10


def test_embed_examples(rng):
    chain = SiteFactorization.uniform(range(4))
    assert np.allclose(embed(op(I2, 3), chain).matrix, np.eye(16))
    two = SiteFactorization.uniform([0, 1])
    assert np.allclose(embed(op(Z, 0), two).matrix, np.kron(Z, I2))
    assert np.allclose(embed(op(Z, 1), two).matrix, np.kron(I2, Z))
    x = op(rng.normal(size=(2, 2)), 2)
    assert abs(embed(x, chain).trace() - x.trace() * 8) < 1e-12
    with pytest.raises(FactorizationError):
        embed(Operator(np.eye(3), SiteFactorization((0,), (3,))), two)


def test_embed_partial_trace_consistency(rng):
    rho = op(random_density(rng, 4), 1, 3)
    pad = maximally_mixed(SiteFactorization.uniform([0, 2]))
    full = permute(tensor(rho, pad), (0, 1, 2, 3))
    assert np.allclose(partial_trace(full, [1, 3]).matrix, rho.matrix, atol=1e-12)
    e = embed(rho, SiteFactorization.uniform(range(4)))
    assert np.allclose(partial_trace(e, [1, 3]).matrix, rho.matrix * 4, atol=1e-12)


def test_json_round_trip(rng):
    x = op(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)), "p", "q")
    y = Operator.from_json(x.to_json())
    assert y.sites == x.sites and np.array_equal(y.matrix, x.matrix)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([(2, 2), (2, 3), (3, 2)]))
def test_partial_trace_linear_and_trace_preserving(seed, dims):
    rng = np.random.default_rng(seed)
    f = SiteFactorization((0, 1), dims)
    a = Operator(rng.normal(size=(f.dim, f.dim)), f)
    b = Operator(rng.normal(size=(f.dim, f.dim)), f)
    lhs = partial_trace(a * 2.0 + b * -0.5, [1]).matrix
    rhs = 2.0 * partial_trace(a, [1]).matrix - 0.5 * partial_trace(b, [1]).matrix
    assert np.allclose(lhs, rhs, atol=1e-12)
    assert abs(partial_trace(a, [0]).trace() - a.trace()) < 1e-10


def test_on_site_and_identity():
    z = on_site(Z, (0, 1))
    assert z.sites == ((0, 1),)
    assert np.allclose(identity(SiteFactorization.uniform([0, 1])).matrix, np.eye(4))
