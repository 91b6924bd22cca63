"""Independent reference computations used to freeze expected values.

None of these go through the package's vectorization, evolution or spectral
code; they use row-major vectorization and closed forms instead.
"""
import math

import numpy as np


def liouvillian_row_major(h, jumps):
    """ℒ in the row-stacking convention vec_r(AXB) = (A ⊗ Bᵀ) vec_r(X)."""
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    eye = np.eye(d)
    out = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for l in jumps:
        l = np.asarray(l, dtype=complex)
        ll = l.conj().T @ l
        out += np.kron(l, l.conj()) - 0.5 * np.kron(ll, eye) - 0.5 * np.kron(eye, ll.T)
    return out


def sorted_spectrum(m):
    w = np.linalg.eigvals(m)
    return w[np.lexsort((w.imag, -w.real))]


def depolarizing_qubit(gamma=1.0):
    k = math.sqrt(gamma / 4)
    return np.zeros((2, 2)), [k * np.array([[0, 1], [1, 0]]), k * np.array([[0, -1j], [1j, 0]]),
                              k * np.array([[1, 0], [0, -1]])]


def amplitude_damping_qubit(gamma=1.0):
    return np.zeros((2, 2)), [math.sqrt(gamma) * np.array([[0, 1], [0, 0]])]


def gf2_rank(m):
    m = (np.array(m, dtype=np.int64) % 2).copy()
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if m[r, c]), None)
        if piv is None:
            continue
        m[[rank, piv]] = m[[piv, rank]]
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def graph_state_cut_information(adjacency, cut):
    """I(A:Aᶜ) in bits of a graph state: twice the GF(2) rank of the cut block."""
    n = len(adjacency)
    a = sorted(cut)
    b = [i for i in range(n) if i not in set(a)]
    return 2 * gf2_rank(np.asarray(adjacency)[np.ix_(a, b)])


def path_adjacency(n):
    adj = np.zeros((n, n), dtype=int)
    for i in range(n - 1):
        adj[i, i + 1] = adj[i + 1, i] = 1
    return adj


def alpha1_depolarizing_closed_form(gamma, r):
    """K(ρ)/D(ρ‖𝟙/2) for a qubit at Bloch radius r under rate-γ depolarizing.

    D = ((1+r)/2)log(1+r) + ((1−r)/2)log(1−r) and K = γ r artanh(r); the ratio
    decreases to 2γ as r → 0.
    """
    d = (1 + r) / 2 * math.log1p(r) + (1 - r) / 2 * math.log1p(-r)
    k = gamma * r * math.atanh(r)
    return k / d
