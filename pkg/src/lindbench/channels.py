"""Superoperators in the column-stacking convention.

``vec(X)`` stacks the columns of ``X``, so the map ``A -> X A Y`` is the matrix
``kron(Y.T, X)``.  The Hilbert-Schmidt dual of a superoperator matrix ``S`` is
its conjugate transpose.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, FactorizationError
from .operators import EIG_FLOOR, Operator, SiteFactorization, trace_norm


def vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if d is None:
        d = math.isqrt(v.size)
    return v.reshape(d, d, order="F")


@dataclass(frozen=True, eq=False)
class Superoperator:
    matrix: np.ndarray
    factorization: SiteFactorization

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        side = self.factorization.dim ** 2
        if m.shape != (side, side):
            raise FactorizationError(f"superoperator must be {side}x{side}, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.factorization.dim

    @classmethod
    def identity(cls, fact: SiteFactorization) -> "Superoperator":
        return cls(np.eye(fact.dim ** 2), fact)

    @classmethod
    def conjugation(cls, left, right, fact: SiteFactorization) -> "Superoperator":
        """The map A -> left · A · right."""
        return cls(np.kron(np.asarray(right).T, np.asarray(left)), fact)

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray], fact: SiteFactorization) -> "Superoperator":
        m = sum(np.kron(np.asarray(k).conj(), np.asarray(k)) for k in kraus)
        return cls(m, fact)

    @classmethod
    def from_map(cls, fn: Callable[[np.ndarray], np.ndarray], fact: SiteFactorization):
        """Tabulate an arbitrary linear map on the matrix-unit basis."""
        d = fact.dim
        cols = []
        for j in range(d):
            for i in range(d):  # column-stacking order: index i + d*j
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = 1
                cols.append(vec(fn(e)))
        return cls(np.array(cols).T, fact)

    def __call__(self, x: Operator) -> Operator:
        return apply(self, x)

    def __add__(self, other: "Superoperator"):
        _same(self, other)
        return Superoperator(self.matrix + other.matrix, self.factorization)

    def __sub__(self, other: "Superoperator"):
        _same(self, other)
        return Superoperator(self.matrix - other.matrix, self.factorization)

    def __mul__(self, c):
        return Superoperator(self.matrix * c, self.factorization)

    __rmul__ = __mul__

    def __matmul__(self, other: "Superoperator"):
        _same(self, other)
        return Superoperator(self.matrix @ other.matrix, self.factorization)


def _same(a: Superoperator, b: Superoperator):
    if a.factorization != b.factorization:
        raise FactorizationError("superoperators act on different factorizations")


def apply(s: Superoperator, x: Operator) -> Operator:
    if x.factorization != s.factorization:
        raise FactorizationError("operator and superoperator factorizations differ")
    return Operator(unvec(s.matrix @ vec(x.matrix), s.dim), s.factorization)


def dual(s: Superoperator) -> Superoperator:
    return Superoperator(s.matrix.conj().T, s.factorization)


def choi_matrix(m: np.ndarray, d: int) -> np.ndarray:
    """Unnormalized Choi matrix sum_ij |i><j| ⊗ S(|i><j|), input factor first."""
    s4 = np.asarray(m).reshape(d, d, d, d, order="F")  # s4[a, b, i, j] = S(E_ij)[a, b]
    return s4.transpose(2, 0, 3, 1).reshape(d * d, d * d)


def choi(s: Superoperator) -> Operator:
    d = s.dim
    anc = SiteFactorization(tuple(("in", x) for x in s.factorization.site_ids),
                            s.factorization.local_dims)
    return Operator(choi_matrix(s.matrix, d), anc + s.factorization)


@dataclass(frozen=True)
class CPTPVerdict:
    is_cptp: bool
    min_eigenvalue: float  # of the Choi matrix normalized to unit trace
    trace_defect: float
    tol: float

    def __bool__(self):
        return self.is_cptp


def is_cptp(s: Superoperator, tol: float = 1e-8) -> CPTPVerdict:
    d = s.dim
    j = choi_matrix(s.matrix, d)
    herm_defect = float(np.abs(j - j.conj().T).max())
    w = np.linalg.eigvalsh((j + j.conj().T) / 2) / d
    t = np.einsum("iaja->ij", j.reshape(d, d, d, d))
    defect = float(np.abs(t - np.eye(d)).max())
    ok = herm_defect <= tol and w.min() >= -tol and defect <= tol
    return CPTPVerdict(bool(ok), float(w.min()), defect, tol)


def is_trace_preserving(s: Superoperator, tol: float = 1e-10) -> bool:
    one = vec(np.eye(s.dim))
    return bool(np.abs(s.matrix.conj().T @ one - one).max() <= tol)


def is_unital(s: Superoperator, tol: float = 1e-10) -> bool:
    one = vec(np.eye(s.dim))
    return bool(np.abs(s.matrix @ one - one).max() <= tol)


def is_hermiticity_preserving(s, tol: float = 1e-10) -> bool:
    m = s.matrix if isinstance(s, Superoperator) else np.asarray(s)
    d = math.isqrt(m.shape[0])
    j = choi_matrix(m, d)
    scale = max(1.0, float(np.abs(j).max()))
    return bool(np.abs(j - j.conj().T).max() <= tol * scale)


# --- pure-state ascent --------------------------------------------------------------


def pure_state_ascent(apply_fn, dual_fn, dim: int, *, restarts: int = 32, seed=0,
                      starts: Sequence[np.ndarray] = (), max_iter: int = 500,
                      rtol: float = 1e-9):
    """Maximize ||Φ(|ψ><ψ|)||_1 over unit vectors ψ.

    Alternates between the optimal sign operator U = sign Φ(ψψ†) and the top
    eigenvector of Φ*(U); every step is monotone, so the best value found is a
    certified lower bound.  Returns ``(value, psi)``.
    """
    rng = np.random.default_rng(seed)
    inits = [np.asarray(s, dtype=complex) for s in starts]
    for _ in range(restarts):
        inits.append(rng.normal(size=dim) + 1j * rng.normal(size=dim))
    best, best_psi = -1.0, None
    for psi in inits:
        psi = psi / np.linalg.norm(psi)
        value, at = -1.0, psi
        for _ in range(max_iter):
            out = apply_fn(np.outer(psi, psi.conj()))
            out = (out + out.conj().T) / 2
            w, v = np.linalg.eigh(out)
            new = float(np.abs(w).sum())
            if new <= value * (1 + rtol) + 1e-300:
                if new > value:
                    value, at = new, psi
                break
            value, at = new, psi
            u = (v * np.sign(w)) @ v.conj().T
            g = dual_fn(u)
            g = (g + g.conj().T) / 2
            psi = np.linalg.eigh(g)[1][:, -1]
        if value > best:
            best, best_psi = value, at
    return best, best_psi


def _matrix_fns(m: np.ndarray, d: int):
    mh = m.conj().T
    return (lambda x: unvec(m @ vec(x), d)), (lambda u: unvec(mh @ vec(u), d))


def norm_1to1(s: Superoperator, restarts: int = 32, seed=0) -> float:
    """max over pure states of ||s(|ψ><ψ|)||_1 (a lower bound on ||s||_{1->1})."""
    if not is_hermiticity_preserving(s):
        raise DomainError("norm_1to1 needs a Hermiticity-preserving map")
    f, fd = _matrix_fns(s.matrix, s.dim)
    return pure_state_ascent(f, fd, s.dim, restarts=restarts, seed=seed)[0]


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z ** 2)
    phi = math.pi * (3 - math.sqrt(5)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def bloch_pure_states(n: int = 10_000) -> np.ndarray:
    """``n`` qubit pure-state density matrices spread over the Bloch sphere."""
    b = fibonacci_sphere(n)
    out = np.empty((n, 2, 2), dtype=complex)
    out[:, 0, 0] = (1 + b[:, 2]) / 2
    out[:, 1, 1] = (1 - b[:, 2]) / 2
    out[:, 0, 1] = (b[:, 0] - 1j * b[:, 1]) / 2
    out[:, 1, 0] = (b[:, 0] + 1j * b[:, 1]) / 2
    return out


def bloch_grid_norm(s: Superoperator, n: int = 10_000) -> float:
    """Qubit oracle: max of ||s(ρ)||_1 over a Bloch-sphere grid of pure states."""
    if s.dim != 2:
        raise DomainError("Bloch grid oracle is for a single qubit")
    rhos = bloch_pure_states(n)
    outs = np.einsum("ij,nj->ni", s.matrix, rhos.transpose(0, 2, 1).reshape(n, 4))
    outs = outs.reshape(n, 2, 2).transpose(0, 2, 1)
    w = np.linalg.eigvalsh((outs + outs.conj().transpose(0, 2, 1)) / 2)
    return float(np.abs(w).sum(axis=1).max())


# --- diamond norm sandwich ----------------------------------------------------------


def _with_ancilla_fns(m: np.ndarray, d: int):
    """Action of (S ⊗ id_d) and its dual on operators of system ⊗ ancilla."""
    mh = m.conj().T

    def act(mat, xm):
        x4 = xm.reshape(d, d, d, d)  # [i, k, j, l]: system row/col i, j; ancilla k, l
        y = x4.transpose(2, 0, 1, 3).reshape(d * d, d * d)  # rows i + d*j
        z = (mat @ y).reshape(d, d, d, d)  # [j', i', k, l]
        return z.transpose(1, 2, 0, 3).reshape(d * d, d * d)

    return (lambda x: act(m, x)), (lambda u: act(mh, u))


def cp_split_bound(m: np.ndarray, d: int) -> float:
    """||S||_◇ <= ||S+||_◇ + ||S-||_◇ for the Jordan split of a Hermitian Choi matrix.

    Each part is completely positive, and a CP map has diamond norm
    ||tr_out J||_∞.
    """
    j = choi_matrix(m, d)
    w, v = np.linalg.eigh((j + j.conj().T) / 2)
    total = 0.0
    for part in (w.clip(min=0), (-w).clip(min=0)):
        jp = (v * part) @ v.conj().T
        t = np.einsum("iaja->ij", jp.reshape(d, d, d, d))
        total += float(np.linalg.eigvalsh((t + t.conj().T) / 2).max(initial=0.0))
    return total


def diamond_bounds(s: Superoperator, restarts: int = 32, seed=0) -> tuple[float, float]:
    """Certified interval ``(lower, upper)`` for the diamond norm of ``s``."""
    if not is_hermiticity_preserving(s):
        raise DomainError("diamond_bounds needs a Hermiticity-preserving map")
    d = s.dim
    f, fd = _with_ancilla_fns(s.matrix, d)
    # maximally entangled input as one start: it attains the norm for many maps
    omega = np.eye(d).reshape(-1) / math.sqrt(d)
    lower, _ = pure_state_ascent(f, fd, d * d, restarts=restarts, seed=seed, starts=[omega])
    upper = min(cp_split_bound(s.matrix, d), trace_norm(choi_matrix(s.matrix, d)))
    return lower, max(upper, lower)


def diamond_upper(s: Superoperator) -> float:
    m, d = s.matrix, s.dim
    return min(cp_split_bound(m, d), trace_norm(choi_matrix(m, d)))


__all__ = [
    "Superoperator", "vec", "unvec", "apply", "dual", "choi", "choi_matrix", "is_cptp",
    "CPTPVerdict", "norm_1to1", "diamond_bounds", "diamond_upper", "bloch_grid_norm",
    "bloch_pure_states", "pure_state_ascent", "is_trace_preserving", "is_unital",
    "is_hermiticity_preserving", "EIG_FLOOR",
]
