"""Lindblad generators: assembly, spectra, fixed points and evolution."""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .channels import Superoperator, unvec, vec
from .errors import DimensionCapError, DomainError, FactorizationError, FixedPointError
from .operators import (EIG_FLOOR, Operator, SiteFactorization, embed, operator_from_dict,
                        operator_to_dict, trace_norm)

# Dense spectral analysis up to 5 qubits (1024 x 1024 superoperator); evolution
# through sparse matrix-vector action up to 7 qubits.
SPECTRAL_DIM_CAP = 32
EVOLUTION_DIM_CAP = 128
EIG_COND_LIMIT = 1e6
ZERO_TOL = 1e-9


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray  # sorted by decreasing real part
    gap: float
    gap_ties: int  # eigenvalues whose |Re| lies within tolerance of the gap
    zero_count: int
    condition: float  # eigenvector condition number
    zero_tol: float


def _hermitian(m, tol=1e-9):
    return np.allclose(m, m.conj().T, atol=tol, rtol=0)


def _liouvillian_sparse(h: np.ndarray, jumps: Sequence[np.ndarray]) -> sp.csr_matrix:
    d = h.shape[0]
    eye = sp.identity(d, dtype=complex, format="csr")
    hs = sp.csr_matrix(h)
    out = -1j * (sp.kron(eye, hs) - sp.kron(hs.T, eye))
    for lj in jumps:
        ls = sp.csr_matrix(lj)
        ll = (ls.conj().T @ ls).tocsr()
        out = out + sp.kron(ls.conj(), ls) - 0.5 * sp.kron(eye, ll) - 0.5 * sp.kron(ll.T, eye)
    return sp.csr_matrix(out)


class LindbladGenerator:
    """ℒ(ρ) = -i[H, ρ] + Σ_j (L_j ρ L_j† - ½{L_j†L_j, ρ}) on a fixed factorization.

    Instances are immutable; the dense superoperator and the spectral data are
    computed on first use under a lock and then shared.
    """

    def __init__(self, hamiltonian: Operator, jumps: Sequence[Operator] = ()):
        fact = hamiltonian.factorization
        if not hamiltonian.is_hermitian(1e-9):
            raise DomainError("Hamiltonian is not Hermitian")
        for lj in jumps:
            if lj.factorization != fact:
                raise FactorizationError("jump operator on a different factorization")
        if fact.dim > EVOLUTION_DIM_CAP:
            raise DimensionCapError(
                f"dimension {fact.dim} exceeds the evolution cap {EVOLUTION_DIM_CAP}")
        self.hamiltonian = hamiltonian
        self.jumps = tuple(jumps)
        self.factorization = fact
        self.sparse = _liouvillian_sparse(hamiltonian.matrix, [j.matrix for j in self.jumps])
        self._lock = threading.Lock()
        self._dense = None
        self._spectral = None
        self._eig = None

    @property
    def dim(self) -> int:
        return self.factorization.dim

    @property
    def super(self) -> Superoperator:
        if self._dense is None:
            if self.dim > SPECTRAL_DIM_CAP:
                raise DimensionCapError(
                    f"dense superoperator for dimension {self.dim} exceeds cap {SPECTRAL_DIM_CAP}")
            with self._lock:
                if self._dense is None:
                    self._dense = Superoperator(self.sparse.toarray(), self.factorization)
        return self._dense

    def _eigh(self):
        s = self.super
        if self._eig is None:
            with self._lock:
                if self._eig is None:
                    w, v = np.linalg.eig(s.matrix)
                    try:
                        vinv = np.linalg.inv(v)
                        cond = float(np.linalg.norm(v, 2) * np.linalg.norm(vinv, 2))
                    except np.linalg.LinAlgError:
                        vinv, cond = None, math.inf
                    self._eig = (w, v, vinv, cond)
        return self._eig

    def spectral(self, zero_tol: float = ZERO_TOL) -> SpectralData:
        if self._spectral is not None and self._spectral.zero_tol == zero_tol:
            return self._spectral
        w, _, _, cond = self._eigh()
        order = np.argsort(-w.real, kind="stable")
        w = w[order]
        scale = max(1.0, float(np.abs(w).max(initial=0.0)))
        tol = zero_tol * scale
        zero = np.abs(w) <= tol
        rest = np.abs(w[~zero].real)
        if rest.size == 0:
            gap, ties = math.inf, 0
        else:
            gap = float(rest.min())
            ties = int(np.sum(rest <= gap + max(tol, 1e-9 * scale)))
        data = SpectralData(w, gap, ties, int(zero.sum()), cond, zero_tol)
        if zero_tol == ZERO_TOL:
            self._spectral = data
        return data

    def __call__(self, rho: Operator) -> Operator:
        if rho.factorization != self.factorization:
            raise FactorizationError("state on a different factorization")
        return Operator(unvec(self.sparse @ vec(rho.matrix), self.dim), self.factorization)

    def __add__(self, other: "LindbladGenerator") -> "LindbladGenerator":
        return LindbladGenerator(self.hamiltonian + other.hamiltonian, self.jumps + other.jumps)

    def embedded(self, target: SiteFactorization) -> "LindbladGenerator":
        """The same generator acting as ``ℒ ⊗ id`` on a larger factorization."""
        return LindbladGenerator(embed(self.hamiltonian, target),
                                 [embed(j, target) for j in self.jumps])

    def to_dict(self) -> dict:
        return {"hamiltonian": [operator_to_dict(self.hamiltonian)],
                "jumps": [operator_to_dict(j) for j in self.jumps],
                "sites": operator_to_dict(self.hamiltonian)["sites"],
                "dims": list(self.factorization.local_dims)}


def build_generator(h: Operator, jumps: Sequence[Operator] = ()) -> LindbladGenerator:
    return LindbladGenerator(h, jumps)


def zero_hamiltonian(fact: SiteFactorization) -> Operator:
    return Operator(np.zeros((fact.dim, fact.dim)), fact)


def spectral_gap(g: LindbladGenerator, zero_tol: float = ZERO_TOL) -> float:
    """min |Re λ| over nonzero eigenvalues; ``math.inf`` for an all-zero spectrum."""
    return g.spectral(zero_tol).gap


def peripheral_spectrum(g: LindbladGenerator, tol: float = 1e-9) -> np.ndarray:
    w = g.spectral().eigenvalues
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    return w[np.abs(w.real) <= tol * scale]


def has_unique_fixed_point(g: LindbladGenerator, tol: float = 1e-9) -> bool:
    per = peripheral_spectrum(g, tol)
    scale = max(1.0, float(np.abs(g.spectral().eigenvalues).max(initial=0.0)))
    return per.size == 1 and abs(per[0]) <= tol * scale


def fixed_point(g: LindbladGenerator, tol: float = 1e-8) -> Operator:
    """The unique stationary state ρ∞ (raises FixedPointError otherwise)."""
    if not has_unique_fixed_point(g):
        per = peripheral_spectrum(g)
        raise FixedPointError(f"fixed point not unique: peripheral spectrum {per}")
    m = g.super.matrix
    _, _, vh = np.linalg.svd(m)
    rho = unvec(vh[-1].conj(), g.dim)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise FixedPointError("kernel vector is traceless; cannot normalize to a state")
    rho = rho / tr
    rho = (rho + rho.conj().T) / 2
    w = np.linalg.eigvalsh(rho)
    if w.min() < -max(tol, EIG_FLOOR):
        raise FixedPointError(f"kernel vector is not PSD (min eigenvalue {w.min():.2e})")
    # clamp noise-level negatives so downstream entropy code sees a clean state
    if w.min() < 0:
        wv, vv = np.linalg.eigh(rho)
        rho = (vv * np.clip(wv, 0, None)) @ vv.conj().T
        rho = rho / np.trace(rho).real
    out = Operator(rho, g.factorization, is_state=True)
    resid = trace_norm(g(out).matrix)
    if resid > max(tol, 1e-10) * max(1.0, np.abs(g.spectral().eigenvalues).max()):
        raise FixedPointError(f"fixed point residual {resid:.2e} above tolerance")
    return out


def fixed_point_projector(g: LindbladGenerator) -> Superoperator:
    """T∞: ρ -> ρ∞ tr ρ."""
    rho = fixed_point(g)
    one = vec(np.eye(g.dim))
    return Superoperator(np.outer(vec(rho.matrix), one.conj()), g.factorization)


def propagator(g: LindbladGenerator, t: float, method: str = "auto") -> Superoperator:
    """exp(tℒ) as a dense superoperator."""
    if t < 0:
        raise DomainError("evolution time must be non-negative")
    m = g.super.matrix
    if t == 0:
        return Superoperator(np.eye(m.shape[0]), g.factorization)
    if method == "auto":
        _, _, vinv, cond = g._eigh()
        method = "eig" if vinv is not None and cond < EIG_COND_LIMIT else "expm"
    if method == "eig":
        w, v, vinv, _ = g._eigh()
        e = (v * np.exp(t * w)) @ vinv
    elif method == "expm":
        e = scipy.linalg.expm(t * m)
    else:
        raise DomainError(f"unknown evolution method {method!r}")
    return Superoperator(e, g.factorization)


def _evolve_vec(g: LindbladGenerator, t: float, v: np.ndarray, heisenberg: bool, method: str):
    if t < 0:
        raise DomainError("evolution time must be non-negative")
    if t == 0:
        return v
    if method == "sparse" or g.dim > SPECTRAL_DIM_CAP:
        # truncated-Taylor action of the sparse superoperator; no dense exponential formed
        a = g.sparse.conj().T.tocsr() if heisenberg else g.sparse
        return spla.expm_multiply(t * a, v)
    p = propagator(g, t, method).matrix
    return p.conj().T @ v if heisenberg else p @ v


def evolve(g: LindbladGenerator, t: float, x: Operator, method: str = "auto") -> Operator:
    """exp(tℒ)(x).  ``method`` is 'auto', 'eig', 'expm' or 'sparse'."""
    if x.factorization != g.factorization:
        raise FactorizationError("operator on a different factorization")
    v = _evolve_vec(g, t, vec(x.matrix), False, method)
    return Operator(unvec(v, g.dim), g.factorization)


def heisenberg_evolve(g: LindbladGenerator, t: float, o: Operator, method: str = "auto") -> Operator:
    """T_t*(O), the Hilbert-Schmidt dual evolution of an observable."""
    if o.factorization != g.factorization:
        raise FactorizationError("observable on a different factorization")
    v = _evolve_vec(g, t, vec(o.matrix), True, method)
    return Operator(unvec(v, g.dim), g.factorization)


# --- generator description files ------------------------------------------------------


def generator_from_dict(data: dict) -> LindbladGenerator:
    """Build a generator from ``{"sites", "dims", "hamiltonian": [...], "jumps": [...]}``.

    Each Hamiltonian term and jump is an operator record on a subset of the
    sites; terms are embedded and Hamiltonian terms summed.
    """
    sites = tuple(tuple(s) if isinstance(s, list) else s for s in data["sites"])
    fact = SiteFactorization(sites, tuple(data["dims"]))
    h = np.zeros((fact.dim, fact.dim), dtype=complex)
    for term in data.get("hamiltonian", []):
        h = h + embed(operator_from_dict(term), fact).matrix
    jumps = [embed(operator_from_dict(j), fact) for j in data.get("jumps", [])]
    return LindbladGenerator(Operator(h, fact), jumps)


def load_generator(path) -> LindbladGenerator:
    with open(path) as fh:
        return generator_from_dict(json.load(fh))
