"""Dense operators on tensor products of site Hilbert spaces.

Every :class:`Operator` carries its :class:`SiteFactorization`, so Kronecker
ordering is always explicit.  Site identifiers are arbitrary hashables; the
lattice module uses coordinate tuples and sorts them lexicographically.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import DomainError, FactorizationError, NotAStateError, SupportError

# Eigenvalues in [-EIG_FLOOR, 0) are numerical noise and are clamped to zero.
EIG_FLOOR = 1e-9
STATE_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


@dataclass(frozen=True)
class SiteFactorization:
    site_ids: tuple
    local_dims: tuple

    def __post_init__(self):
        sites = tuple(self.site_ids)
        dims = tuple(int(d) for d in self.local_dims)
        if len(sites) != len(dims):
            raise FactorizationError("site_ids and local_dims differ in length")
        if len(set(sites)) != len(sites):
            raise SupportError(f"site ids are not distinct: {sites}")
        if any(d < 2 for d in dims):
            raise FactorizationError(f"local dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "site_ids", sites)
        object.__setattr__(self, "local_dims", dims)

    @classmethod
    def uniform(cls, sites: Iterable[Hashable], d: int = 2) -> "SiteFactorization":
        sites = tuple(sites)
        return cls(sites, (d,) * len(sites))

    @property
    def dim(self) -> int:
        return math.prod(self.local_dims)

    @property
    def n_sites(self) -> int:
        return len(self.site_ids)

    def dim_of(self, site) -> int:
        return self.local_dims[self.site_ids.index(site)]

    def restrict(self, sites: Iterable[Hashable]) -> "SiteFactorization":
        """Sub-factorization on ``sites``, kept in this factorization's order."""
        keep = set(sites)
        missing = keep - set(self.site_ids)
        if missing:
            raise SupportError(f"sites {sorted(missing, key=repr)} not in factorization")
        pairs = [(s, d) for s, d in zip(self.site_ids, self.local_dims) if s in keep]
        return SiteFactorization(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def __add__(self, other: "SiteFactorization") -> "SiteFactorization":
        if set(self.site_ids) & set(other.site_ids):
            raise SupportError("factorizations share sites")
        return SiteFactorization(self.site_ids + other.site_ids, self.local_dims + other.local_dims)


@dataclass(frozen=True, eq=False)
class Operator:
    matrix: np.ndarray
    factorization: SiteFactorization
    is_state: bool = field(default=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise FactorizationError(f"operator matrix must be square, got {m.shape}")
        if m.shape[0] != self.factorization.dim:
            raise FactorizationError(
                f"matrix side {m.shape[0]} != factorization dimension {self.factorization.dim}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.is_state:
            check_state(m)

    @property
    def sites(self) -> tuple:
        return self.factorization.site_ids

    @property
    def dim(self) -> int:
        return self.factorization.dim

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.factorization)

    def is_hermitian(self, tol: float = 1e-9) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=tol, rtol=0))

    def _same(self, other: "Operator"):
        if other.factorization != self.factorization:
            raise FactorizationError("operators live on different factorizations")

    def __add__(self, other):
        self._same(other)
        return Operator(self.matrix + other.matrix, self.factorization)

    def __sub__(self, other):
        self._same(other)
        return Operator(self.matrix - other.matrix, self.factorization)

    def __mul__(self, c):
        return Operator(self.matrix * c, self.factorization)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._same(other)
        return Operator(self.matrix @ other.matrix, self.factorization)

    def to_json(self) -> str:
        return json.dumps(operator_to_dict(self))

    @classmethod
    def from_json(cls, text: str) -> "Operator":
        return operator_from_dict(json.loads(text))


def _site_to_json(s):
    return list(s) if isinstance(s, tuple) else s


def _site_from_json(s):
    return tuple(s) if isinstance(s, list) else s


def operator_to_dict(op: Operator) -> dict:
    m = op.matrix
    return {
        "dims": list(op.factorization.local_dims),
        "sites": [_site_to_json(s) for s in op.sites],
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    }


def operator_from_dict(data: dict) -> Operator:
    sites = tuple(_site_from_json(s) for s in data["sites"])
    fact = SiteFactorization(sites, tuple(data["dims"]))
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
    return Operator(re + 1j * im, fact)


def check_state(m: np.ndarray, tol: float = STATE_TOL) -> None:
    if not np.allclose(m, m.conj().T, atol=tol, rtol=0):
        raise NotAStateError("state is not Hermitian")
    evals = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if evals.min() < -EIG_FLOOR:
        raise NotAStateError(f"state has negative eigenvalue {evals.min():.3e}")
    tr = np.trace(m).real
    if abs(tr - 1) > tol:
        raise NotAStateError(f"state trace {tr!r} != 1")


def identity(fact: SiteFactorization) -> Operator:
    return Operator(np.eye(fact.dim), fact)


def maximally_mixed(fact: SiteFactorization) -> Operator:
    return Operator(np.eye(fact.dim) / fact.dim, fact, is_state=True)


def on_site(matrix, site, d: int | None = None) -> Operator:
    """Single-site operator, e.g. ``on_site(Z, 0)``."""
    matrix = np.asarray(matrix)
    return Operator(matrix, SiteFactorization((site,), (d or matrix.shape[0],)))


def ket_projector(vec, fact: SiteFactorization) -> Operator:
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return Operator(np.outer(v, v.conj()), fact, is_state=True)


def tensor(a: Operator, b: Operator) -> Operator:
    if set(a.sites) & set(b.sites):
        raise SupportError(f"tensor requires disjoint supports: {a.sites} and {b.sites}")
    return Operator(np.kron(a.matrix, b.matrix), a.factorization + b.factorization)


def tensor_all(ops: Sequence[Operator]) -> Operator:
    out = ops[0]
    for op in ops[1:]:
        out = tensor(out, op)
    return out


def permute(x: Operator, order: Sequence[Hashable]) -> Operator:
    """Reorder the Kronecker factors of ``x`` to follow ``order``."""
    order = tuple(order)
    if set(order) != set(x.sites) or len(order) != len(x.sites):
        raise SupportError("permutation must list exactly the operator's sites")
    if order == x.sites:
        return x
    perm = [x.sites.index(s) for s in order]
    dims = x.factorization.local_dims
    n = len(dims)
    t = x.matrix.reshape(dims + dims)
    t = t.transpose(perm + [p + n for p in perm])
    new_dims = tuple(dims[p] for p in perm)
    return Operator(t.reshape(x.dim, x.dim), SiteFactorization(order, new_dims))


def partial_trace(x: Operator, keep: Iterable[Hashable]) -> Operator:
    """Trace out every site not in ``keep``; kept sites retain ``x``'s order."""
    keep = set(keep)
    if not keep <= set(x.sites):
        raise SupportError(f"keep set {keep} is not a subset of {x.sites}")
    dims = x.factorization.local_dims
    n = len(dims)
    kept = [i for i, s in enumerate(x.sites) if s in keep]
    traced = [i for i in range(n) if i not in kept]
    t = x.matrix.reshape(dims + dims)
    # contract each traced row index with its column index
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for i in traced:
        cols[i] = rows[i]
    out = "".join(rows[i] for i in kept) + "".join(cols[i] for i in kept)
    m = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    fact = x.factorization.restrict(keep)
    return Operator(m.reshape(fact.dim, fact.dim), fact)


def embed(x: Operator, target: SiteFactorization) -> Operator:
    """``x ⊗ 𝟙`` on the remaining sites of ``target``, in ``target``'s order."""
    if not set(x.sites) <= set(target.site_ids):
        raise SupportError(f"{x.sites} not contained in target {target.site_ids}")
    for s, d in zip(x.sites, x.factorization.local_dims):
        if target.dim_of(s) != d:
            raise FactorizationError(f"site {s!r}: dimension {d} != target {target.dim_of(s)}")
    rest = [s for s in target.site_ids if s not in set(x.sites)]
    if not rest:
        return permute(x, target.site_ids)
    pad = identity(target.restrict(rest))
    return permute(tensor(x, pad), target.site_ids)


def schatten_norm(x, p: float) -> float:
    m = x.matrix if isinstance(x, Operator) else np.asarray(x)
    if not p >= 1:
        raise DomainError(f"Schatten norm needs p >= 1, got {p}")
    s = np.linalg.svd(m, compute_uv=False)
    if math.isinf(p):
        return float(s.max(initial=0.0))
    if p == 1:
        return float(s.sum())
    smax = s.max(initial=0.0)
    if smax == 0:
        return 0.0
    return float(smax * np.sum((s / smax) ** p) ** (1.0 / p))


def trace_norm(m) -> float:
    return schatten_norm(m, 1)


def op_norm(m) -> float:
    return schatten_norm(m, math.inf)


def psd_eigh(m: np.ndarray):
    """Eigen-decomposition of a PSD matrix with noise-level negatives clamped."""
    h = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(h)
    if w.min(initial=0.0) < -EIG_FLOOR:
        raise NotAStateError(f"matrix has negative eigenvalue {w.min():.3e}")
    return np.clip(w, 0.0, None), v


def herm_power(m: np.ndarray, a: float) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * w ** a) @ v.conj().T


def _log(base) -> float:
    return 1.0 if base in (None, math.e, "e") else math.log(base)


def vn_entropy(rho, base=math.e) -> float:
    m = rho.matrix if isinstance(rho, Operator) else np.asarray(rho)
    w, _ = psd_eigh(m)
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)) / _log(base))


def binary_entropy(x: float) -> float:
    """h_b in bits, with 0 log 0 = 0."""
    if x <= 0 or x >= 1:
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def relative_entropy(x, y, base=math.e) -> float:
    """(1/tr X) tr[X(log X - log Y)]; ``math.inf`` when supp X ⊄ supp Y."""
    mx = x.matrix if isinstance(x, Operator) else np.asarray(x)
    my = y.matrix if isinstance(y, Operator) else np.asarray(y)
    lx, ux = psd_eigh(mx)
    ly, uy = psd_eigh(my)
    trx = lx.sum()
    if trx <= 0:
        raise DomainError("relative entropy needs tr X > 0")
    ysupp = ly > EIG_FLOOR
    # weight of X outside supp Y
    overlap = np.abs(ux.conj().T @ uy) ** 2  # overlap[i, j] = |<u_i|v_j>|^2
    leak = float(lx @ overlap[:, ~ysupp].sum(axis=1))
    if leak > 1e-10 * max(trx, 1.0):
        return math.inf
    pos = lx > 0
    xlogx = float(np.sum(lx[pos] * np.log(lx[pos])))
    xlogy = float(lx @ (overlap[:, ysupp] @ np.log(ly[ysupp])))
    return (xlogx - xlogy) / trx / _log(base)
