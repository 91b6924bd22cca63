"""Bipartite correlation measures of fixed points and the scans built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import SupportError
from .lattice import LatticeGeometry, UniformFamily, instantiate
from .lindblad import fixed_point
from .operators import Operator, binary_entropy, partial_trace, permute, tensor, trace_norm, vn_entropy


def _split(rho: Operator, region: Iterable) -> tuple[tuple, tuple]:
    a = tuple(s for s in rho.sites if s in set(region))
    if len(a) != len(set(region)):
        raise SupportError(f"region {sorted(set(region))} is not contained in {rho.sites}")
    b = tuple(s for s in rho.sites if s not in set(a))
    if not a or not b:
        raise SupportError("a bipartition needs two non-empty parts")
    return a, b


def _product_marginal(rho: Operator, a: tuple, b: tuple) -> Operator:
    prod = tensor(partial_trace(rho, a), partial_trace(rho, b))
    return permute(prod, rho.sites)


def trace_corr(rho: Operator, region: Iterable) -> float:
    """T(A:B) = ‖ρ_AB − ρ_A ⊗ ρ_B‖₁ with B the complement of A in ρ's support."""
    a, b = _split(rho, region)
    return trace_norm(rho.matrix - _product_marginal(rho, a, b).matrix)


def _sign(m: np.ndarray) -> np.ndarray:
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    return (v * np.where(w >= 0, 1.0, -1.0)) @ v.conj().T


def covariance_corr(rho: Operator, region: Iterable, restarts: int = 8, seed: int = 0,
                    rtol: float = 1e-9, max_iter: int = 500) -> float:
    """Lower bound on C(A:B) = sup |tr[(M⊗N)(ρ_AB − ρ_A⊗ρ_B)]| over Hermitian contractions.

    For fixed N the best M is the sign of tr_B[(𝟙⊗N)Δ] and the value is that
    operator's trace norm; the two sides are alternated until the gain stalls.
    """
    a, b = _split(rho, region)
    order = a + b
    delta = permute(rho, order).matrix - tensor(partial_trace(rho, a), partial_trace(rho, b)).matrix
    da = int(np.prod([rho.factorization.dim_of(s) for s in a]))
    db = delta.shape[0] // da
    d4 = delta.reshape(da, db, da, db)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(restarts):
        h = rng.normal(size=(db, db)) + 1j * rng.normal(size=(db, db))
        n = _sign(h + h.conj().T)
        value = -1.0
        for _ in range(max_iter):
            ea = np.einsum("ikjl,lk->ij", d4, n)  # tr_B[(𝟙⊗N)Δ]
            m = _sign(ea)
            eb = np.einsum("ikjl,ji->kl", d4, m)  # tr_A[(M⊗𝟙)Δ]
            n = _sign(eb)
            new = abs(np.einsum("ikjl,ji,lk->", d4, m, n))
            if new <= value * (1 + rtol) + 1e-300:
                value = max(value, new)
                break
            value = new
        best = max(best, value)
    return float(best)


def mutual_info(rho: Operator, region: Iterable, base: float = 2) -> float:
    """I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)."""
    a, b = _split(rho, region)
    return (vn_entropy(partial_trace(rho, a), base) + vn_entropy(partial_trace(rho, b), base)
            - vn_entropy(rho, base))


@dataclass
class SandwichVerdict:
    passed: bool
    T: float
    I: float
    lower: float
    upper: float
    clamped: bool
    slack: float = 1e-6

    def __bool__(self):
        return self.passed


def sandwich_check(rho: Operator, region: Iterable, slack: float = 1e-6) -> SandwichVerdict:
    """(1/4)T² ≤ I ≤ 6T log₂ d_A + 4h_b(min(T, 1)), in bits."""
    a, _ = _split(rho, region)
    t = trace_corr(rho, a)
    i = mutual_info(rho, a, 2)
    d_a = int(np.prod([rho.factorization.dim_of(s) for s in a]))
    clamped = t > 1
    lower = t * t / 4
    upper = 6 * t * math.log2(d_a) + 4 * binary_entropy(min(t, 1.0))
    ok = lower <= i + slack and i <= upper + slack
    return SandwichVerdict(ok, t, i, lower, upper, clamped, slack)


@dataclass
class CorrelationRecord:
    A: tuple
    B: tuple
    C_val: float
    T_val: float
    I_val: float
    d_AB: int
    S_A: float
    S_B: float
    S_AB: float
    size: int = 0
    boundary: int = 0  # |∂A|, filled in by area-law scans

    def row(self) -> dict:
        return {"size": self.size, "|A|": len(self.A), "|dA|": self.boundary, "d_AB": self.d_AB, "C": self.C_val,
                "T": self.T_val, "I": self.I_val}


def correlation_record(rho: Operator, geom: LatticeGeometry, a: Sequence, b: Sequence,
                       restarts: int = 8, seed: int = 0) -> CorrelationRecord:
    a = tuple(tuple(x) for x in a)
    b = tuple(tuple(x) for x in b)
    if set(a) & set(b):
        raise SupportError("regions A and B overlap")
    rab = partial_trace(rho, set(a) | set(b))
    aa = tuple(s for s in rab.sites if s in set(a))
    bb = tuple(s for s in rab.sites if s in set(b))
    return CorrelationRecord(
        aa, bb, covariance_corr(rab, aa, restarts, seed), trace_corr(rab, aa), mutual_info(rab, aa, 2),
        geom.region_distance(aa, bb), vn_entropy(partial_trace(rab, aa), 2),
        vn_entropy(partial_trace(rab, bb), 2), vn_entropy(rab, 2), len(geom))


@dataclass
class ScanResult:
    records: list
    fit: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        return [r.row() for r in self.records]


def decay_scan(f: UniformFamily, geom: LatticeGeometry, region_pairs: Sequence, seed: int = 0) -> ScanResult:
    """C, T and I of the closed fixed point for each (A, B) pair, with a log T vs d_AB fit."""
    rho = fixed_point(instantiate(f, geom, "closed"))
    recs = [correlation_record(rho, geom, a, b, seed=seed) for a, b in region_pairs]
    pts = [(r.d_AB, math.log(r.T_val)) for r in recs if r.T_val > 1e-14]
    fit: dict = {"decay_rate": None, "monotone": None}
    if len({d for d, _ in pts}) >= 2:
        slope = np.polyfit([p[0] for p in pts], [p[1] for p in pts], 1)[0]
        fit["decay_rate"] = float(-slope)
    by_d = sorted(recs, key=lambda r: r.d_AB)
    fit["monotone"] = all(x.T_val >= y.T_val - 1e-12 for x, y in zip(by_d, by_d[1:]))
    return ScanResult(recs, fit)


CutRule = Callable[[LatticeGeometry], Sequence[tuple]]


def half_cut(geom: LatticeGeometry) -> tuple:
    """Sites in the lower half of the box along the first axis."""
    lo, ext = geom.lower[0], geom.extents[0]
    k = max(1, ext // 2)
    return tuple(x for x in geom.sites if x[0] < lo + k)


def corner_cut(geom: LatticeGeometry) -> tuple:
    return (geom.sites[0],)


CUT_RULES = {"half": half_cut, "corner": corner_cut}


def _origin_fit(x, y) -> dict:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if not np.any(x):
        return {"slope": None, "r2": None}
    slope = float(x @ y / (x @ x))
    ss = float(((y - y.mean()) ** 2).sum())
    res = float(((y - slope * x) ** 2).sum())
    scale = max(1.0, float(y @ y))
    if ss <= 1e-18 * scale:  # constant data: R² only says whether the line hits it
        return {"slope": slope, "r2": 1.0 if res <= 1e-18 * scale else 0.0}
    return {"slope": slope, "r2": 1.0 - res / ss}


def area_law_scan(f: UniformFamily, sizes: Sequence, cut_rule: str | CutRule = "half",
                  mode: str = "closed") -> ScanResult:
    """I(A:A^c) of the fixed point across cuts and sizes, fitted to |∂A| and |∂A|·log|A|."""
    cut = CUT_RULES[cut_rule] if isinstance(cut_rule, str) else cut_rule
    geoms = [s if isinstance(s, LatticeGeometry) else LatticeGeometry.chain(int(s)) for s in sizes]
    recs = []
    for gm in geoms:
        rho = fixed_point(instantiate(f, gm, mode))
        a = tuple(cut(gm))
        b = tuple(x for x in gm.sites if x not in set(a))
        recs.append(CorrelationRecord(
            a, b, math.nan, trace_corr(rho, a), mutual_info(rho, a, 2), gm.region_distance(a, b),
            vn_entropy(partial_trace(rho, a), 2), vn_entropy(partial_trace(rho, b), 2),
            vn_entropy(rho, 2), len(gm), gm.boundary_size(a)))
    bd = [r.boundary for r in recs]
    iv = [r.I_val for r in recs]
    fit = {"boundary": _origin_fit(bd, iv),
           "boundary_log": _origin_fit([b * math.log(len(r.A)) for b, r in zip(bd, recs)], iv),
           "boundary_sizes": bd}
    return ScanResult(recs, fit)
