"""Contraction curves, mixing times, rapid-mixing fits and mixing-time bounds.

The worst case over input states is taken over pure states, which are the
extreme points of the state space.  Values come from a monotone ascent and
are certified lower bounds on η; for a single qubit a Bloch-sphere grid is
evaluated as well and the larger value kept.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .channels import bloch_grid_norm, pure_state_ascent, unvec, vec, Superoperator
from .errors import DomainError, FixedPointError
from .lindblad import (LindbladGenerator, fixed_point, fixed_point_projector, has_unique_fixed_point,
                       propagator, spectral_gap)
from .operators import Operator, embed, partial_trace

RESTARTS = 64
T_MAX_NO_GAP = 1e3


@dataclass
class MixingCurve:
    t_grid: np.ndarray
    eta: np.ndarray
    region: Optional[tuple] = None
    size: Optional[int] = None

    def is_monotone(self, tol: float = 1e-8) -> bool:
        return bool(np.all(np.diff(self.eta) <= tol))

    def rows(self):
        reg = "" if self.region is None else " ".join(map(str, self.region))
        return [(self.size, float(t), float(e), reg) for t, e in zip(self.t_grid, self.eta)]


class _Deviation:
    """T_t − T_∞ for one generator, optionally followed by tr_{A^c}."""

    def __init__(self, g: LindbladGenerator, region: Optional[Sequence] = None, method: str = "auto"):
        if not has_unique_fixed_point(g):
            raise FixedPointError("contraction needs a unique fixed point")
        self.g = g
        self.fact = g.factorization
        self.proj = fixed_point_projector(g).matrix
        self.method = method
        self.region = None if region is None else tuple(region)
        if self.region is not None:
            missing = set(self.region) - set(self.fact.site_ids)
            if missing:
                raise DomainError(f"region sites {sorted(missing)} are not in the box")
            self.sub = self.fact.restrict(self.region)
            if self.sub == self.fact:
                self.region = None
        self._warm: list[np.ndarray] = []

    def matrix(self, t: float) -> np.ndarray:
        return propagator(self.g, t, self.method).matrix - self.proj

    def fns(self, m: np.ndarray):
        d = self.g.dim
        mh = m.conj().T
        if self.region is None:
            return (lambda x: unvec(m @ vec(x), d)), (lambda u: unvec(mh @ vec(u), d))
        fact, sub, keep = self.fact, self.sub, self.region

        def apply(x):
            return partial_trace(Operator(unvec(m @ vec(x), d), fact), keep).matrix

        def dual(u):
            return unvec(mh @ vec(embed(Operator(u, sub), fact).matrix), d)

        return apply, dual

    def value(self, t: float, restarts: int = RESTARTS, seed: int = 0) -> float:
        if t < 0:
            raise DomainError("time must be non-negative")
        m = self.matrix(t)
        f, fd = self.fns(m)
        val, psi = pure_state_ascent(f, fd, self.g.dim, restarts=restarts, seed=seed,
                                     starts=self._warm[-4:])
        if psi is not None:
            self._warm.append(psi)
        if self.region is None and self.g.dim == 2:
            val = max(val, bloch_grid_norm(Superoperator(m, self.fact)))
        return float(min(val, 2.0))


def contraction(g: LindbladGenerator, t: float, restarts: int = RESTARTS, seed: int = 0,
                method: str = "auto") -> float:
    """η(t) = sup_ρ ‖T_t(ρ) − T_∞(ρ)‖₁."""
    return _Deviation(g, None, method).value(t, restarts, seed)


def local_contraction(g: LindbladGenerator, region: Iterable, t: float, restarts: int = RESTARTS,
                      seed: int = 0, method: str = "auto") -> float:
    """η^A(t) = sup_ρ ‖tr_{A^c}[T_t(ρ) − T_∞(ρ)]‖₁."""
    return _Deviation(g, tuple(region), method).value(t, restarts, seed)


def mixing_curve(g: LindbladGenerator, t_grid: Sequence[float], region=None, restarts: int = RESTARTS,
                 seed: int = 0, method: str = "auto") -> MixingCurve:
    dev = _Deviation(g, region, method)
    eta = np.array([dev.value(float(t), restarts, seed) for t in t_grid])
    return MixingCurve(np.asarray(t_grid, float), eta, None if region is None else tuple(region),
                       len(g.factorization.site_ids))


def _t_max(g: LindbladGenerator) -> float:
    gap = spectral_gap(g)
    return 50.0 / gap if 0 < gap < math.inf else T_MAX_NO_GAP


def _bisect(dev: _Deviation, eps: float, t_max: float, restarts: int, seed: int,
            xtol: float = 1e-10, ftol: float = 1e-10) -> float:
    eta0 = dev.value(0.0, restarts, seed)
    if eps >= eta0:
        return 0.0
    lo, hi = 0.0, max(t_max / 50.0, 1e-6)
    while True:
        val = dev.value(hi, restarts, seed)
        if val <= eps:
            break
        lo = hi
        if hi >= t_max:
            return math.inf
        hi = min(2 * hi, t_max)
    while hi - lo > xtol * max(1.0, hi):
        mid = (lo + hi) / 2
        val = dev.value(mid, restarts, seed)
        if abs(val - eps) <= ftol:
            return mid
        if val > eps:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def mixing_time(g: LindbladGenerator, eps: float, restarts: int = RESTARTS, seed: int = 0,
                t_max: float | None = None, method: str = "auto") -> float:
    """τ(ε) by bisection on the monotone contraction; ``math.inf`` on timeout."""
    if not 0 < eps < 2:
        raise DomainError("ε must lie in (0, 2)")
    t_max = _t_max(g) if t_max is None else t_max
    return _bisect(_Deviation(g, None, method), eps, t_max, restarts, seed)


def local_mixing_time(g: LindbladGenerator, region: Iterable, eps: float, restarts: int = RESTARTS,
                      seed: int = 0, t_max: float | None = None, method: str = "auto") -> float:
    """τ^A(ε), the first time η^A drops below ε."""
    if not 0 < eps < 2:
        raise DomainError("ε must lie in (0, 2)")
    t_max = _t_max(g) if t_max is None else t_max
    return _bisect(_Deviation(g, tuple(region), method), eps, t_max, restarts, seed)


# --- rapid mixing fit -------------------------------------------------------------------


RAPID_CAVEAT = ("desk-scale fit: logarithmic growth in |Λ| cannot be told apart from a small "
                "power below about 10 sites")


@dataclass
class RapidMixingFit:
    c: float
    delta: float
    gamma: float
    residuals: np.ndarray
    verdict: str
    curves: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.verdict == "rapid-mixing-consistent"

    def to_dict(self) -> dict:
        return {"c": self.c, "delta": self.delta, "gamma": self.gamma,
                "max_residual": float(np.max(np.abs(self.residuals))) if len(self.residuals) else None,
                "verdict": self.verdict, "caveat": RAPID_CAVEAT}


def rapid_mixing_fit(f, sizes: Sequence, t_grid: Sequence[float] | None = None, eps: float = 1e-2,
                     restarts: int = 16, seed: int = 0, mode: str = "closed") -> RapidMixingFit:
    """Least-squares fit of log η_Λ(t) ≈ log c + δ log|Λ| − γt over sizes and times.

    ``sizes`` are chain lengths or :class:`LatticeGeometry` boxes.  Points with
    η below ``eps``² are dropped since they carry only ascent noise.
    """
    from .lattice import LatticeGeometry, instantiate

    geoms = [s if isinstance(s, LatticeGeometry) else LatticeGeometry.chain(int(s)) for s in sizes]
    gens = [instantiate(f, gm, mode) for gm in geoms]
    if not all(has_unique_fixed_point(g) for g in gens):
        return RapidMixingFit(math.nan, math.nan, 0.0, np.array([]), "timeout: η does not decay")
    if t_grid is None:
        gap = min(spectral_gap(g) for g in gens)
        t_grid = np.linspace(1.0, 4.0, 7) / gap
    rows, curves = [], []
    for gm, g in zip(geoms, gens):
        cur = mixing_curve(g, t_grid, restarts=restarts, seed=seed)
        curves.append(cur)
        for t, e in zip(cur.t_grid, cur.eta):
            if e > eps ** 2:
                rows.append((math.log(len(gm)), t, math.log(e)))
    if len(rows) < 3:
        return RapidMixingFit(math.nan, math.nan, 0.0, np.array([]), "timeout: too few decaying points", curves)
    a = np.array([[1.0, r[0], -r[1]] for r in rows])
    y = np.array([r[2] for r in rows])
    if len({r[0] for r in rows}) == 1:
        a = a[:, [0, 2]]
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        logc, delta, gamma = coef[0], 0.0, coef[1]
        res = y - a @ coef
    else:
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        logc, delta, gamma = coef
        res = y - a @ coef
    ok = gamma > 0 and np.max(np.abs(res)) < 0.1
    verdict = "rapid-mixing-consistent" if ok else "not rapid-mixing-consistent"
    return RapidMixingFit(float(math.exp(logc)), float(delta), float(gamma), res, verdict, curves)


# --- mixing-time bounds ------------------------------------------------------------------


@dataclass
class BoundReport:
    status: str  # "pass", "fail" or "skipped"
    reason: str = ""
    tau: float = math.nan
    eps: float = math.nan
    gap: float = math.nan
    sigma_min: float = math.nan
    gap_bound: float = math.nan
    gap_bound_tight: float = math.nan
    slack: float = math.nan
    alpha: Optional[float] = None
    lsi_bound: Optional[float] = None
    lsi_bound_as_printed: Optional[float] = None
    lsi_holds: Optional[bool] = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def bound_check(g: LindbladGenerator, eps: float, alpha: float | None = None, restarts: int = RESTARTS,
                seed: int = 0, tol: float = 1e-6) -> BoundReport:
    """Compare the measured τ(ε) with the spectral-gap and log-Sobolev bounds.

    The hard check is τ ≤ (log(2σ_min^{-1/2}) − log ε)/λ.  When an α₁
    estimate is given, the log-Sobolev bound (log(2 log σ_min^{-1}) − 2 log ε)/α₁
    is reported as a soft check next to the doubly-logarithmic form
    (log log σ_min^{-1/2} − 2 log ε)/(2α₁).
    """
    from .sigma import SigmaContext, detailed_balance_check

    try:
        sigma = fixed_point(g)
    except FixedPointError as exc:
        return BoundReport("skipped", f"no unique fixed point: {exc}", eps=eps)
    w = np.linalg.eigvalsh(sigma.matrix)
    smin = float(w.min())
    if smin <= 1e-12:
        return BoundReport("skipped", "fixed point is not full rank", eps=eps, sigma_min=smin)
    ctx = SigmaContext(sigma)
    db = detailed_balance_check(ctx, g)
    if not db.holds:
        return BoundReport("skipped", f"no detailed balance (defect {db.defect:.2e})", eps=eps, sigma_min=smin)
    gap = spectral_gap(g)
    tau = mixing_time(g, eps, restarts=restarts, seed=seed)
    bound = (math.log(2 * smin ** -0.5) - math.log(eps)) / gap
    tight = (math.log(smin ** -0.5) - math.log(eps)) / gap
    status = "pass" if tau <= bound + tol else "fail"
    rep = BoundReport(status, "", tau, eps, gap, smin, bound, tight, bound - tau)
    if alpha is not None and alpha > 0:
        rep.alpha = alpha
        rep.lsi_bound = (math.log(2 * math.log(1 / smin)) - 2 * math.log(eps)) / alpha
        ll = math.log(math.log(smin ** -0.5)) if smin < 1 else -math.inf
        rep.lsi_bound_as_printed = (ll - 2 * math.log(eps)) / (2 * alpha)
        rep.lsi_holds = tau <= rep.lsi_bound + tol
    return rep
