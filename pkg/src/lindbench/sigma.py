"""σ-weighted functional calculus for a full-rank reference state σ.

Conventions: ⟨A, B⟩_σ = tr[σ^{1/2} A σ^{1/2} B] evaluated literally,
Var_σ(A) = ⟨A, A⟩_σ − tr[σA]², ℰ(A) = −⟨A, ℒ*(A)⟩_σ, and natural logarithms
for every entropy-type quantity.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.optimize

from .channels import Superoperator, unvec, vec
from .errors import DomainError, PreconditionError
from .lindblad import LindbladGenerator, has_unique_fixed_point, spectral_gap
from .operators import Operator, relative_entropy, schatten_norm

FULL_RANK_TOL = 1e-12


def _mat(x):
    return x.matrix if isinstance(x, Operator) else np.asarray(x, dtype=complex)


def _logm_pd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w.min() <= 0:
        raise DomainError("logarithm of a singular operator")
    return (v * np.log(w)) @ v.conj().T


def _require_hermitian(a: np.ndarray, tol: float = 1e-9):
    if not np.allclose(a, a.conj().T, atol=tol, rtol=0):
        raise DomainError("operator must be Hermitian")


class SigmaContext:
    """A full-rank state σ with cached fractional powers."""

    def __init__(self, sigma):
        m = _mat(sigma)
        m = (m + m.conj().T) / 2
        w, v = np.linalg.eigh(m)
        if w.min() <= FULL_RANK_TOL:
            raise DomainError(f"σ is not full rank (smallest eigenvalue {w.min():.2e})")
        if abs(w.sum() - 1) > 1e-8:
            raise DomainError("σ must have unit trace")
        self.fact = sigma.factorization if isinstance(sigma, Operator) else None
        self.matrix = m
        self.dim = m.shape[0]
        self._w, self._v = w, v
        self.sigma_min = float(w.min())
        self.log = (v * np.log(w)) @ v.conj().T
        self._lock = threading.Lock()
        self._powers: dict[float, np.ndarray] = {}
        for a in (0.5, 0.25, -0.5, -0.25):
            self.power(a)

    def power(self, a: float) -> np.ndarray:
        p = self._powers.get(a)
        if p is None:
            p = (self._v * self._w ** a) @ self._v.conj().T
            with self._lock:
                self._powers.setdefault(a, p)
        return p

    @property
    def half(self):
        return self.power(0.5)

    @property
    def quarter(self):
        return self.power(0.25)

    def gamma(self, a: float) -> np.ndarray:
        """Vectorized X ↦ σ^a X σ^a."""
        p = self.power(a)
        return np.kron(p.T, p)

    def sandwich(self, x, a: float = 0.5) -> np.ndarray:
        p = self.power(a)
        return p @ _mat(x) @ p


def weighted_inner(ctx: SigmaContext, a, b) -> complex:
    """tr[σ^{1/2} A σ^{1/2} B]."""
    return complex(np.trace(ctx.half @ _mat(a) @ ctx.half @ _mat(b)))


def weighted_norm(ctx: SigmaContext, a) -> float:
    return math.sqrt(max(weighted_inner(ctx, _mat(a).conj().T, a).real, 0.0))


def variance(ctx: SigmaContext, a) -> float:
    am = _mat(a)
    _require_hermitian(am)
    mean = np.trace(ctx.matrix @ am).real
    return float(weighted_inner(ctx, am, am).real - mean ** 2)


def _dual_apply(g: LindbladGenerator, a: np.ndarray) -> np.ndarray:
    return unvec(g.sparse.conj().T @ vec(a), g.dim)


def dirichlet(ctx: SigmaContext, g: LindbladGenerator, a) -> float:
    """ℰ(A) = −tr[σ^{1/2} A σ^{1/2} ℒ*(A)]."""
    am = _mat(a)
    _require_hermitian(am)
    return float(-weighted_inner(ctx, am, _dual_apply(g, am)).real)


@dataclass(frozen=True)
class DBVerdict:
    holds: bool
    defect: float
    tol: float

    def __bool__(self):
        return self.holds


def detailed_balance_check(ctx: SigmaContext, g: LindbladGenerator, tol: float = 1e-9) -> DBVerdict:
    """ℒ(σ^{1/2}Aσ^{1/2}) = σ^{1/2}ℒ*(A)σ^{1/2}, compared on the full matrix-unit basis."""
    lm = g.super.matrix
    gm = ctx.gamma(0.5)
    defect = float(np.abs(lm @ gm - gm @ lm.conj().T).max(initial=0.0))
    scale = max(1.0, float(np.abs(lm).max(initial=0.0)))
    return DBVerdict(defect <= tol * scale, defect, tol)


def _check_reversible(ctx: SigmaContext, g: LindbladGenerator):
    db = detailed_balance_check(ctx, g)
    if not db.holds:
        raise PreconditionError(f"detailed balance fails (defect {db.defect:.2e})")
    if not has_unique_fixed_point(g):
        raise PreconditionError("generator has no unique fixed point")
    resid = np.abs(g.sparse @ vec(ctx.matrix)).max()
    if resid > 1e-8:
        raise PreconditionError("σ is not the fixed point of the generator")


def variational_minimizer(ctx: SigmaContext, g: LindbladGenerator) -> tuple[float, np.ndarray]:
    """Minimum of ℰ(A)/Var_σ(A) and a Hermitian minimizer.

    Uses the Hermitian matrix of Y ↦ −σ^{1/4}ℒ*(σ^{-1/4}Yσ^{-1/4})σ^{1/4},
    restricted to the orthogonal complement of σ^{1/2} (the image of 𝟙).
    """
    _check_reversible(ctx, g)
    k = -(ctx.gamma(0.25) @ g.super.matrix.conj().T @ ctx.gamma(-0.25))
    k = (k + k.conj().T) / 2
    q = scipy.linalg.null_space(vec(ctx.half).conj()[None, :])
    w, u = np.linalg.eigh(q.conj().T @ k @ q)
    y = unvec(q @ u[:, 0], ctx.dim)
    a = ctx.sandwich(y, -0.25)
    herm = a + a.conj().T
    if np.linalg.norm(herm) < 1e-8 * np.linalg.norm(a):
        herm = 1j * (a - a.conj().T)
    return float(w[0]), herm


def variational_gap(ctx: SigmaContext, g: LindbladGenerator) -> float:
    return variational_minimizer(ctx, g)[0]


def regularize(rho, eps: float):
    """(1−ε)ρ + ε𝟙/d, for experiments that need an explicitly full-rank state."""
    m = _mat(rho)
    out = (1 - eps) * m + eps * np.eye(m.shape[0]) / m.shape[0]
    return Operator(out, rho.factorization) if isinstance(rho, Operator) else out


def entropy_production(ctx: SigmaContext, g: LindbladGenerator, rho) -> float:
    """K(ρ) = −(1/tr ρ) tr[ℒ(ρ)(log ρ − log σ)] for full-rank ρ."""
    m = _mat(rho)
    m = (m + m.conj().T) / 2
    if np.linalg.eigvalsh(m).min() <= FULL_RANK_TOL:
        raise DomainError("entropy production needs a full-rank state; regularize explicitly")
    lr = unvec(g.sparse @ vec(m), g.dim)
    return float(-np.trace(lr @ (_logm_pd(m) - ctx.log)).real / np.trace(m).real)


def _ratio(ctx, g, m):
    d = relative_entropy(m, ctx.matrix)
    if d <= 1e-14:
        return math.inf
    return entropy_production(ctx, g, m) / d


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    """Hilbert-Schmidt random density matrix."""
    gm = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = gm @ gm.conj().T
    return m / np.trace(m).real


def lsi_alpha1_estimate(ctx: SigmaContext, g: LindbladGenerator, restarts: int = 256, seed: int = 0) -> float:
    """Upper bound on α₁: min of K(ρ)/D(ρ‖σ) over sampled full-rank states.

    The samples are refined along the segment towards σ, where the ratio of
    many models attains its infimum.
    """
    _check_reversible(ctx, g)
    rng = np.random.default_rng(seed)
    best, best_m = math.inf, None
    for _ in range(restarts):
        m = random_state(rng, ctx.dim)
        r = _ratio(ctx, g, m)
        if r < best:
            best, best_m = r, m
    # line refinement from the best sample towards σ; closer than s = 1e-2 the
    # ratio is dominated by rounding in D(ρ‖σ) ~ s²
    for s in np.geomspace(1.0, 1e-2, 21):
        m = ctx.matrix + s * (best_m - ctx.matrix)
        best = min(best, _ratio(ctx, g, m))
    return float(best)


def alpha1_bloch_grid(ctx: SigmaContext, g: LindbladGenerator, n_dirs: int = 100, n_radii: int = 100,
                      r_min: float = 0.01, r_max: float = 0.99) -> float:
    """Qubit oracle: min of K/D over a 10⁴-state Bloch-ball grid around σ's Bloch vector."""
    from .channels import fibonacci_sphere
    from .operators import PAULIS

    if ctx.dim != 2:
        raise DomainError("Bloch-ball grid is for a single qubit")
    best = math.inf
    paulis = [PAULIS[k] for k in "XYZ"]
    for nvec in fibonacci_sphere(n_dirs):
        for r in np.linspace(r_min, r_max, n_radii):
            m = 0.5 * (np.eye(2) + r * sum(c * p for c, p in zip(nvec, paulis)))
            try:
                best = min(best, _ratio(ctx, g, m))
            except DomainError:
                continue
    return float(best)


def lp_sigma_norm(ctx: SigmaContext, x, p: float) -> float:
    """‖X‖_{p,σ} = ‖σ^{1/(2p)} X σ^{1/(2p)}‖_p."""
    if p < 1:
        raise DomainError("p must be at least 1")
    if math.isinf(p):
        return schatten_norm(_mat(x), math.inf)
    return schatten_norm(ctx.sandwich(x, 1.0 / (2 * p)), p)


def hyper_norm(ctx: SigmaContext, s: Superoperator, p: float, q: float, restarts: int = 16,
               seed: int = 0) -> float:
    """Lower bound on ‖s‖_{(p,σ)→(q,σ)} by quasi-Newton ascent over X ≠ 0."""
    if p < 1 or q < 1:
        raise DomainError("p and q must be at least 1")
    d = ctx.dim
    m = s.matrix

    def unpack(z):
        return (z[: d * d] + 1j * z[d * d:]).reshape(d, d)

    def ratio(xm):
        den = lp_sigma_norm(ctx, xm, p)
        if den <= 1e-14:
            return 0.0
        return lp_sigma_norm(ctx, unvec(m @ vec(xm), d), q) / den

    rng = np.random.default_rng(seed)
    starts = [np.concatenate([np.eye(d).reshape(-1), np.zeros(d * d)])]
    starts += [rng.normal(size=2 * d * d) for _ in range(restarts)]
    best = 0.0
    for z0 in starts:
        best = max(best, ratio(unpack(z0)))
        res = scipy.optimize.minimize(lambda z: -ratio(unpack(z)), z0, method="L-BFGS-B",
                                      options={"maxiter": 200})
        best = max(best, -float(res.fun))
    return best


class Ent2Result(NamedTuple):
    ent1: float
    ent2: float
    dirichlet1: float
    regularity_defect: float


def i12(ctx: SigmaContext, a) -> np.ndarray:
    """I₁,₂(A) = σ^{-1/4} A σ^{1/2} A σ^{-1/4}."""
    am = _mat(a)
    return ctx.power(-0.25) @ am @ ctx.half @ am @ ctx.power(-0.25)


def ent1(ctx: SigmaContext, b) -> float:
    """Ent₁(B) = tr[ρ_B(log ρ_B − log σ)] − tr ρ_B log tr ρ_B with ρ_B = σ^{1/2}Bσ^{1/2}.

    Homogeneous of degree one in B; equals D(ρ‖σ) at B = σ^{-1/2}ρσ^{-1/2}.
    """
    rb = ctx.sandwich(b)
    rb = (rb + rb.conj().T) / 2
    tr = np.trace(rb).real
    return float(np.trace(rb @ (_logm_pd(rb) - ctx.log)).real - tr * math.log(tr))


def dirichlet1(ctx: SigmaContext, g: LindbladGenerator, b) -> float:
    """ℰ₁(B) = −tr[ℒ(ρ_B)(log ρ_B − log σ)], the unnormalized entropy production of ρ_B."""
    rb = ctx.sandwich(b)
    rb = (rb + rb.conj().T) / 2
    lr = unvec(g.sparse @ vec(rb), g.dim)
    return float(-np.trace(lr @ (_logm_pd(rb) - ctx.log)).real)


def ent2_and_regularity(ctx: SigmaContext, g: LindbladGenerator, a) -> Ent2Result:
    am = _mat(a)
    _require_hermitian(am)
    if np.linalg.eigvalsh((am + am.conj().T) / 2).min() <= FULL_RANK_TOL:
        raise DomainError("A must be positive definite")
    b = i12(ctx, am)
    e1 = ent1(ctx, am)
    e2 = ent1(ctx, b)
    d1 = dirichlet1(ctx, g, b)
    return Ent2Result(e1, e2, d1, dirichlet(ctx, g, am) - d1)


def functional_report(ctx: SigmaContext, g: LindbladGenerator, seed: int = 0, samples: int = 100) -> dict:
    """gap_eigen, gap_variational, alpha1_upper, db_defect and regularity_max_defect."""
    db = detailed_balance_check(ctx, g)
    out = {"gap_eigen": spectral_gap(g), "db_defect": db.defect, "gap_variational": None,
           "alpha1_upper": None, "regularity_max_defect": None}
    if not db.holds:
        return out
    out["gap_variational"] = variational_gap(ctx, g)
    out["alpha1_upper"] = lsi_alpha1_estimate(ctx, g, seed=seed)
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(samples):
        a = random_state(rng, ctx.dim) * ctx.dim + 1e-3 * np.eye(ctx.dim)
        worst = max(worst, ent2_and_regularity(ctx, g, a).regularity_defect)
    out["regularity_max_defect"] = worst
    return out
