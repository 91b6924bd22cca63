"""Finite boxes of Z^D, uniform Lindbladian families and the built-in model catalog.

A uniform family is a size-independent rule: a bulk term M_Z for finite sets
Z of lattice sites, plus a boundary rule that, given a box Λ, produces extra
terms living near the edge of Λ.  ``instantiate`` turns a family and a box into
a :class:`~lindbench.lindblad.LindbladGenerator`, either with the bulk terms
alone ("open") or with the boundary terms added ("closed").
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .channels import diamond_upper
from .errors import DimensionCapError, DomainError, SupportError
from .lindblad import EVOLUTION_DIM_CAP, LindbladGenerator, fixed_point
from .operators import X, Y, Z, Operator, SiteFactorization, embed, trace_norm

Site = tuple


# --- geometry --------------------------------------------------------------------------


class LatticeGeometry:
    """A finite set of sites of Z^D with the graph (L1) metric.

    Sites are coordinate tuples kept in lexicographic order, which fixes the
    Kronecker order of every operator built on the box.
    """

    def __init__(self, sites: Iterable[Sequence[int]], dimension: int | None = None):
        pts = sorted({tuple(int(c) for c in s) for s in sites})
        if not pts:
            raise DomainError("a lattice box needs at least one site")
        dims = {len(p) for p in pts}
        if len(dims) != 1:
            raise DomainError("sites of mixed dimension")
        self.dimension = dims.pop() if dimension is None else dimension
        if any(len(p) != self.dimension for p in pts):
            raise DomainError("site dimension does not match the lattice dimension")
        self.sites: tuple[Site, ...] = tuple(pts)
        self._set = frozenset(pts)
        # sites with at least one lattice neighbour outside the box
        self._edge = tuple(x for x in pts if any(y not in self._set for y in self.lattice_neighbors(x)))

    @classmethod
    def box(cls, extents: Sequence[int], origin: Sequence[int] | None = None) -> "LatticeGeometry":
        extents = tuple(int(e) for e in extents)
        if any(e < 1 for e in extents):
            raise DomainError("box extents must be positive")
        origin = tuple(origin) if origin is not None else (0,) * len(extents)
        ranges = [range(o, o + e) for o, e in zip(origin, extents)]
        return cls(itertools.product(*ranges), len(extents))

    @classmethod
    def chain(cls, n: int, origin: int = 0) -> "LatticeGeometry":
        return cls.box((n,), (origin,))

    def __len__(self):
        return len(self.sites)

    def __contains__(self, x):
        return tuple(x) in self._set

    def __eq__(self, other):
        return isinstance(other, LatticeGeometry) and self.sites == other.sites

    def __hash__(self):
        return hash(self.sites)

    def __repr__(self):
        return f"LatticeGeometry({len(self.sites)} sites, D={self.dimension})"

    @property
    def extents(self) -> tuple[int, ...]:
        return tuple(max(p[i] for p in self.sites) - min(p[i] for p in self.sites) + 1
                     for i in range(self.dimension))

    @property
    def lower(self) -> tuple[int, ...]:
        return tuple(min(p[i] for p in self.sites) for i in range(self.dimension))

    @staticmethod
    def dist(x: Site, y: Site) -> int:
        return sum(abs(a - b) for a, b in zip(x, y))

    def lattice_neighbors(self, x: Site) -> list[Site]:
        """Nearest neighbours of x in Z^D (not restricted to the box)."""
        out = []
        for i in range(self.dimension):
            for step in (-1, 1):
                y = list(x)
                y[i] += step
                out.append(tuple(y))
        return out

    def neighbors(self, x: Site) -> list[Site]:
        return [y for y in self.lattice_neighbors(x) if y in self._set]

    def ball(self, x: Site, r: float) -> tuple[Site, ...]:
        return tuple(y for y in self.sites if self.dist(x, y) <= r)

    def full_ball(self, x: Site, r: int = 1) -> frozenset:
        """The radius-r ball around x in Z^D, ignoring the box."""
        rng = range(-r, r + 1)
        pts = set()
        for off in itertools.product(rng, repeat=self.dimension):
            if sum(abs(o) for o in off) <= r:
                pts.add(tuple(a + b for a, b in zip(x, off)))
        return frozenset(pts)

    def diam(self, sites: Iterable[Site]) -> int:
        pts = list(sites)
        return max((self.dist(a, b) for a, b in itertools.combinations(pts, 2)), default=0)

    def dist_to_complement(self, x: Site) -> int:
        """dist(x, Z^D∖Λ); a site with an outside neighbour sits at distance 1."""
        return 1 + min(self.dist(x, y) for y in self._edge)

    def boundary_shell(self, d: int) -> tuple[Site, ...]:
        """∂_d Λ = sites at distance at most d from the complement."""
        return tuple(x for x in self.sites if self.dist_to_complement(x) <= d)

    def region_distance(self, a: Iterable[Site], b: Iterable[Site]) -> int:
        return min(self.dist(x, y) for x in a for y in b)

    def fattening(self, region: Iterable[Site], s: int) -> tuple[Site, ...]:
        """A(s): the sites of Λ within distance s of the region."""
        reg = [tuple(x) for x in region]
        return tuple(y for y in self.sites if min(self.dist(x, y) for x in reg) <= s)

    def sub(self, region: Iterable[Site]) -> "LatticeGeometry":
        return LatticeGeometry(region, self.dimension)

    def factorization(self, d: int = 2) -> SiteFactorization:
        return SiteFactorization.uniform(self.sites, d)

    def boundary_size(self, region: Iterable[Site]) -> int:
        """|∂A|: sites of A adjacent to Λ∖A."""
        reg = {tuple(x) for x in region}
        return sum(1 for x in reg if any(y in self._set and y not in reg for y in self.lattice_neighbors(x)))


# --- decay functions -------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFunction:
    """ν(r) = e^{μr} (``kind='exp'``) or (1+r)^μ (``kind='poly'``)."""

    kind: str = "exp"
    mu: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp", "poly"):
            raise DomainError(f"unknown decay kind {self.kind!r}")
        if self.mu < 0:
            raise DomainError("decay parameter must be non-negative")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.exp(self.mu * r) if self.kind == "exp" else (1.0 + r) ** self.mu
        return float(out) if out.ndim == 0 else out

    def inverse(self, r):
        return 1.0 / self(r)


# --- local terms -----------------------------------------------------------------------


@dataclass(frozen=True)
class LocalTerm:
    """A Lindbladian piece (H_Z, {L_j}) acting on the ordered sites of its support."""

    sites: tuple
    hamiltonian: np.ndarray
    jumps: tuple = ()
    local_dim: int = 2
    label: str = ""

    @property
    def factorization(self) -> SiteFactorization:
        return SiteFactorization.uniform(self.sites, self.local_dim)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.hamiltonian) and all(not np.any(j) for j in self.jumps)

    def generator(self) -> LindbladGenerator:
        fact = self.factorization
        return LindbladGenerator(Operator(self.hamiltonian, fact),
                                 [Operator(j, fact) for j in self.jumps])

    def scaled(self, c: float) -> "LocalTerm":
        """The term multiplied by c ≥ 0 as a superoperator."""
        if c < 0:
            raise DomainError("Lindblad terms can only be scaled by non-negative numbers")
        return LocalTerm(self.sites, c * self.hamiltonian, tuple(math.sqrt(c) * j for j in self.jumps),
                         self.local_dim, self.label)

    def embedded(self, fact: SiteFactorization) -> tuple[Operator, list[Operator]]:
        loc = self.factorization
        if not set(self.sites) <= set(fact.site_ids):
            raise SupportError(f"term support {self.sites} escapes the box")
        h = embed(Operator(self.hamiltonian, loc), fact)
        return h, [embed(Operator(j, loc), fact) for j in self.jumps]


_DIAMOND_CACHE: dict = {}


def term_diamond_upper(term: LocalTerm) -> float:
    """Certified upper bound on ‖M_Z‖_⋄, cached by the term's matrices."""
    key = (term.local_dim, len(term.sites), term.hamiltonian.tobytes(),
           tuple(j.tobytes() for j in term.jumps))
    val = _DIAMOND_CACHE.get(key)
    if val is None:
        val = 0.0 if term.is_zero else diamond_upper(term.generator().super)
        _DIAMOND_CACHE[key] = val
    return val


def _local_op(fact_sites: Sequence, placements: dict, d: int = 2) -> np.ndarray:
    """⊗ over ``fact_sites`` of ``placements.get(site, 𝟙)``."""
    out = np.ones((1, 1), dtype=complex)
    for s in fact_sites:
        out = np.kron(out, placements.get(s, np.eye(d)))
    return out


# --- uniform families ------------------------------------------------------------------


BulkRule = Callable[[frozenset], Optional[LocalTerm]]
BoundaryRule = Callable[[LatticeGeometry], Sequence[LocalTerm]]


@dataclass
class UniformFamily:
    """Bulk rule M_Z, boundary rule and decay descriptor ν.

    ``bulk_rule(Z)`` returns the term for the finite site set Z, or ``None``
    when M_Z = 0.  ``boundary_rule(geom)`` returns every boundary piece for the
    box; they are binned into B_d by their depth (the largest distance to the
    complement over the piece's support).  ``supports(geom)`` may list the
    candidate sets Z ⊂ Λ; by default every subset of diameter at most
    ``range`` is tried.
    """

    name: str
    bulk_rule: BulkRule
    boundary_rule: Optional[BoundaryRule] = None
    nu: DecayFunction = field(default_factory=DecayFunction)
    range: int = 1
    local_dim: int = 2
    params: dict = field(default_factory=dict)
    supports: Optional[Callable[[LatticeGeometry], Iterable[frozenset]]] = None
    translation_invariant: bool = True

    def candidate_supports(self, geom: LatticeGeometry) -> list[frozenset]:
        if self.supports is not None:
            return [frozenset(z) for z in self.supports(geom)]
        out = []
        for x in geom.sites:
            near = [y for y in geom.ball(x, self.range) if y > x]
            for k in range(len(near) + 1):
                for rest in itertools.combinations(near, k):
                    z = frozenset((x,) + rest)
                    if geom.diam(z) <= self.range:
                        out.append(z)
        return out

    def bulk_terms(self, geom: LatticeGeometry) -> list[tuple[frozenset, LocalTerm]]:
        out = []
        for z in self.candidate_supports(geom):
            if not all(x in geom for x in z):
                continue
            term = self.bulk_rule(z)
            if term is None or term.is_zero:
                continue
            if not set(term.sites) <= z:
                raise SupportError(f"bulk term for {sorted(z)} acts on {term.sites}")
            out.append((z, term))
        return out

    def boundary_pieces(self, geom: LatticeGeometry) -> list[tuple[int, LocalTerm]]:
        if self.boundary_rule is None:
            return []
        out = []
        for term in self.boundary_rule(geom):
            if term.is_zero:
                continue
            if not all(x in geom for x in term.sites):
                raise SupportError(f"boundary term on {term.sites} escapes the box")
            depth = max(geom.dist_to_complement(x) for x in term.sites)
            out.append((depth, term))
        return out

    def boundary_term(self, geom: LatticeGeometry, d: int) -> list[LocalTerm]:
        """The pieces of B_d^{∂Λ}; their supports lie in ∂_d Λ by construction."""
        return [t for depth, t in self.boundary_pieces(geom) if depth == d]

    @property
    def has_boundary(self) -> bool:
        return self.boundary_rule is not None


def family_terms(f: UniformFamily, geom: LatticeGeometry, mode: str = "closed") -> list[LocalTerm]:
    if mode not in ("open", "closed"):
        raise DomainError(f"mode must be 'open' or 'closed', got {mode!r}")
    terms = [t for _, t in f.bulk_terms(geom)]
    if mode == "closed":
        terms += [t for _, t in f.boundary_pieces(geom)]
    return terms


def assemble(terms: Sequence[LocalTerm], fact: SiteFactorization) -> LindbladGenerator:
    h = np.zeros((fact.dim, fact.dim), dtype=complex)
    jumps: list[Operator] = []
    for t in terms:
        ht, js = t.embedded(fact)
        h = h + ht.matrix
        jumps.extend(js)
    return LindbladGenerator(Operator(h, fact), jumps)


def instantiate(f: UniformFamily, geom: LatticeGeometry, mode: str = "closed") -> LindbladGenerator:
    """ℒ^Λ = Σ_{Z⊂Λ} M_Z (open) or ℒ^Λ + Σ_d B_d^{∂Λ} (closed)."""
    dim = f.local_dim ** len(geom)
    if dim > EVOLUTION_DIM_CAP:
        raise DimensionCapError(f"box of {len(geom)} sites exceeds the dimension cap {EVOLUTION_DIM_CAP}")
    return assemble(family_terms(f, geom, mode), geom.factorization(f.local_dim))


# --- assumption checks -----------------------------------------------------------------


@dataclass
class AssumptionReport:
    v: float  # interaction sum ν-weighted over supports, max over sites of the box
    v_site: Site
    a2_lhs: dict  # r -> ν(r) Σ_{d≥r} ‖B_d‖_⋄
    c: float
    b: float
    passed: bool
    sizes: list = field(default_factory=list)
    v_by_size: list = field(default_factory=list)
    growth_exponent: float = 0.0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"v": self.v, "v_site": list(self.v_site), "a2_lhs": {str(k): v for k, v in self.a2_lhs.items()},
                "c": self.c, "b": self.b, "pass": self.passed, "sizes": self.sizes,
                "v_by_size": self.v_by_size, "growth_exponent": self.growth_exponent,
                "notes": self.notes}


def _single_box(f: UniformFamily, geom: LatticeGeometry):
    per_site = {x: 0.0 for x in geom.sites}
    for z, term in f.bulk_terms(geom):
        w = term_diamond_upper(term) * len(z) * f.nu(geom.diam(z))
        for x in z:
            per_site[x] += w
    x_best = max(geom.sites, key=lambda x: (per_site[x], x))
    bd: dict[int, float] = {}
    for depth, term in f.boundary_pieces(geom):
        # triangle inequality keeps the bound certified without forming B_d on its full support
        bd[depth] = bd.get(depth, 0.0) + term_diamond_upper(term)
    dmax = max((geom.dist_to_complement(x) for x in geom.sites), default=1)
    a2 = {r: f.nu(r) * sum(v for d, v in bd.items() if d >= r) for r in range(1, dmax + 1)}
    return per_site[x_best], x_best, a2


def _loglog_slope(xs, ys) -> float:
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    ok = ys > 0
    if ok.sum() < 2:
        return 0.0
    return float(np.polyfit(np.log(xs[ok]), np.log(ys[ok]), 1)[0])


FINITE_RANGE_LIMIT = 10 ** 6  # ranges at or above this are treated as unbounded


def check_assumptions(f: UniformFamily, geom: LatticeGeometry | Sequence[LatticeGeometry],
                      growth_limit: float = 0.5) -> AssumptionReport:
    """Evaluate the interaction and boundary sums on one box, or across several with a growth fit.

    On a single finite box both sums are finite, so the verdict only records
    them.  With several boxes, a log-log growth exponent of v above
    ``growth_limit`` is read as a divergent interaction sum and flagged as a failure.
    For finite-range families the exponent is fitted only on boxes of side at
    least 2·range + 1, where the per-site sum has stopped filling in.  The boundary-sum maxima are fitted to c·N^b with N = |Λ|.
    """
    geoms = [geom] if isinstance(geom, LatticeGeometry) else list(geom)
    vs, sites_best, a2s = [], [], []
    for gm in geoms:
        v, xb, a2 = _single_box(f, gm)
        vs.append(v)
        sites_best.append(xb)
        a2s.append(a2)
    sizes = [len(gm) for gm in geoms]
    notes = []
    a2_max = [max(a2.values(), default=0.0) for a2 in a2s]
    if len(geoms) == 1:
        exponent, c, b = 0.0, a2_max[0], 0.0
        passed = math.isfinite(vs[0])
        notes.append("single box: finite sums only, no infinite-volume claim")
    else:
        # With a finite declared range the per-site sum saturates once the box
        # holds a full ball b_x(range); smaller boxes only show the fill-in.
        if f.range < FINITE_RANGE_LIMIT:
            side = 2 * f.range + 1
            full = [i for i, gm in enumerate(geoms) if min(gm.extents) >= side]
            if len(full) >= 2:
                exponent = _loglog_slope([sizes[i] for i in full], [vs[i] for i in full])
            else:
                probe = LatticeGeometry.box((side,) * geoms[0].dimension)
                exponent = 0.0
                notes.append(f"finite range {f.range}: per-site sum saturates at "
                             f"v = {_single_box(f, probe)[0]:.6g} on a box of side {side}")
        else:
            exponent = _loglog_slope(sizes, vs)
        if all(a == 0 for a in a2_max):
            c, b = 0.0, 0.0
        else:
            pos = [(n, a) for n, a in zip(sizes, a2_max) if a > 0]
            b = max(0.0, _loglog_slope(*zip(*pos))) if len(pos) >= 2 else 0.0
            c = max(a / n ** b for n, a in pos)
        passed = exponent <= growth_limit
        if not passed:
            notes.append(f"interaction sum grows with the box (log-log exponent {exponent:.3f})")
    return AssumptionReport(vs[-1], sites_best[-1], a2s[-1], c, b, passed, sizes, vs, exponent, notes)


# --- frustration freeness --------------------------------------------------------------


@dataclass
class FFVerdict:
    frustration_free: bool
    violators: list  # (sorted Z, ‖M_Z(ρ∞)‖₁)
    tol: float

    def __bool__(self):
        return self.frustration_free


def check_frustration_free(f: UniformFamily, geom: LatticeGeometry, tol: float = 1e-8) -> FFVerdict:
    """Every bulk term annihilates the fixed point of the closed instantiation."""
    bulk = f.bulk_terms(geom)
    if not bulk:
        return FFVerdict(True, [], tol)
    rho = fixed_point(instantiate(f, geom, "closed"))
    fact = rho.factorization
    bad = []
    for z, term in bulk:
        g = assemble([term], fact)
        val = trace_norm(g(rho).matrix)
        if val > tol:
            bad.append((sorted(z), val))
    return FFVerdict(not bad, bad, tol)


# --- built-in catalog ------------------------------------------------------------------


SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0⟩⟨1|
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)


def _positive(params: dict, *names):
    for n in names:
        if n in params and not (params[n] > 0):
            raise DomainError(f"parameter {n} must be positive, got {params[n]}")


def _single_site(jumps_of: Callable[[], list[np.ndarray]]):
    def rule(z: frozenset):
        if len(z) != 1:
            return None
        (x,) = tuple(z)
        return LocalTerm((x,), np.zeros((2, 2), dtype=complex), tuple(jumps_of()))
    return rule


def _singletons(geom: LatticeGeometry):
    return [frozenset([x]) for x in geom.sites]


def independent_depolarizing(gamma: float = 1.0) -> UniformFamily:
    _positive({"gamma": gamma}, "gamma")
    k = math.sqrt(gamma / 4)
    return UniformFamily("independent_depolarizing", _single_site(lambda: [k * X, k * Y, k * Z]),
                         None, DecayFunction("exp", 1.0), 0, params={"gamma": gamma}, supports=_singletons)


def independent_amplitude_damping(gamma: float = 1.0) -> UniformFamily:
    _positive({"gamma": gamma}, "gamma")
    return UniformFamily("independent_amplitude_damping",
                         _single_site(lambda: [math.sqrt(gamma) * SIGMA_MINUS]),
                         None, DecayFunction("exp", 1.0), 0, params={"gamma": gamma}, supports=_singletons)


def _centre_of(z: frozenset, dimension: int) -> Optional[Site]:
    """The site x whose full radius-1 ball in Z^D is z, if any."""
    if len(z) != 2 * dimension + 1:
        return None
    for x in z:
        probe = LatticeGeometry([x], dimension)
        if probe.full_ball(x, 1) == z:
            return x
    return None


def _glauber_term(x: Site, nbrs: Sequence[Site], J, h, beta, gamma, g) -> LocalTerm:
    """Heat-bath flips of x given its neighbour multiset (basis |0⟩ ↔ s = +1)."""
    nbrs = [y for y in nbrs if y != x]  # a self-coupling only shifts the energy
    distinct = sorted(set(nbrs))
    sites = tuple(sorted(set(distinct) | {x}))
    mult = {y: nbrs.count(y) for y in distinct}
    jumps = []
    flip = {1: SIGMA_MINUS.conj().T, -1: SIGMA_MINUS}  # s=+1 (|0⟩) -> |1⟩, s=-1 -> |0⟩
    for config in itertools.product((1, -1), repeat=len(distinct)):
        local_field = J * sum(mult[y] * s for y, s in zip(distinct, config)) + h
        proj = {y: (P0 if s == 1 else P1) for y, s in zip(distinct, config)}
        for s in (1, -1):
            de = 2 * s * local_field
            rate = gamma / (1.0 + math.exp(min(beta * de, 700.0)))
            if rate <= 0:
                continue
            jumps.append(math.sqrt(rate) * _local_op(sites, {**proj, x: flip[s]}))
    ham = _local_op(sites, {x: -g * X}) if g else np.zeros((2 ** len(sites),) * 2, dtype=complex)
    return LocalTerm(sites, ham, tuple(jumps), label=f"flip{x}")


def _periodic_neighbors(geom: LatticeGeometry, x: Site) -> list[Site]:
    lo, ext = geom.lower, geom.extents
    out = []
    for y in geom.lattice_neighbors(x):
        out.append(tuple(lo[i] + (y[i] - lo[i]) % ext[i] for i in range(geom.dimension)))
    return out


def _ball_supports(geom: LatticeGeometry):
    out = []
    for x in geom.sites:
        z = geom.full_ball(x, 1)
        if all(y in geom for y in z):
            out.append(z)
    return out


def _edge_sites(geom: LatticeGeometry) -> list[Site]:
    return [x for x in geom.sites if not all(y in geom for y in geom.full_ball(x, 1))]


def dissipative_ising(J: float = 1.0, h: float = 0.0, beta: float = 1.0, gamma: float = 1.0,
                      g: float = 0.0, boundary: str = "periodic") -> UniformFamily:
    """Glauber (heat-bath) spin flips with rates set by the neighbouring spins.

    M_Z is nonzero only when Z is a full radius-1 ball around a site x; it flips
    x at rate γ/(1+e^{βΔE}) where ΔE is the Ising energy change.  A transverse
    field g adds -gX_x to the same term.  ``boundary='periodic'`` gives each
    edge site the flip term with wrapped neighbours; ``'none'`` is the zero
    boundary rule.
    """
    _positive({"gamma": gamma, "beta": beta}, "gamma")
    if beta < 0:
        raise DomainError("inverse temperature must be non-negative")
    if boundary not in ("periodic", "none"):
        raise DomainError(f"unknown boundary rule {boundary!r}")

    def bulk(z: frozenset):
        dim = len(next(iter(z)))
        x = _centre_of(z, dim)
        if x is None:
            return None
        return _glauber_term(x, sorted(z - {x}), J, h, beta, gamma, g)

    def periodic(geom: LatticeGeometry):
        return [_glauber_term(x, _periodic_neighbors(geom, x), J, h, beta, gamma, g)
                for x in _edge_sites(geom)]

    return UniformFamily("dissipative_ising", bulk, periodic if boundary == "periodic" else None,
                         DecayFunction("exp", 1.0), 2,
                         params={"J": J, "h": h, "beta": beta, "gamma": gamma, "g": g, "boundary": boundary},
                         supports=_ball_supports)


def _graph_term(x: Site, nbrs: Sequence[Site], gamma: float) -> LocalTerm:
    sites = tuple(sorted(set(nbrs) | {x}))
    stab = _local_op(sites, {x: X, **{y: Z for y in nbrs}})
    op = _local_op(sites, {x: Z}) @ (np.eye(stab.shape[0]) - stab) / 2
    return LocalTerm(sites, np.zeros_like(stab), (math.sqrt(gamma) * op,), label=f"pump{x}")


def graph_state_prep(gamma: float = 1.0, boundary: str = "open_graph") -> UniformFamily:
    """Dissipative preparation of the graph state of the box's nearest-neighbour graph.

    The jump Z_a(𝟙 − K_a)/2 with stabilizer K_a = X_a ∏_{b~a} Z_b maps the −1
    eigenspace of K_a onto the +1 eigenspace.  Bulk terms use the full
    neighbourhood; the boundary rule supplies the edge vertices with their
    in-box neighbours so the closed fixed point is the box's graph state.
    """
    _positive({"gamma": gamma}, "gamma")
    if boundary not in ("open_graph", "none"):
        raise DomainError(f"unknown boundary rule {boundary!r}")

    def bulk(z: frozenset):
        dim = len(next(iter(z)))
        x = _centre_of(z, dim)
        if x is None:
            return None
        return _graph_term(x, sorted(z - {x}), gamma)

    def edges(geom: LatticeGeometry):
        return [_graph_term(x, geom.neighbors(x), gamma) for x in _edge_sites(geom)]

    return UniformFamily("graph_state_prep", bulk, edges if boundary == "open_graph" else None,
                         DecayFunction("exp", 1.0), 2, params={"gamma": gamma, "boundary": boundary},
                         supports=_ball_supports)


def power_law_pairs(alpha: float = 2.0, gamma: float = 1.0, mu: float = 3.0) -> UniformFamily:
    """Two-site dephasing couplings of every pair with strength ∝ dist^{-α}.

    Not part of the catalog; it is the standard example of a family whose
    interaction sum diverges with polynomial ν(r) = (1+r)^μ when μ > α − 1 in D = 1.
    """
    zz = np.kron(Z, Z)

    def bulk(z: frozenset):
        if len(z) != 2:
            return None
        a, b = sorted(z)
        r = LatticeGeometry.dist(a, b)
        return LocalTerm((a, b), np.zeros((4, 4), dtype=complex),
                         (math.sqrt(gamma * r ** -alpha / 2) * zz,))

    def pairs(geom: LatticeGeometry):
        return [frozenset(p) for p in itertools.combinations(geom.sites, 2)]

    return UniformFamily("power_law_pairs", bulk, None, DecayFunction("poly", mu), 10 ** 9,
                         params={"alpha": alpha, "gamma": gamma, "mu": mu}, supports=pairs)


def zero_family() -> UniformFamily:
    return UniformFamily("zero", lambda z: None, None, DecayFunction("exp", 1.0), 0, supports=_singletons)


CATALOG = {
    "independent_depolarizing": independent_depolarizing,
    "independent_amplitude_damping": independent_amplitude_damping,
    "dissipative_ising": dissipative_ising,
    "graph_state_prep": graph_state_prep,
}

CATALOG_DOCS = {
    "independent_depolarizing": "single-site depolarizing at rate gamma; fixed point 1/2^n",
    "independent_amplitude_damping": "single-site decay |1> -> |0> at rate gamma; fixed point |0...0>",
    "dissipative_ising": "Glauber heat-bath spin flips (J, h, beta, gamma, transverse field g); periodic or zero boundary",
    "graph_state_prep": "stabilizer pumping towards the nearest-neighbour graph state (gamma)",
}


def builtin(name: str, **params) -> UniformFamily:
    if name not in CATALOG:
        raise DomainError(f"unknown model {name!r}; available: {sorted(CATALOG)}")
    try:
        return CATALOG[name](**params)
    except TypeError as exc:
        raise DomainError(f"invalid parameters for {name}: {exc}") from None


def graph_adjacency(geom: LatticeGeometry) -> np.ndarray:
    n = len(geom)
    idx = {x: i for i, x in enumerate(geom.sites)}
    adj = np.zeros((n, n), dtype=int)
    for x in geom.sites:
        for y in geom.neighbors(x):
            adj[idx[x], idx[y]] = 1
    return adj


def graph_state_vector(geom: LatticeGeometry) -> np.ndarray:
    """|G⟩ = ∏_{edges} CZ |+⟩^{⊗n} in the box's Kronecker order."""
    n = len(geom)
    adj = graph_adjacency(geom)
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    phase = np.einsum("ki,ij,kj->k", bits, np.triu(adj), bits) % 2
    return (1 - 2 * phase) / math.sqrt(2 ** n)
