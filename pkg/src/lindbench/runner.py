"""Run configurations: parsing, analyzer registry and dependency-ordered execution.

A run file is TOML::

    seed = 7
    boxes = [2, 3]            # chain lengths, or extents such as [2, 2]
    mode = "closed"           # boundary mode used for instantiation

    [model]
    name = "independent_depolarizing"
    params = { gamma = 1.0 }

    [[analyses]]
    id = "gap"

    [[analyses]]
    id = "mixing_time"
    eps = 0.01

Each ``[[analyses]]`` table may carry options for that analyzer; a bare
string in ``analyses = ["gap", ...]`` is accepted too.  ``output_dir`` and
``regressions`` (path of a regression-target file) are optional.
"""
from __future__ import annotations

import math
import re
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from graphlib import TopologicalSorter
from pathlib import Path
from typing import Callable

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import bench, correlations, lattice, mixing, sigma
from .channels import is_cptp
from .errors import ConfigError, DimensionCapError, FixedPointError, LindbenchError, PreconditionError
from .lattice import LatticeGeometry, builtin, instantiate
from .lindblad import (SPECTRAL_DIM_CAP, evolve, fixed_point, has_unique_fixed_point, propagator,
                       spectral_gap)
from .operators import Operator, Z, trace_norm, vn_entropy
from .reports import AnalysisReport, Curve, dumps, to_jsonable


# --- configuration -------------------------------------------------------------------------


@dataclass
class AnalysisSpec:
    id: str
    options: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    model: str
    params: dict
    boxes: list
    mode: str = "closed"
    analyses: list = field(default_factory=list)
    seed: int = 0
    output_dir: str = "lindbench-out"
    regressions: str | None = None
    source: str = ""

    def geometries(self) -> list[LatticeGeometry]:
        out = []
        for b in self.boxes:
            out.append(LatticeGeometry.chain(int(b)) if isinstance(b, int) else LatticeGeometry.box(b))
        return out

    def snapshot(self) -> dict:
        return {"model": self.model, "params": self.params, "boxes": self.boxes, "mode": self.mode,
                "analyses": [{"id": a.id, **a.options} for a in self.analyses], "seed": self.seed}


def _line_of(text: str, needle: str) -> int | None:
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _err(text: str, msg: str, needle: str | None = None) -> ConfigError:
    line = _line_of(text, needle) if needle else None
    return ConfigError(f"line {line}: {msg}" if line else msg)


def parse_config(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        line = m.group(1) if m else max(1, len(text.splitlines()))  # "at end of document"
        raise ConfigError(f"line {line}: invalid TOML: {exc}") from None
    model = data.get("model")
    if not isinstance(model, dict) or "name" not in model:
        raise _err(text, "missing [model] table with a name", "model")
    if model["name"] not in lattice.CATALOG:
        raise _err(text, f"unknown model {model['name']!r}", str(model["name"]))
    params = dict(model.get("params", {}))
    try:
        builtin(model["name"], **params)
    except LindbenchError as exc:
        raise _err(text, str(exc), "params") from None
    boxes = data.get("boxes", [1])
    if not isinstance(boxes, list) or not boxes:
        raise _err(text, "boxes must be a non-empty list", "boxes")
    for b in boxes:
        ok = (isinstance(b, int) and b >= 1) or (isinstance(b, list) and b and all(isinstance(e, int) and e >= 1 for e in b))
        if not ok:
            raise _err(text, f"invalid box {b!r}", "boxes")
    mode = data.get("mode", "closed")
    if mode not in ("open", "closed"):
        raise _err(text, f"mode must be 'open' or 'closed', got {mode!r}", "mode")
    specs = []
    for item in data.get("analyses", []):
        if isinstance(item, str):
            spec = AnalysisSpec(item)
        elif isinstance(item, dict) and "id" in item:
            spec = AnalysisSpec(item["id"], {k: v for k, v in item.items() if k != "id"})
        else:
            raise _err(text, f"analysis entry {item!r} needs an id", "analyses")
        if spec.id not in ANALYZERS:
            raise _err(text, f"unknown analysis id {spec.id!r}", f'"{spec.id}"')
        specs.append(spec)
    if not specs:
        raise _err(text, "no analyses requested", "analyses")
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise _err(text, "seed must be an integer", "seed")
    return RunConfig(model["name"], params, boxes, mode, specs, seed, data.get("output_dir", "lindbench-out"),
                     data.get("regressions"), text)


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())


# --- analyzers ---------------------------------------------------------------------------


class Skip(Exception):
    """Raised by an analyzer whose preconditions do not hold."""


@dataclass
class Context:
    config: RunConfig
    family: lattice.UniformFamily
    geoms: list
    options: dict
    seed: int
    tol_scale: float
    results: dict
    curves: list

    def tol(self, value: float) -> float:
        return value * self.tol_scale

    def generator(self, geom):
        return instantiate(self.family, geom, self.config.mode)


@dataclass
class Analyzer:
    fn: Callable[[Context], dict]
    deps: tuple
    summary: str
    formula: str


def _box_key(geom: LatticeGeometry) -> str:
    return "x".join(map(str, geom.extents))


def _an_gap(ctx: Context) -> dict:
    out = {}
    for gm in ctx.geoms:
        g = ctx.generator(gm)
        sd = g.spectral()
        out[_box_key(gm)] = {"gap": sd.gap, "gap_ties": sd.gap_ties, "zero_count": sd.zero_count,
                             "max_real": float(sd.eigenvalues.real.max())}
    res = {"status": "info", "boxes": out}
    if "expect" in ctx.options:
        want = float(ctx.options["expect"])
        ok = all(abs(v["gap"] - want) <= ctx.tol(ctx.options.get("tol", 1e-8)) for v in out.values())
        res["status"] = "pass" if ok else "fail"
    return res


def _an_fixed_point(ctx: Context) -> dict:
    out = {}
    for gm in ctx.geoms:
        g = ctx.generator(gm)
        if not has_unique_fixed_point(g):
            out[_box_key(gm)] = {"unique": False}
            continue
        rho = fixed_point(g)
        w = np.linalg.eigvalsh(rho.matrix)
        out[_box_key(gm)] = {"unique": True, "purity": float(np.trace(rho.matrix @ rho.matrix).real),
                             "entropy_bits": vn_entropy(rho, 2), "sigma_min": float(w.min())}
    return {"status": "info", "boxes": out}


def _an_cptp(ctx: Context) -> dict:
    out, ok = {}, True
    rng = np.random.default_rng(ctx.seed)
    for gm in ctx.geoms:
        g = ctx.generator(gm)
        if g.dim > SPECTRAL_DIM_CAP:
            raise Skip(f"box {_box_key(gm)} exceeds the dense cap")
        rows = {}
        for t in ctx.options.get("times", [0.1, 1.0, 10.0]):
            verdict = is_cptp(propagator(g, float(t)), ctx.tol(1e-8))
            rho, tau = sigma.random_state(rng, g.dim), sigma.random_state(rng, g.dim)
            diff = Operator(rho - tau, g.factorization)
            contr = trace_norm(evolve(g, float(t), diff).matrix) <= trace_norm(diff.matrix) + ctx.tol(1e-8)
            rows[str(t)] = {"cptp": bool(verdict), "min_choi_eigenvalue": verdict.min_eigenvalue,
                            "contraction": bool(contr)}
            ok = ok and bool(verdict) and contr
        out[_box_key(gm)] = rows
    return {"status": "pass" if ok else "fail", "boxes": out}


def _unique_or_skip(g):
    if not has_unique_fixed_point(g):
        raise Skip("no unique fixed point")


def _an_mixing_time(ctx: Context) -> dict:
    eps = float(ctx.options.get("eps", 0.01))
    out = {}
    for gm in ctx.geoms:
        g = ctx.generator(gm)
        _unique_or_skip(g)
        tau = mixing.mixing_time(g, eps, seed=ctx.seed)
        gap = spectral_gap(g)
        grid = np.linspace(0.0, 3.0 * (tau if math.isfinite(tau) and tau > 0 else 1.0), 13)
        curve = mixing.mixing_curve(g, grid, seed=ctx.seed)
        ctx.curves.append(Curve(f"mixing_{_box_key(gm)}", ("size", "t", "eta", "region"), curve.rows()))
        out[_box_key(gm)] = {"tau": tau, "gap": gap, "eta_monotone": curve.is_monotone(ctx.tol(1e-8))}
    ok = all(v["eta_monotone"] for v in out.values())
    return {"status": "pass" if ok else "fail", "eps": eps, "boxes": out}


def _an_bound_check(ctx: Context) -> dict:
    eps = float(ctx.options.get("eps", 0.01))
    out, statuses = {}, []
    for gm in ctx.geoms:
        g = ctx.generator(gm)
        alpha = None
        if ctx.options.get("lsi", False):
            try:
                sctx = sigma.SigmaContext(fixed_point(g))
                alpha = sigma.lsi_alpha1_estimate(sctx, g, seed=ctx.seed)
            except (LindbenchError, ValueError):
                alpha = None
        rep = mixing.bound_check(g, eps, alpha=alpha, seed=ctx.seed, tol=ctx.tol(1e-6))
        out[_box_key(gm)] = rep.to_dict()
        statuses.append(rep.status)
    if all(s == "skipped" for s in statuses):
        raise Skip("; ".join(sorted({v["reason"] for v in out.values()})))
    return {"status": "fail" if "fail" in statuses else "pass", "eps": eps, "boxes": out}


def _an_functionals(ctx: Context) -> dict:
    out, ok = {}, True
    for gm in ctx.geoms:
        g = ctx.generator(gm)
        _unique_or_skip(g)
        rho = fixed_point(g)
        try:
            sctx = sigma.SigmaContext(rho)
        except LindbenchError as exc:
            raise Skip(str(exc)) from None
        rep = sigma.functional_report(sctx, g, seed=ctx.seed, samples=int(ctx.options.get("samples", 20)))
        if rep["gap_variational"] is not None:
            ok = ok and abs(rep["gap_variational"] - rep["gap_eigen"]) <= ctx.tol(1e-8)
        out[_box_key(gm)] = rep
    if all(v["gap_variational"] is None for v in out.values()):
        raise Skip("no detailed balance")
    return {"status": "pass" if ok else "fail", "boxes": out}


def _an_assumptions(ctx: Context) -> dict:
    rep = lattice.check_assumptions(ctx.family, ctx.geoms if len(ctx.geoms) > 1 else ctx.geoms[0])
    return {"status": "pass" if rep.passed else "fail", **rep.to_dict()}


def _an_frustration_free(ctx: Context) -> dict:
    out = {}
    for gm in ctx.geoms:
        try:
            v = lattice.check_frustration_free(ctx.family, gm, ctx.tol(1e-8))
        except FixedPointError as exc:
            raise Skip(str(exc)) from None
        out[_box_key(gm)] = {"frustration_free": v.frustration_free, "violators": v.violators}
    return {"status": "info", "frustration_free": all(v["frustration_free"] for v in out.values()), "boxes": out}


def _an_rapid_mixing(ctx: Context) -> dict:
    fit = mixing.rapid_mixing_fit(ctx.family, ctx.geoms, seed=ctx.seed, mode=ctx.config.mode)
    rows = [r for c in fit.curves for r in c.rows()]
    ctx.curves.append(Curve("rapid_mixing", ("size", "t", "eta", "region"), rows))
    return {"status": "info", **fit.to_dict()}


def _an_local_mixing(ctx: Context) -> dict:
    region = _region(ctx, default="first")
    eps = float(ctx.options.get("eps", 0.01))
    if not all(all(x in gm for x in region) for gm in ctx.geoms):
        raise Skip("region is not contained in every box")
    v = bench.local_rapid_check(ctx.family, ctx.geoms, region, eps,
                                spread_limit=float(ctx.options.get("spread", 0.10)), seed=ctx.seed)
    rapid = ctx.results.get("rapid_mixing", {}).get("verdict")
    return {"status": "pass" if v.passed else "fail", "rapid_mixing_verdict": rapid, **v.to_dict()}


def _region(ctx: Context, default: str = "first") -> list:
    reg = ctx.options.get("region")
    if reg is not None:
        return [tuple(x) if isinstance(x, list) else (x,) for x in reg]
    gm = ctx.geoms[0]
    return [gm.sites[0]] if default == "first" else [gm.sites[len(gm.sites) // 2]]


def _an_correlations(ctx: Context) -> dict:
    out, ok = {}, True
    for gm in ctx.geoms:
        if len(gm) < 2:
            continue
        a = [gm.sites[0]]
        pairs = [(a, [y]) for y in gm.sites[1:]]
        g = ctx.generator(gm)
        _unique_or_skip(g)
        scan = correlations.decay_scan(ctx.family, gm, pairs, seed=ctx.seed)
        ctx.curves.append(Curve(f"correlations_{_box_key(gm)}", ("size", "|A|", "d_AB", "C", "T", "I"),
                                [(r["size"], r["|A|"], r["d_AB"], r["C"], r["T"], r["I"]) for r in scan.rows()]))
        for rec in scan.records:
            ok = ok and rec.C_val <= rec.T_val + ctx.tol(1e-6) and rec.T_val ** 2 / 4 <= rec.I_val + ctx.tol(1e-6)
        out[_box_key(gm)] = {"fit": scan.fit, "rows": scan.rows()}
    if not out:
        raise Skip("every box has a single site")
    return {"status": "pass" if ok else "fail", "boxes": out}


def _an_area_law(ctx: Context) -> dict:
    cut = ctx.options.get("cut", "half")
    if cut not in correlations.CUT_RULES:
        raise Skip(f"unknown cut rule {cut!r}")
    geoms = [gm for gm in ctx.geoms if len(gm) >= 2]
    if not geoms:
        raise Skip("every box has a single site")
    scan = correlations.area_law_scan(ctx.family, geoms, cut, ctx.config.mode)
    ctx.curves.append(Curve(f"area_law_{cut}", ("size", "|A|", "|dA|", "I"),
                            [(r["size"], r["|A|"], r["|dA|"], r["I"]) for r in scan.rows()]))
    return {"status": "info", "cut": cut, "fit": scan.fit, "rows": scan.rows()}


def _curve_rows(v, label_values, label="r"):
    rows = []
    for lv, row in zip(label_values, v.measured):
        for t, y in zip(v.grid, row):
            rows.append((lv, t, y))
    return rows


def _an_lr_localization(ctx: Context) -> dict:
    n = int(ctx.options.get("sites", 5))
    g1, g2, o, terms, nu, v, geom = bench.perturbed_chain_instance(
        n, float(ctx.options.get("gamma", 1.0)), float(ctx.options.get("J", 0.5)),
        float(ctx.options.get("kappa", 0.5)))
    grid = np.geomspace(1e-3, float(ctx.options.get("t_max", 2.0)), 25)
    res = bench.lr_localization(g1, g2, o, grid, terms, nu, v, geom=geom)
    slope_ok = abs(res.extra["lhs_slope"] - 2) <= 0.1 and abs(res.extra["rhs_slope"] - 2) <= 0.1
    ctx.curves.append(Curve("lr_localization", ("t", "lhs", "rhs"), list(zip(res.grid, res.measured, res.bound))))
    return {"status": "pass" if res.passed and slope_ok else "fail", **res.to_dict()}


def _centred_chains(ctx: Context) -> list[LatticeGeometry]:
    out = []
    for gm in ctx.geoms:
        if gm.dimension != 1:
            raise Skip("nested-box benches use chains")
        n = len(gm)
        out.append(LatticeGeometry.chain(n, -(n // 2)))
    return out


def _an_boundary_localization(ctx: Context) -> dict:
    if not ctx.family.has_boundary:
        return {"status": "pass", "note": "empty boundary rule: divergence is identically zero"}
    geoms = _centred_chains(ctx)
    grid = np.geomspace(1e-3, float(ctx.options.get("t_max", 10.0)), 25)
    res = bench.boundary_localization(ctx.family, geoms, [(0,)], Z, grid)
    ctx.curves.append(Curve("boundary_localization", ("r", "t", "divergence"), _curve_rows(res, res.extra["r"])))
    return {"status": "pass" if res.passed else "fail", **res.to_dict()}


def _an_ff_localization(ctx: Context) -> dict:
    if not ctx.results.get("frustration_free", {}).get("frustration_free", False):
        raise Skip("family is not frustration free")
    gm = max(ctx.geoms, key=len)
    region = _region(ctx)
    ms = [m for m in ctx.options.get("m", [1, 2]) if len(gm.fattening(region, m + 1)) <= 7]
    grid = np.geomspace(1e-3, float(ctx.options.get("t_max", 10.0)), 25)
    res = bench.ff_localization(ctx.family, gm, region, ms, grid, seed=ctx.seed)
    ctx.curves.append(Curve("ff_localization", ("m", "t", "divergence"), _curve_rows(res, ms)))
    return {"status": "pass" if res.passed else "fail", **res.to_dict()}


def _an_indistinguishability(ctx: Context) -> dict:
    gm = max(ctx.geoms, key=len)
    region = _region(ctx, default="centre")
    g = ctx.generator(gm)
    _unique_or_skip(g)
    s_max = max(gm.diam(gm.sites), 0)
    res = bench.indistinguishability(ctx.family, gm, region, list(range(0, s_max + 1)))
    return {"status": "pass" if res.passed else "fail", **res.to_dict()}


PERTURBATIONS = {"bit_flip": bench.bit_flip_perturbation, "depolarizing": bench.depolarizing_perturbation}


def _an_stability(ctx: Context) -> dict:
    gm = max(ctx.geoms, key=len)
    kind = ctx.options.get("perturbation", "bit_flip")
    if kind not in PERTURBATIONS:
        raise Skip(f"unknown perturbation {kind!r}")
    rule = PERTURBATIONS[kind](float(ctx.options.get("kappa", 0.5)))
    eps_grid = [0.0] + list(ctx.options.get("eps", [1e-3, 1e-2, 1e-1]))
    region = _region(ctx)
    grid = np.geomspace(1e-3, float(ctx.options.get("t_max", 10.0)), 25)
    try:
        res = bench.stability(ctx.family, gm, rule, eps_grid, Z, region, grid)
        c_by_size = {1: res.extra["c_estimate"]}
        if len(gm) >= 2:
            pair = list(gm.sites[:2])
            res2 = bench.stability(ctx.family, gm, rule, eps_grid, np.kron(Z, Z), pair, grid)
            c_by_size[2] = res2.extra["c_estimate"]
    except PreconditionError as exc:
        raise Skip(str(exc)) from None
    return {"status": "pass" if res.passed else "fail", **res.to_dict(), "c_by_region_size": c_by_size}


ANALYZERS: dict[str, Analyzer] = {
    "gap": Analyzer(_an_gap, (), "Spectral gap of the instantiated generator",
                    "gap = min over nonzero eigenvalues λ of |Re λ|"),
    "fixed_point": Analyzer(_an_fixed_point, (), "Uniqueness and basic data of the stationary state",
                            "ℒ(ρ∞) = 0, peripheral spectrum = {0} with multiplicity one"),
    "cptp": Analyzer(_an_cptp, (), "Complete positivity and trace-norm contraction of exp(tℒ)",
                     "Choi(exp(tℒ)) ≥ 0, tr_out Choi = 𝟙, ‖exp(tℒ)(ρ−τ)‖₁ ≤ ‖ρ−τ‖₁"),
    "mixing_time": Analyzer(_an_mixing_time, ("fixed_point", "gap"), "Mixing time by bisection",
                            "τ(ε) = inf{t : sup_ρ ‖T_t(ρ) − T_∞(ρ)‖₁ ≤ ε}"),
    "bound_check": Analyzer(_an_bound_check, ("fixed_point", "gap"),
                            "Detailed-balance mixing-time bound (and log-Sobolev variant when lsi = true)",
                            "τ(ε) ≤ (log(2σ_min^{-1/2}) − log ε)/λ;  τ(ε) ≤ (log(2 log σ_min^{-1}) − 2 log ε)/α₁"),
    "functionals": Analyzer(_an_functionals, ("fixed_point",), "σ-weighted variational gap, α₁ and regularity",
                            "gap = min ℰ(A)/Var_σ(A);  α₁ = inf K(ρ)/D(ρ‖σ);  ℰ₁(I₁,₂(A)) ≥ ℰ(A)"),
    "assumptions": Analyzer(_an_assumptions, (), "Interaction and boundary decay sums on the boxes",
                            "v = sup_x Σ_{Z∋x} ‖M_Z‖_⋄|Z|ν(diam Z);  ν(r)Σ_{d≥r}‖B_d‖_⋄ ≤ cN^b"),
    "frustration_free": Analyzer(_an_frustration_free, (), "Every bulk term annihilates the fixed point",
                                 "M_Z(ρ∞) = 0 for all Z ⊂ Λ"),
    "rapid_mixing": Analyzer(_an_rapid_mixing, (), "Joint fit of contraction curves across sizes",
                             "η_Λ(t) ≈ c|Λ|^δ e^{−γt}"),
    "local_mixing": Analyzer(_an_local_mixing, ("rapid_mixing",), "Size independence of the local mixing time",
                             "η^A(t) = sup_ρ ‖tr_{A^c}[T_t(ρ) − T_∞(ρ)]‖₁ ≤ k(|A|)e^{−γt}"),
    "correlations": Analyzer(_an_correlations, ("fixed_point",), "Correlation measures of the fixed point vs distance",
                             "C ≤ T = ‖ρ_AB − ρ_A⊗ρ_B‖₁;  T²/4 ≤ I ≤ 6T log₂ d_A + 4h_b(T)"),
    "area_law": Analyzer(_an_area_law, ("fixed_point",), "Mutual information across cuts",
                         "I(A:A^c) ≤ c|∂A| log|A|"),
    "lr_localization": Analyzer(_an_lr_localization, ("assumptions",), "Lieb-Robinson localization of a perturbation",
                                "‖O₁(t) − O₂(t)‖ ≤ ‖O‖|X|(e^{vt} − vt − 1)/v Σ_r ‖M_r‖_⋄ ν^{−1}(r)"),
    "boundary_localization": Analyzer(_an_boundary_localization, ("assumptions",),
                                      "Open versus closed evolution deep in the bulk",
                                      "‖O_A(t) − Ō_A(t)‖ ≤ c‖O_A‖|A|((e^{vt} − 1 − vt)/v)ν^{−β}(r)"),
    "ff_localization": Analyzer(_an_ff_localization, ("assumptions", "frustration_free"),
                                "Removing terms near A barely affects a frustration-free evolution",
                                "‖(T_t^{B̄} − T_t^{B̄∖A})(ρ∞^m ⊗ τ)‖₁ ≤ poly(m)ν^{−1}(m)[e^{vt} − 1 + t]"),
    "indistinguishability": Analyzer(_an_indistinguishability, ("fixed_point",),
                                     "Local indistinguishability of fixed points on fattened regions",
                                     "‖tr_{A^c}(ρ∞ − ρ∞^s)‖₁ ≤ |A|^δ Δ₀(s)"),
    "stability": Analyzer(_an_stability, ("assumptions",), "Linear response of local observables to perturbations",
                          "‖T_t*(O_A) − S_t*(O_A)‖ ≤ c(|A|)‖O_A‖(ε + |Λ|ν^{−η}(d_A))"),
}


def explain(analysis_id: str) -> str:
    if analysis_id not in ANALYZERS:
        raise ConfigError(f"unknown analysis id {analysis_id!r}")
    a = ANALYZERS[analysis_id]
    deps = ", ".join(a.deps) if a.deps else "none"
    return f"{analysis_id}: {a.summary}\n  formula: {a.formula}\n  runs after: {deps}\n"


def execution_order(ids) -> list[str]:
    """All requested analyzers plus their dependencies, dependencies first."""
    needed, stack = set(), list(ids)
    while stack:
        a = stack.pop()
        if a not in needed:
            needed.add(a)
            stack.extend(ANALYZERS[a].deps)
    ts = TopologicalSorter({a: set(ANALYZERS[a].deps) for a in sorted(needed)})
    ts.prepare()
    order = []
    while ts.is_active():
        ready = sorted(ts.get_ready())
        order.extend(ready)
        ts.done(*ready)
    return order


def _levels(order: list[str]) -> list[list[str]]:
    level: dict[str, int] = {}
    for a in order:
        level[a] = 1 + max((level[d] for d in ANALYZERS[a].deps), default=-1)
    out: dict[int, list[str]] = {}
    for a in order:
        out.setdefault(level[a], []).append(a)
    return [out[k] for k in sorted(out)]


def _seed_for(seed: int, analysis_id: str) -> int:
    return (seed * 1_000_003 + zlib.crc32(analysis_id.encode())) % (2 ** 31)


def _run_one(cfg: RunConfig, family, geoms, aid: str, options: dict, seed: int, tol_scale: float,
             results: dict) -> tuple[dict, list]:
    curves: list = []
    ctx = Context(cfg, family, geoms, options, _seed_for(seed, aid), tol_scale, results, curves)
    try:
        res = ANALYZERS[aid].fn(ctx)
    except Skip as exc:
        res = {"status": "skipped", "reason": str(exc)}
    except (DimensionCapError, FixedPointError, PreconditionError) as exc:
        res = {"status": "skipped", "reason": f"{type(exc).__name__}: {exc}"}
    return to_jsonable(res), curves


def run_config(cfg: RunConfig, seed: int | None = None, tol_scale: float = 1.0, jobs: int = 1) -> AnalysisReport:
    seed = cfg.seed if seed is None else seed
    family = builtin(cfg.model, **cfg.params)
    geoms = cfg.geometries()
    options = {a.id: a.options for a in cfg.analyses}
    requested = {a.id for a in cfg.analyses}
    order = execution_order(requested)
    results: dict[str, dict] = {}
    curves: list = []
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for level in _levels(order):
            futs = {aid: pool.submit(_run_one, cfg, family, geoms, aid, options.get(aid, {}), seed, tol_scale,
                                     dict(results)) for aid in level}
            for aid in level:  # collect in a fixed order so output never depends on scheduling
                res, cs = futs[aid].result()
                res["requested"] = aid in requested
                results[aid] = res
                curves.extend(cs)
    snap = cfg.snapshot()
    snap["seed"] = seed
    snap["tol_scale"] = tol_scale
    report = AnalysisReport(snap, results, curves)
    failed = any(r["status"] == "fail" for r in results.values())
    if cfg.regressions and Path(cfg.regressions).exists():
        reg = compare_regressions(results, Path(cfg.regressions), tol_scale)
        report.analyses["regressions"] = reg
        failed = failed or reg["status"] == "fail"
    report.exit_status = 1 if failed else 0
    return report


# --- regression targets --------------------------------------------------------------------


def _scalars(obj, prefix="") -> dict:
    out = {}
    if isinstance(obj, dict):
        for k in sorted(obj):
            if k in ("requested", "status", "reason", "provenance"):
                continue
            out.update(_scalars(obj[k], f"{prefix}/{k}" if prefix else k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            out.update(_scalars(v, f"{prefix}/{i}"))
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        out[prefix] = obj
    return out


def regression_targets(results: dict) -> dict:
    return {aid: _scalars(res) for aid, res in sorted(results.items()) if res.get("status") != "skipped"}


def compare_regressions(results: dict, path: Path, tol_scale: float = 1.0, rtol: float = 1e-6) -> dict:
    import json
    frozen = json.loads(path.read_text())["targets"]
    now = regression_targets(results)
    mismatches = []
    for aid, vals in frozen.items():
        cur = now.get(aid, {})
        for key, want in vals.items():
            got = cur.get(key)
            if got is None or abs(got - want) > rtol * tol_scale * max(1.0, abs(want)):
                mismatches.append({"analysis": aid, "key": key, "frozen": want, "current": got})
    return {"status": "fail" if mismatches else "pass", "file": str(path), "mismatches": mismatches}


def freeze(cfg: RunConfig, path: Path, seed: int | None = None, tol_scale: float = 1.0, jobs: int = 1) -> Path:
    report = run_config(cfg, seed, tol_scale, jobs)
    results = {k: v for k, v in report.analyses.items() if k != "regressions"}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps({"schema_version": 1, "config": report.config, "targets": regression_targets(results)}))
    return path
