"""Spectral report assembly, invariant verification, and file outputs."""
from __future__ import annotations

import csv
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .banach import (
    SelfSimilarFn,
    hf_build_many,
    lp_contraction_check,
    lp_sharpness_demo,
    peripheral_nonexistence_probe,
)
from .constructors import (
    ProductParams,
    h_series,
    independence_matrix,
    kernel_function,
    peripheral_basis,
    scaling_product,
)
from .cycles import (
    classify_cycles,
    default_max_period,
    match_peripheral,
    predict_peripheral,
)
from .exceptions import ConvergenceError, ValidationError
from .filters import TWO_PI, Filter, autocorrelation, modulus_squared, qmf_residual, zeros
from .transfer import (
    TrigPoly,
    GridFn,
    apply_circlefn,
    apply_grid,
    apply_poly,
    eigen,
    grid_angles,
    transition_matrix,
)

__all__ = [
    "AnalysisOptions",
    "SpectralReport",
    "Check",
    "analyze",
    "verify",
    "write_report",
    "to_jsonable",
    "ANNOTATIONS",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1
PERIPHERAL_TOL = 1e-6

ANNOTATIONS = [
    "On C(T) and L^inf(T) the spectrum is the closed unit disk, every |lambda| < 1 being an "
    "eigenvalue of infinite multiplicity. This is a set-level statement; the report exhibits "
    "finitely many independent eigenfunctions for chosen lambda instead.",
    "On L^p(T), 1 <= p < inf, the spectrum is the disk of radius N^(1/p); every "
    "1 < |lambda| < N^(1/p) is an eigenvalue of infinite multiplicity. That statement rests on "
    "an existence argument with no explicit construction and is not reproduced numerically.",
    "No eigenvalue of modulus N^(1/p) exists in L^p; the report only probes this on the "
    "invariant polynomial subspace.",
    "Filters are ingested as trigonometric polynomials; general Lipschitz filters are out of scope.",
]


@dataclass(frozen=True)
class AnalysisOptions:
    grid: int = 1024
    max_period: int | None = None
    product_terms: int = 40
    per_range: int = 256
    seed: int = 0
    zero_tol: float = 1e-9
    lp_trials: int = 100
    h_lambda: complex = 0.5

    @property
    def params(self) -> ProductParams:
        return ProductParams(self.product_terms, self.per_range, self.grid)


def to_jsonable(obj: Any) -> Any:
    """Convert report values to JSON types; complex numbers become [re, im]."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    return obj


@dataclass
class SpectralReport:
    """Everything ``analyze`` computed, keyed by section.

    Sections that failed without invalidating the rest carry
    ``{"status": "skipped", "reason": ...}``.
    """

    sections: dict
    timings: dict = field(default_factory=dict)
    eigenfunctions: list = field(default_factory=list, repr=False)
    cycles: list = field(default_factory=list, repr=False)
    eigenpairs: list = field(default_factory=list, repr=False)

    @property
    def verdict(self) -> str | None:
        v = self.sections.get("verdict", {})
        return v.get("label")

    def to_dict(self, timings: bool = False) -> dict:
        d = {"schema": SCHEMA_VERSION, "version": __version__, **self.sections}
        if timings:
            d["timings"] = self.timings
        return to_jsonable(d)

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), indent=2) + "\n"


@contextmanager
def _timed(timings, name):
    t0 = time.perf_counter()
    try:
        yield
    finally:
        timings[name] = time.perf_counter() - t0


def _section(sections, name, func):
    try:
        sections[name] = func()
    except (ValidationError, ConvergenceError) as exc:
        sections[name] = {"status": "skipped", "reason": f"{type(exc).__name__}: {exc}"}


def _first_kernel_cycle(filt, max_period, params):
    """Shortest cycle (period >= 2) satisfying the kernel-function hypotheses."""
    for c in classify_cycles(filt, max_period):
        if c.period < 2:
            continue
        try:
            return kernel_function(filt, c, params)
        except (ValidationError, ConvergenceError):
            continue
    raise ValidationError(f"no cycle of period <= {max_period} admits a kernel function")


def analyze(filt: Filter, options: AnalysisOptions = AnalysisOptions()) -> SpectralReport:
    """Run every analysis on ``filt`` and collect a :class:`SpectralReport`."""
    N = filt.scale
    max_period = options.max_period or default_max_period(N)
    params = options.params
    sections: dict = {}
    timings: dict = {}
    rep = SpectralReport(sections, timings)

    sections["filter"] = {**filt.to_dict(), "width": filt.width}
    with _timed(timings, "qmf"):
        res = qmf_residual(filt)
        m00 = complex(filt(0.0))
        sections["qmf"] = {
            "residual": res,
            "satisfied": res < 1e-12,
            "m0_at_zero": m00,
            "normalized": abs(m00 - math.sqrt(N)) < 1e-12,
        }
    with _timed(timings, "zeros"):
        _section(sections, "zeros", lambda: {"tol": options.zero_tol, "angles": zeros(filt, options.zero_tol)})

    with _timed(timings, "cycles"):
        cycles = classify_cycles(filt, max_period, options.zero_tol)
        rep.cycles = cycles
        m0c = [c for c in cycles if c.is_m0_cycle]
        sections["cycles"] = {
            "max_period": max_period,
            "count": len(cycles),
            "m0_cycles": [c.to_dict() for c in m0c],
            "nearest_misses": [
                c.to_dict() for c in sorted(cycles, key=lambda c: c.gap) if not c.is_m0_cycle
            ][:5],
        }
        pred = predict_peripheral(filt, max_period, options.zero_tol)
        sections["peripheral_prediction"] = pred.to_dict()

    with _timed(timings, "transition"):
        T = transition_matrix(filt)
        pairs = eigen(T)
        rep.eigenpairs = pairs
        e0 = np.zeros(T.dim)
        e0[T.K] = 1
        sections["transition"] = {
            "K": T.K,
            "dim": T.dim,
            "matrix": T.to_dict()["rows"],
            "spectral_radius": max(abs(e.value) for e in pairs),
            "constant_fixed": bool(np.allclose(T.matrix @ e0, e0, atol=1e-14, rtol=0)),
            "eigenpairs": [e.to_dict(with_vector=False) for e in pairs],
        }
        cross = match_peripheral(pred, [e.value for e in pairs], PERIPHERAL_TOL)
        sections["cross_check"] = cross

    with _timed(timings, "peripheral_eigenfunctions"):
        periph = []
        cache: dict = {}
        for e in pred.eigenvalues:
            try:
                basis = peripheral_basis(filt, e.value, params, max_period, cache)
            except (ValidationError, ConvergenceError) as exc:
                periph.append({"lambda": e.value, "status": "skipped", "reason": str(exc)})
                continue
            periph.append(basis.to_dict())
            for i, g in enumerate(basis.functions):
                rep.eigenfunctions.append(
                    {
                        "name": f"peripheral_{e.turn.numerator}_{e.turn.denominator}_{i}",
                        "lambda": e.value,
                        "kind": "peripheral",
                        "cycle": basis.cycles[i].to_dict(),
                        "residual": basis.residuals[i],
                        "tail_estimate": basis.tails[i],
                        "grid": g,
                    }
                )
        sections["peripheral_eigenfunctions"] = periph

    with _timed(timings, "interior_eigenfunction"):

        def interior():
            kf = _first_kernel_cycle(filt, max_period, params)
            lam = complex(options.h_lambda)
            hs = h_series(kf, lam, params)
            p = kf.cycle.period
            expected = np.array([lam ** ((p - i) % p) for i in range(p)]) / (1 - lam**p)
            rep.eigenfunctions.append(
                {
                    "name": f"interior_h_p{p}",
                    "lambda": lam,
                    "kind": "h-series",
                    "cycle": kf.cycle.to_dict(),
                    "residual": hs.residual,
                    "grid": hs.sample(params.grid),
                }
            )
            return {
                "lambda": lam,
                "cycle": kf.cycle.to_dict(),
                "arc_half_width": kf.delta,
                "kernel_residual": kf.sup_residual,
                "terms": hs.n_terms,
                "h_residual": hs.residual,
                "cycle_values": hs.cycle_values(),
                "expected_cycle_values": expected,
            }

        _section(sections, "interior_eigenfunction", interior)

    with _timed(timings, "lp"):

        def lp():
            out = {}
            for p in (1.0, 2.0):
                r = lp_contraction_check(filt, p, options.lp_trials, seed=options.seed)
                r.sharpness = lp_sharpness_demo(filt, p, TWO_PI / 1024)
                out[f"p={p:g}"] = {
                    **r.to_dict(),
                    "probe": peripheral_nonexistence_probe(filt, p).to_dict(),
                }
            return out

        _section(sections, "lp", lp)

    unit = [e.value for e in pairs if abs(e.value) > 1 - PERIPHERAL_TOL]
    ones = sum(1 for v in unit if abs(v - 1) < PERIPHERAL_TOL)
    only_trivial = len(m0c) == 1 and m0c[0].period == 1 and m0c[0].turns[0] == 0
    ortho = only_trivial and ones == 1
    sections["verdict"] = {
        "label": "orthonormal-translates" if ortho else "not-orthonormal",
        "orthonormal_translates": ortho,
        "m0_cycles": [c.to_dict()["turns"] for c in m0c],
        "eigenvalue_one_multiplicity": ones,
        "searched_max_period": max_period,
    }
    sections["annotations"] = ANNOTATIONS
    sections["diagnostics"] = {
        "product_terms": params.terms,
        "per_range": params.per_range,
        "grid": params.grid,
        "seed": options.seed,
        "product_tail_deviation": _product_tail(filt, params),
    }
    return rep


def _product_tail(filt, params):
    try:
        return scaling_product(filt, params).tail_deviation(TWO_PI * (params.per_range + 1))
    except ValidationError:
        return None


def write_report(rep: SpectralReport, out_dir: str | Path) -> list[Path]:
    """Write report.json, timings.json, eigenvalues.csv, cycles.csv and eigenfunction dumps."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    p = out / "report.json"
    p.write_text(rep.to_json())
    written.append(p)
    p = out / "timings.json"
    p.write_text(json.dumps(rep.timings, indent=2) + "\n")
    written.append(p)

    p = out / "eigenvalues.csv"
    with p.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "modulus", "residual"])
        for e in rep.eigenpairs:
            w.writerow([repr(e.value.real), repr(e.value.imag), repr(abs(e.value)), repr(e.residual)])
    written.append(p)

    p = out / "cycles.csv"
    write_cycles_csv(rep.cycles, p)
    written.append(p)

    if rep.eigenfunctions:
        ef = out / "eigenfunctions"
        ef.mkdir(exist_ok=True)
        manifest = []
        for item in rep.eigenfunctions:
            path = ef / f"{item['name']}.csv"
            write_gridfn_csv(item["grid"], path)
            written.append(path)
            manifest.append({k: v for k, v in item.items() if k != "grid"} | {"file": path.name})
        p = ef / "manifest.json"
        p.write_text(json.dumps(to_jsonable(manifest), indent=2) + "\n")
        written.append(p)
    return written


def write_cycles_csv(cycles, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["period", "turns", "is_m0_cycle", "gap"])
        for c in cycles:
            turns = " ".join(f"{t.numerator}/{t.denominator}" for t in c.turns)
            w.writerow([c.period, turns, int(c.is_m0_cycle), repr(c.gap)])


def write_gridfn_csv(g: GridFn, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "re", "im"])
        for t, v in zip(g.angles, g.samples):
            w.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag))])


@dataclass
class Check:
    name: str
    passed: bool
    value: Any = None
    threshold: Any = None
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        val = f" value={self.value:.3e}" if isinstance(self.value, float) else ""
        thr = f" threshold={self.threshold:.1e}" if isinstance(self.threshold, float) else ""
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{flag}] {self.name}{val}{thr}{extra}"

    def to_dict(self) -> dict:
        return to_jsonable(
            {"name": self.name, "passed": self.passed, "value": self.value,
             "threshold": self.threshold, "detail": self.detail}
        )


def _run(checks: list, name: str, func) -> None:
    try:
        checks.extend(func())
    except (ValidationError, ConvergenceError) as exc:
        checks.append(Check(name, False, detail=f"{type(exc).__name__}: {exc}"))


def verify(filt: Filter, options: AnalysisOptions = AnalysisOptions()) -> list[Check]:
    """Run the invariant suite on ``filt``; every returned check must pass."""
    rng = np.random.default_rng(options.seed)
    N = filt.scale
    params = options.params
    max_period = options.max_period or default_max_period(N)
    checks: list[Check] = []

    def filters_checks():
        res = qmf_residual(filt)
        out = [Check("qmf residual", res < 1e-12, res, 1e-12)]
        dev = abs(complex(filt(0.0)) - math.sqrt(N))
        out.append(Check("m0(0) = sqrt(N)", dev < 1e-12, dev, 1e-12))
        b = autocorrelation(filt).coeffs
        out.append(Check("autocorrelation hermitian", bool(np.array_equal(b[::-1], b.conj()))))
        th = rng.uniform(0, TWO_PI, 1024)
        per = float(np.max(np.abs(filt(th) - filt(th + TWO_PI))))
        out.append(Check("m0 periodic", per < 1e-12, per, 1e-12))
        avg = sum(modulus_squared(filt, (th + TWO_PI * k) / N) for k in range(N)) / N
        dq = float(np.max(np.abs(avg - 1)))
        out.append(Check("pointwise QMF identity", dq < 1e-10, dq, 1e-10))
        return out

    def transfer_checks():
        T = transition_matrix(filt)
        K = T.K
        worst_deg, worst_mat = 0, 0.0
        for _ in range(100):
            f = TrigPoly.random(K, rng)
            rf = apply_poly(filt, f)
            worst_deg = max(worst_deg, rf.degree)
            worst_mat = max(worst_mat, float(np.max(np.abs(rf.padded(K).coeffs - T.matrix @ f.coeffs))))
        out = [
            Check("subspace invariance", worst_deg <= K, detail=f"max degree {worst_deg} <= K={K}"),
            Check("apply_poly = T c", worst_mat < 1e-12, worst_mat, 1e-12),
        ]
        f = TrigPoly.random(min(K, 3) or 1, rng)
        M = 256 - 256 % N
        rg = apply_grid(filt, GridFn.sample(f, M * N))
        rp = apply_poly(filt, f)(grid_angles(M))
        rc = apply_circlefn(filt, f)(grid_angles(M))
        dev = float(max(np.max(np.abs(rg.samples - rp)), np.max(np.abs(rc - rp))))
        out.append(Check("poly/grid/closure agree", dev < 1e-10, dev, 1e-10))
        e0 = np.zeros(T.dim)
        e0[K] = 1
        fixed = float(np.max(np.abs(T.matrix @ e0 - e0)))
        out.append(Check("constant fixed", fixed < 1e-14, fixed, 1e-14))
        pairs = eigen(T)
        rho = max(abs(e.value) for e in pairs)
        out.append(Check("spectral radius <= 1", rho <= 1 + 1e-8, rho, 1 + 1e-8))
        worst = max(e.residual for e in pairs)
        out.append(Check("eigenpair residuals", worst < 1e-8, worst, 1e-8))
        pred = predict_peripheral(filt, max_period, options.zero_tol)
        cross = match_peripheral(pred, [e.value for e in pairs], PERIPHERAL_TOL)
        out.append(Check("peripheral eigenvalues predicted", cross["consistent"],
                         detail=f"anomalous={len(cross['anomalous'])}"))
        mult_ok = all(m["observed"] == m["predicted"] for m in cross["matched"])
        out.append(Check("peripheral multiplicities match", mult_ok,
                         detail="; ".join(f"{m['value']}: {m['observed']}/{m['predicted']}" for m in cross["matched"])))
        return out

    def cycle_checks():
        cyc = classify_cycles(filt, max_period, options.zero_tol)
        closed = all(c.is_closed() for c in cyc)
        return [Check("cycles closed under z^N", closed, detail=f"{len(cyc)} cycles, p <= {max_period}")]

    def product_checks():
        phi = scaling_product(filt, params)
        x = rng.uniform(-8 * np.pi, 8 * np.pi, 200)
        refine = float(np.max(np.abs(phi(x) - filt(x / N) / math.sqrt(N) * phi(x / N))))
        out = [Check("refinement identity", refine < 1e-8, refine, 1e-8)]
        pred = predict_peripheral(filt, max_period, options.zero_tol)
        cache: dict = {}
        for e in pred.eigenvalues:
            basis = peripheral_basis(filt, e.value, params, max_period, cache)
            for c, r, t in zip(basis.cycles, basis.residuals, basis.tails):
                bound = 10 * t + 1e-12
                out.append(Check(f"peripheral residual lambda={_fmt(e.value)} p={c.period}", r < bound, r, bound))
        return out

    def kernel_checks():
        kf = _first_kernel_cycle(filt, max_period, params)
        out = [Check(f"kernel R f = 0 (p={kf.cycle.period})", kf.sup_residual < 1e-9, kf.sup_residual, 1e-9)]
        lam = complex(options.h_lambda)
        eps = 1e-10
        hs = h_series(kf, lam, params, eps)
        fsup = float(np.max(np.abs(kf.sample(params.grid * N).samples)))
        bound = eps * fsup / (1 - abs(lam)) + 1e-12
        out.append(Check("h-series residual", hs.residual < bound, hs.residual, bound))
        p = kf.cycle.period
        expected = np.array([lam ** ((p - i) % p) for i in range(p)]) / (1 - lam**p)
        dv = float(np.max(np.abs(hs.cycle_values() - expected)))
        out.append(Check("h-series cycle values", dv < 1e-9, dv, 1e-9))
        worst = 0.0
        for q in range(1, 7):
            for z in (0.5, 0.4 + 0.3j, 0.9j):
                _, det = independence_matrix(q, z)
                worst = max(worst, abs(det - (1 - z**q) ** (q - 1)))
        out.append(Check("independence determinant", worst < 1e-10, worst, 1e-10))
        return out

    def banach_checks():
        out = []
        fs = [SelfSimilarFn(lam, lambda y: np.ones(np.shape(y)), N) for lam in (-1.0, 1j)]
        for hf in hf_build_many(filt, fs, params):
            bound = 10 * hf.tail + 1e-12
            out.append(Check(f"h_f residual lambda={_fmt(hf.lam)}", hf.residual < bound, hf.residual, bound))
        for p in (1.0, 1.5, 2.0, 3.0):
            r = lp_contraction_check(filt, p, options.lp_trials, seed=options.seed)
            out.append(Check(f"L^{p:g} contraction", r.ok, r.max_ratio, r.bound * (1 + 1e-6)))
        for p in (1.0, 2.0):
            ratio = lp_sharpness_demo(filt, p, TWO_PI / 1024)
            target = 0.97 * N ** (1 / p)
            out.append(Check(f"L^{p:g} sharpness", ratio >= target, ratio, target))
            probe = peripheral_nonexistence_probe(filt, p)
            out.append(Check(f"L^{p:g} nonexistence probe", probe.sigma_min_circle > 0.1,
                             probe.sigma_min_circle, 0.1))
        return out

    _run(checks, "filters", filters_checks)
    _run(checks, "transfer", transfer_checks)
    _run(checks, "cycles", cycle_checks)
    _run(checks, "products", product_checks)
    _run(checks, "kernel", kernel_checks)
    _run(checks, "banach", banach_checks)
    return checks


def _fmt(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"
