"""Command-line entry point: ``wavegalerkin <subcommand> <filter> ...``.

Exit status is 0 on success, 1 on invalid input (including a value that is
not an eigenvalue) and 2 when a numerical procedure fails to converge.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from ._validation import check_filter, parse_complex
from .banach import (
    SelfSimilarFn,
    hf_build,
    lp_contraction_check,
    peripheral_nonexistence_probe,
    sharpness_table,
)
from .constructors import h_series, kernel_function, peripheral_basis
from .cycles import classify_cycles, default_max_period, predict_peripheral
from .exceptions import ConvergenceError, NotAnEigenvalueError, ValidationError
from .report import (
    AnalysisOptions,
    analyze,
    to_jsonable,
    verify,
    write_cycles_csv,
    write_gridfn_csv,
    write_report,
)

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGENT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; keep status 2 for convergence failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _numeric_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=1024, metavar="M", help="uniform grid size (default 1024)")
    p.add_argument("--max-period", type=int, default=None, metavar="P", help="largest cycle period searched")
    p.add_argument("--product-terms", type=int, default=40, metavar="L", help="factors kept in infinite products")
    p.add_argument("--per-range", type=int, default=256, metavar="K", help="periodization range |k| <= K")
    p.add_argument("--seed", type=int, default=0, metavar="S", help="seed for randomized trials (default 0)")


def _options(args) -> AnalysisOptions:
    return AnalysisOptions(
        grid=args.grid,
        max_period=args.max_period,
        product_terms=args.product_terms,
        per_range=args.per_range,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wavegalerkin",
        description="Spectral analysis of the wavelet Galerkin transfer operator of a low-pass filter.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="full spectral report")
    p.add_argument("filter", help="filter JSON file or builtin name")
    _numeric_options(p)
    p.add_argument("--out", default="wavegalerkin-out", metavar="DIR", help="output directory")

    p = sub.add_parser("cycles", help="cycles of z -> z^N with the m0-cycle flag")
    p.add_argument("filter")
    p.add_argument("--max-period", type=int, default=None, metavar="P")
    p.add_argument("--m0-only", action="store_true", help="list only m0-cycles")
    p.add_argument("--out", default=None, metavar="FILE", help="also write a CSV table")

    p = sub.add_parser("eigenfunction", help="construct one eigenfunction and report its residual")
    p.add_argument("filter")
    p.add_argument("--lambda", dest="lam", required=True, metavar="RE+IMi")
    p.add_argument("--cycle-period", type=int, default=None, metavar="p")
    p.add_argument(
        "--linf",
        action="store_true",
        help="for |lambda| = 1 without an m0-cycle, build the L^inf eigenfunction Per(f |phi|^2)",
    )
    _numeric_options(p)
    p.add_argument("--out", default="eigenfunction.csv", metavar="FILE")

    p = sub.add_parser("norm-demo", help="L^p contraction bound and its sharpness")
    p.add_argument("filter")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", help="run the invariant suite; exit 0 iff every check passes")
    p.add_argument("filter")
    _numeric_options(p)
    p.add_argument("--out", default=None, metavar="FILE", help="write the checks as JSON")
    return parser


def _cmd_analyze(args) -> int:
    filt = check_filter(args.filter)
    rep = analyze(filt, _options(args))
    paths = write_report(rep, args.out)
    print(f"verdict: {rep.verdict}")
    for e in rep.sections["peripheral_prediction"]["eigenvalues"]:
        print(f"peripheral lambda={_fmt(e['value'])} multiplicity={e['multiplicity']}")
    skipped = [k for k, v in rep.sections.items() if isinstance(v, dict) and v.get("status") == "skipped"]
    for k in skipped:
        print(f"section {k} skipped: {rep.sections[k]['reason']}", file=sys.stderr)
    print(f"wrote {len(paths)} files to {args.out}")
    return EXIT_OK


def _cmd_cycles(args) -> int:
    filt = check_filter(args.filter)
    P = args.max_period or default_max_period(filt.scale)
    cycles = classify_cycles(filt, P)
    shown = [c for c in cycles if c.is_m0_cycle] if args.m0_only else cycles
    print("period  m0-cycle  gap        turns")
    for c in shown:
        flag = "yes" if c.is_m0_cycle else "no"
        print(f"{c.period:6d}  {flag:8s}  {c.gap:.3e}  {' '.join(str(t) for t in c.turns)}")
    if args.out:
        write_cycles_csv(shown, args.out)
    return EXIT_OK


def _cmd_eigenfunction(args) -> int:
    filt = check_filter(args.filter)
    lam = parse_complex(args.lam)
    opts = _options(args)
    params = opts.params
    P = args.max_period or default_max_period(filt.scale)
    mod = abs(lam)
    if mod > 1 + 1e-12:
        raise NotAnEigenvalueError(
            f"lambda = {_fmt(lam)} (|lambda| = {mod:.6g}) is outside C(T) spectrum disk |λ|≤1"
        )
    if abs(mod - 1) <= 1e-9:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            pred = predict_peripheral(filt, P)
        if pred.multiplicity(lam, 1e-9):
            basis = peripheral_basis(filt, lam, params, P)
            idx = 0
            if args.cycle_period is not None:
                hits = [i for i, c in enumerate(basis.cycles) if c.period == args.cycle_period]
                if not hits:
                    raise ValidationError(
                        f"no m0-cycle of period {args.cycle_period} contributes to lambda = {_fmt(lam)}; "
                        f"periods available: {[c.period for c in basis.cycles]}"
                    )
                idx = hits[0]
            g = basis.functions[idx]
            summary = {
                "kind": "peripheral",
                "lambda": lam,
                "cycle": basis.cycles[idx].to_dict()["turns"],
                "residual": basis.residuals[idx],
                "tail_estimate": basis.tails[idx],
                "basis_size": len(basis.functions),
            }
        elif args.linf:
            hf = hf_build(filt, SelfSimilarFn(lam, lambda y: np.ones(np.shape(y)), filt.scale), params)
            g = hf.samples
            summary = {"kind": "L^inf h_f", "lambda": lam, "residual": hf.residual, "tail_estimate": hf.tail}
        else:
            raise NotAnEigenvalueError(
                f"lambda = {_fmt(lam)} is not a continuous eigenvalue: no m0-cycle of period <= {P} "
                "has lambda^p = 1 (use --linf for the bounded measurable eigenfunction)"
            )
    else:
        kf = _kernel_for(filt, P, args.cycle_period, params)
        hs = h_series(kf, lam, params)
        g = hs.sample(params.grid)
        summary = {
            "kind": "h-series",
            "lambda": lam,
            "cycle": kf.cycle.to_dict()["turns"],
            "kernel_residual": kf.sup_residual,
            "terms": hs.n_terms,
            "residual": hs.residual,
        }
    write_gridfn_csv(g, args.out)
    summary["file"] = args.out
    print(json.dumps(to_jsonable(summary), indent=2))
    return EXIT_OK


def _kernel_for(filt, P, period, params):
    errors = []
    for c in classify_cycles(filt, P):
        if period is not None and c.period != period:
            continue
        if period is None and c.period < 2:
            continue
        try:
            return kernel_function(filt, c, params)
        except ValidationError as exc:
            errors.append(str(exc))
    want = f"of period {period}" if period is not None else f"of period 2..{P}"
    detail = f" (last: {errors[-1]})" if errors else ""
    raise ValidationError(f"no cycle {want} admits a kernel function{detail}")


def _cmd_norm_demo(args) -> int:
    filt = check_filter(args.filter)
    if args.epsilon <= 0 or args.epsilon >= np.pi:
        raise ValidationError(f"epsilon must lie in (0, pi), got {args.epsilon}")
    rep = lp_contraction_check(filt, args.p, args.trials, seed=args.seed)
    rows = sharpness_table(filt, args.p, [args.epsilon, args.epsilon / 2])
    probe = peripheral_nonexistence_probe(filt, args.p)
    print(f"bound N^(1/p) = {rep.bound:.10f}")
    print(f"random trials: {len(rep.ratios)}, max ratio {rep.max_ratio:.10f}, within bound: {rep.ok}")
    for r in rows:
        print(f"arc indicator eps={r['epsilon']:.6g}: ratio {r['ratio']:.10f}, gap {r['gap']:.3e}")
    print(f"{probe.label}: sigma_min = {probe.sigma_min:.6f}, over |lambda| circle {probe.sigma_min_circle:.6f}")
    return EXIT_OK if rep.ok else EXIT_INVALID


def _cmd_verify(args) -> int:
    filt = check_filter(args.filter)
    checks = verify(filt, _options(args))
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    if args.out:
        doc = {"filter": filt.to_dict(), "seed": args.seed, "passed": ok, "checks": [c.to_dict() for c in checks]}
        Path(args.out).write_text(json.dumps(to_jsonable(doc), indent=2) + "\n")
    return EXIT_OK if ok else EXIT_INVALID


def _fmt(z) -> str:
    z = complex(*z) if isinstance(z, (list, tuple)) else complex(z)
    return f"{z.real:g}{z.imag:+g}i"


_COMMANDS = {
    "analyze": _cmd_analyze,
    "cycles": _cmd_cycles,
    "eigenfunction": _cmd_eigenfunction,
    "norm-demo": _cmd_norm_demo,
    "verify": _cmd_verify,
}


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "--lambda -1+0i" as two options; glue the value on
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--lambda", "--epsilon", "--p") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENT


if __name__ == "__main__":
    sys.exit(main())
