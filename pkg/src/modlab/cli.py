"""Command-line experiment runner.

Subcommands:

- ``verify``: run the verification suites over seeded fixtures and emit
  report.json plus the CSV audit tables; exits nonzero if any must-pass
  check fails.
- ``audit-tidy-bound``: growth-bound audit only, with per-window slope
  summary on stdout.
- ``contour-study``: contour-quadrature convergence study only.
- ``fixture``: generate one fixture and write its JSON snapshot.

The environment variable MODLAB_OUT, when set, overrides ``--out``.
"""

from __future__ import annotations

import argparse
import os
import sys

from .fixtures import AlgebraSpec, generate_fixture, save_fixture
from .report import emit
from .suites import ALL_SUITES, DEFAULT_MODELS, RunConfig, run_suites


def _model_labels(args) -> tuple[str, ...]:
    if args.model is None:
        return DEFAULT_MODELS
    n = args.factor_size
    if args.model == "standard":
        return (AlgebraSpec.standard_factor(n).label(),)
    if args.model == "abelian":
        return (AlgebraSpec.maximal_abelian(n).label(),)
    if args.model == "direct-sum":
        return (AlgebraSpec.direct_sum([(n, n), (1, 1)]).label(),)
    raise SystemExit(f"unknown model {args.model!r}")


def _out_dir(args) -> str:
    return os.environ.get("MODLAB_OUT") or args.out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=20260809, help="base seed for all draws")
    p.add_argument("--model", choices=["standard", "abelian", "direct-sum"],
                   default=None, help="fixture model (default: both standard factors)")
    p.add_argument("--factor-size", type=int, default=2,
                   help="block size n (standard/direct-sum) or dimension (abelian)")
    p.add_argument("--trials", type=int, default=25, help="fixtures per model")
    p.add_argument("--tol", type=float, default=1e-9, help="base residual tolerance")
    p.add_argument("--pmin", type=float, default=0.01,
                   help="floor on Schmidt weights (conditioning cap)")
    p.add_argument("--out", default="out", help="output directory (MODLAB_OUT overrides)")


def _config(args, suites) -> RunConfig:
    return RunConfig(
        seed=args.seed,
        models=_model_labels(args),
        trials=args.trials,
        tol_base=args.tol,
        p_min=args.pmin,
        out_dir=_out_dir(args),
        suites=tuple(suites),
    )


def _print_report(report) -> None:
    for c in report.checks:
        print(f"{c.status:5s}  {c.id:40s} max_residual={c.max_residual:.3e} "
              f"tolerance={c.tolerance:.3e} samples={c.samples}")
    s = report.summary
    print(f"summary: {s['pass']} pass, {s['fail']} fail, {s['audit']} audit")


def cmd_verify(args) -> int:
    suites = tuple(args.suite) if args.suite else ALL_SUITES
    config = _config(args, suites)
    report, tidy_rows, contour_rows = run_suites(config)
    paths = emit(report, config.out_dir, tidy_rows=tidy_rows, contour_rows=contour_rows)
    _print_report(report)
    print(f"wrote {paths['report']}")
    return 0 if report.must_pass_ok else 1


def cmd_audit_tidy_bound(args) -> int:
    config = _config(args, ("tidy",))
    report, tidy_rows, _ = run_suites(config)
    emit(report, config.out_dir, tidy_rows=tidy_rows)
    for c in report.checks:
        if c.id.startswith("tidy/growth-slope"):
            print(f"{c.id}: fitted slope {c.max_residual:.4f} vs bound rate {c.tolerance:.4f}")
    violations = sum(1 for r in tidy_rows if not r["pass"])
    print(f"{len(tidy_rows)} audit rows, {violations} above the closed-form bound")
    return 0 if report.must_pass_ok else 1


def cmd_contour_study(args) -> int:
    config = _config(args, ("contour",))
    report, _, contour_rows = run_suites(config)
    emit(report, config.out_dir, contour_rows=contour_rows)
    _print_report(report)
    print(f"{len(contour_rows)} convergence rows")
    return 0 if report.must_pass_ok else 1


def cmd_fixture(args) -> int:
    label = _model_labels(args)[0]
    from .fixtures import parse_spec

    spec = parse_spec(label)
    fix = generate_fixture(spec, args.seed, p_min=args.pmin)
    out_dir = _out_dir(args)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"fixture_{spec.label()}_{args.seed}.json")
    save_fixture(fix, path)
    print(f"wrote {path} (d={fix.dim}, kappa={fix.triple.kappa:.3f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modlab",
        description="Verification lab for modular theory on finite-dimensional algebras",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run verification suites and emit reports")
    _add_common(p_verify)
    p_verify.add_argument("--suite", action="append", choices=list(ALL_SUITES),
                          help="restrict to a suite (repeatable)")
    p_verify.set_defaults(func=cmd_verify)

    p_tidy = sub.add_parser("audit-tidy-bound", help="growth-bound audit with slope summary")
    _add_common(p_tidy)
    p_tidy.set_defaults(func=cmd_audit_tidy_bound)

    p_contour = sub.add_parser("contour-study", help="contour quadrature convergence study")
    _add_common(p_contour)
    p_contour.set_defaults(func=cmd_contour_study)

    p_fix = sub.add_parser("fixture", help="generate and serialize one fixture")
    _add_common(p_fix)
    p_fix.set_defaults(func=cmd_fixture)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code = args.func(args)
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
