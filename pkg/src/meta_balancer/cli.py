"""Command-line front door.

Subcommands: analyze, mr-analyze, simulate, serve.  JSON output is the
exact result envelope the HTTP service returns for the same request;
table output mirrors the Est / S.E / t value / p-value report layout.
Exit codes: 0 success, 2 validation error, 1 internal error.
"""

from __future__ import annotations

import argparse
import os
import sys

from scipy import stats

from .analysis import ANALYSIS_MODELS
from .data import MRDataset
from .egger import METRICS, EggerFit
from .engine import (
    MR_METHODS,
    TAU2_METHODS,
    Outcome,
    handle_analyze,
    handle_leave_one_out,
    handle_mr,
)
from .errors import DomainError, MetaBalancerError, ValidationError
from .io import FORMATS, serialize_mr, serialize_studies
from .pooling import PooledEstimate
from .simulate import GENERATOR_MODELS, PSI_LAWS, simulate

DEFAULT_PORT = 8000


def _norm_p(est: float, se: float) -> float | None:
    if se <= 0:
        return None
    return float(2.0 * stats.norm.sf(abs(est / se)))


def _t_p(est: float, se: float, dof: int) -> float | None:
    if se <= 0 or dof < 1:
        return None
    return float(2.0 * stats.t.sf(abs(est / se), dof))


def _row(name: str, est: float, se: float | None = None,
         tval: float | None = None, p: float | None = None) -> str:
    def num(v, fmt="{:>10.4f}"):
        return fmt.format(v) if v is not None else "{:>10}".format("-")
    return f"{name:<14}{num(est)}{num(se)}{num(tval)}" \
           f"{num(p, '{:>12.4g}')}"


def _table(outcome: Outcome, k: int) -> str:
    lines = []
    result = outcome.result
    het = outcome.heterogeneity
    header = f"{'Parameter':<14}{'Est':>10}{'S.E':>10}{'t value':>10}{'p-value':>12}"
    if isinstance(result, EggerFit):
        lines.append(f"Egger regression (k = {k}, dof = {result.dof}, "
                     f"metric = {result.precision_metric})")
        lines.append(header)
        for name, est, se in (("beta0", result.beta0_hat, result.se_beta0),
                              ("mu", result.mu_hat, result.se_mu)):
            t = est / se if se > 0 else None
            lines.append(_row(name, est, se, t, _t_p(est, se, result.dof)))
        lines.append(_row("phi", result.phi_hat))
        if outcome.pleiotropy is not None and outcome.pleiotropy.identified:
            lines.append(_row("sigma2_beta0", outcome.pleiotropy.sigma2_beta0))
        elif outcome.pleiotropy is not None:
            lines.append(f"{'sigma2_beta0':<14}{'not identified (phi <= 1)':>22}")
    else:
        assert isinstance(result, PooledEstimate)
        lines.append(f"Model: {result.model_tag} (k = {k})")
        lines.append(header)
        z = result.mu_hat / result.se_mu if result.se_mu > 0 else None
        lines.append(_row("mu", result.mu_hat, result.se_mu, z,
                          _norm_p(result.mu_hat, result.se_mu)))
        if het.tau2 is not None:
            lines.append(_row("tau2", het.tau2))
        if het.phi is not None:
            lines.append(_row("phi", het.phi))
        lines.append(_row("q", het.q))
        lines.append(_row("i2", het.i2))
        level = int(round(result.ci_level * 100))
        lines.append(f"{level}% CI for mu: ({result.ci_low:.4f}, "
                     f"{result.ci_high:.4f})")
    lines.append("p-values: normal reference for pooled mu, t(k-2) for "
                 "Egger coefficients.")
    return "\n".join(lines)


def _emit(outcome: Outcome, out: str) -> None:
    for w in outcome.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if out == "json":
        sys.stdout.buffer.write(outcome.payload)
        sys.stdout.buffer.flush()
    else:
        k = sum(1 for m in outcome.balance.studies if not m.excluded) \
            if outcome.balance is not None else 0
        print(_table(outcome, k))


def _options_from_args(args) -> dict:
    options: dict = {"ci_level": args.ci_level}
    if getattr(args, "exclude", None):
        options["exclude_ids"] = [x for x in args.exclude.split(",") if x]
    if getattr(args, "metric", None):
        options["precision_metric"] = args.metric
    if getattr(args, "tau2", None):
        options["tau2_method"] = args.tau2
    return options


def cmd_analyze(args) -> int:
    request = {
        "dataset": {"format": args.format, "path": args.input},
        "model": args.model,
        "options": _options_from_args(args),
    }
    _emit(handle_analyze(request), args.out)
    return 0


def cmd_mr_analyze(args) -> int:
    request = {
        "dataset": {"format": args.format, "path": args.input},
        "method": args.method,
        "options": _options_from_args(args),
    }
    _emit(handle_mr(request), args.out)
    return 0


def cmd_leave_one_out(args) -> int:
    request = {
        "dataset": {"format": args.format, "path": args.input},
        "model": args.model,
        "options": _options_from_args(args),
    }
    outcome = handle_leave_one_out(request)
    for w in outcome.warnings:
        print(f"warning: {w}", file=sys.stderr)
    sys.stdout.buffer.write(outcome.payload)
    sys.stdout.buffer.flush()
    return 0


def cmd_simulate(args) -> int:
    data = simulate(args.model, args.k, args.seed, mu=args.mu, tau2=args.tau2,
                    phi=args.phi, beta0=args.beta0,
                    sigma2_beta0=args.sigma2_beta0, s_low=args.s_low,
                    s_high=args.s_high, psi_law=args.psi_law,
                    stream=args.stream)
    serializer = serialize_mr if isinstance(data, MRDataset) else serialize_studies
    sys.stdout.buffer.write(serializer(data, args.format))
    sys.stdout.buffer.flush()
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(ui_dir=args.ui), host=args.host, port=args.port,
                log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meta-balancer",
        description="Meta-analysis pooling, bias adjustment and MR with a "
                    "physical balance view.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("--input", required=True, help="dataset file")
        p.add_argument("--format", choices=FORMATS, default="csv")
        p.add_argument("--out", choices=("table", "json"), default="table")
        p.add_argument("--ci-level", dest="ci_level", type=float, default=0.95)
        p.add_argument("--exclude", default=None,
                       help="comma-separated study ids to exclude")

    p = sub.add_parser("analyze", help="pool a study dataset")
    add_io(p)
    p.add_argument("--model", choices=ANALYSIS_MODELS, default="fixed")
    p.add_argument("--tau2", choices=TAU2_METHODS, default=None)
    p.add_argument("--metric", choices=METRICS, default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("mr-analyze", help="summary-data Mendelian randomization")
    add_io(p)
    p.add_argument("--method", choices=MR_METHODS, required=True)
    p.set_defaults(func=cmd_mr_analyze)

    p = sub.add_parser("leave-one-out", help="single-exclusion sensitivity series")
    add_io(p)
    p.add_argument("--model", choices=ANALYSIS_MODELS, default="fixed")
    p.add_argument("--tau2", choices=TAU2_METHODS, default=None)
    p.add_argument("--metric", choices=METRICS, default=None)
    p.set_defaults(func=cmd_leave_one_out)

    p = sub.add_parser("simulate", help="generate synthetic datasets")
    p.add_argument("--model", choices=GENERATOR_MODELS, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--tau2", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=1.0)
    p.add_argument("--beta0", type=float, default=0.0)
    p.add_argument("--sigma2-beta0", dest="sigma2_beta0", type=float, default=0.0)
    p.add_argument("--s-low", dest="s_low", type=float, default=0.05)
    p.add_argument("--s-high", dest="s_high", type=float, default=1.0)
    p.add_argument("--psi-law", dest="psi_law", choices=PSI_LAWS,
                   default="normal")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the local analysis service")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("META_BALANCER_PORT", DEFAULT_PORT)))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None,
                   help="directory with the browser UI to serve at / "
                        "(e.g. frontend/)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MetaBalancerError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
