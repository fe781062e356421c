"""Command-line entry point.

Thin adapters over the library; no numerical logic lives here.  Exit codes:
0 = success / property holds, 1 = checked negative result (NSP violated,
certificate refused, empirical disagreement), 2 = usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from .expander import (
    EnumerationBudgetError,
    fit_degree_band,
    profile_to_csv,
    theta_exact,
    theta_sampled,
)
from .experiments import (
    SweepConfig,
    empirical_zero_column,
    records_to_csv,
    run_sweep,
    zero_column_prob,
)
from .matrix import MatrixFormatError, Seed, gen_bernoulli, gen_left_regular, read_matrix, write_matrix
from .nsp import NotCertifiable, NspBudgetError, certify_from_expansion, nsp_exact
from .optim import LpError
from .recovery import METHODS, RecoveryProblem, RecoveryReport, recover
from .util import fmt9, read_vector, write_vector


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def cmd_gen(args) -> int:
    seed = Seed(args.seed)
    if args.p is not None:
        A = gen_bernoulli(args.n, args.m, args.p, seed)
    else:
        A = gen_left_regular(args.n, args.m, args.d, seed)
    if args.out is None:
        sys.stdout.write(f"SBM {A.m} {A.n}\n")
        for sup in A.col_support:
            line = " ".join([str(sup.size)] + [str(int(i)) for i in sup])
            sys.stdout.write(line + "\n")
    else:
        write_matrix(A, args.out)
    return 0


def cmd_expander_report(args) -> int:
    A = read_matrix(args.matrix)
    d = Fraction(args.d) if args.d is not None else None
    if d is None and int(A.degrees.min()) != int(A.degrees.max()):
        d, _ = fit_degree_band(A)
    if args.sample is None:
        profile = theta_exact(A, args.smax, d=d)
    else:
        profile = theta_sampled(A, args.smax, args.sample, Seed(args.seed), d=d)
    _write_text(profile_to_csv(profile), args.out)
    return 0


def cmd_nsp_certify(args) -> int:
    try:
        cert = certify_from_expansion(args.theta2s, args.delta, args.d, args.s)
    except NotCertifiable as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1
    print(f"{cert.order},{fmt9(cert.rho)},{fmt9(cert.tau)},{cert.provenance}")
    return 0


def cmd_nsp_check(args) -> int:
    A = read_matrix(args.matrix)
    violation = nsp_exact(A, args.s, args.rho, args.tau, override_budget=args.override_budget)
    if violation is None:
        print(f"holds,s={args.s},rho={fmt9(args.rho)},tau={fmt9(args.tau)}")
        return 0
    support = " ".join(str(j) for j in violation.support)
    print(f"violated,support=[{support}],lhs={fmt9(violation.lhs)},rhs={fmt9(violation.rhs)}")
    print("witness," + ",".join(fmt9(v) for v in violation.witness))
    return 1


def cmd_recover(args) -> int:
    A = read_matrix(args.matrix)
    y = read_vector(args.y)
    truth = read_vector(args.truth) if args.truth else None
    if truth is not None and truth.shape != (A.n,):
        raise ValueError(f"truth vector has length {truth.size}, expected {A.n}")
    problem = RecoveryProblem(A=A, y=y, eta=args.eta, nonneg=args.nonneg)
    report = recover(problem, args.method, s=args.s)
    if truth is not None:
        err = float(np.abs(report.xhat - truth).sum())
        report = RecoveryReport(
            xhat=report.xhat,
            method=report.method,
            residual_l1=report.residual_l1,
            residual_l2=report.residual_l2,
            err_l1=err,
        )
    if args.out is None:
        for v in report.xhat:
            sys.stdout.write(fmt9(v) + "\n")
        stream = sys.stderr
    else:
        write_vector(report.xhat, args.out)
        stream = sys.stdout
    summary = f"method={report.method},residual_l1={fmt9(report.residual_l1)}"
    summary += f",residual_l2={fmt9(report.residual_l2)}"
    summary += f",err_l1={fmt9(report.err_l1) if report.err_l1 is not None else 'nan'}"
    print(summary, file=stream)
    return 0


def _parse_sweep_config(path: str) -> SweepConfig:
    spec: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            spec[key.strip()] = value.strip()
    known = {"n", "m", "s", "p", "trials", "method", "seed", "tol"}
    unknown = set(spec) - known
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}; expected {sorted(known)}")
    for key in ("n", "m", "s", "p"):
        if key not in spec:
            raise ValueError(f"{path}: missing required key {key!r}")

    def ints(key):
        return tuple(int(tok) for tok in spec[key].split(","))

    return SweepConfig(
        n_values=ints("n"),
        m_values=ints("m"),
        s_values=ints("s"),
        p_values=tuple(float(tok) for tok in spec["p"].split(",")),
        trials=int(spec.get("trials", "200")),
        method=spec.get("method", "nnlad"),
        tol=float(spec.get("tol", "1e-6")),
        master_seed=int(spec.get("seed", "0")),
    )


def cmd_sweep(args) -> int:
    config = _parse_sweep_config(args.config)
    records = run_sweep(config, workers=args.workers, timing=args.timing)
    _write_text(records_to_csv(records), args.out)
    return 0


def cmd_lowerbound(args) -> int:
    closed = zero_column_prob(args.n, args.m, args.p)
    empirical = empirical_zero_column(args.n, args.m, args.p, args.trials, Seed(args.seed))
    diff = abs(closed - empirical)
    print(
        f"closed_form={fmt9(closed)},empirical={fmt9(empirical)},"
        f"abs_diff={fmt9(diff)},tol={fmt9(args.tol)}"
    )
    return 0 if diff <= args.tol else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bincs",
        description="Sparse binary measurement matrices: generation, expander "
        "analysis, NSP certification, decoding, and Monte Carlo sweeps.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen", help="generate a random matrix and write it as SBM text")
    p.add_argument("--n", type=int, required=True, help="number of columns")
    p.add_argument("--m", type=int, required=True, help="number of rows")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--p", type=float, help="Bernoulli density")
    g.add_argument("--d", type=int, help="exact left degree")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("expander", help="expansion-constant analysis")
    esub = p.add_subparsers(dest="subverb", required=True)
    rep = esub.add_parser("report", help="emit a theta profile as CSV")
    rep.add_argument("--matrix", required=True)
    rep.add_argument("--smax", type=int, required=True)
    rep.add_argument("--sample", type=int, default=None, help="sample this many subsets per cardinality instead of enumerating")
    rep.add_argument("--d", default=None, help="nominal degree (default: common degree, or fitted band center)")
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--out", default=None)
    rep.set_defaults(func=cmd_expander_report)

    p = sub.add_parser("nsp", help="nullspace-property certificates")
    nsub = p.add_subparsers(dest="subverb", required=True)
    cert = nsub.add_parser("certify", help="derive a certificate from expansion constants")
    cert.add_argument("--theta2s", type=Fraction, required=True)
    cert.add_argument("--delta", type=Fraction, required=True)
    cert.add_argument("--d", type=Fraction, required=True)
    cert.add_argument("--s", type=int, default=1)
    cert.set_defaults(func=cmd_nsp_certify)
    chk = nsub.add_parser("check", help="exhaustively verify the NSP on a small matrix")
    chk.add_argument("--matrix", required=True)
    chk.add_argument("--s", type=int, required=True)
    chk.add_argument("--rho", type=float, required=True)
    chk.add_argument("--tau", type=float, required=True)
    chk.add_argument("--override-budget", action="store_true")
    chk.set_defaults(func=cmd_nsp_check)

    p = sub.add_parser("recover", help="decode a measurement vector")
    p.add_argument("--matrix", required=True)
    p.add_argument("--y", required=True, help="observation file, one value per line")
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--nonneg", action="store_true")
    p.add_argument("--truth", default=None, help="optional truth vector for error reporting")
    p.add_argument("--s", type=int, default=None, help="sparsity order for sigma_s reporting")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("sweep", help="run a recovery sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-reproducibility)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lowerbound", help="zero-column probability: closed form vs sampling")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=0.02)
    p.set_defaults(func=cmd_lowerbound)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        ValueError,
        OSError,
        MatrixFormatError,
        EnumerationBudgetError,
        NspBudgetError,
        LpError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
