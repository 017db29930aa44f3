"""Command-line interface: generate data, run algorithms, account budgets,
evaluate theory bounds, and drive benchmark grids.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, matio, theory
from .adaptive import (
    AdaptiveParams,
    run_adaptive_power,
    run_kappa_sweep,
    run_with_restarts,
)
from .baselines import analyze_gauss, noisy_power_naive
from .datagen import (
    GaussSpec,
    gen_gaussian_iid,
    gen_high_coherence,
    gen_low_coherence,
    scale_for_privacy,
)
from .errors import DppcaError, ParameterError
from .matcore import DenseMatrix, rayleigh_ratio, sin_sq, spectrum_stats
from .mech import PrivacyBudget, RngStream, compose, invert_budget


def _parse_spec(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in raw.split(","))
    except ValueError as exc:
        raise ParameterError(f"bad spectrum list {raw!r}") from exc


def _cmd_gen(args: argparse.Namespace) -> int:
    rng = RngStream(args.seed)
    meta: dict = {"kind": args.kind, "seed": args.seed}
    if args.kind == "gaussian":
        if args.spec is None:
            raise ParameterError("--kind gaussian requires --spec s1,s2,...")
        spec = GaussSpec(_parse_spec(args.spec), rotate=args.rotate)
        raw, vbar1 = gen_gaussian_iid(args.n, spec, rng)
        scaled = scale_for_privacy(raw, args.beta)
        a = scaled.matrix
        meta.update(
            vbar1=list(vbar1),
            spectrum=list(spec.sigmabar_sq),
            L=scaled.scale,
            clip_count=scaled.clip_count,
        )
    elif args.kind == "low-coh":
        if args.sigma1_frac is None or args.gap is None:
            raise ParameterError("--kind low-coh requires --sigma1-frac and --gap")
        a = gen_low_coherence(
            args.n, args.d, args.sigma1_frac, args.gap, rng, rotate=args.rotate
        )
    elif args.kind == "high-coh":
        a = gen_high_coherence(args.n, args.d, rng)
    else:  # pragma: no cover - argparse choices guard this
        raise ParameterError(f"unknown kind {args.kind}")

    stats = spectrum_stats(a)
    meta.update(
        n=a.n, d=a.d,
        sigma1=stats.sigma1, sigma2=stats.sigma2,
        kappa=stats.kappa, upsilon=stats.upsilon, mu=stats.mu,
    )
    if args.out.endswith(".dpm"):
        matio.save_dpm(a, args.out)
    else:
        matio.save_csv(a, args.out)
    if args.meta:
        Path(args.meta).write_text(json.dumps(meta, indent=2) + "\n")
    print(f"wrote {a.n}x{a.d} matrix to {args.out}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    a = matio.load_matrix(args.infile)
    if args.auto_scale:
        m = a.max_row_norm()
        if m > 1.0:
            a = DenseMatrix(a.data / m)
    total = PrivacyBudget(args.eps_total, args.delta_total)
    rng = RngStream(args.seed)
    out: dict = {
        "algo": args.algo,
        "n": a.n,
        "d": a.d,
        "eps_total": total.epsilon,
        "delta_total": total.delta,
        "seed": args.seed,
    }
    trace_doc = None

    if args.sweep is not None:
        sweep = run_kappa_sweep(
            a, total, rng, num_guesses=args.sweep, beta=args.beta,
            noiseless=args.noiseless,
        )
        x_hat = sweep.estimate
        chosen = sweep.candidates[sweep.selected]
        out["accounting"] = {
            "selection_epsilon": sweep.selection_epsilon,
            "runs": args.sweep,
            "per_run_epsilon": total.epsilon / (2 * args.sweep),
            "per_run_delta": total.delta / args.sweep,
        }
        out["selected_kappa_guess"] = chosen.kappa_guess
        out["T"] = chosen.iterations
        trace_doc = chosen.trace.as_dict()
    elif args.algo == "adaptive" and args.restarts > 1:
        x_hat, traces = run_with_restarts(
            a, total, args.iterations, args.restarts, rng,
            beta=args.beta, noiseless=args.noiseless,
            normalize=not args.unnormalized,
        )
        out["T"] = args.iterations
        out["accounting"] = {
            "restarts": args.restarts,
            "selection_epsilon": total.epsilon / 2,
            "per_run_epsilon": total.epsilon / (2 * args.restarts),
            "per_run_delta": total.delta / args.restarts,
        }
        trace_doc = [t.as_dict() for t in traces]
    elif args.algo == "adaptive":
        per_iter = invert_budget(total, 2 * args.iterations)
        params = AdaptiveParams(
            iterations=args.iterations,
            per_iter=per_iter,
            beta=args.beta,
            normalize=not args.unnormalized,
            noiseless=args.noiseless,
        )
        x_hat, trace = run_adaptive_power(a, params, rng)
        composed = compose(per_iter, 2 * args.iterations)
        out["T"] = args.iterations
        out["accounting"] = {
            "mechanisms": 2 * args.iterations,
            "per_mechanism_epsilon": per_iter.epsilon,
            "per_mechanism_delta": per_iter.delta,
            "composed_epsilon": composed.epsilon,
            "composed_delta": composed.delta,
        }
        trace_doc = trace.as_dict()
    elif args.algo == "analyze-gauss":
        x_hat = analyze_gauss(a, total, rng, noiseless=args.noiseless)
        out["accounting"] = {"mechanisms": 1}
    elif args.algo == "naive-power":
        per_iter = invert_budget(total, args.iterations)
        x_hat = noisy_power_naive(
            a, args.iterations, per_iter, rng, noiseless=args.noiseless
        )
        out["T"] = args.iterations
        out["accounting"] = {
            "mechanisms": args.iterations,
            "per_mechanism_epsilon": per_iter.epsilon,
            "per_mechanism_delta": per_iter.delta,
        }
    else:  # pragma: no cover
        raise ParameterError(f"unknown algo {args.algo}")

    stats = spectrum_stats(a)
    out["x_hat"] = list(x_hat)
    out["sin2_vs_v1"] = sin_sq(x_hat, stats.top_vector)
    out["rayleigh_ratio"] = rayleigh_ratio(a, x_hat)

    doc = json.dumps(out, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(doc)
        print(f"sin2_vs_v1={out['sin2_vs_v1']:.6g} -> {args.out}")
    else:
        print(doc, end="")
    if args.trace and trace_doc is not None:
        Path(args.trace).write_text(json.dumps(trace_doc, indent=2) + "\n")
    return 0


def _cmd_accountant(args: argparse.Namespace) -> int:
    if args.acct_cmd == "compose":
        total = compose(PrivacyBudget(args.eps, args.delta), args.iterations)
        print(f"epsilon={total.epsilon!r} delta={total.delta!r}")
    else:
        per = invert_budget(
            PrivacyBudget(args.eps_total, args.delta_total), args.iterations
        )
        print(f"epsilon={per.epsilon!r} delta={per.delta!r}")
    return 0


def _cmd_theory(args: argparse.Namespace) -> int:
    gauss_spec = GaussSpec(_parse_spec(args.gauss_spec)) if args.gauss_spec else None
    report = theory.build_report(
        t=args.iterations, n=args.n, d=args.d, beta=args.beta, delta=args.delta,
        epsilon=args.eps, sigma1=args.sigma1, sigma2=args.sigma2,
        upsilon=args.upsilon, gauss_spec=gauss_spec,
    )
    print(json.dumps(report.as_dict(), indent=2))
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    cfg = bench.ExperimentConfig.from_json(args.config)
    threads = args.threads
    if threads is None:
        threads = bench.threads_from_env(cfg.threads)
    records = bench.run_experiment(cfg, threads=threads)
    out = args.out or cfg.out
    if out is None:
        raise ParameterError("no output path: pass --out or set 'out' in the config")
    bench.write_csv(records, out)
    errors = sum(1 for r in records if r.error)
    print(f"wrote {len(records)} records ({errors} errors) to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dppca",
        description="Differentially private top-eigenvector estimation",
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("--kind", required=True, choices=["gaussian", "low-coh", "high-coh"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int)
    g.add_argument("--spec", help="comma-separated population spectrum (gaussian)")
    g.add_argument("--sigma1-frac", type=float, dest="sigma1_frac")
    g.add_argument("--gap", type=float)
    g.add_argument("--rotate", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--beta", type=float, default=0.05)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--meta")
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="run one algorithm on a matrix file")
    r.add_argument("--algo", default="adaptive",
                   choices=["adaptive", "analyze-gauss", "naive-power"])
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--eps-total", type=float, required=True, dest="eps_total")
    r.add_argument("--delta-total", type=float, required=True, dest="delta_total")
    r.add_argument("--T", type=int, default=10, dest="iterations")
    r.add_argument("--beta", type=float, default=0.05)
    r.add_argument("--sweep", type=int, help="run a kappa sweep with J guesses")
    r.add_argument("--restarts", type=int, default=1,
                   help="best-of-R adaptive runs selected privately")
    r.add_argument("--noiseless", action="store_true")
    r.add_argument("--unnormalized", action="store_true")
    r.add_argument("--auto-scale", action="store_true", dest="auto_scale")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out")
    r.add_argument("--trace")
    r.set_defaults(func=_cmd_run)

    acc = sub.add_parser("accountant", help="compose or invert privacy budgets")
    accsub = acc.add_subparsers(dest="acct_cmd", required=True)
    c = accsub.add_parser("compose")
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--delta", type=float, required=True)
    c.add_argument("--T", type=int, required=True, dest="iterations")
    c.set_defaults(func=_cmd_accountant)
    i = accsub.add_parser("invert")
    i.add_argument("--eps-total", type=float, required=True, dest="eps_total")
    i.add_argument("--delta-total", type=float, required=True, dest="delta_total")
    i.add_argument("--T", type=int, required=True, dest="iterations")
    i.set_defaults(func=_cmd_accountant)

    t = sub.add_parser("theory", help="print the closed-form bound report")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--d", type=int, required=True)
    t.add_argument("--T", type=int, required=True, dest="iterations")
    t.add_argument("--eps", type=float, required=True)
    t.add_argument("--delta", type=float, required=True)
    t.add_argument("--beta", type=float, default=0.05)
    t.add_argument("--sigma1", type=float, required=True)
    t.add_argument("--sigma2", type=float, required=True)
    t.add_argument("--upsilon", type=float, required=True)
    t.add_argument("--gauss-spec", dest="gauss_spec")
    t.set_defaults(func=_cmd_theory)

    b = sub.add_parser("bench", help="run an experiment grid from a JSON config")
    b.add_argument("--config", required=True)
    b.add_argument("--out")
    b.add_argument("--threads", type=int)
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DppcaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
