"""Command-line interface.

Subcommands: gen, simulate, aggregate, perturb, select-beta, serve, worker,
plot-script.  Run `betadpca <subcommand> --help` for the flags.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import cluster, experiment
from .errors import (ConvergenceError, CorruptMessage, DomainError, InvalidInput, IoError,
                     ParseError, PreconditionError)
from .local_pca import local_summary, read_shard, truncate_summary, write_shard
from .perturbation import PerturbationScenario, tolerance
from .rngs import NOISE_EIGENVALUES, stream
from .selection import DEFAULT_CANDIDATES, make_folds, select_beta
from .aggregation import BetaConfig
from .simgen import DISTRIBUTIONS, make_population, sample_data, signal_eigenvalues, split_shards

logger = logging.getLogger(__name__)


def _beta_value(text: str):
    if text == "cv":
        return "cv"
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--beta takes a number or 'cv', got {text!r}") from exc


def _float_list(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_size_flags(sub, q_default=10):
    sub.add_argument("--p", type=int, default=200, help="ambient dimension")
    sub.add_argument("--n", type=int, default=250, help="total sample count")
    sub.add_argument("--m", type=int, default=5, help="number of machines")
    sub.add_argument("--r", type=int, default=5, help="target rank")
    sub.add_argument("--q", type=int, default=q_default, help="local summary rank (q >= r)")


def _add_cv_flags(sub):
    sub.add_argument("--cv-folds", type=int, default=5, help="folds for beta selection")
    sub.add_argument("--cv-seed", type=int, default=0, help="fold-shuffle seed")


def _build_job(args) -> cluster.JobSpec:
    if args.beta == "cv":
        mode = cluster.CvSelect(candidates=DEFAULT_CANDIDATES,
                                folds=args.cv_folds, seed=args.cv_seed)
    else:
        mode = cluster.FixedBeta(beta=args.beta)
    return cluster.JobSpec(r=args.r, q=args.q, beta_mode=mode,
                           delta=args.delta, center=args.center)


def _print_result(agg) -> None:
    vals = ", ".join(f"{v:.6g}" for v in agg.leading.values)
    print(f"branch={agg.branch} beta_used={agg.beta_used}")
    print(f"leading eigenvalues: [{vals}]")
    if agg.cv is not None:
        for b, s in agg.cv.scores.items():
            print(f"  cv score beta={b:g}: {s:.6g}")
        print(f"  selected beta = {agg.cv.best_beta:g}")
    if agg.missing:
        print(f"  missing machines: {list(agg.missing)}")


def _save_result(agg, out) -> None:
    if out is None:
        return
    try:
        np.savez(out, sigma=agg.sigma_beta, values=agg.leading.values,
                 vectors=agg.leading.vectors, branch=agg.branch,
                 beta_used=np.nan if agg.beta_used is None else agg.beta_used)
    except OSError as exc:
        raise IoError(f"cannot write {out}: {exc}") from exc
    print(f"wrote {out}")


def cmd_gen(args) -> int:
    model = make_population(args.p, args.n, args.r, args.dist, args.seed)
    shards = split_shards(sample_data(model), args.m)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc}") from exc
    for shard in shards:
        path = out_dir / f"shard_{shard.machine_id:03d}.bdpx"
        write_shard(path, shard)
        print(f"wrote {path} ({shard.p} x {shard.n_ell})")
    pop_path = out_dir / "population.npz"
    np.savez(pop_path, gamma=model.gamma, lam=model.lam, r=model.r)
    print(f"wrote {pop_path}")
    return 0


def cmd_simulate(args) -> int:
    spec = experiment.ExperimentSpec(
        p=args.p, n=args.n, m=args.m, r=args.r, q=args.q,
        distribution=args.dist, cv_folds=args.cv_folds, delta=args.delta,
        replicates=args.reps, k_max=args.k_max, seed=args.seed, center=args.center,
    )
    if args.paper_scale:
        spec = spec.paper_scale()
    result = experiment.run_and_write(spec, args.out)
    print(f"wrote {args.out} ({len(result.rows)} rows)")
    print(f"selection counts over {spec.replicates} replicates:")
    for b, c in result.selection_counts.items():
        print(f"  beta={b:g}: {c}")
    print("mean rho_k at k=r and k=k_max:")
    lo, hi = result.k_range[0], result.k_range[-1]
    for method in spec.methods:
        print(f"  {method}: {result.mean_rho[method][lo]:.4f} .. {result.mean_rho[method][hi]:.4f}")
    return 0


def _load_shards(paths):
    return [read_shard(path, machine_id=i + 1) for i, path in enumerate(paths)]


def cmd_aggregate(args) -> int:
    shards = _load_shards(args.shards)
    agg = cluster.run_local(shards, _build_job(args))
    _print_result(agg)
    _save_result(agg, args.out)
    return 0


def cmd_perturb(args) -> int:
    # Shared signal block from the planted-eigenvalue law; per-machine noise
    # draws, each row sorted descending.
    rows = []
    noise_rng = stream(args.seed, NOISE_EIGENVALUES)
    signal = signal_eigenvalues(args.p, args.n, args.r)
    spectra = np.empty((args.m, args.p))
    for ell in range(args.m):
        noise = noise_rng.uniform(0.5, 1.5, args.p - args.r)
        spectra[ell] = np.sort(np.concatenate([signal, noise]))[::-1]
    for beta in args.beta:
        for d in args.d_l:
            sc = PerturbationScenario(base_spectra=spectra, r=args.r,
                                      noise_index=args.noise_index, d_l=d, beta=beta)
            rep = tolerance(sc)
            rows.append((beta, d, rep.lambda_tilde_l, rep.tau, rep.order_invariant))
    lines = ["beta,d_l,lambda_tilde_l,tau,order_invariant"]
    lines += [f"{b!r},{d!r},{t!r},{tau!r},{int(inv)}" for b, d, t, tau, inv in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        experiment._write_text(args.out, text)
        print(f"wrote {args.out} ({len(rows)} rows)")
    else:
        sys.stdout.write(text)
    return 0


def cmd_select_beta(args) -> int:
    shards = _load_shards(args.shards)
    summaries_q = [local_summary(s, args.q, center=args.center) for s in shards]
    summaries_r = [truncate_summary(s, args.r) for s in summaries_q]
    plan = make_folds(len(shards), args.cv_folds, args.cv_seed, r=args.r, q=args.q)
    cv = select_beta(summaries_q, summaries_r, plan, BetaConfig(beta=1.0, delta=args.delta))
    for b, s in cv.scores.items():
        print(f"beta={b:g}: mean discrepancy {s:.6g}")
    print(f"selected beta = {cv.best_beta:g}")
    if args.out:
        lines = ["fold," + ",".join(f"beta={b:g}" for b in plan.candidate_set)]
        for j in range(plan.k):
            lines.append(f"{j + 1}," + ",".join(repr(v) for v in cv.per_fold[j]))
        experiment._write_text(args.out, "\n".join(lines) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    agg = cluster.serve(
        args.host, args.port, args.m, _build_job(args), timeout=args.timeout,
        on_listen=lambda addr: print(f"listening on {addr[0]}:{addr[1]}", flush=True),
    )
    _print_result(agg)
    _save_result(agg, args.out)
    return 0


def cmd_worker(args) -> int:
    shard = read_shard(args.shard, machine_id=args.machine_id)
    msg = cluster.worker_round(shard, _build_job(args))
    sent = cluster.send_summary(args.host, args.port, msg)
    print(f"machine {shard.machine_id}: sent {sent} bytes to {args.host}:{args.port}")
    return 0


def cmd_plot_script(args) -> int:
    experiment.emit_plot_script(args.csv, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betadpca",
                                     description="distributed PCA via matrix beta-mean aggregation")
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a population and write shard files")
    _add_size_flags(gen)
    gen.add_argument("--dist", choices=DISTRIBUTIONS, default="gaussian")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=cmd_gen)

    sim = subs.add_parser("simulate", help="run the replicated method comparison")
    _add_size_flags(sim)
    sim.add_argument("--dist", choices=DISTRIBUTIONS, default="gaussian")
    sim.add_argument("--reps", type=int, default=20)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--delta", type=float, default=1e-5)
    sim.add_argument("--k-max", type=int, default=15)
    sim.add_argument("--center", action="store_true")
    sim.add_argument("--paper-scale", action="store_true",
                     help="p=500, n=250, m=5, 100 replicates")
    _add_cv_flags(sim)
    sim.add_argument("--out", default="results.csv")
    sim.set_defaults(func=cmd_simulate)

    agg = subs.add_parser("aggregate", help="aggregate shard files in one round")
    agg.add_argument("shards", nargs="+", help="shard files (binary or CSV)")
    agg.add_argument("--r", type=int, default=5)
    agg.add_argument("--q", type=int, default=10)
    agg.add_argument("--beta", type=_beta_value, default=1.0, help="a number or 'cv'")
    agg.add_argument("--delta", type=float, default=1e-5)
    agg.add_argument("--center", action="store_true")
    _add_cv_flags(agg)
    agg.add_argument("--out", help="write sigma/leading block to this .npz")
    agg.set_defaults(func=cmd_aggregate)

    pert = subs.add_parser("perturb", help="perturbation tolerance sweep (CSV)")
    _add_size_flags(pert)
    pert.add_argument("--noise-index", type=int, default=None,
                      help="0-based perturbed coordinate (default r)")
    pert.add_argument("--seed", type=int, default=0)
    pert.add_argument("--beta", type=_float_list, default=[-1.0, 0.0, 1.0],
                      help="comma-separated betas")
    pert.add_argument("--d-l", type=_float_list, default=[0.5, 5.0, 50.0],
                      help="comma-separated perturbation sizes")
    pert.add_argument("--out", help="CSV path (stdout when omitted)")
    pert.set_defaults(func=cmd_perturb)

    sel = subs.add_parser("select-beta", help="cross-validated beta on shard files")
    sel.add_argument("shards", nargs="+")
    sel.add_argument("--r", type=int, default=5)
    sel.add_argument("--q", type=int, default=10)
    sel.add_argument("--delta", type=float, default=1e-5)
    sel.add_argument("--center", action="store_true")
    _add_cv_flags(sel)
    sel.add_argument("--out", help="per-fold score CSV")
    sel.set_defaults(func=cmd_select_beta)

    srv = subs.add_parser("serve", help="coordinator: listen for worker summaries")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=7071)
    srv.add_argument("--m", type=int, required=True, help="number of expected workers")
    srv.add_argument("--r", type=int, default=5)
    srv.add_argument("--q", type=int, default=10)
    srv.add_argument("--beta", type=_beta_value, default=1.0)
    srv.add_argument("--delta", type=float, default=1e-5)
    srv.add_argument("--center", action="store_true")
    _add_cv_flags(srv)
    srv.add_argument("--timeout", type=float, default=None,
                     help=f"seconds to wait (default ${cluster.TIMEOUT_ENV_VAR} or 30)")
    srv.add_argument("--out", help="write sigma/leading block to this .npz")
    srv.set_defaults(func=cmd_serve)

    wrk = subs.add_parser("worker", help="compute one shard's summary and send it")
    wrk.add_argument("--shard", required=True)
    wrk.add_argument("--machine-id", type=int, default=1,
                     help="id for CSV shards (binary shards carry their own)")
    wrk.add_argument("--host", default="127.0.0.1")
    wrk.add_argument("--port", type=int, default=7071)
    wrk.add_argument("--r", type=int, default=5)
    wrk.add_argument("--q", type=int, default=10)
    wrk.add_argument("--beta", type=_beta_value, default=1.0,
                     help="must match the coordinator's job ('cv' bundles the rank-r block)")
    wrk.add_argument("--delta", type=float, default=1e-5)
    wrk.add_argument("--center", action="store_true")
    _add_cv_flags(wrk)
    wrk.set_defaults(func=cmd_worker)

    plot = subs.add_parser("plot-script", help="emit a gnuplot script for a results CSV")
    plot.add_argument("--csv", required=True)
    plot.add_argument("--out", required=True)
    plot.set_defaults(func=cmd_plot_script)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "command", None) == "perturb" and args.noise_index is None:
        args.noise_index = args.r
    try:
        return args.func(args)
    except (InvalidInput, DomainError, ConvergenceError, PreconditionError,
            CorruptMessage, IoError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
