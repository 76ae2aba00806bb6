"""Command-line entry points.

Subcommands: ``generate`` (synthesize a profile), ``graph`` (inspect a
topology), ``run`` (experiment from a config file), ``robustness``
(contamination study), ``consensus`` (centralized rules on a profile
file).  Exit codes: 0 success, 1 invalid parameters, 2 I/O or file-format
errors.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .consensus import (
    borda_consensus,
    copeland_consensus,
    footrule_consensus,
    kemeny_bruteforce,
    local_kemenize,
)
from .datasets import (
    ContaminationSpec,
    FileFormatError,
    MallowsModel,
    contaminate,
    mallows_sample,
    preflib_parse,
    preflib_write,
    profile_to_csv,
    uniform_permutation,
)
from .experiments import (
    GraphSpec,
    build_topology,
    load_config,
    robustness_study,
    run_experiment,
    write_robustness_csv,
)
from .graphs import edge_distribution, save_topology, spectral_info
from .rankings import profile_pairwise

__all__ = ["cli_main", "main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gossiprank", exit_on_error=False)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="synthesize a preference profile", exit_on_error=False)
    gen.add_argument("--n", type=int, required=True, help="voter count")
    gen.add_argument("--m", type=int, required=True, help="item count")
    gen.add_argument("--phi", type=float, default=0.5, help="Mallows dispersion in [0, 1]")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--epsilon", type=float, default=0.0, help="contaminated voter fraction")
    gen.add_argument(
        "--contamination-kind",
        default="uniform-random",
        choices=("uniform-random", "adversarial-reversed"),
    )
    gen.add_argument("--adversarial-phi", type=float, default=None)
    gen.add_argument("--out", required=True, help="output file (.soc or .csv)")
    gen.set_defaults(func=_cmd_generate)

    gr = sub.add_parser("graph", help="build and inspect a communication graph", exit_on_error=False)
    gr.add_argument("--kind", required=True, choices=("complete", "watts-strogatz", "geometric", "grid"))
    gr.add_argument("--n", type=int, required=True)
    gr.add_argument("--seed", type=int, default=0)
    gr.add_argument("--ws-k", type=int, default=None)
    gr.add_argument("--ws-beta", type=float, default=0.3)
    gr.add_argument("--radius", type=float, default=None)
    gr.add_argument("--rows", type=int, default=None)
    gr.add_argument("--cols", type=int, default=None)
    gr.add_argument("--save", default=None, help="write the edge list to this path")
    gr.set_defaults(func=_cmd_graph)

    run = sub.add_parser("run", help="run a gossip experiment from a config file", exit_on_error=False)
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default=None, help="override the output directory")
    run.add_argument("--format", choices=("csv", "json"), default=None)
    run.add_argument("--threads", type=int, default=None, help="trial-level parallelism")
    run.set_defaults(func=_cmd_run)

    rob = sub.add_parser("robustness", help="centralized contamination study", exit_on_error=False)
    rob.add_argument("--config", required=True)
    rob.add_argument("--seed", type=int, default=None)
    rob.add_argument("--out", default=None)
    rob.add_argument("--format", choices=("csv", "json"), default=None)
    rob.set_defaults(func=_cmd_robustness)

    con = sub.add_parser("consensus", help="centralized consensus of a profile file", exit_on_error=False)
    con.add_argument("--input", required=True, help="PrefLib .soc/.soi file")
    con.add_argument("--method", default="borda", help="comma list: borda,copeland,footrule,kemeny,lk")
    con.add_argument("--scheme", default="average-impute", choices=("average-impute", "normalize"))
    con.add_argument("--lk-base", default="copeland", choices=("copeland", "borda"))
    con.set_defaults(func=_cmd_consensus)
    return parser


def _cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    center = uniform_permutation(args.m, rng)
    model = MallowsModel(center=center, phi=args.phi)
    profile = mallows_sample(model, args.n, rng)
    if args.epsilon > 0:
        spec = ContaminationSpec(args.epsilon, args.contamination_kind, args.adversarial_phi)
        profile = contaminate(profile, spec, model, rng)
    out = Path(args.out)
    if out.suffix == ".csv":
        profile_to_csv(profile, out)
    else:
        preflib_write(profile, out, title=f"Mallows phi={args.phi} seed={args.seed}")
    print(f"wrote {profile.n} rankings over {profile.m} items to {out}")
    print(f"center = {list(center.ranks)}")
    return 0


def _cmd_graph(args) -> int:
    spec = GraphSpec(
        kind=args.kind,
        k=args.ws_k,
        beta=args.ws_beta,
        radius=args.radius,
        rows=args.rows,
        cols=args.cols,
    )
    topo = build_topology(spec, args.n, np.random.default_rng(args.seed))
    info = spectral_info(topo, edge_distribution(topo))
    print(f"kind = {args.kind}")
    print(f"nodes = {topo.n}")
    print(f"edges = {len(topo.edges)}")
    print(f"bipartite = {str(info.bipartite).lower()}")
    print(f"c = {info.c:.12g}")
    print(f"lambda2 = {info.lambda2:.12g}")
    if info.bipartite:
        print("warning: graph is bipartite; averaging still converges (c > 0)", file=sys.stderr)
    if args.save:
        save_topology(topo, args.save)
        print(f"saved edge list to {args.save}")
    return 0


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.out is not None:
        config = dataclasses.replace(config, out_dir=Path(args.out))
    if args.format is not None:
        config = dataclasses.replace(config, out_format=args.format)
    if args.threads is not None:
        config = dataclasses.replace(config, threads=args.threads)
    result = run_experiment(config)
    print(f"wrote {len(result.trial_files)} trial files and {result.summary_file}")
    return 0


def _cmd_robustness(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.out is not None:
        config = dataclasses.replace(config, out_dir=Path(args.out))
    if args.format is not None:
        config = dataclasses.replace(config, out_format=args.format)
    rows = robustness_study(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "robustness.csv"
    write_robustness_csv(rows, out_path)
    print(f"{'method':<10} {'dtau':>14} {'excess':>16} {'excess+LK':>16}")
    for r in rows:
        print(
            f"{r.method:<10} {r.dtau_mean:6.3f} ± {r.dtau_std:5.3f} "
            f"{r.excess_mean:7.4f} ± {r.excess_std:6.4f} "
            f"{r.excess_lk_mean:7.4f} ± {r.excess_lk_std:6.4f}"
        )
    print(f"wrote {out_path}")
    return 0


def _cmd_consensus(args) -> int:
    profile = preflib_parse(args.input)
    methods = [tok.strip() for tok in args.method.split(",") if tok.strip()]
    p = profile_pairwise(profile.voters)
    for method in methods:
        if method == "borda":
            res = borda_consensus(profile.voters, args.scheme)
        elif method == "copeland":
            res = copeland_consensus(p, profile.n)
        elif method == "footrule":
            res = footrule_consensus(list(profile.voters))
        elif method == "kemeny":
            res = kemeny_bruteforce(p, profile.n)
        elif method == "lk":
            if args.lk_base == "copeland":
                base = copeland_consensus(p, profile.n)
            else:
                base = borda_consensus(profile.voters, args.scheme)
            from .rankings import total_kendall_loss

            refined = local_kemenize(base.ranking.to_ordering(), p).to_permutation()
            print(
                f"lk({args.lk_base}): ranking={list(refined.ranks)} "
                f"objective={total_kendall_loss(refined, p, profile.n):.6g}"
            )
            continue
        else:
            raise ValueError(f"unknown consensus method {method!r}")
        print(f"{method}: ranking={list(res.ranking.ranks)} objective={res.objective:.6g}")
    return 0


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except argparse.ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help, or argparse-internal exits
        code = exc.code or 0
        return 1 if code not in (0, 1, 2) else int(code)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileFormatError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
