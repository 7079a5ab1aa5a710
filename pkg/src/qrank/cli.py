"""Command-line driver.

    qrank --command sweep --gen ER,200,6 --ensemble 10 --out results/
    qrank --command toy --alpha 0.9 --out toy/
    qrank --command report --graph network.edges --out report/

A JSON config file can hold any of the long options (keys use underscores,
e.g. "alpha_grid"); explicit command-line flags override it. Exit code is
nonzero if any integration failed to converge.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .netgraph import GraphGenSpec
from .solver import IntegrationConfig
from .experiments import (
    COMMANDS,
    DEFAULT_ALPHA_GRID,
    DEFAULT_SIZES,
    ExperimentConfig,
    run_command,
)


def _parse_gen(text: str) -> GraphGenSpec:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected MODEL,N,PARAM (e.g. BA,200,3)")
    model, n, param = parts[0].strip().upper(), int(parts[1]), float(parts[2])
    return GraphGenSpec(model=model, n=n, param=param)


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(" ", "").split(",") if tok)


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qrank",
        description="Hybrid quantum-classical network navigation experiments.",
    )
    p.add_argument("--command", choices=COMMANDS, help="experiment to run")
    p.add_argument("--config", help="JSON file with defaults for any option")
    p.add_argument("--graph", dest="graph_file", help="edge-list file to load")
    p.add_argument("--directed", dest="directed", action="store_true", default=None,
                   help="treat edge-list lines as directed (default)")
    p.add_argument("--undirected", dest="directed", action="store_false", default=None,
                   help="expand each edge-list line into both directions")
    p.add_argument("--gen", type=_parse_gen, metavar="MODEL,N,PARAM",
                   help="generate graphs instead of loading (ER,200,6 or BA,200,3)")
    p.add_argument("--seed", type=int, help="base RNG seed (member i uses seed+i)")
    p.add_argument("--alpha-grid", type=_parse_float_list, metavar="LIST",
                   help="comma-separated alpha values in (0,1]")
    p.add_argument("--alpha", type=float, help="alpha for single-alpha analyses (default 0.9)")
    p.add_argument("--q", type=float, help="damping of the long-hop mix (default 0.9)")
    p.add_argument("--ensemble", type=int, help="networks per sweep point (default 10)")
    p.add_argument("--sizes", type=_parse_int_list, metavar="LIST",
                   help="network sizes for the scaling command")
    p.add_argument("--dt", type=float, help="integration step (default 0.01)")
    p.add_argument("--epsilon", type=float, help="convergence threshold (default 1e-8)")
    p.add_argument("--max-time", type=float, help="abort horizon in time units (default 1e6)")
    p.add_argument("--check-stride", type=int, help="steps between convergence checks (default 10)")
    p.add_argument("--eps-tie", type=float, help="score resolution for tie groups (default 1e-6)")
    p.add_argument("--neighbors", choices=("out", "in", "total"),
                   help="neighborhood used by the neighbor profile (default out)")
    p.add_argument("--workers", type=int,
                   help="parallel processes over ensemble members (default: CPU count)")
    p.add_argument("--out", dest="out_dir", help="output directory for CSV tables and summary.json")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_values: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_values = json.load(fh)

    def pick(name, flag_value, default):
        if flag_value is not None:
            return flag_value
        if name in file_values:
            return file_values[name]
        return default

    gen = args.gen
    if gen is None and "gen" in file_values and file_values["gen"] is not None:
        g = file_values["gen"]
        gen = GraphGenSpec(model=g["model"], n=int(g["n"]), param=float(g["param"]),
                           seed=int(g.get("seed", 0)))

    integration = IntegrationConfig(
        dt=pick("dt", args.dt, 0.01),
        epsilon=pick("epsilon", args.epsilon, 1e-8),
        max_time=pick("max_time", args.max_time, 1e6),
        check_stride=pick("check_stride", args.check_stride, 10),
    )
    command = pick("command", args.command, None)
    if command is None:
        raise SystemExit("error: --command is required (or provide it in --config)")
    return ExperimentConfig(
        command=command,
        graph_file=pick("graph_file", args.graph_file, None),
        directed=pick("directed", args.directed, True),
        gen=gen,
        alpha_grid=tuple(pick("alpha_grid", args.alpha_grid, DEFAULT_ALPHA_GRID)),
        alpha=pick("alpha", args.alpha, 0.9),
        q=pick("q", args.q, 0.9),
        ensemble=pick("ensemble", args.ensemble, 10),
        seed=pick("seed", args.seed, 0),
        sizes=tuple(pick("sizes", args.sizes, DEFAULT_SIZES)),
        integration=integration,
        eps_tie=pick("eps_tie", args.eps_tie, 1e-6),
        neighbors=pick("neighbors", args.neighbors, "out"),
        workers=pick("workers", args.workers, os.cpu_count() or 1),
        out_dir=pick("out_dir", args.out_dir, None),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    outcome = run_command(cfg)
    failures = getattr(outcome, "failures", 0)
    _print_outcome(cfg, outcome)
    if failures:
        print(f"warning: {failures} integration(s) did not converge", file=sys.stderr)
        return 1
    return 0


def _print_outcome(cfg: ExperimentConfig, outcome):
    if cfg.command == "sweep":
        print("alpha,ratio,kendall_vs_pr")
        for a, r, k in zip(outcome.alphas, outcome.mean_ratio, outcome.mean_kendall):
            print(f"{a:g},{r:.6g},{k:.6g}")
        print(f"alpha_opt={outcome.alpha_opt}")
    elif cfg.command == "histogram":
        print("alpha_opt values:", ", ".join(f"{a:g}" for a in outcome.alpha_opts))
    elif cfg.command == "scaling":
        print("n,alpha_opt,ratio")
        for n, a, r in zip(outcome.sizes, outcome.alpha_opt, outcome.ratio_at_opt):
            print(f"{n},{a:g},{r:.6g}")
    elif cfg.command == "toy":
        g = outcome.graph
        print("node  rw_score   rw_pos  pr_score   pr_pos  qr_score   qr_pos")
        for i in range(g.n):
            print(
                f"{g.label_of(i):>4}  {outcome.rw.scores[i]:.6f} {outcome.rw.positions[i]:>6} "
                f"{outcome.pr.scores[i]:.6f} {outcome.pr.positions[i]:>6} "
                f"{outcome.qr.scores[i]:.6f} {outcome.qr.positions[i]:>6}"
            )
        for name, r in (("rw", outcome.rw), ("pr", outcome.pr), ("qr", outcome.qr)):
            groups = [grp for grp in outcome.tie_labels(r) if len(grp) > 1]
            print(f"{name} ties: {groups if groups else 'none'}")
    elif cfg.command == "report":
        print(f"n={outcome.graph.n}, tau_pr={outcome.tau_pr:.6g}")
        print(f"occupied positions: rw={len(outcome.rw.tie_groups)} "
              f"pr={len(outcome.pr.tie_groups)} qr={len(outcome.qr.tie_groups)}")
        print(f"nonzero shifts: {int((outcome.shifts != 0).sum())} of {outcome.graph.n}")
    if cfg.out_dir:
        print(f"outputs written to {cfg.out_dir}/")


if __name__ == "__main__":
    sys.exit(main())
