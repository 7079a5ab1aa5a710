"""Experiment drivers behind the CLI: alpha sweeps with convergence-time
ratios, optimal-alpha histograms, size scaling, the 8-node reference graph,
and full per-network comparison reports.

Every run is deterministic given its configuration: ensemble member i uses
seed ``cfg.seed + i``. Results are returned in memory and, when an output
directory is configured, also written as CSV tables plus one JSON summary
with a versioned schema.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .lindblad import LindbladGenerator, hamiltonian_from_graph
from .netgraph import DirectedGraph, GraphGenSpec, generate, google_matrix, load_edge_list, transition_matrix
from .ranking import RankResult, degeneracy_profile, kendall_concordance, neighbor_profile, rank_from_scores, rank_shift
from .solver import IntegrationConfig, classical_convergence_time, classical_stationary, integrate_to_stationary

SCHEMA_VERSION = 1

DEFAULT_ALPHA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 21))
DEFAULT_SIZES = (50, 100, 150, 200)

# Precision used by classical power iteration when it provides the
# reference ranking; tight enough that tie groups are resolution-stable.
STATIONARY_EPS = 1e-12

COMMANDS = ("sweep", "histogram", "scaling", "toy", "report")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = "sweep"
    graph_file: str | None = None
    directed: bool = True
    gen: GraphGenSpec | None = None
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    alpha: float = 0.9
    q: float = 0.9
    ensemble: int = 10
    seed: int = 0
    sizes: tuple[int, ...] = DEFAULT_SIZES
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    eps_tie: float = 1e-6
    neighbors: str = "out"
    workers: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.alpha_grid or not all(0.0 < a <= 1.0 for a in self.alpha_grid):
            raise ValueError("alpha_grid values must lie in (0, 1]")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.ensemble < 1:
            raise ValueError("ensemble must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def toy_graph() -> DirectedGraph:
    """The 8-node reference graph: a complete directed core on nodes 1-4,
    a peripheral cycle 5->7->6->5, a core-to-periphery link 3->5, and a
    return path 7->8->2 (labels are 1-indexed, arrays 0-indexed)."""
    core = [(i, j) for i in range(4) for j in range(4) if i != j]
    periphery = [(2, 4), (5, 4), (4, 6), (6, 5), (6, 7), (7, 1)]
    return DirectedGraph(
        n=8,
        edges=tuple(core + periphery),
        labels=tuple(str(i + 1) for i in range(8)),
    )


def bundled_graph_path(name: str) -> Path:
    """Filesystem path of a bundled sample edge list ("toy", "ba200", "er128")."""
    ref = resources.files("qrank.data").joinpath(f"{name}.edges")
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled graph named {name!r}")
    return Path(str(ref))


def bundled_graph(name: str) -> DirectedGraph:
    return load_edge_list(bundled_graph_path(name))


# ---------------------------------------------------------------------------
# per-network machinery


@dataclass
class MemberResult:
    """Sweep of one network: tau_pr plus per-alpha tau/ratio/kendall rows."""

    seed: int
    n: int
    tau_pr: float
    alphas: list[float]
    tau_qr: list[float]
    converged: list[bool]
    kendall: list[float]

    @property
    def ratios(self) -> list[float]:
        return [t / self.tau_pr for t in self.tau_qr]

    def alpha_opt(self) -> float | None:
        """Grid alpha minimizing this member's ratio, over converged points."""
        best = None
        for a, t, ok in zip(self.alphas, self.tau_qr, self.converged):
            if ok and (best is None or t < best[1]):
                best = (a, t)
        return None if best is None else best[0]


def _resolve_graph(cfg: ExperimentConfig, member: int = 0) -> DirectedGraph:
    if cfg.graph_file is not None:
        return load_edge_list(cfg.graph_file, directed=cfg.directed)
    if cfg.gen is not None:
        spec = replace(cfg.gen, seed=cfg.seed + member)
        return generate(spec)
    raise ValueError("no graph source: provide a graph file or a generation spec")


def _network_operators(g: DirectedGraph, q: float):
    pi = transition_matrix(g)
    gm = google_matrix(pi, q)
    h = hamiltonian_from_graph(g)
    return pi, gm, h


def _member_sweep(payload) -> MemberResult:
    cfg, member = payload
    g = _resolve_graph(cfg, member)
    _, gm, h = _network_operators(g, cfg.q)
    tau_pr = classical_convergence_time(gm, cfg.integration).tau
    pr_rank = rank_from_scores(classical_stationary(gm, STATIONARY_EPS), cfg.eps_tie)
    tau_qr, converged, kendall = [], [], []
    for a in cfg.alpha_grid:
        res = integrate_to_stationary(LindbladGenerator(h, gm, a), cfg.integration)
        tau_qr.append(res.tau)
        converged.append(res.converged)
        if res.converged:
            kendall.append(kendall_concordance(rank_from_scores(res.scores, cfg.eps_tie), pr_rank))
        else:
            kendall.append(math.nan)
    return MemberResult(
        seed=cfg.seed + member,
        n=g.n,
        tau_pr=tau_pr,
        alphas=list(cfg.alpha_grid),
        tau_qr=tau_qr,
        converged=converged,
        kendall=kendall,
    )


def _run_members(cfg: ExperimentConfig) -> list[MemberResult]:
    n_members = 1 if cfg.graph_file is not None else cfg.ensemble
    payloads = [(cfg, i) for i in range(n_members)]
    if cfg.workers > 1 and n_members > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, n_members)) as ex:
            return list(ex.map(_member_sweep, payloads))
    return [_member_sweep(p) for p in payloads]


def _mean_over_converged(members: list[MemberResult], extract) -> list[float]:
    """Per-alpha mean of extract(member)[k] over members converged at k."""
    n_alpha = len(members[0].alphas)
    out = []
    for k in range(n_alpha):
        vals = [extract(m)[k] for m in members if m.converged[k]]
        out.append(float(np.mean(vals)) if vals else math.nan)
    return out


def _argmin_alpha(alphas, values) -> float | None:
    best = None
    for a, v in zip(alphas, values):
        if not math.isnan(v) and (best is None or v < best[1]):
            best = (a, v)
    return None if best is None else best[0]


# ---------------------------------------------------------------------------
# commands


@dataclass
class SweepOutcome:
    alphas: list[float]
    mean_tau_qr: list[float]
    mean_tau_pr: float
    mean_ratio: list[float]
    mean_kendall: list[float]
    converged_counts: list[int]
    alpha_opt: float | None
    members: list[MemberResult]

    @property
    def failures(self) -> int:
        return sum(len(m.converged) - sum(m.converged) for m in self.members)


def run_sweep(cfg: ExperimentConfig) -> SweepOutcome:
    """Tau ratio and concordance versus alpha, ensemble-averaged."""
    members = _run_members(cfg)
    mean_ratio = _mean_over_converged(members, lambda m: m.ratios)
    outcome = SweepOutcome(
        alphas=list(cfg.alpha_grid),
        mean_tau_qr=_mean_over_converged(members, lambda m: m.tau_qr),
        mean_tau_pr=float(np.mean([m.tau_pr for m in members])),
        mean_ratio=mean_ratio,
        mean_kendall=_mean_over_converged(members, lambda m: m.kendall),
        converged_counts=[sum(m.converged[k] for m in members) for k in range(len(cfg.alpha_grid))],
        alpha_opt=_argmin_alpha(cfg.alpha_grid, mean_ratio),
        members=members,
    )
    if cfg.out_dir is not None:
        _write_sweep(cfg, outcome)
    return outcome


@dataclass
class HistogramOutcome:
    alpha_opts: list[float]
    bin_edges: list[float]
    counts: list[int]
    members: list[MemberResult]

    @property
    def failures(self) -> int:
        return sum(len(m.converged) - sum(m.converged) for m in self.members)


def run_histogram(cfg: ExperimentConfig) -> HistogramOutcome:
    """Distribution of the per-network optimal alpha over the ensemble.

    Each member's alpha_opt is the grid argmin of its own ratio curve, so
    bins are centered on grid values (edges at grid midpoints).
    """
    members = _run_members(cfg)
    alpha_opts = [m.alpha_opt() for m in members if m.alpha_opt() is not None]
    grid = sorted(cfg.alpha_grid)
    edges = [grid[0] - (grid[1] - grid[0]) / 2 if len(grid) > 1 else grid[0] - 0.025]
    for i in range(len(grid) - 1):
        edges.append((grid[i] + grid[i + 1]) / 2)
    edges.append(grid[-1] + (grid[-1] - grid[-2]) / 2 if len(grid) > 1 else grid[-1] + 0.025)
    counts, _ = np.histogram(alpha_opts, bins=edges)
    outcome = HistogramOutcome(
        alpha_opts=alpha_opts,
        bin_edges=[float(e) for e in edges],
        counts=[int(c) for c in counts],
        members=members,
    )
    if cfg.out_dir is not None:
        _write_histogram(cfg, outcome)
    return outcome


@dataclass
class ScalingOutcome:
    sizes: list[int]
    alpha_opt: list[float]
    ratio_at_opt: list[float]
    failures: int


def run_scaling(cfg: ExperimentConfig) -> ScalingOutcome:
    """Ratio at the optimal alpha as a function of network size (BA graphs)."""
    template = cfg.gen or GraphGenSpec("BA", 200, 3, seed=cfg.seed)
    sizes, opts, ratios, failures = [], [], [], 0
    for n in cfg.sizes:
        sub = replace(cfg, gen=replace(template, n=n), graph_file=None, out_dir=None)
        outcome = run_sweep(sub)
        failures += outcome.failures
        if outcome.alpha_opt is None:
            raise RuntimeError(f"no alpha converged for n={n}")
        k = outcome.alphas.index(outcome.alpha_opt)
        sizes.append(n)
        opts.append(outcome.alphas[k])
        ratios.append(outcome.mean_ratio[k])
    result = ScalingOutcome(sizes=sizes, alpha_opt=opts, ratio_at_opt=ratios, failures=failures)
    if cfg.out_dir is not None:
        _write_scaling(cfg, result)
    return result


@dataclass
class ToyOutcome:
    graph: DirectedGraph
    rw: RankResult
    pr: RankResult
    qr: RankResult
    alpha: float

    def tie_labels(self, r: RankResult) -> list[tuple[str, ...]]:
        return [tuple(self.graph.label_of(i) for i in grp) for grp in r.tie_groups]


def run_toy(cfg: ExperimentConfig) -> ToyOutcome:
    """Rank the 8-node reference graph under the plain walk, the damped
    walk, and the hybrid walk at cfg.alpha."""
    g = toy_graph()
    pi, gm, h = _network_operators(g, cfg.q)
    rw_scores = classical_stationary(pi, STATIONARY_EPS)
    pr_scores = classical_stationary(gm, STATIONARY_EPS)
    qr_res = integrate_to_stationary(LindbladGenerator(h, gm, cfg.alpha), cfg.integration)
    outcome = ToyOutcome(
        graph=g,
        rw=rank_from_scores(rw_scores, cfg.eps_tie),
        pr=rank_from_scores(pr_scores, cfg.eps_tie),
        qr=rank_from_scores(qr_res.scores, cfg.eps_tie),
        alpha=cfg.alpha,
    )
    if cfg.out_dir is not None:
        _write_toy(cfg, outcome)
    return outcome


@dataclass
class ReportOutcome:
    graph: DirectedGraph
    alphas: list[float]
    ratio: list[float]
    kendall: list[float]
    converged: list[bool]
    tau_pr: float
    rw: RankResult
    pr: RankResult
    qr: RankResult
    shifts: np.ndarray
    nn_score: np.ndarray
    nn_degree: np.ndarray
    nn_ratio: np.ndarray
    alpha: float

    @property
    def failures(self) -> int:
        return sum(not ok for ok in self.converged)


def run_report(cfg: ExperimentConfig) -> ReportOutcome:
    """Full comparison report for one network file: ratio and concordance
    curves over the alpha grid, degeneracy profiles of all three rankings,
    per-node shifts between the hybrid and damped-walk rankings, and
    neighbor score/degree profiles."""
    if cfg.graph_file is None:
        raise ValueError("report requires a graph file")
    g = load_edge_list(cfg.graph_file, directed=cfg.directed)
    pi, gm, h = _network_operators(g, cfg.q)

    member = _member_sweep((replace(cfg, out_dir=None), 0))
    rw = rank_from_scores(classical_stationary(pi, STATIONARY_EPS), cfg.eps_tie)
    pr = rank_from_scores(classical_stationary(gm, STATIONARY_EPS), cfg.eps_tie)
    qr_res = integrate_to_stationary(LindbladGenerator(h, gm, cfg.alpha), cfg.integration)
    qr = rank_from_scores(qr_res.scores, cfg.eps_tie)
    shifts = rank_shift(qr, pr)
    nn_score, nn_degree, nn_ratio = neighbor_profile(g, qr, cfg.neighbors)

    outcome = ReportOutcome(
        graph=g,
        alphas=member.alphas,
        ratio=member.ratios,
        kendall=member.kendall,
        converged=member.converged,
        tau_pr=member.tau_pr,
        rw=rw,
        pr=pr,
        qr=qr,
        shifts=shifts,
        nn_score=nn_score,
        nn_degree=nn_degree,
        nn_ratio=nn_ratio,
        alpha=cfg.alpha,
    )
    if cfg.out_dir is not None:
        _write_report(cfg, outcome)
    return outcome


def run_command(cfg: ExperimentConfig):
    runner = {
        "sweep": run_sweep,
        "histogram": run_histogram,
        "scaling": run_scaling,
        "toy": run_toy,
        "report": run_report,
    }[cfg.command]
    return runner(cfg)


# ---------------------------------------------------------------------------
# output writing


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _write_csv(path: Path, header: list[str], rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["integration"] = asdict(cfg.integration)
    if cfg.gen is not None:
        d["gen"] = asdict(cfg.gen)
    return d


def _write_summary(cfg: ExperimentConfig, payload: dict, failures: int):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "config": _config_dict(cfg),
        "failures": failures,
        **payload,
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON-serializable: {type(x)}")


def _write_sweep(cfg: ExperimentConfig, o: SweepOutcome):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "sweep.csv",
        ["alpha", "tau_qr", "tau_pr", "ratio", "kendall_vs_pr", "converged", "ensemble"],
        [
            (a, tq, o.mean_tau_pr, r, k, c, len(o.members))
            for a, tq, r, k, c in zip(
                o.alphas, o.mean_tau_qr, o.mean_ratio, o.mean_kendall, o.converged_counts
            )
        ],
    )
    _write_csv(
        out / "sweep_members.csv",
        ["seed", "alpha", "tau_qr", "tau_pr", "ratio", "kendall_vs_pr", "converged"],
        [
            (m.seed, a, tq, m.tau_pr, tq / m.tau_pr, k, ok)
            for m in o.members
            for a, tq, k, ok in zip(m.alphas, m.tau_qr, m.kendall, m.converged)
        ],
    )
    _write_summary(
        cfg,
        {"alpha_opt": o.alpha_opt, "min_ratio": (None if o.alpha_opt is None else min(
            v for v in o.mean_ratio if not math.isnan(v)))},
        o.failures,
    )


def _write_histogram(cfg: ExperimentConfig, o: HistogramOutcome):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    total = max(sum(o.counts), 1)
    grid = sorted(cfg.alpha_grid)
    _write_csv(
        out / "histogram.csv",
        ["bin_left", "bin_right", "alpha", "count", "probability"],
        [
            (o.bin_edges[i], o.bin_edges[i + 1], grid[i], o.counts[i], o.counts[i] / total)
            for i in range(len(o.counts))
        ],
    )
    _write_summary(cfg, {"alpha_opts": o.alpha_opts}, o.failures)


def _write_scaling(cfg: ExperimentConfig, o: ScalingOutcome):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "scaling.csv",
        ["n", "alpha_opt", "ratio"],
        list(zip(o.sizes, o.alpha_opt, o.ratio_at_opt)),
    )
    _write_summary(cfg, {"sizes": o.sizes, "ratio_at_opt": o.ratio_at_opt}, o.failures)


def _group_ids(r: RankResult) -> dict[int, int]:
    return {node: gid for gid, grp in enumerate(r.tie_groups) for node in grp}


def _write_toy(cfg: ExperimentConfig, o: ToyOutcome):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gids = {name: _group_ids(r) for name, r in (("rw", o.rw), ("pr", o.pr), ("qr", o.qr))}
    rows = []
    for i in range(o.graph.n):
        row = [o.graph.label_of(i)]
        for name, r in (("rw", o.rw), ("pr", o.pr), ("qr", o.qr)):
            row += [r.scores[i], int(r.positions[i]), gids[name][i]]
        rows.append(row)
    _write_csv(
        out / "toy.csv",
        ["node", "rw_score", "rw_position", "rw_tie_group",
         "pr_score", "pr_position", "pr_tie_group",
         "qr_score", "qr_position", "qr_tie_group"],
        rows,
    )
    _write_summary(
        cfg,
        {
            "alpha": o.alpha,
            "tie_groups": {
                "rw": o.tie_labels(o.rw),
                "pr": o.tie_labels(o.pr),
                "qr": o.tie_labels(o.qr),
            },
        },
        0,
    )


def _write_report(cfg: ExperimentConfig, o: ReportOutcome):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "report_curves.csv",
        ["alpha", "tau_qr", "tau_pr", "ratio", "kendall_vs_pr", "converged"],
        [
            (a, r * o.tau_pr, o.tau_pr, r, k, c)
            for a, r, k, c in zip(o.alphas, o.ratio, o.kendall, o.converged)
        ],
    )
    deg_rows = []
    for name, r in (("rw", o.rw), ("pr", o.pr), ("qr", o.qr)):
        for pos, count in degeneracy_profile(r).items():
            deg_rows.append((name, pos, count))
    _write_csv(out / "report_degeneracy.csv", ["method", "position", "count"], deg_rows)
    _write_csv(
        out / "report_shifts.csv",
        ["node", "qr_position", "pr_position", "shift"],
        [
            (o.graph.label_of(i), int(o.qr.positions[i]), int(o.pr.positions[i]), int(o.shifts[i]))
            for i in range(o.graph.n)
        ],
    )
    _write_csv(
        out / "report_neighbors.csv",
        ["node", "score", "nn_score", "nn_degree", "nn_ratio", "shift"],
        [
            (o.graph.label_of(i), o.qr.scores[i], o.nn_score[i], o.nn_degree[i],
             o.nn_ratio[i], int(o.shifts[i]))
            for i in range(o.graph.n)
        ],
    )
    ratios = [r for r, c in zip(o.ratio, o.converged) if c]
    _write_summary(
        cfg,
        {
            "alpha": o.alpha,
            "alpha_opt": _argmin_alpha(o.alphas, [r if c else math.nan for r, c in zip(o.ratio, o.converged)]),
            "min_ratio": min(ratios) if ratios else None,
            "positions": {
                "rw": len(o.rw.tie_groups),
                "pr": len(o.pr.tie_groups),
                "qr": len(o.qr.tie_groups),
            },
            "nonzero_shifts": int(np.count_nonzero(o.shifts)),
        },
        o.failures,
    )
