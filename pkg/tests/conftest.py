from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from qrank.experiments import bundled_graph, toy_graph, _network_operators
from qrank.lindblad import LindbladGenerator
from qrank.ranking import RankResult, rank_from_scores
from qrank.solver import IntegrationConfig, classical_convergence_time, classical_stationary, integrate_to_stationary


@dataclass
class NetworkAnalysis:
    """One network, fully analyzed: operators, classical rankings, and the
    hybrid ranking at alpha=0.9 plus tau/kendall curves over a grid."""

    graph: object
    pi: np.ndarray
    gm: np.ndarray
    h: np.ndarray
    rw: RankResult
    pr: RankResult
    qr09: RankResult
    alphas: list
    tau_qr: list
    tau_pr: float
    kendall: list


ANALYSIS_GRID = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0]


def _analyze(graph, grid=ANALYSIS_GRID, q=0.9) -> NetworkAnalysis:
    from qrank.ranking import kendall_concordance

    pi, gm, h = _network_operators(graph, q)
    cfg = IntegrationConfig()
    rw = rank_from_scores(classical_stationary(pi, 1e-12))
    pr = rank_from_scores(classical_stationary(gm, 1e-12))
    tau_pr = classical_convergence_time(gm, cfg).tau
    tau_qr, kendall, qr09 = [], [], None
    for a in grid:
        res = integrate_to_stationary(LindbladGenerator(h, gm, a), cfg)
        assert res.converged, f"alpha={a} did not converge"
        rank = rank_from_scores(res.scores)
        if a == 0.9:
            qr09 = rank
        tau_qr.append(res.tau)
        kendall.append(kendall_concordance(rank, pr))
    return NetworkAnalysis(
        graph=graph, pi=pi, gm=gm, h=h, rw=rw, pr=pr, qr09=qr09,
        alphas=list(grid), tau_qr=tau_qr, tau_pr=tau_pr, kendall=kendall,
    )


@pytest.fixture(scope="session")
def toy_analysis() -> NetworkAnalysis:
    return _analyze(toy_graph())


@pytest.fixture(scope="session")
def ba200_analysis() -> NetworkAnalysis:
    return _analyze(bundled_graph("ba200"))


@pytest.fixture(scope="session")
def er128_analysis() -> NetworkAnalysis:
    return _analyze(bundled_graph("er128"))
