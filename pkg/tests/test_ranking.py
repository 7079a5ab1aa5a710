import numpy as np
import pytest

from qrank.netgraph import DirectedGraph, GraphGenSpec, generate, google_matrix, transition_matrix
from qrank.lindblad import LindbladGenerator, hamiltonian_from_graph
from qrank.ranking import (
    degeneracy_profile,
    kendall_concordance,
    neighbor_profile,
    rank_from_scores,
    rank_shift,
)
from qrank.solver import classical_stationary, integrate_to_stationary


def label_groups(analysis, rank):
    return {frozenset(analysis.graph.label_of(i) for i in grp) for grp in rank.tie_groups}


class TestRankFromScores:
    def test_basic_tie(self):
        r = rank_from_scores(np.array([0.4, 0.3, 0.3]))
        assert r.positions.tolist() == [1, 2, 2]
        assert set(map(frozenset, r.tie_groups)) == {frozenset({0}), frozenset({1, 2})}

    def test_competition_positions(self):
        r = rank_from_scores(np.array([0.1, 0.3, 0.3, 0.3]))
        assert r.positions.tolist() == [4, 1, 1, 1]

    def test_negative_score_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            rank_from_scores(np.array([0.5, -0.1, 0.6]))

    def test_tiny_negative_tolerated(self):
        r = rank_from_scores(np.array([1.0, -1e-10]))
        assert r.positions.tolist() == [1, 2]

    def test_scale_and_shift_invariance(self):
        scores = np.array([0.4, 0.3, 0.3, 0.1])  # one exact tie, clear gaps
        base = rank_from_scores(scores)
        for transformed in (scores * 7.3, scores + 2.0, scores * 0.5 + 5.0):
            r = rank_from_scores(transformed)
            assert np.array_equal(r.order, base.order)
            assert np.array_equal(r.positions, base.positions)
            assert r.tie_groups == base.tie_groups

    def test_order_sorted_descending(self):
        scores = np.array([0.2, 0.5, 0.3])
        r = rank_from_scores(scores)
        assert np.all(np.diff(scores[r.order]) <= 0)
        assert sum(len(g) for g in r.tie_groups) == 3

    def test_toy_rw_couples(self, toy_analysis):
        groups = label_groups(toy_analysis, toy_analysis.rw)
        assert frozenset({"5", "7"}) in groups
        assert frozenset({"6", "8"}) in groups

    def test_toy_qr_splits_periphery(self, toy_analysis):
        # at alpha=0.9 each peripheral node gets its own score; only the
        # exactly automorphic core pair {1,4} stays tied
        groups = label_groups(toy_analysis, toy_analysis.qr09)
        for label in ("5", "6", "7", "8"):
            assert frozenset({label}) in groups
        assert frozenset({"1", "4"}) in groups
        assert len(toy_analysis.qr09.tie_groups) == 7


class TestKendallConcordance:
    def test_identical_is_one(self):
        r = rank_from_scores(np.array([0.5, 0.3, 0.2]))
        assert kendall_concordance(r, r) == 1.0

    def test_exact_reversal_is_zero(self):
        a = rank_from_scores(np.array([0.4, 0.3, 0.2, 0.1]))
        b = rank_from_scores(np.array([0.1, 0.2, 0.3, 0.4]))
        assert abs(kendall_concordance(a, b)) < 1e-12

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        a = rank_from_scores(rng.random(15))
        b = rank_from_scores(rng.random(15))
        assert kendall_concordance(a, b) == pytest.approx(kendall_concordance(b, a), abs=1e-12)

    def test_one_only_for_identical_positions(self):
        # same order but different tie structure must score below 1
        a = rank_from_scores(np.array([0.4, 0.3, 0.3, 0.1]))
        b = rank_from_scores(np.array([0.4, 0.31, 0.29, 0.1]))
        assert kendall_concordance(a, b) < 1.0

    def test_constant_rankings(self):
        a = rank_from_scores(np.full(4, 0.25))
        b = rank_from_scores(np.full(4, 0.25))
        assert kendall_concordance(a, b) == 1.0
        c = rank_from_scores(np.array([0.4, 0.3, 0.2, 0.1]))
        assert kendall_concordance(a, c) == 0.5

    def test_size_mismatch(self):
        a = rank_from_scores(np.array([0.5, 0.5]))
        b = rank_from_scores(np.array([0.4, 0.3, 0.3]))
        with pytest.raises(ValueError):
            kendall_concordance(a, b)

    def test_classical_limit_agrees_with_reference(self):
        for spec in (GraphGenSpec("ER", 30, 4, seed=2), GraphGenSpec("BA", 30, 2, seed=2)):
            g = generate(spec)
            gm = google_matrix(transition_matrix(g), 0.9)
            gen = LindbladGenerator(hamiltonian_from_graph(g), gm, 1.0)
            qr = rank_from_scores(integrate_to_stationary(gen).scores)
            pr = rank_from_scores(classical_stationary(gm, 1e-12))
            assert kendall_concordance(qr, pr) == 1.0


class TestRankShift:
    def test_identical_all_zero(self):
        r = rank_from_scores(np.array([0.5, 0.3, 0.2]))
        assert np.all(rank_shift(r, r) == 0)

    def test_antisymmetry(self):
        rng = np.random.default_rng(3)
        a = rank_from_scores(rng.random(12))
        b = rank_from_scores(rng.random(12))
        assert np.array_equal(rank_shift(a, b), -rank_shift(b, a))

    def test_toy_node5_promoted_mid_alpha(self, toy_analysis):
        # in the mid-alpha window the hybrid walk puts node 5 at the head
        # of the periphery while the damped walk kept node 7 there
        gen = LindbladGenerator(toy_analysis.h, toy_analysis.gm, 0.7)
        qr = rank_from_scores(integrate_to_stationary(gen).scores)
        shift = rank_shift(qr, toy_analysis.pr)
        assert shift[4] > 0  # node "5" is index 4


class TestDegeneracyProfile:
    def test_all_distinct(self):
        r = rank_from_scores(np.array([0.4, 0.3, 0.2, 0.1]))
        assert degeneracy_profile(r) == {1: 1, 2: 1, 3: 1, 4: 1}

    def test_counts_sum_to_n(self):
        rng = np.random.default_rng(4)
        scores = np.round(rng.random(30), 1)  # force plenty of ties
        r = rank_from_scores(scores / scores.sum())
        profile = degeneracy_profile(r)
        assert sum(profile.values()) == 30
        assert len(profile) == len(r.tie_groups)

    def test_complete_graph_single_position(self):
        edges = tuple((i, j) for i in range(4) for j in range(4) if i != j)
        pi = transition_matrix(DirectedGraph(n=4, edges=edges))
        r = rank_from_scores(classical_stationary(google_matrix(pi, 0.9)))
        assert degeneracy_profile(r) == {1: 4}

    def test_toy_profiles(self, toy_analysis):
        # the plain walk ties three couples exactly: {1,4}, {5,7}, {6,8}
        rw_profile = degeneracy_profile(toy_analysis.rw)
        assert sorted(rw_profile.values()) == [1, 1, 2, 2, 2]
        # the damped walk splits (5,7); the hybrid walk also splits (6,8)
        assert len(degeneracy_profile(toy_analysis.pr)) == 6
        assert len(degeneracy_profile(toy_analysis.qr09)) == 7


def test_ranking_to_csv(tmp_path):
    import io

    from qrank.ranking import ranking_to_csv

    r = rank_from_scores(np.array([0.4, 0.3, 0.3]))
    buf = io.StringIO()
    ranking_to_csv(r, buf, labels=("a", "b", "c"))
    lines = buf.getvalue().splitlines()
    assert lines[0] == "node,score,position,tie_group"
    assert lines[1].startswith("a,0.4,1,0")
    # tied nodes b and c share position 2 and one tie-group id
    assert {line.split(",")[2] for line in lines[2:]} == {"2"}
    assert {line.split(",")[3] for line in lines[2:]} == {"1"}


class TestNeighborProfile:
    def star(self, k):
        edges = tuple((0, i) for i in range(1, k + 1)) + tuple((i, 0) for i in range(1, k + 1))
        return DirectedGraph(n=k + 1, edges=edges)

    def test_star_leaf_sees_center(self):
        g = self.star(5)
        scores = np.array([0.5] + [0.1] * 5)
        r = rank_from_scores(scores)
        nn_score, nn_degree, ratio = neighbor_profile(g, r)
        assert nn_score[1] == 0.5  # leaf's only neighbor is the center
        assert nn_degree[1] == 10  # center total degree: 5 out + 5 in
        assert nn_score[0] == pytest.approx(0.1)

    def test_single_neighbor_arithmetic(self):
        # node 0's only neighbor has score 0.1 and total degree 5
        g = DirectedGraph(n=4, edges=((0, 1), (1, 2), (1, 3), (2, 1), (3, 1)))
        r = rank_from_scores(np.array([0.5, 0.1, 0.2, 0.2]))
        nn_score, nn_degree, ratio = neighbor_profile(g, r)
        assert nn_score[0] == pytest.approx(0.1)
        assert nn_degree[0] == pytest.approx(5)
        assert ratio[0] == pytest.approx(0.02)

    def test_isolated_node_flagged_nan(self):
        g = DirectedGraph(n=3, edges=((0, 1),))
        r = rank_from_scores(np.array([0.5, 0.4, 0.1]))
        nn_score, nn_degree, ratio = neighbor_profile(g, r)
        assert np.isnan(nn_score[2]) and np.isnan(ratio[2])
        assert np.isnan(nn_score[1])  # node 1 has no out-neighbors

    def test_neighbor_modes(self):
        g = DirectedGraph(n=3, edges=((0, 1), (2, 0)))
        r = rank_from_scores(np.array([0.5, 0.3, 0.2]))
        out_score, _, _ = neighbor_profile(g, r, "out")
        in_score, _, _ = neighbor_profile(g, r, "in")
        total_score, _, _ = neighbor_profile(g, r, "total")
        assert out_score[0] == pytest.approx(0.3)
        assert in_score[0] == pytest.approx(0.2)
        assert total_score[0] == pytest.approx(0.25)

    def test_mode_validation(self):
        g = DirectedGraph(n=2, edges=((0, 1),))
        r = rank_from_scores(np.array([0.6, 0.4]))
        with pytest.raises(ValueError):
            neighbor_profile(g, r, "sideways")

    def test_promoted_nodes_sit_near_strong_modest_neighbors(self, ba200_analysis):
        # nodes lifted by the hybrid ranking connect to well-scored but
        # moderately connected neighbors; demoted ones hang off hubs
        a = ba200_analysis
        shifts = rank_shift(a.qr09, a.pr)
        _, _, ratio = neighbor_profile(a.graph, a.qr09)
        promoted = ratio[shifts > 0]
        demoted = ratio[shifts < 0]
        assert len(promoted) > 5 and len(demoted) > 5
        assert np.median(promoted) > np.median(demoted)
