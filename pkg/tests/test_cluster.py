import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trajcurate import (
    CondensedDistanceMatrix,
    Dendrogram,
    Merge,
    cophenetic_distance,
    cophenetic_matrix,
    flat_clusters,
    format_dendrogram,
    refresh_partition,
    upgma_linkage,
)
from trajcurate.errors import ParseError, UnknownId, UnknownLeaf

from helpers import random_condensed, upgma_oracle

THREE_LEAF = CondensedDistanceMatrix(n=3, values=np.array([1.0, 5.0, 7.0]))


def assert_matches_oracle(tree, square, atol=1e-9):
    expected = upgma_oracle(square)
    assert len(tree.merges) == len(expected)
    for got, (left, right, height, size) in zip(tree.merges, expected):
        assert (got.left, got.right, got.size) == (left, right, size)
        assert got.height == pytest.approx(height, abs=atol)


def test_single_pair():
    m = CondensedDistanceMatrix(n=2, values=np.array([7.0]))
    tree = upgma_linkage(m)
    assert tree.merges == (Merge(0, 1, 7.0, 2),)


def test_single_leaf():
    tree = upgma_linkage(CondensedDistanceMatrix(n=1, values=np.array([])))
    assert tree.n_leaves == 1 and tree.merges == ()


def test_three_leaf_hand_example():
    tree = upgma_linkage(THREE_LEAF)
    assert tree.merges[0] == Merge(0, 1, 1.0, 2)
    assert tree.merges[1].height == pytest.approx(6.0)
    assert (tree.merges[1].left, tree.merges[1].right, tree.merges[1].size) == (3, 2, 3)


def test_ten_leaf_instance_matches_oracle():
    rng = np.random.default_rng(42)
    m = random_condensed(rng, 10)
    assert_matches_oracle(upgma_linkage(m), m.to_square())


def test_tie_break_all_equal_distances():
    # every pair at 5: merges chain up from the smallest leaves
    n = 4
    m = CondensedDistanceMatrix(n=n, values=np.full(n * (n - 1) // 2, 5.0))
    tree = upgma_linkage(m)
    assert tree.merges == (
        Merge(0, 1, 5.0, 2),
        Merge(4, 2, 5.0, 3),
        Merge(5, 3, 5.0, 4),
    )
    assert_matches_oracle(tree, m.to_square())


def test_cophenetic_basics():
    tree = upgma_linkage(THREE_LEAF)
    assert cophenetic_distance(tree, 1, 1) == 0.0
    assert cophenetic_distance(tree, 0, 1) == 1.0
    assert cophenetic_distance(tree, 0, 2) == 6.0
    assert cophenetic_distance(tree, 2, 0) == 6.0
    with pytest.raises(UnknownLeaf):
        cophenetic_distance(tree, 0, 3)
    with pytest.raises(UnknownLeaf):
        cophenetic_distance(tree, -1, 0)


def test_cophenetic_matrix_agrees_with_pointwise():
    rng = np.random.default_rng(7)
    m = random_condensed(rng, 12)
    tree = upgma_linkage(m)
    coph = cophenetic_matrix(tree)
    for i in range(12):
        for j in range(12):
            assert coph[i, j] == cophenetic_distance(tree, i, j)


def test_flat_clusters_extremes():
    tree = upgma_linkage(THREE_LEAF)
    whole = flat_clusters(tree, tau=6.0)
    assert set(whole.assignments.values()) == {0}
    shattered = flat_clusters(tree, tau=0.5)
    assert sorted(shattered.assignments.values()) == [0, 1, 2]
    assert shattered.singletons == {0, 1, 2}
    assert shattered.novel_clusters == frozenset()


def test_flat_clusters_three_leaf_split():
    tree = upgma_linkage(THREE_LEAF)
    p = flat_clusters(tree, tau=2.0, leaf_ids=["A", "B", "C"])
    assert p.assignments == {"A": 0, "B": 0, "C": 1}
    assert p.novel_clusters == {0}
    assert p.singletons == {"C"}
    assert p.familiar_clusters == frozenset()
    assert p.cluster_members(0) == ("A", "B")


def test_flat_cluster_boundary_inclusive():
    tree = upgma_linkage(THREE_LEAF)
    p = flat_clusters(tree, tau=1.0)
    assert p.assignments[0] == p.assignments[1]
    assert p.assignments[2] != p.assignments[0]


def test_flat_clusters_labeled_split():
    tree = upgma_linkage(THREE_LEAF)
    p = flat_clusters(tree, tau=2.0, labeled_ids={"A"}, leaf_ids=["A", "B", "C"])
    assert p.familiar_clusters == {0}
    assert p.novel_clusters == frozenset()
    assert p.singletons == {"C"}
    assert p.unlabeled_members(0) == ("B",)


def test_refresh_partition_cases():
    tree = upgma_linkage(THREE_LEAF)
    p = flat_clusters(tree, tau=2.0, leaf_ids=["A", "B", "C"])
    assert refresh_partition(p, []) == p
    # labeling one member of a novel cluster moves it to familiar
    p1 = refresh_partition(p, ["B"])
    assert p1.novel_clusters == frozenset()
    assert p1.familiar_clusters == {0}
    assert p1.singletons == {"C"}
    # labeling a singleton removes it from the novel side entirely
    p2 = refresh_partition(p, ["C"])
    assert p2.singletons == frozenset()
    assert p2.familiar_clusters == {1}
    assert p2.novel_clusters == {0}
    with pytest.raises(UnknownId):
        refresh_partition(p, ["Z"])


def test_refresh_equals_recut_with_grown_labels():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(4, 30))
        m = random_condensed(rng, n)
        tree = upgma_linkage(m)
        tau = float(rng.uniform(1, 10))
        labels0 = {int(i) for i in rng.choice(n, size=n // 4, replace=False)}
        extra = {int(i) for i in rng.choice(n, size=n // 5, replace=False)}
        p = flat_clusters(tree, tau, labeled_ids=labels0)
        merged = flat_clusters(tree, tau, labeled_ids=labels0 | extra)
        refreshed = refresh_partition(p, extra)
        assert refreshed.novel_clusters == merged.novel_clusters
        assert refreshed.singletons == merged.singletons
        assert refreshed.familiar_clusters == merged.familiar_clusters


def test_within_cluster_bound_and_maximality():
    rng = np.random.default_rng(13)
    for _ in range(25):
        n = int(rng.integers(3, 40))
        m = random_condensed(rng, n)
        tree = upgma_linkage(m)
        heights = [mg.height for mg in tree.merges]
        tau = float(rng.choice([rng.uniform(0, max(heights)), heights[len(heights) // 2]]))
        p = flat_clusters(tree, tau)
        coph = cophenetic_matrix(tree)
        labels = p.assignments
        for i in range(n):
            for j in range(i + 1, n):
                if labels[i] == labels[j]:
                    assert coph[i, j] <= tau
        # maximality: distinct clusters join above tau
        reps: dict[int, int] = {}
        for leaf, lab in labels.items():
            reps.setdefault(lab, leaf)
        rep_list = sorted(reps.values())
        for x in rep_list:
            for y in rep_list:
                if x < y:
                    assert coph[x, y] > tau


def test_merge_height_monotonicity():
    rng = np.random.default_rng(17)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        tree = upgma_linkage(random_condensed(rng, n))
        heights = [m.height for m in tree.merges]
        assert all(a <= b for a, b in zip(heights, heights[1:]))


@given(n=st.integers(2, 12), seed=st.integers(0, 2**16))
@settings(max_examples=40)
def test_linkage_matches_oracle_property(n, seed):
    rng = np.random.default_rng(seed)
    m = random_condensed(rng, n)
    assert_matches_oracle(upgma_linkage(m), m.to_square())


def test_upgma_duplicate_states_tie_plateau():
    # duplicate trajectory-states produce exact zero-distance ties; the
    # documented tie-break must still give one reproducible topology
    from trajcurate import pairwise_distances

    from helpers import stationary_state

    states = [stationary_state(f"d{i}", 0.0) for i in range(4)] + [
        stationary_state(f"e{i}", 50.0) for i in range(2)
    ]
    m = pairwise_distances(states)
    tree = upgma_linkage(m)
    assert upgma_linkage(m) == tree
    heights = [mg.height for mg in tree.merges]
    assert heights[:4] == [0.0, 0.0, 0.0, 0.0]
    assert heights[4] == pytest.approx(600.0)
    assert all(a <= b for a, b in zip(heights, heights[1:]))
    assert_matches_oracle(tree, m.to_square())
    # all duplicates land in one flat cluster even at tau = 0
    p = flat_clusters(tree, 0.0, leaf_ids=[s.id for s in states])
    assert p.assignments["d0"] == p.assignments["d3"]
    assert p.assignments["e0"] == p.assignments["e1"]
    assert p.assignments["d0"] != p.assignments["e0"]


def test_cophenetic_single_leaf():
    tree = upgma_linkage(CondensedDistanceMatrix(n=1, values=np.array([])))
    assert cophenetic_distance(tree, 0, 0) == 0.0


def test_dendrogram_validation():
    with pytest.raises(ParseError):
        Dendrogram(3, (Merge(0, 1, 1.0, 2),))  # missing a merge
    with pytest.raises(ParseError):
        Dendrogram(3, (Merge(0, 1, 2.0, 2), Merge(3, 2, 1.0, 3)))  # heights decrease
    with pytest.raises(ParseError):
        Dendrogram(3, (Merge(0, 0, 1.0, 2), Merge(3, 2, 2.0, 3)))  # child reused
    with pytest.raises(ParseError):
        Dendrogram(3, (Merge(0, 1, 1.0, 3), Merge(3, 2, 2.0, 3)))  # size wrong


def test_format_dendrogram():
    tree = upgma_linkage(THREE_LEAF)
    text = format_dendrogram(tree)
    assert text.splitlines() == ["0 1 1 2", "3 2 6 3"]
    third = upgma_linkage(
        CondensedDistanceMatrix(n=2, values=np.array([1.0 / 3.0]))
    )
    assert format_dendrogram(third) == f"0 1 {1.0 / 3.0:.17g} 2\n"
