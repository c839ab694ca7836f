"""Shared test fixtures and the independent UPGMA oracle."""

from __future__ import annotations

import numpy as np

from trajcurate import (
    CondensedDistanceMatrix,
    TrajectoryPool,
    TrajectoryState,
    flat_clusters,
    pairwise_distances,
    refresh_partition,
    sampling_round,
    upgma_linkage,
)
from trajcurate.sampling import (
    PHASE_FALLBACK,
    PHASE_FAMILIAR,
    PHASE_NOVEL_CLUSTER,
    PHASE_NOVEL_SINGLETON,
    SamplingConfig,
    cluster_cap,
    round_half_up,
)

BASE_LINE = tuple((float(k), 0.0) for k in range(12))


def make_state(id_, offset=(0.0, 0.0), v=0.0, a=0.0, h=0.0, points=BASE_LINE):
    ox, oy = offset
    return TrajectoryState(
        id=id_, points=tuple((x + ox, y + oy) for x, y in points), v=v, a=a, h=h
    )


def stationary_state(id_, x, y=0.0, v=0.0, a=0.0, h=0.0):
    """Constant-position trajectory: pairwise distance is 12x the offset."""
    return TrajectoryState(id=id_, points=tuple((x, y) for _ in range(12)), v=v, a=a, h=h)


def random_states(rng, n, scale=50.0):
    states = []
    for i in range(n):
        pts = rng.uniform(-scale, scale, size=(12, 2))
        v, a, h = rng.uniform(0, 20), rng.uniform(-5, 5), rng.uniform(-0.5, 0.5)
        states.append(
            TrajectoryState(
                id=f"r{i:04d}", points=tuple(map(tuple, pts)), v=v, a=a, h=h
            )
        )
    return states


def random_condensed(rng, n, lo=1.0, hi=10.0):
    values = rng.uniform(lo, hi, size=n * (n - 1) // 2)
    return CondensedDistanceMatrix(n=n, values=values)


def upgma_oracle(square):
    """Naive average-linkage oracle: recompute every cluster-pair mean each step.

    Independent of the production path: block means come straight from the
    base matrix instead of a Lance-Williams recursion. Tie-break and child
    ordering follow the documented rules (lexicographically smallest
    (min member, max member), then the larger of the two cluster minima;
    left child is the one with the smaller minimum member).
    Returns a list of (left, right, height, size) tuples.
    """
    d0 = np.asarray(square, dtype=np.float64)
    n = d0.shape[0]
    members = {i: [i] for i in range(n)}
    merges = []
    next_node = n
    while len(members) > 1:
        act = sorted(members)
        k = len(act)
        ind = np.zeros((k, n))
        for r, nid in enumerate(act):
            ind[r, members[nid]] = 1.0
        sums = ind @ d0 @ ind.T
        sizes = ind.sum(axis=1)
        means = sums / np.outer(sizes, sizes)
        np.fill_diagonal(means, np.inf)
        h = means.min()
        best = None
        # blas matmuls are not exactly symmetric; treat pairs as unordered
        for r, c in np.argwhere(means == h):
            if r > c:
                r, c = c, r
            ma, mb = members[act[r]], members[act[c]]
            key = (min(ma[0], mb[0]), max(ma[-1], mb[-1]), max(ma[0], mb[0]))
            if best is None or key < best[0]:
                best = (key, act[r], act[c])
        _, a, b = best
        ma, mb = members.pop(a), members.pop(b)
        left, right = (a, b) if ma[0] <= mb[0] else (b, a)
        merges.append((left, right, float(h), len(ma) + len(mb)))
        members[next_node] = sorted(ma + mb)
        next_node += 1
    return merges


def structured_pool(rng):
    """Pool with far-apart groups so flat clusters at tau=10 are the groups."""
    n_groups = int(rng.integers(2, 7))
    items, group_ids = [], []
    for g in range(n_groups):
        size = int(rng.integers(1, 9))
        ids = []
        for i in range(size):
            sid = f"g{g}i{i}"
            items.append(stationary_state(sid, x=g * 100.0 + 0.05 * i))
            ids.append(sid)
        group_ids.append(ids)
    all_ids = [s.id for s in items]
    labeled = frozenset(i for i in all_ids if rng.random() < 0.25)
    if labeled == set(all_ids):  # keep at least one unlabeled
        labeled = labeled - {sorted(labeled)[0]}
    return TrajectoryPool(tuple(items), labeled)


ALPHA_GRID = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
BETA_GRID = (0.2, 0.4, 0.6, 0.8, 1.0)


def check_round_invariants(fix_seed, check_determinism=False):
    """One randomized sampling-round fixture; asserts the invariant suite."""
    rng = np.random.default_rng(fix_seed)
    pool = structured_pool(rng)
    alpha = float(rng.choice(ALPHA_GRID))
    beta = float(rng.choice(BETA_GRID))
    n_unlabeled = len(pool.unlabeled_ids)
    budget = int(rng.integers(1, len(pool.items) + 4))
    cfg = SamplingConfig(
        alpha=alpha, beta=beta, budget=budget, tau=10.0, seed=int(rng.integers(2**32))
    )
    manifest = sampling_round(pool, cfg)

    # budget exactness
    assert len(manifest.selected) == min(budget, n_unlabeled)
    # purity: distinct ids, all unlabeled at round start
    ids = [s.id for s in manifest.selected]
    assert len(set(ids)) == len(ids)
    assert set(ids) <= pool.unlabeled_ids
    # quota arithmetic
    assert manifest.novel_quota == round_half_up(alpha * budget)
    assert manifest.novel_quota + manifest.familiar_quota == budget

    part = flat_clusters(
        upgma_linkage(pairwise_distances(pool.items, cfg.weights)),
        cfg.tau,
        labeled_ids=pool.labeled_ids,
        leaf_ids=[s.id for s in pool.items],
    )
    novel = [s for s in manifest.selected if s.phase.startswith("novel")]
    # novel depth cap, one visit per cluster
    per_cluster: dict[int, int] = {}
    for s in novel:
        per_cluster[s.cluster] = per_cluster.get(s.cluster, 0) + 1
    for label, count in per_cluster.items():
        assert count <= cluster_cap(beta, part.cluster_size(label))
    # novel picks come from the novel side of the start-of-round partition
    for s in novel:
        if s.phase == PHASE_NOVEL_CLUSTER:
            assert s.cluster in part.novel_clusters
        else:
            assert s.phase == PHASE_NOVEL_SINGLETON and s.id in part.singletons
    # novel-fraction accounting when supply sufficed
    if manifest.novel_shortfall == 0:
        assert len(novel) == manifest.novel_quota
    # familiar picks come from familiar clusters of the refreshed partition
    refreshed = refresh_partition(part, [s.id for s in novel])
    for s in manifest.selected:
        if s.phase == PHASE_FAMILIAR:
            assert s.cluster in refreshed.familiar_clusters
    # alpha extremes degenerate to one phase (plus fallback)
    phases = {s.phase for s in manifest.selected}
    if alpha == 0.0:
        assert PHASE_NOVEL_CLUSTER not in phases and PHASE_NOVEL_SINGLETON not in phases
    if alpha == 1.0:
        assert PHASE_FAMILIAR not in phases
    # fallback only fills shortfalls
    n_fallback = sum(1 for s in manifest.selected if s.phase == PHASE_FALLBACK)
    assert n_fallback <= manifest.novel_shortfall + manifest.familiar_shortfall

    if check_determinism:
        assert sampling_round(pool, cfg) == manifest
    return manifest
