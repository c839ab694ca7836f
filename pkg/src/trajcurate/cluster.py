"""Average-linkage (UPGMA) dendrograms, cophenetic distances, flat clusters.

The dendrogram is built by repeatedly merging the pair of active clusters
with the smallest average inter-member distance; the recorded merge height
is that average. Flat clusters at threshold tau are the maximal subtrees
whose root height is <= tau, which bounds every within-cluster cophenetic
distance by tau. The partition is then split by novelty relative to a
labeled id set:

  * novel clusters: >= 2 members, none labeled
  * singletons: 1-member clusters whose member is unlabeled
  * familiar clusters: at least one labeled member

Tie-break rule (merges with exactly equal linkage distances): pick the
candidate pair whose merged member set has the lexicographically smallest
(min leaf id, max leaf id); any residual tie is resolved by the smaller of
the two clusters' own minimum leaf ids, which identifies a pair uniquely.
Children of a merge are ordered by minimum member leaf id. These rules make
the topology a pure function of the distance matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ParseError, UnknownId, UnknownLeaf
from .metric import CondensedDistanceMatrix


class Merge(NamedTuple):
    """One agglomeration step: children node ids, height, merged size."""

    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Sequence of UPGMA merges; leaves are 0..n-1, merge k creates node n+k."""

    n_leaves: int
    merges: tuple[Merge, ...]

    def __post_init__(self) -> None:
        n = self.n_leaves
        merges = tuple(Merge(int(l), int(r), float(h), int(s)) for l, r, h, s in self.merges)
        object.__setattr__(self, "merges", merges)
        if n < 1 or len(merges) != n - 1:
            raise ParseError(f"{n} leaves need {n - 1} merges, got {len(merges)}")
        sizes = {i: 1 for i in range(n)}
        consumed: set[int] = set()
        prev = 0.0
        for k, (left, right, height, size) in enumerate(merges):
            node = n + k
            for child in (left, right):
                if child < 0 or child >= node or child in consumed:
                    raise ParseError(f"merge {k} consumes invalid or reused node {child}")
                consumed.add(child)
            if height < prev or not np.isfinite(height) or height < 0.0:
                raise ParseError(f"merge {k} height {height} breaks monotonicity")
            prev = height
            if sizes[left] + sizes[right] != size:
                raise ParseError(f"merge {k} size {size} != {sizes[left]} + {sizes[right]}")
            sizes[node] = size

    @cached_property
    def _parents(self) -> np.ndarray:
        parents = np.full(2 * self.n_leaves - 1, -1, dtype=np.int64)
        for k, m in enumerate(self.merges):
            parents[m.left] = self.n_leaves + k
            parents[m.right] = self.n_leaves + k
        return parents

    def node_height(self, node: int) -> float:
        return 0.0 if node < self.n_leaves else self.merges[node - self.n_leaves].height


def _pair_key(i: int, j: int, minleaf: np.ndarray, maxleaf: np.ndarray) -> tuple:
    lo, hi = minleaf[i], minleaf[j]
    if lo > hi:
        lo, hi = hi, lo
    return (lo, max(maxleaf[i], maxleaf[j]), hi)


def upgma_linkage(d: CondensedDistanceMatrix) -> Dendrogram:
    """Build the UPGMA dendrogram for a condensed distance matrix.

    Distances between merged clusters follow the Lance-Williams average
    update d(A+B, k) = (|A| d(A,k) + |B| d(B,k)) / (|A| + |B|). Per-row
    minimum caches are kept as lower bounds (average linkage is reducible,
    so row minima only grow) and repaired lazily, giving near-O(n^2)
    behavior at O(n^2) memory. Updated distances are clamped to the current
    merge height: the true average of values >= h cannot drop below h, so
    the clamp only removes sub-ulp rounding and keeps heights monotone.
    """
    n = d.n
    if n == 1:
        return Dendrogram(1, ())

    D = d.to_square()
    np.fill_diagonal(D, np.inf)
    rowmin = D.min(axis=1)

    size = np.ones(n, dtype=np.int64)
    node = np.arange(n, dtype=np.int64)
    minleaf = np.arange(n, dtype=np.int64)
    maxleaf = np.arange(n, dtype=np.int64)
    merges: list[Merge] = []

    for step in range(n - 1):
        # settle the global minimum; stored row minima are lower bounds
        while True:
            i0 = int(np.argmin(rowmin))
            fresh = D[i0].min()
            if fresh == rowmin[i0]:
                h = float(fresh)
                break
            rowmin[i0] = fresh
        # gather every pair at the minimum (rows below h may be stale)
        pairs: list[tuple[int, int]] = []
        for r in np.where(rowmin <= h)[0]:
            row = D[r]
            fresh = row.min()
            rowmin[r] = fresh
            if fresh == h:
                for c in np.where(row == h)[0]:
                    if c > r:
                        pairs.append((int(r), int(c)))
        A, B = min(pairs, key=lambda p: _pair_key(p[0], p[1], minleaf, maxleaf))

        if minleaf[A] <= minleaf[B]:
            left, right = int(node[A]), int(node[B])
        else:
            left, right = int(node[B]), int(node[A])
        new_size = int(size[A] + size[B])
        merges.append(Merge(left, right, h, new_size))

        new_row = (size[A] * D[A] + size[B] * D[B]) / new_size
        np.maximum(new_row, h, out=new_row)
        new_row[A] = np.inf
        new_row[B] = np.inf
        D[A] = new_row
        D[:, A] = new_row
        D[B] = np.inf
        D[:, B] = np.inf
        rowmin[A] = new_row.min()
        rowmin[B] = np.inf

        size[A] = new_size
        node[A] = n + step
        minleaf[A] = min(minleaf[A], minleaf[B])
        maxleaf[A] = max(maxleaf[A], maxleaf[B])

    return Dendrogram(n_leaves=n, merges=tuple(merges))


def cophenetic_distance(t: Dendrogram, i: int, j: int) -> float:
    """Height of the lowest merge containing both leaves; 0 when i == j."""
    n = t.n_leaves
    for leaf in (i, j):
        if not (isinstance(leaf, (int, np.integer)) and 0 <= leaf < n):
            raise UnknownLeaf(f"leaf {leaf!r} outside 0..{n - 1}")
    if i == j:
        return 0.0
    parents = t._parents
    ancestors: set[int] = set()
    node = int(i)
    while node != -1:
        ancestors.add(node)
        node = int(parents[node])
    node = int(j)
    while node not in ancestors:
        node = int(parents[node])
    return t.node_height(node)


def cophenetic_matrix(t: Dendrogram) -> np.ndarray:
    """All-pairs cophenetic distances as a full square matrix."""
    n = t.n_leaves
    out = np.zeros((n, n))
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for k, m in enumerate(t.merges):
        a, b = members.pop(m.left), members.pop(m.right)
        out[np.ix_(a, b)] = m.height
        out[np.ix_(b, a)] = m.height
        members[n + k] = a + b
    return out


@dataclass(frozen=True)
class ClusterPartition:
    """Flat clusters at threshold tau, split by novelty against a labeled set.

    Labels are dense integers assigned in order of each cluster's minimum
    leaf index. A labeled singleton belongs to the familiar set by
    definition (it has a labeled member) but carries no sampleable mass.
    """

    assignments: Mapping[Hashable, int]
    novel_clusters: frozenset[int]
    singletons: frozenset
    familiar_clusters: frozenset[int]
    tau: float
    labeled_ids: frozenset

    @cached_property
    def members_by_label(self) -> dict[int, tuple]:
        groups: dict[int, list] = {}
        for id_, label in self.assignments.items():
            groups.setdefault(label, []).append(id_)
        return {label: tuple(sorted(ids)) for label, ids in groups.items()}

    def cluster_members(self, label: int) -> tuple:
        return self.members_by_label[label]

    def cluster_size(self, label: int) -> int:
        return len(self.members_by_label[label])

    def labels(self) -> tuple[int, ...]:
        return tuple(sorted(self.members_by_label))

    def unlabeled_members(self, label: int) -> tuple:
        return tuple(m for m in self.members_by_label[label] if m not in self.labeled_ids)


def _split_novelty(
    members_by_label: Mapping[int, Sequence], labeled: frozenset
) -> tuple[frozenset, frozenset, frozenset]:
    novel, single, familiar = set(), set(), set()
    for label, members in members_by_label.items():
        has_labeled = any(m in labeled for m in members)
        if has_labeled:
            familiar.add(label)
        elif len(members) >= 2:
            novel.add(label)
        else:
            single.add(members[0])
    return frozenset(novel), frozenset(single), frozenset(familiar)


def flat_clusters(
    t: Dendrogram,
    tau: float,
    labeled_ids: Iterable = (),
    leaf_ids: Sequence[Hashable] | None = None,
) -> ClusterPartition:
    """Cut the dendrogram at tau and split the clusters by novelty.

    Clusters are the leaf sets of maximal subtrees with root height <= tau
    (inclusive). ``leaf_ids`` names leaf i; by default leaves are their own
    integer ids. Labeled ids not present among the leaves are ignored.
    """
    if tau < 0:
        raise ParseError(f"tau must be >= 0, got {tau}")
    n = t.n_leaves
    ids: Sequence[Hashable] = tuple(range(n)) if leaf_ids is None else tuple(leaf_ids)
    if len(ids) != n:
        raise UnknownId(f"expected {n} leaf ids, got {len(ids)}")

    # union-find over the monotone prefix of merges with height <= tau
    parent = list(range(2 * n - 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k, m in enumerate(t.merges):
        if m.height > tau:
            break
        root = n + k
        parent[find(m.left)] = root
        parent[find(m.right)] = root

    groups: dict[int, list[int]] = {}
    for leaf in range(n):
        groups.setdefault(find(leaf), []).append(leaf)
    ordered = sorted(groups.values(), key=lambda leaves: leaves[0])

    assignments: dict[Hashable, int] = {}
    members_by_label: dict[int, list] = {}
    for label, leaves in enumerate(ordered):
        members_by_label[label] = [ids[leaf] for leaf in leaves]
        for leaf in leaves:
            assignments[ids[leaf]] = label

    labeled = frozenset(labeled_ids) & set(ids)
    novel, single, familiar = _split_novelty(members_by_label, labeled)
    return ClusterPartition(
        assignments=assignments,
        novel_clusters=novel,
        singletons=single,
        familiar_clusters=familiar,
        tau=float(tau),
        labeled_ids=labeled,
    )


def refresh_partition(p: ClusterPartition, newly_labeled: Iterable) -> ClusterPartition:
    """Re-split novelty after ids were labeled mid-round, without re-clustering."""
    new = frozenset(newly_labeled)
    unknown = new - set(p.assignments)
    if unknown:
        raise UnknownId(f"ids not in partition: {sorted(unknown)[:5]}")
    labeled = p.labeled_ids | new
    novel, single, familiar = _split_novelty(p.members_by_label, labeled)
    return ClusterPartition(
        assignments=p.assignments,
        novel_clusters=novel,
        singletons=single,
        familiar_clusters=familiar,
        tau=p.tau,
        labeled_ids=labeled,
    )


def format_dendrogram(t: Dendrogram) -> str:
    """Text table, one merge per line: "left right height size"."""
    lines = [f"{m.left} {m.right} {m.height:.17g} {m.size}" for m in t.merges]
    return "\n".join(lines) + ("\n" if lines else "")
