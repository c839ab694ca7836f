"""Novelty-sensitive active-learning sampling rounds.

One round clusters the whole pool, then spends a budget B in two phases:

  novel phase    quota = round(alpha * B), drawn uniformly from clusters
                 with no labeled member plus unclustered singletons; a
                 picked cluster contributes up to max(1, floor(beta * size))
                 members and is never revisited within the round.
  familiar phase quota = B - novel quota, drawn from clusters that contain
                 a labeled member (including the just-annotated novel
                 picks); passes over the eligible clusters repeat, each
                 pass drawing up to the beta cap per cluster, until the
                 quota is met or the supply is gone.

Any shortfall is filled at the end of the round uniformly at random from
the remaining unlabeled pool and tagged as fallback. Selection is driven
by a seeded PCG64 generator with one spawned substream per phase
(spawn_key 0 = novel, 1 = familiar, 2 = fallback, 3 = the random-baseline
stream used by the benchmark), so a manifest is a pure function of
(pool, config).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cluster import (
    ClusterPartition,
    Dendrogram,
    flat_clusters,
    refresh_partition,
    upgma_linkage,
)
from .errors import EmptyUnlabeledPool, InvalidFlagValue, ParseError
from .metric import DEFAULT_WEIGHTS, MetricWeights, pairwise_distances
from .states import TrajectoryPool

PHASE_NOVEL_CLUSTER = "novel-cluster"
PHASE_NOVEL_SINGLETON = "novel-singleton"
PHASE_FAMILIAR = "familiar"
PHASE_FALLBACK = "fallback"

NOVEL_STREAM = 0
FAMILIAR_STREAM = 1
FALLBACK_STREAM = 2
BASELINE_STREAM = 3

# absorbs float representation error in alpha*B and beta*size products;
# far below the 20% grid resolution of either parameter
_GRID_EPS = 1e-9


def phase_rng(seed: int, stream: int) -> np.random.Generator:
    """Seeded PCG64 substream; documented spawn keys keep phases independent."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5 + _GRID_EPS))


def cluster_cap(beta: float, size: int) -> int:
    """Per-pass depth cap: at least one member even for tiny clusters."""
    return max(1, int(math.floor(beta * size + _GRID_EPS)))


@dataclass(frozen=True)
class SamplingConfig:
    """Parameters of one sampling round.

    ``budget`` is either an integer count (>= 1) or a float fraction in
    (0, 1] of the unlabeled pool, resolved at round start; 1.0 means the
    whole unlabeled pool while the integer 1 means a single sample.
    """

    alpha: float
    beta: float
    budget: int | float
    tau: float = 10.0
    weights: MetricWeights = field(default_factory=MetricWeights)
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidFlagValue(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 < self.beta <= 1.0:
            raise InvalidFlagValue(f"beta must be in (0, 1], got {self.beta}")
        if isinstance(self.budget, bool) or (
            isinstance(self.budget, int) and self.budget < 1
        ):
            raise InvalidFlagValue(f"budget count must be >= 1, got {self.budget}")
        if isinstance(self.budget, float) and not 0.0 < self.budget <= 1.0:
            raise InvalidFlagValue(
                f"fractional budget must be in (0, 1], got {self.budget}"
            )
        if self.tau < 0:
            raise InvalidFlagValue(f"tau must be >= 0, got {self.tau}")


def resolve_budget(budget: int | float, n_unlabeled: int) -> int:
    """Turn a count-or-fraction budget into a concrete sample count."""
    if isinstance(budget, float):
        return max(1, round_half_up(budget * n_unlabeled))
    return int(budget)


@dataclass(frozen=True)
class Selection:
    """One picked id with its phase tag and flat-cluster label."""

    id: str
    phase: str
    cluster: int


@dataclass(frozen=True)
class SelectionManifest:
    """Audited record of one sampling round."""

    round_index: int
    config: SamplingConfig
    seed: int
    budget_resolved: int
    novel_quota: int
    familiar_quota: int
    novel_shortfall: int
    familiar_shortfall: int
    selected: tuple[Selection, ...]

    @property
    def fallback_count(self) -> int:
        return sum(1 for s in self.selected if s.phase == PHASE_FALLBACK)

    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.selected)


def sample_novel(
    p: ClusterPartition,
    unlabeled: Iterable,
    quota: int,
    beta: float,
    rng: np.random.Generator,
) -> tuple[list, int]:
    """Draw up to ``quota`` ids from novel clusters and singletons.

    Candidates (cluster labels and singleton ids) are picked uniformly
    without replacement; a cluster pick contributes up to its beta cap of
    members, chosen uniformly, and is then out of the running for the rest
    of the round. Returns (ids, shortfall).
    """
    unlabeled = set(unlabeled)
    candidates: list[tuple[str, object]] = [
        ("c", label) for label in sorted(p.novel_clusters)
    ] + [("s", sid) for sid in sorted(p.singletons)]
    picked: list = []
    while quota - len(picked) > 0 and candidates:
        k = int(rng.integers(len(candidates)))
        kind, ref = candidates.pop(k)
        if kind == "s":
            if ref in unlabeled:
                picked.append(ref)
            continue
        members = [m for m in p.cluster_members(ref) if m in unlabeled]
        if not members:
            continue
        cap = cluster_cap(beta, p.cluster_size(ref))
        take = min(cap, quota - len(picked), len(members))
        order = rng.permutation(len(members))[:take]
        picked.extend(members[i] for i in order)
    return picked, quota - len(picked)


def sample_familiar(
    p: ClusterPartition,
    unlabeled: Iterable,
    quota: int,
    beta: float,
    rng: np.random.Generator,
    _pass_log: list | None = None,
) -> tuple[list, int]:
    """Draw up to ``quota`` ids from familiar clusters in repeated passes.

    Each pass shuffles the clusters that still hold unlabeled members and
    draws up to the beta cap from each; passes repeat until the quota is
    met or no unlabeled member remains. ``_pass_log`` (tests only) records
    (pass index, label, count) triples.
    """
    remaining = set(unlabeled)
    picked: list = []
    pass_idx = 0
    while quota - len(picked) > 0:
        eligible = [
            label
            for label in sorted(p.familiar_clusters)
            if any(m in remaining for m in p.cluster_members(label))
        ]
        if not eligible:
            break
        order = rng.permutation(len(eligible))
        for k in order:
            label = eligible[int(k)]
            members = [m for m in p.cluster_members(label) if m in remaining]
            if not members:
                continue
            cap = cluster_cap(beta, p.cluster_size(label))
            take = min(cap, quota - len(picked), len(members))
            chosen = rng.permutation(len(members))[:take]
            for i in chosen:
                picked.append(members[int(i)])
                remaining.discard(members[int(i)])
            if _pass_log is not None:
                _pass_log.append((pass_idx, label, take))
            if quota - len(picked) <= 0:
                break
        pass_idx += 1
    return picked, quota - len(picked)


def sampling_round(
    pool: TrajectoryPool,
    cfg: SamplingConfig,
    round_index: int = 0,
    dendrogram: Dendrogram | None = None,
) -> SelectionManifest:
    """Run one full novelty-sensitive sampling round over a pool.

    Clusters the whole pool at cfg.tau, runs the novel phase, marks its
    picks as labeled, runs the familiar phase, then fills any shortfall
    from the remaining unlabeled pool. ``dendrogram`` may supply a
    precomputed linkage of exactly this pool under cfg.weights (the
    linkage does not depend on labels, so experiment harnesses reuse one
    across rounds); when omitted it is computed here.
    """
    ids = [s.id for s in pool.items]
    unlabeled = sorted(set(ids) - pool.labeled_ids)
    if not unlabeled:
        raise EmptyUnlabeledPool("no unlabeled trajectory-states to sample")
    budget = resolve_budget(cfg.budget, len(unlabeled))

    tree = dendrogram
    if tree is None:
        tree = upgma_linkage_for_pool(pool, cfg.weights)
    elif tree.n_leaves != len(ids):
        raise ParseError(
            f"dendrogram has {tree.n_leaves} leaves, pool has {len(ids)} items"
        )
    part = flat_clusters(tree, cfg.tau, labeled_ids=pool.labeled_ids, leaf_ids=ids)

    novel_quota = round_half_up(cfg.alpha * budget)
    familiar_quota = budget - novel_quota

    novel_ids, novel_short = sample_novel(
        part, unlabeled, novel_quota, cfg.beta, phase_rng(cfg.seed, NOVEL_STREAM)
    )
    part_after = refresh_partition(part, novel_ids)
    novel_set = set(novel_ids)
    remaining = [i for i in unlabeled if i not in novel_set]
    familiar_ids, familiar_short = sample_familiar(
        part_after,
        remaining,
        familiar_quota,
        cfg.beta,
        phase_rng(cfg.seed, FAMILIAR_STREAM),
    )

    taken = set(novel_ids) | set(familiar_ids)
    leftovers = [i for i in unlabeled if i not in taken]
    need = min(novel_short + familiar_short, len(leftovers))
    rng = phase_rng(cfg.seed, FALLBACK_STREAM)
    fallback_ids = [leftovers[int(i)] for i in rng.permutation(len(leftovers))[:need]]

    selected = []
    for sid in novel_ids:
        label = part.assignments[sid]
        phase = (
            PHASE_NOVEL_SINGLETON if part.cluster_size(label) == 1 else PHASE_NOVEL_CLUSTER
        )
        selected.append(Selection(sid, phase, label))
    selected += [Selection(sid, PHASE_FAMILIAR, part.assignments[sid]) for sid in familiar_ids]
    selected += [Selection(sid, PHASE_FALLBACK, part.assignments[sid]) for sid in fallback_ids]

    return SelectionManifest(
        round_index=round_index,
        config=cfg,
        seed=cfg.seed,
        budget_resolved=budget,
        novel_quota=novel_quota,
        familiar_quota=familiar_quota,
        novel_shortfall=novel_short,
        familiar_shortfall=familiar_short,
        selected=tuple(selected),
    )


def upgma_linkage_for_pool(pool: TrajectoryPool, weights: MetricWeights) -> Dendrogram:
    """Convenience: condensed distances then linkage for a pool's items."""
    return upgma_linkage(pairwise_distances(pool.items, weights))


def plan_experiment_grid(
    alphas: Sequence[float],
    betas: Sequence[float],
    budgets: Sequence[int | float],
    tau: float = 10.0,
    weights: MetricWeights = DEFAULT_WEIGHTS,
    seed: int = 0,
) -> tuple[SamplingConfig, ...]:
    """Cartesian sweep in deterministic budget-major, then alpha, then beta order."""
    return tuple(
        SamplingConfig(alpha=a, beta=b, budget=bud, tau=tau, weights=weights, seed=seed)
        for bud in budgets
        for a in alphas
        for b in betas
    )


DEFAULT_GRID_ALPHAS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
DEFAULT_GRID_BETAS = (0.2, 0.4, 0.6, 0.8, 1.0)
DEFAULT_GRID_BUDGETS = (0.1, 0.2, 0.3, 0.4, 0.5)


def default_experiment_grid(
    tau: float = 10.0,
    weights: MetricWeights = DEFAULT_WEIGHTS,
    seed: int = 0,
) -> tuple[SamplingConfig, ...]:
    """The standard 150-cell sweep: alpha and beta in 20% steps, budgets 10-50%."""
    return plan_experiment_grid(
        DEFAULT_GRID_ALPHAS, DEFAULT_GRID_BETAS, DEFAULT_GRID_BUDGETS, tau, weights, seed
    )
