"""Command-line surface: cluster, sample, simulate, stats.

Every command is a deterministic function of its input files and flags
(including the seed): rerunning any invocation reproduces byte-identical
artifacts. Exit codes: 0 success, 1 runtime error (bad file, I/O), 2
usage error (unknown command, flag out of range).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .cluster import flat_clusters, upgma_linkage
from .errors import CurationError, InvalidFlagValue
from .io import (
    export_clusters,
    load_trajectories,
    read_labeled_ids,
    sha256_file,
    write_experiment_csv,
    write_manifest,
)
from .metric import MetricWeights, pairwise_distances, write_distance_matrix
from .sampling import (
    DEFAULT_GRID_ALPHAS,
    DEFAULT_GRID_BETAS,
    DEFAULT_GRID_BUDGETS,
    SamplingConfig,
    plan_experiment_grid,
    sampling_round,
)
from .states import TrajectoryPool
from .surrogate import run_al_experiment
from .synth import canonical_pool_spec, generate_synthetic_pool

DEFAULT_TAU = 10.0
DEFAULT_WEIGHTS_FLAG = "0.05,0.025,1"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajcurate",
        description="Cluster vehicle trajectory-states and run novelty-sensitive "
        "active-learning sampling rounds under an annotation budget.",
    )
    parser.add_argument("--version", action="version", version=f"trajcurate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, input_required: bool = True) -> None:
        p.add_argument(
            "--input",
            required=input_required,
            help="trajectory record file (.jsonl or .csv)"
            + ("" if input_required else "; defaults to the built-in synthetic fixture"),
        )
        p.add_argument("--labeled", help="id-list file overriding per-record labeled flags")
        p.add_argument("--tau", type=float, default=DEFAULT_TAU, help="cophenetic cut threshold")
        p.add_argument(
            "--weights",
            default=DEFAULT_WEIGHTS_FLAG,
            help="metric weights as ka,kv,kh",
        )

    p_cluster = sub.add_parser("cluster", help="distances + linkage + flat clusters + exports")
    add_common(p_cluster)
    p_cluster.add_argument("--out", default=".", help="output directory")
    p_cluster.add_argument("--matrix-out", help="optional binary condensed-matrix dump")

    p_sample = sub.add_parser("sample", help="run one sampling round and write its manifest")
    add_common(p_sample)
    p_sample.add_argument("--alpha", type=float, required=True, help="novel fraction in [0, 1]")
    p_sample.add_argument("--beta", type=float, required=True, help="cluster depth cap in (0, 1]")
    p_sample.add_argument(
        "--budget", required=True, help="sample count (integer) or unlabeled-pool fraction (float < 1 or 1.0)"
    )
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", default="manifest.json", help="manifest output path")

    p_sim = sub.add_parser("simulate", help="surrogate experiment sweep to a result CSV")
    add_common(p_sim, input_required=False)
    p_sim.add_argument(
        "--pool-size",
        type=int,
        default=2000,
        dest="pool_size",
        help="size of the built-in fixture when --input is omitted",
    )
    p_sim.add_argument("--grid", default="default", choices=["default", "custom"])
    p_sim.add_argument("--alphas", help="comma list for --grid custom")
    p_sim.add_argument("--betas", help="comma list for --grid custom")
    p_sim.add_argument("--budgets", help="comma list for --grid custom")
    p_sim.add_argument("--seeds", type=int, default=3, help="number of training seeds (0..n-1)")
    p_sim.add_argument("--k-modes", type=int, default=10, dest="k_modes")
    p_sim.add_argument("--holdout", type=float, default=0.2, help="held-out fraction")
    p_sim.add_argument("--split-seed", type=int, default=1, dest="split_seed")
    p_sim.add_argument("--out", required=True, help="result CSV path")

    p_stats = sub.add_parser("stats", help="cluster size histogram and novelty census")
    add_common(p_stats)
    p_stats.add_argument("--out", help="also write the report to this path")

    return parser


def parse_weights(flag: str) -> MetricWeights:
    parts = flag.split(",")
    if len(parts) != 3:
        raise InvalidFlagValue(f"--weights needs ka,kv,kh, got {flag!r}")
    try:
        ka, kv, kh = (float(p) for p in parts)
    except ValueError:
        raise InvalidFlagValue(f"--weights values must be numbers, got {flag!r}") from None
    return MetricWeights(k_a=ka, k_v=kv, k_h=kh)


def parse_budget(flag: str) -> int | float:
    """Integer literals are counts; float literals are pool fractions."""
    try:
        if any(c in flag for c in ".eE"):
            value = float(flag)
        else:
            value = int(flag)
    except ValueError:
        raise InvalidFlagValue(f"--budget must be a count or fraction, got {flag!r}") from None
    if isinstance(value, float) and not 0.0 < value <= 1.0:
        raise InvalidFlagValue(f"fractional --budget must be in (0, 1], got {value}")
    if isinstance(value, int) and value < 1:
        raise InvalidFlagValue(f"--budget count must be >= 1, got {value}")
    return value


def _load_pool(args) -> TrajectoryPool:
    pool = load_trajectories(args.input)
    if args.labeled:
        ids = read_labeled_ids(args.labeled)
        pool = TrajectoryPool(pool.items, ids)  # raises UnknownId on stray ids
    return pool


def _check_tau(tau: float) -> None:
    if tau < 0:
        raise InvalidFlagValue(f"--tau must be >= 0, got {tau}")


def cmd_cluster(args) -> int:
    _check_tau(args.tau)
    weights = parse_weights(args.weights)
    pool = _load_pool(args)
    matrix = pairwise_distances(pool.items, weights)
    if args.matrix_out:
        write_distance_matrix(matrix, args.matrix_out)
    tree = upgma_linkage(matrix)
    del matrix
    part = flat_clusters(tree, args.tau, labeled_ids=pool.labeled_ids, leaf_ids=pool.ids)
    assignments_path, dendro_path = export_clusters(part, tree, args.out)
    print(f"wrote {assignments_path} and {dendro_path}")
    return 0


def cmd_sample(args) -> int:
    _check_tau(args.tau)
    weights = parse_weights(args.weights)
    budget = parse_budget(args.budget)
    cfg = SamplingConfig(
        alpha=args.alpha,
        beta=args.beta,
        budget=budget,
        tau=args.tau,
        weights=weights,
        seed=args.seed,
    )
    pool = _load_pool(args)
    manifest = sampling_round(pool, cfg)
    write_manifest(manifest, args.out, input_digest=sha256_file(args.input))
    print(
        f"wrote {args.out}: {len(manifest.selected)} selected "
        f"({manifest.novel_quota} novel quota, {manifest.familiar_quota} familiar quota, "
        f"{manifest.fallback_count} fallback)"
    )
    return 0


def _parse_float_list(flag: str, name: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in flag.split(",") if p.strip())
    except ValueError:
        raise InvalidFlagValue(f"{name} must be a comma list of numbers, got {flag!r}") from None


def cmd_simulate(args) -> int:
    _check_tau(args.tau)
    weights = parse_weights(args.weights)
    if args.seeds < 1:
        raise InvalidFlagValue(f"--seeds must be >= 1, got {args.seeds}")
    if args.grid == "default":
        alphas, betas, budgets = DEFAULT_GRID_ALPHAS, DEFAULT_GRID_BETAS, DEFAULT_GRID_BUDGETS
    else:
        if not (args.alphas and args.betas and args.budgets):
            raise InvalidFlagValue("--grid custom needs --alphas, --betas and --budgets")
        alphas = _parse_float_list(args.alphas, "--alphas")
        betas = _parse_float_list(args.betas, "--betas")
        budgets = _parse_float_list(args.budgets, "--budgets")
    grid = plan_experiment_grid(alphas, betas, budgets, tau=args.tau, weights=weights)
    if args.input:
        pool = _load_pool(args)
    else:
        if args.pool_size < 10:
            raise InvalidFlagValue(f"--pool-size must be >= 10, got {args.pool_size}")
        items = generate_synthetic_pool(canonical_pool_spec(total_count=args.pool_size))
        pool = TrajectoryPool(tuple(items))
    result = run_al_experiment(
        pool,
        grid,
        seeds=range(args.seeds),
        k_modes=args.k_modes,
        holdout_fraction=args.holdout,
        split_seed=args.split_seed,
    )
    write_experiment_csv(result, args.out)
    print(f"wrote {args.out}: {len(result.rows)} rows")
    return 0


def cmd_stats(args) -> int:
    _check_tau(args.tau)
    weights = parse_weights(args.weights)
    pool = _load_pool(args)
    tree = upgma_linkage(pairwise_distances(pool.items, weights))
    part = flat_clusters(tree, args.tau, labeled_ids=pool.labeled_ids, leaf_ids=pool.ids)

    sizes = sorted(len(m) for m in part.members_by_label.values())
    histogram: dict[int, int] = {}
    for s in sizes:
        histogram[s] = histogram.get(s, 0) + 1
    labeled_singletons = sum(
        1
        for label in part.familiar_clusters
        if part.cluster_size(label) == 1
    )
    lines = [
        f"items: {len(pool.items)} labeled: {len(pool.labeled_ids)} "
        f"unlabeled: {len(pool.unlabeled_ids)}",
        f"tau: {part.tau:.17g}",
        f"clusters: {len(part.members_by_label)}",
        "cluster size histogram:",
    ]
    lines += [f"  size {size}: {count}" for size, count in sorted(histogram.items())]
    lines += [
        f"novel clusters (no labeled member, size >= 2): {len(part.novel_clusters)}",
        f"unclustered singletons: {len(part.singletons)}",
        f"familiar clusters: {len(part.familiar_clusters)}",
        f"labeled singletons: {labeled_singletons}",
    ]
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    return 0


_COMMANDS = {
    "cluster": cmd_cluster,
    "sample": cmd_sample,
    "simulate": cmd_simulate,
    "stats": cmd_stats,
}


def dispatch(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help/--version
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except InvalidFlagValue as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
