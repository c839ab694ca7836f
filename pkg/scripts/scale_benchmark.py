#!/usr/bin/env python3
"""Time the clustering pipeline stages on a large synthetic pool.

Reports wall time for distance computation, linkage, and the flat cut,
plus the process peak RSS, for a pool of --size trajectory-states
(default 10,000: about 5e7 condensed distance entries).
"""

import argparse
import resource
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from trajcurate import (
    canonical_pool_spec,
    flat_clusters,
    generate_synthetic_pool,
    pairwise_distances,
    upgma_linkage,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=10_000)
    parser.add_argument("--tau", type=float, default=30.0)
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()

    t0 = time.time()
    items = generate_synthetic_pool(canonical_pool_spec(total_count=args.size, seed=3))
    print(f"generate      {time.time() - t0:6.1f}s  ({len(items)} items)")

    t0 = time.time()
    matrix = pairwise_distances(items, workers=args.workers)
    print(f"distances     {time.time() - t0:6.1f}s  ({matrix.values.shape[0]} entries)")

    t0 = time.time()
    tree = upgma_linkage(matrix)
    del matrix
    print(f"linkage       {time.time() - t0:6.1f}s")

    t0 = time.time()
    part = flat_clusters(tree, args.tau, leaf_ids=[s.id for s in items])
    print(f"flat cut      {time.time() - t0:6.1f}s  ({len(part.members_by_label)} clusters)")

    peak_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1048576
    print(f"peak RSS      {peak_gb:6.2f} GB")


if __name__ == "__main__":
    main()
