import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..config.settings import MapConfig
from ..hknn import (
    SearchStats,
    brute_force_knn,
    build_traversal_list,
    full_list_scan,
    knn_search,
    materialize_octants,
)
from ..octvox import OctVoxMap

logger = logging.getLogger(__name__)

QUERY_HEADER = ("query", "candidates", "full_candidates", "found", "match", "elapsed_us")


class QueryRecord(NamedTuple):
    query: int
    candidates: int
    full_candidates: int
    found: int
    match: bool
    elapsed_us: float


@dataclass
class KnnBenchReport:
    """Outcome of a randomized search workload."""

    representatives: int
    records: list[QueryRecord] = field(default_factory=list)

    @property
    def queries(self) -> int:
        return len(self.records)

    @property
    def match_rate(self) -> float:
        return sum(r.match for r in self.records) / self.queries if self.records else 1.0

    @property
    def candidates_mean(self) -> float:
        return float(np.mean([r.candidates for r in self.records])) if self.records else 0.0

    @property
    def full_candidates_mean(self) -> float:
        return float(np.mean([r.full_candidates for r in self.records])) if self.records else 0.0

    @property
    def work_ratio(self) -> float:
        full = sum(r.full_candidates for r in self.records)
        return sum(r.candidates for r in self.records) / full if full else 0.0

    def summary(self) -> str:
        return (
            "queries={q} representatives={m} match_rate={rate:.6f} "
            "candidates_mean={c:.3f} full_candidates_mean={f:.3f} work_ratio={w:.4f}".format(
                q=self.queries,
                m=self.representatives,
                rate=self.match_rate,
                c=self.candidates_mean,
                f=self.full_candidates_mean,
                w=self.work_ratio,
            )
        )

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(",".join(QUERY_HEADER) + "\n")
            for r in self.records:
                handle.write(
                    "{},{},{},{},{},{:.3f}\n".format(
                        r.query, r.candidates, r.full_candidates, r.found, int(r.match), r.elapsed_us
                    )
                )


def _same(a, b) -> bool:
    return len(a) == len(b) and all(
        x.key == y.key and x.s == y.s and x.dist == y.dist for x, y in zip(a, b)
    )


def bench_knn(
    points: int = 100_000,
    queries: int = 1000,
    k: int = 5,
    radius: float = 0.875,
    *,
    extent: float = 10.0,
    seed: int = 0,
    map_config: MapConfig | None = None,
    r_max: float = 0.875,
    materialize: bool = False,
    threads: int = 1,
    timing: bool = True,
) -> KnnBenchReport:
    """
    Build a map from uniform random points in a cube and compare the
    early-terminating search against the full-list scan and the brute-force
    oracle on uniform random queries.
    """
    rng = np.random.default_rng(seed)
    voxel_map = OctVoxMap(map_config)
    voxel_map.insert_scan(rng.uniform(0.0, extent, size=(points, 3)))
    snapshot = voxel_map.snapshot()
    traversal = build_traversal_list(r_max, voxel_map.subvoxel_size)
    octant_lists = materialize_octants(traversal) if materialize else None
    query_points = rng.uniform(0.0, extent, size=(queries, 3))

    def run(index: int) -> QueryRecord:
        query = query_points[index]
        stats = SearchStats()
        full = SearchStats()
        start = time.perf_counter()
        found = knn_search(
            voxel_map, traversal, query, k, radius, octant_lists=octant_lists, stats=stats
        )
        elapsed = 1e6 * (time.perf_counter() - start) if timing else 0.0
        full_list_scan(voxel_map, traversal, query, k, radius, stats=full)
        expected = brute_force_knn(snapshot, query, k, radius)
        return QueryRecord(index, stats.candidates, full.candidates, len(found), _same(found, expected), elapsed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            records = list(executor.map(run, range(queries)))
    else:
        records = [run(index) for index in range(queries)]

    report = KnnBenchReport(len(snapshot), records)
    logger.info("%s", report.summary())
    return report
