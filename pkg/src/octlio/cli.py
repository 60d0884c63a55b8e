"""
Command line entry point.

    octlio gen-data   synthesize a dataset directory
    octlio run        run odometry on a dataset directory
    octlio bench-knn  compare the search against the brute-force oracle
    octlio eval       score an estimated trajectory
    octlio dump-list  print a traversal list
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import OdometryConfig, configure, load_config
from .config.settings import MapConfig
from .errors import OctLioError
from .hknn import build_traversal_list, dump_traversal_list
from .pipeline import Odometry, read_trajectory, write_trajectory
from .synthbench import (
    KINDS,
    SceneSpec,
    SensorSpec,
    TrajectorySpec,
    ate_rmse,
    bench_knn,
    read_dataset,
    read_metrics,
    read_timing,
    scan_times,
    summarize,
    synthesize_imu,
    synthesize_scan,
    write_dataset,
    write_metrics,
    write_timing,
)

logger = logging.getLogger(__name__)


def gen_data(args: argparse.Namespace) -> int:
    trajectory = TrajectorySpec(
        kind=args.traj,
        radius=args.radius,
        period=args.period,
        height=args.height,
        duration=args.duration,
    )
    sensor = SensorSpec(
        scan_rate=args.scan_rate,
        imu_rate=args.imu_rate,
        rays=args.rays,
        range_sigma=args.range_sigma,
    )
    scene = SceneSpec.room()
    times = scan_times(trajectory, sensor)
    scans = [
        synthesize_scan(scene, trajectory, t_k, sensor, seed=args.seed + 1 + k)
        for k, t_k in enumerate(times)
    ]
    imu = synthesize_imu(trajectory, sensor, seed=args.seed)
    write_dataset(args.out, scans, imu, trajectory.poses(times))
    print("{n} scans written to {out}".format(n=len(scans), out=args.out))
    return 0


def _run_config(args: argparse.Namespace) -> OdometryConfig:
    config = load_config(args.config) if args.config else configure()
    if args.threads is not None:
        config = replace(config, est=replace(config.est, num_threads=args.threads))
    if args.no_timing:
        config = replace(config, timing=False)
    return config


def run(args: argparse.Namespace) -> int:
    config = _run_config(args)
    scans, imu = read_dataset(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with Odometry(config) as odometry:
        results = odometry.run(scans, imu)
    write_trajectory(results, out / "trajectory.tum")
    write_metrics(results, out / "metrics.csv")
    write_timing(results, out / "timing.csv")
    logger.info("Processed %d of %d scans", len(results), len(scans))
    print("{n} poses written to {out}".format(n=len(results), out=out / "trajectory.tum"))
    return 0


def bench(args: argparse.Namespace) -> int:
    report = bench_knn(
        points=args.points,
        queries=args.queries,
        k=args.k,
        radius=args.radius,
        extent=args.extent,
        seed=args.seed,
        map_config=MapConfig(voxel_size=args.voxel_size),
        r_max=args.r_max,
        materialize=args.materialize,
        threads=args.threads,
        timing=not args.no_timing,
    )
    if args.csv:
        report.write_csv(args.csv)
    print(report.summary())
    if report.match_rate < 1.0:
        print("error: search disagrees with the brute-force oracle", file=sys.stderr)
        return 1
    return 0


def evaluate(args: argparse.Namespace) -> int:
    estimate = read_trajectory(args.est)
    groundtruth = read_trajectory(args.gt)
    ate = ate_rmse(estimate, groundtruth, align=not args.no_align, max_dt=args.max_dt)
    elapsed, utilization, candidates = (), (), ()
    if args.metrics:
        columns = read_metrics(args.metrics)
        elapsed = columns["elapsed_ms"]
        candidates = columns["candidates"]
    if args.timing:
        columns = read_timing(args.timing)
        elapsed = columns["elapsed_ms"]
        utilization = columns["cpu_util"]
    print(summarize(ate, elapsed, utilization, candidates).report())
    return 0


def dump_list(args: argparse.Namespace) -> int:
    traversal = build_traversal_list(args.r_max, 0.5 * args.voxel_size, args.octant)
    text = dump_traversal_list(traversal, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="octlio", description="OctVox maps, exact KNN search and LiDAR-inertial odometry."
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="repeat for more detail"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", help="synthesize a dataset")
    gen.add_argument("--out", default="data", help="dataset directory")
    gen.add_argument("--traj", choices=KINDS, default="circle")
    gen.add_argument("--radius", type=float, default=3.0)
    gen.add_argument("--period", type=float, default=10.0)
    gen.add_argument("--height", type=float, default=0.0)
    gen.add_argument("--duration", type=float, default=20.0)
    gen.add_argument("--scan-rate", type=float, default=10.0)
    gen.add_argument("--imu-rate", type=float, default=200.0)
    gen.add_argument("--rays", type=int, default=2000)
    gen.add_argument("--range-sigma", type=float, default=0.01)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(handler=gen_data)

    odo = commands.add_parser("run", help="run odometry on a dataset")
    odo.add_argument("data", help="dataset directory")
    odo.add_argument("--out", default="results", help="output directory")
    odo.add_argument("--config", help="key=value configuration file")
    odo.add_argument("--threads", type=int, help="correspondence search threads")
    odo.add_argument("--no-timing", action="store_true", help="write all timings as zero")
    odo.set_defaults(handler=run)

    knn = commands.add_parser("bench-knn", help="randomized search workload")
    knn.add_argument("--points", type=int, default=100_000)
    knn.add_argument("--queries", type=int, default=1000)
    knn.add_argument("--k", type=int, default=5)
    knn.add_argument("--radius", type=float, default=0.875)
    knn.add_argument("--r-max", type=float, default=0.875)
    knn.add_argument("--voxel-size", type=float, default=0.5)
    knn.add_argument("--extent", type=float, default=10.0, help="edge of the point cube")
    knn.add_argument("--seed", type=int, default=0)
    knn.add_argument("--threads", type=int, default=1)
    knn.add_argument("--materialize", action="store_true", help="precompute all octant lists")
    knn.add_argument("--csv", help="per-query output file")
    knn.add_argument("--no-timing", action="store_true")
    knn.set_defaults(handler=bench)

    ev = commands.add_parser("eval", help="score an estimated trajectory")
    ev.add_argument("est", help="estimated TUM trajectory")
    ev.add_argument("gt", help="ground-truth TUM trajectory")
    ev.add_argument("--metrics", help="metrics.csv of the run")
    ev.add_argument("--timing", help="timing.csv of the run")
    ev.add_argument("--no-align", action="store_true")
    ev.add_argument("--max-dt", type=float, default=0.01)
    ev.set_defaults(handler=evaluate)

    dump = commands.add_parser("dump-list", help="print a traversal list")
    dump.add_argument("--r-max", type=float, default=0.875)
    dump.add_argument("--voxel-size", type=float, default=0.5)
    dump.add_argument("--octant", type=int, default=0)
    dump.add_argument("--out")
    dump.set_defaults(handler=dump_list)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (OctLioError, OSError) as error:
        print("error: {}".format(error), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
