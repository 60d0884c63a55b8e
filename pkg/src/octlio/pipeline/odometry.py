import logging
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..config.settings import OdometryConfig
from ..errors import EstimationError, TimestampError
from ..geom import ImuSample, NavState, Pose, Scan
from ..hknn import build_traversal_list, materialize_octants
from ..octvox import OctVoxMap
from ..registration import (
    center_downsample,
    crop_range,
    deskew_scan,
    iterated_update,
    random_downsample,
)
from .imu import initialize_from_static, interpolate_sample, propagate_imu

logger = logging.getLogger(__name__)

PHASES = ("propagate", "deskew", "downsample", "update", "map")
# Seconds of slack when matching IMU and scan timestamps.
TIME_SLACK = 1e-9


@dataclass
class FrameResult:
    """
    Outcome of one processed scan.

    :ivar index: frame number, counting every scan handed in.
    :ivar elapsed_ms: wall time of the whole call.
    :ivar cpu_util: process CPU time over wall time, at most 1.
    :ivar phases: wall time per pipeline phase in milliseconds.
    """

    index: int
    t: float
    pose: Pose
    elapsed_ms: float = 0.0
    n_points: int = 0
    n_valid_corr: int = 0
    knn_candidates_evaluated: int = 0
    iterations_used: int = 0
    cpu_util: float = 0.0
    phases: dict[str, float] = field(default_factory=lambda: dict.fromkeys(PHASES, 0.0))
    converged: bool = False
    degenerate: bool = False


class _Clock:
    """Phase timer; reads zero everywhere when timing is off."""

    def __init__(self, enabled: bool) -> None:
        self.enabled = enabled
        self.phases = dict.fromkeys(PHASES, 0.0)
        self._wall = time.perf_counter()
        self._cpu = time.process_time()
        self._mark = self._wall

    def lap(self, phase: str) -> None:
        now = time.perf_counter()
        if self.enabled:
            self.phases[phase] += 1e3 * (now - self._mark)
        self._mark = now

    def finish(self) -> tuple[float, float]:
        if not self.enabled:
            return 0.0, 0.0
        wall = time.perf_counter() - self._wall
        cpu = time.process_time() - self._cpu
        return 1e3 * wall, min(1.0, cpu / wall) if wall > 0 else 0.0


class Odometry:
    """
    LiDAR-inertial odometry over an OctVox map.

    IMU readings are buffered as they arrive. The first scan whose end lies
    at least imu_init_window after the first reading initializes the state
    from the static window before it and seeds the map; earlier scans are
    skipped. Every later scan is propagated, compensated, downsampled,
    registered against the map and finally inserted with the posterior pose.
    """

    def __init__(self, config: OdometryConfig | None = None) -> None:
        self.config = config or OdometryConfig()
        est = self.config.est
        self.map = OctVoxMap(self.config.map)
        self.traversal = build_traversal_list(est.r_max, self.map.subvoxel_size)
        self.octant_lists = materialize_octants(self.traversal) if est.materialize_octants else None
        self.state: NavState | None = None
        self.results: list[FrameResult] = []
        self._imu: list[ImuSample] = []
        self._time: float | None = None
        self._frames = 0
        self._rng = np.random.default_rng(self.config.seed)
        self._executor = (
            ThreadPoolExecutor(max_workers=est.num_threads) if est.num_threads > 1 else None
        )

    def __enter__(self) -> "Odometry":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    @property
    def initialized(self) -> bool:
        return self.state is not None

    @property
    def trajectory(self) -> list[tuple[float, Pose]]:
        return [(result.t, result.pose) for result in self.results]

    def add_imu(self, samples: Iterable[ImuSample]) -> None:
        """
        Buffer IMU readings.

        :raise TimestampError: if a reading is not later than the previous one.
        """
        for sample in samples:
            last = self._imu[-1].t if self._imu else self._time
            if last is not None and not sample.t > last:
                raise TimestampError(
                    "IMU sample at {t:.9f} does not follow {last:.9f}.".format(
                        t=sample.t, last=last
                    )
                )
            self._imu.append(ImuSample(float(sample.t), np.asarray(sample.acc), np.asarray(sample.gyr)))

    def _sample_at(self, t: float) -> ImuSample:
        """Reading at time t, interpolated between buffered readings."""
        buffer = self._imu
        if not buffer or buffer[-1].t < t - TIME_SLACK:
            # One reading of slack: hold the newest reading across a gap no
            # longer than one sampling period.
            if len(buffer) >= 2 and t - buffer[-1].t <= buffer[-1].t - buffer[-2].t:
                return ImuSample(t, buffer[-1].acc, buffer[-1].gyr)
            newest = buffer[-1].t if buffer else float("nan")
            raise TimestampError(
                "IMU data ends at {newest:.9f}, before the scan end {t:.9f}.".format(
                    newest=newest, t=t
                )
            )
        for previous, current in zip(buffer, buffer[1:]):
            if current.t >= t:
                return interpolate_sample(previous, current, t)
        return ImuSample(t, buffer[-1].acc, buffer[-1].gyr)

    def _initialize(self, scan: Scan) -> bool:
        config = self.config
        if not self._imu or scan.t_end < self._imu[0].t + config.imu_init_window - TIME_SLACK:
            return False
        start = scan.t_end - config.imu_init_window
        window = [sample for sample in self._imu if start - TIME_SLACK <= sample.t <= scan.t_end]
        self.state = initialize_from_static(
            window,
            config.gravity_init,
            config.init_acc_var_max,
            config.gravity_tolerance,
        )
        anchor = self._sample_at(scan.t_end)
        self._imu = [anchor] + [sample for sample in self._imu if sample.t > scan.t_end]
        self._time = scan.t_end
        return True

    def _preprocess(
        self, scan: Scan, track: Sequence[tuple[float, Pose]], clock: _Clock
    ) -> np.ndarray:
        est = self.config.est
        cropped = crop_range(scan, est.min_range, est.max_range)
        points, _ = deskew_scan(cropped, track, self.config.extrinsic)
        clock.lap("deskew")
        points = random_downsample(points, est.random_rate, est.random_mode, self._rng)
        points = center_downsample(points, est.downsample_res)
        clock.lap("downsample")
        return points

    def _propagate(
        self, t_end: float
    ) -> tuple[NavState, list[tuple[float, Pose]], list[ImuSample]]:
        """
        Integrate the buffer up to t_end.

        :return: the prior at t_end, the pose track, and the buffer that
            remains once the scan is accepted.
        """
        end = self._sample_at(t_end)
        samples = [sample for sample in self._imu if sample.t < t_end - TIME_SLACK]
        samples.append(end)
        state, track = propagate_imu(self.state, samples)
        remaining = [end] + [sample for sample in self._imu if sample.t > t_end + TIME_SLACK]
        return state, track, remaining

    def process_scan(self, scan: Scan, imu: Iterable[ImuSample] = ()) -> FrameResult | None:
        """
        Run one scan through the pipeline.

        :param scan: the scan; it must end after the previous one.
        :param imu: readings that arrived since the previous call.
        :return: the frame result, or None while waiting for initialization.
        :raise TimestampError: if IMU data does not cover the scan.
        :raise EstimationError: if registration fails; carries the frame index.
            Nothing is committed; the next scan is propagated from the last
            accepted one.
        """
        index = self._frames
        self._frames += 1
        self.add_imu(imu)
        clock = _Clock(self.config.timing)

        if self.state is None:
            if not self._initialize(scan):
                logger.warning("Frame %d skipped: waiting for the static IMU window", index)
                return None
            clock.lap("propagate")
            track = [(scan.t_start, self.state.pose), (scan.t_end, self.state.pose)]
            points = self._preprocess(scan, track, clock)
            world = self.state.pose.transform_points(points)
            self.map.insert_scan(world)
            self.map.evict_to_capacity()
            clock.lap("map")
            elapsed, cpu_util = clock.finish()
            result = FrameResult(
                index,
                scan.t_end,
                self.state.pose,
                elapsed_ms=elapsed,
                n_points=len(points),
                cpu_util=cpu_util,
                phases=clock.phases,
            )
            self.results.append(result)
            logger.info("Frame %d seeded the map with %d voxels", index, self.map.count)
            return result

        if scan.t_end <= self._time:
            raise TimestampError(
                "Scan ends at {t:.9f}, not after the previous scan {prev:.9f}.".format(
                    t=scan.t_end, prev=self._time
                )
            )
        span = scan.t_end - self._time
        prior, track, remaining = self._propagate(scan.t_end)
        if scan.t_start < track[0][0] - TIME_SLACK:
            # The sweep reaches back before the last anchor: hold the anchor pose.
            track = [(scan.t_start, track[0][1])] + list(track)
        clock.lap("propagate")

        try:
            points = self._preprocess(scan, track, clock)
            posterior, stats = iterated_update(
                prior,
                points,
                self.map,
                self.traversal,
                self.config.est,
                dt=span,
                octant_lists=self.octant_lists,
                executor=self._executor,
            )
        except EstimationError as exc:
            exc.frame = index
            raise
        except TimestampError as exc:
            raise TimestampError("Frame {}: {}".format(index, exc)) from exc
        clock.lap("update")

        self.map.insert_scan(posterior.pose.transform_points(points))
        self.map.flush_touches(stats.touched)
        self.map.evict_to_capacity()
        clock.lap("map")

        self.state = posterior
        self._imu = remaining
        self._time = scan.t_end
        elapsed, cpu_util = clock.finish()
        result = FrameResult(
            index,
            scan.t_end,
            posterior.pose,
            elapsed_ms=elapsed,
            n_points=len(points),
            n_valid_corr=stats.n_corr,
            knn_candidates_evaluated=stats.candidates,
            iterations_used=stats.iterations,
            cpu_util=cpu_util,
            phases=clock.phases,
            converged=stats.converged,
            degenerate=stats.degenerate,
        )
        self.results.append(result)
        logger.debug(
            "Frame %d: %d points, %d correspondences, %d candidates, %d iterations",
            index,
            result.n_points,
            result.n_valid_corr,
            result.knn_candidates_evaluated,
            result.iterations_used,
        )
        return result

    def run(self, scans: Iterable[Scan], imu: Sequence[ImuSample]) -> list[FrameResult]:
        """
        Process scans in order, feeding each the readings up to its end time.
        """
        imu = sorted(imu, key=lambda sample: sample.t)
        cursor = 0
        results = []
        for scan in scans:
            start = cursor
            while cursor < len(imu) and imu[cursor].t <= scan.t_end + TIME_SLACK:
                cursor += 1
            # One reading past the scan end lets the end be interpolated.
            if cursor < len(imu):
                cursor += 1
            result = self.process_scan(scan, imu[start:cursor])
            if result is not None:
                results.append(result)
        return results
