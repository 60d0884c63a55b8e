"""
Iterated error-state update from point-to-plane residuals.

The state is perturbed on the right for rotation and additively elsewhere.
Each iteration maps the scan into the world with the current iterate,
searches the map for neighbors, fits local planes and solves the damped
normal equations of

    sum_i w_i (n_i . (R p_i + t) + d_i)^2 + e(x)^T P e(x)

where e(x) is the error of the iterate with respect to the propagated prior
and P is a fixed diagonal weight. A step is kept only if it lowers this cost
on the iteration's correspondence set; rejected steps raise the damping.

The velocity is always part of the state: a velocity error dv over the
propagation span dt moves the position by dt dv. Accelerometer and gyroscope
biases and gravity join only when estimate_bias_gravity is set.
"""

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.spatial.transform import Rotation

from ..config.settings import EstimatorConfig
from ..errors import DegeneracyError, TrackingError
from ..geom import NavState, so3_exp, so3_log
from ..hknn import SearchStats, TraversalList, knn_search
from ..octvox import OctVoxMap
from .plane import fit_planes

logger = logging.getLogger(__name__)

POSE_DIM = 6
NAV_DIM = 9
FULL_DIM = 18
# Spectrum ratio of the measurement information below which a warning is
# logged.
WEAK_SPECTRUM = 1e-6
SINGULAR_CONDITION = 1e14


class Correspondence(NamedTuple):
    """A body-frame point matched to a world plane n.x + d = 0."""

    p_body: np.ndarray
    normal: np.ndarray
    d: float
    weight: float


@dataclass
class IterationRecord:
    cost_before: float
    cost_after: float
    accepted: bool
    step_norm: float
    n_corr: int


@dataclass
class UpdateStats:
    """What happened during one iterated update."""

    iterations: int = 0
    n_corr: int = 0
    candidates: int = 0
    converged: bool = False
    degenerate: bool = False
    history: list[IterationRecord] = field(default_factory=list)
    touched: set = field(default_factory=set)

    @property
    def accepted_costs(self) -> list[float]:
        return [record.cost_after for record in self.history if record.accepted]


def residual_jacobians(
    rot: Rotation,
    trans: np.ndarray,
    points: np.ndarray,
    normals: np.ndarray,
    offsets: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Point-to-plane residuals and their Jacobians with respect to the pose
    error (rotation on the right, then translation).

    :param rot: current attitude.
    :param trans: current position.
    :param points: (M, 3) body-frame points.
    :param normals: (M, 3) unit plane normals.
    :param offsets: (M,) plane offsets.
    :return: residuals (M,) and Jacobians (M, 6).
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    normals = np.asarray(normals, dtype=float).reshape(-1, 3)
    world = rot.apply(points) + trans
    residuals = np.einsum("mi,mi->m", normals, world) + np.asarray(offsets, dtype=float)
    body_normals = rot.inv().apply(normals)
    jacobians = np.hstack([np.cross(points, body_normals), normals])
    return residuals, jacobians


def _coupled_jacobians(
    jacobians: np.ndarray, rot: Rotation, dt: float, full: bool = True
) -> np.ndarray:
    """
    Extend pose Jacobians with velocity columns, and with bias and gravity
    columns when full.

    Over a propagation span dt, a velocity error dv moves the position by
    dt dv, accelerometer bias and gravity errors by dt^2/2 (dg - R dba), and
    a gyroscope bias error turns the attitude by -dt dbg.
    """
    j_rot, j_trans = jacobians[:, :3], jacobians[:, 3:]
    if not full:
        return np.hstack([jacobians, dt * j_trans])
    half = 0.5 * dt * dt
    return np.hstack(
        [
            jacobians,
            dt * j_trans,
            -half * j_trans @ rot.as_matrix(),
            -dt * j_rot,
            half * j_trans,
        ]
    )


def _weights(residuals: np.ndarray, config: EstimatorConfig) -> np.ndarray:
    base = np.full(len(residuals), 1.0 / (config.meas_sigma * config.meas_sigma))
    if config.robust_kernel == "huber":
        magnitude = np.abs(residuals)
        scale = np.where(
            magnitude <= config.huber_delta,
            1.0,
            config.huber_delta / np.maximum(magnitude, 1e-300),
        )
        return base * scale
    return base


@dataclass(frozen=True)
class _Iterate:
    """Current estimate and its error with respect to the prior."""

    state: NavState

    def error(self, prior: NavState, dim: int) -> np.ndarray:
        nav_error = np.concatenate(
            [
                so3_log(prior.rot.inv() * self.state.rot),
                self.state.pos - prior.pos,
                self.state.vel - prior.vel,
            ]
        )
        if dim == NAV_DIM:
            return nav_error
        return np.concatenate(
            [
                nav_error,
                self.state.bias_acc - prior.bias_acc,
                self.state.bias_gyr - prior.bias_gyr,
                self.state.gravity - prior.gravity,
            ]
        )

    def retract(self, delta: np.ndarray, dt: float) -> "_Iterate":
        state = self.state
        d_rot, d_pos, d_vel = delta[:3], delta[3:6], delta[6:9]
        if len(delta) == NAV_DIM:
            return _Iterate(
                replace(
                    state,
                    rot=state.rot * so3_exp(d_rot),
                    pos=state.pos + d_pos + dt * d_vel,
                    vel=state.vel + d_vel,
                )
            )
        d_ba, d_bg, d_g = delta[9:12], delta[12:15], delta[15:18]
        drift = d_g - state.rot.apply(d_ba)
        return _Iterate(
            replace(
                state,
                rot=state.rot * so3_exp(d_rot - dt * d_bg),
                pos=state.pos + d_pos + dt * d_vel + 0.5 * dt * dt * drift,
                vel=state.vel + d_vel + dt * drift,
                bias_acc=state.bias_acc + d_ba,
                bias_gyr=state.bias_gyr + d_bg,
                gravity=state.gravity + d_g,
            )
        )


def _search_chunk(
    voxel_map: OctVoxMap,
    traversal: TraversalList,
    world: np.ndarray,
    config: EstimatorConfig,
    octant_lists: tuple[TraversalList, ...] | None,
) -> tuple[np.ndarray, np.ndarray, SearchStats, set]:
    """Find K neighbors of each world point; rows without K are marked."""
    stats = SearchStats()
    touched: set = set()
    k = config.knn_k
    found = np.zeros(len(world), dtype=bool)
    neighbors = np.zeros((len(world), k, 3))
    for index, point in enumerate(world):
        result = knn_search(
            voxel_map,
            traversal,
            point,
            k,
            config.knn_radius,
            early_termination=config.early_termination,
            octant_lists=octant_lists,
            stats=stats,
            touched=touched,
        )
        if len(result) == k:
            found[index] = True
            neighbors[index] = [neighbor.mu for neighbor in result]
    return found, neighbors, stats, touched


def find_correspondences(
    voxel_map: OctVoxMap,
    traversal: TraversalList,
    points_body: np.ndarray,
    state: NavState,
    config: EstimatorConfig,
    *,
    octant_lists: tuple[TraversalList, ...] | None = None,
    executor: ThreadPoolExecutor | None = None,
) -> tuple[list[Correspondence], SearchStats, set]:
    """
    Match body points against the map at a given state.

    Searches run over contiguous chunks on the executor when one is given;
    the map is only read.

    :return: valid correspondences in input order, search counters, and the
        keys of every voxel read.
    """
    world = state.pose.transform_points(points_body)
    if executor is not None and config.num_threads > 1 and len(world) > 1:
        chunks = np.array_split(np.arange(len(world)), config.num_threads)
        futures = [
            executor.submit(
                _search_chunk, voxel_map, traversal, world[chunk], config, octant_lists
            )
            for chunk in chunks
            if len(chunk)
        ]
        parts = [future.result() for future in futures]
    else:
        parts = [_search_chunk(voxel_map, traversal, world, config, octant_lists)]

    stats = SearchStats()
    touched: set = set()
    for _, _, part_stats, part_touched in parts:
        stats.merge(part_stats)
        touched |= part_touched
    found = np.concatenate([part[0] for part in parts])
    neighbors = np.concatenate([part[1] for part in parts])

    rows = np.flatnonzero(found)
    normals, offsets, valid, _ = fit_planes(
        neighbors[rows], config.plane_thresh, config.plane_flatness
    )
    correspondences = [
        Correspondence(points_body[row], normals[i], float(offsets[i]), 1.0)
        for i, row in enumerate(rows)
        if valid[i]
    ]
    return correspondences, stats, touched


def _cost(
    iterate: _Iterate,
    prior: NavState,
    points: np.ndarray,
    normals: np.ndarray,
    offsets: np.ndarray,
    weights: np.ndarray,
    prior_diag: np.ndarray,
) -> float:
    residuals, _ = residual_jacobians(
        iterate.state.rot, iterate.state.pos, points, normals, offsets
    )
    error = iterate.error(prior, len(prior_diag))
    return 0.5 * float(weights @ (residuals * residuals) + error @ (prior_diag * error))


def iterated_update(
    prior: NavState,
    points_body: np.ndarray,
    voxel_map: OctVoxMap,
    traversal: TraversalList,
    config: EstimatorConfig | None = None,
    *,
    dt: float = 0.0,
    octant_lists: tuple[TraversalList, ...] | None = None,
    executor: ThreadPoolExecutor | None = None,
    on_iteration: Callable[[int, NavState], None] | None = None,
) -> tuple[NavState, UpdateStats]:
    """
    Refine a propagated state against the map.

    :param prior: the propagated state.
    :param points_body: (N, 3) compensated points in the IMU frame at the
        scan end.
    :param voxel_map: the map, read only.
    :param traversal: canonical traversal list for the map's subvoxel size.
    :param config: estimator settings.
    :param dt: propagation span behind the prior; couples velocity, and bias
        and gravity when those are estimated, into the pose.
    :param octant_lists: materialized octant lists for the searches.
    :param executor: pool for the correspondence phase.
    :param on_iteration: called with the iteration index and iterate after
        every accepted step.
    :return: the posterior state and statistics.
    :raise TrackingError: if fewer than min_correspondences planes match.
    :raise DegeneracyError: if the normal matrix is singular.
    """
    config = config or EstimatorConfig()
    points_body = np.asarray(points_body, dtype=float).reshape(-1, 3)
    full = config.estimate_bias_gravity
    dim = FULL_DIM if full else NAV_DIM
    prior_diag = np.full(dim, config.prior_weight)
    prior_diag[POSE_DIM:] = config.extra_prior_weight

    stats = UpdateStats()
    iterate = _Iterate(prior)
    damping = config.damping

    for iteration in range(config.max_iter):
        correspondences, search, touched = find_correspondences(
            voxel_map,
            traversal,
            points_body,
            iterate.state,
            config,
            octant_lists=octant_lists,
            executor=executor,
        )
        stats.iterations = iteration + 1
        stats.candidates += search.candidates
        stats.touched |= touched
        stats.n_corr = len(correspondences)
        if len(correspondences) < config.min_correspondences:
            raise TrackingError(
                "Only {n} valid correspondences, need {m}.".format(
                    n=len(correspondences), m=config.min_correspondences
                )
            )

        points = np.array([c.p_body for c in correspondences])
        normals = np.array([c.normal for c in correspondences])
        offsets = np.array([c.d for c in correspondences])
        state = iterate.state
        residuals, jacobians = residual_jacobians(state.rot, state.pos, points, normals, offsets)
        jacobians = _coupled_jacobians(jacobians, state.rot, dt, full)
        weights = _weights(residuals, config) * np.array([c.weight for c in correspondences])

        information = jacobians.T @ (weights[:, None] * jacobians)
        spectrum = np.linalg.eigvalsh(information[:POSE_DIM, :POSE_DIM])
        if spectrum[-1] <= 0 or spectrum[0] < WEAK_SPECTRUM * spectrum[-1]:
            if not stats.degenerate:
                logger.warning(
                    "Weakly constrained update: spectrum ratio %.3g",
                    spectrum[0] / spectrum[-1] if spectrum[-1] > 0 else 0.0,
                )
            stats.degenerate = True

        error = iterate.error(prior, dim)
        curvature = information + np.diag(prior_diag)
        hessian = curvature + damping * np.diag(np.diag(curvature))
        gradient = jacobians.T @ (weights * residuals) + prior_diag * error
        if np.linalg.cond(hessian) > SINGULAR_CONDITION:
            raise DegeneracyError("Normal matrix is singular.")
        try:
            delta = np.linalg.solve(hessian, -gradient)
        except np.linalg.LinAlgError as exc:
            raise DegeneracyError("Normal matrix is singular.") from exc

        cost_before = _cost(iterate, prior, points, normals, offsets, weights, prior_diag)
        candidate = iterate.retract(delta, dt)
        cost_after = _cost(candidate, prior, points, normals, offsets, weights, prior_diag)
        step_norm = float(np.linalg.norm(delta))
        accepted = cost_after <= cost_before
        stats.history.append(
            IterationRecord(cost_before, cost_after, accepted, step_norm, len(correspondences))
        )
        if accepted:
            iterate = candidate
            damping = max(config.damping, damping / 10.0)
            if on_iteration is not None:
                on_iteration(iteration, iterate.state)
            if step_norm < config.converge_eps:
                stats.converged = True
                break
        else:
            damping = max(1e-3, damping * 10.0)
            logger.debug(
                "Rejected step %d: cost %.6g -> %.6g", iteration, cost_before, cost_after
            )

    return iterate.state, stats
