import logging
from collections.abc import Sequence
from dataclasses import replace

import numpy as np

from ..errors import InitializationError, TimestampError
from ..geom import ImuSample, NavState, Pose, renormalize, so3_exp

logger = logging.getLogger(__name__)


def _check_monotone(samples: Sequence[ImuSample]) -> None:
    for previous, current in zip(samples, samples[1:]):
        if not current.t > previous.t:
            raise TimestampError(
                "IMU timestamps must be strictly increasing: {a:.9f} then {b:.9f}.".format(
                    a=previous.t, b=current.t
                )
            )


def propagate_imu(
    state: NavState, samples: Sequence[ImuSample]
) -> tuple[NavState, list[tuple[float, Pose]]]:
    """
    Integrate IMU readings with the midpoint rule.

    Between consecutive samples the bias-corrected angular rate and specific
    force are averaged; the attitude advances by the averaged rate, and the
    specific force is rotated into the world with the attitude at the middle
    of the interval.

    :param state: the state at the time of the first sample.
    :param samples: at least two readings with strictly increasing times.
    :return: the state at the last sample, and the pose at every sample.
    :raise TimestampError: if timestamps are not strictly increasing.
    """
    if len(samples) < 2:
        raise TimestampError("Propagation needs at least two IMU samples.")
    _check_monotone(samples)

    rot = state.rot
    pos = np.array(state.pos)
    vel = np.array(state.vel)
    gravity = np.asarray(state.gravity)
    track = [(float(samples[0].t), Pose(rot, pos))]
    for current, following in zip(samples, samples[1:]):
        dt = following.t - current.t
        omega = 0.5 * (np.asarray(current.gyr) + np.asarray(following.gyr)) - state.bias_gyr
        force = 0.5 * (np.asarray(current.acc) + np.asarray(following.acc)) - state.bias_acc
        accel = (rot * so3_exp(0.5 * dt * omega)).apply(force) + gravity
        pos = pos + vel * dt + 0.5 * accel * dt * dt
        vel = vel + accel * dt
        rot = renormalize(rot * so3_exp(omega * dt))
        track.append((float(following.t), Pose(rot, pos)))

    return NavState(rot, pos, vel, state.bias_acc, state.bias_gyr, gravity), track


def interpolate_sample(a: ImuSample, b: ImuSample, t: float) -> ImuSample:
    """Linearly interpolate two readings at time t."""
    if b.t == a.t:
        return ImuSample(t, np.asarray(a.acc), np.asarray(a.gyr))
    alpha = (t - a.t) / (b.t - a.t)
    acc = (1.0 - alpha) * np.asarray(a.acc) + alpha * np.asarray(b.acc)
    gyr = (1.0 - alpha) * np.asarray(a.gyr) + alpha * np.asarray(b.gyr)
    return ImuSample(t, acc, gyr)


def initialize_from_static(
    samples: Sequence[ImuSample],
    gravity_init=(0.0, 0.0, -9.81),
    acc_var_max: float = 0.05,
    gravity_tolerance: float = 0.5,
) -> NavState:
    """
    Estimate gravity and the gyroscope bias from a window at rest.

    The world frame is the IMU frame at rest: the attitude is identity and
    gravity points against the mean specific force, with the magnitude of
    gravity_init. The gyroscope bias is the mean angular rate.

    :param samples: readings from the static window.
    :param gravity_init: nominal world gravity; its norm is kept.
    :param acc_var_max: largest accepted accelerometer variance per axis.
    :param gravity_tolerance: largest accepted deviation of the mean specific
        force magnitude from the nominal gravity magnitude.
    :raise InitializationError: on too few samples, motion or a specific
        force inconsistent with gravity.
    """
    if len(samples) < 2:
        raise InitializationError("The static window holds fewer than two IMU samples.")
    acc = np.array([sample.acc for sample in samples], dtype=float)
    gyr = np.array([sample.gyr for sample in samples], dtype=float)
    variance = acc.var(axis=0)
    if np.any(variance > acc_var_max):
        raise InitializationError(
            "Motion detected in the static window: accelerometer variance {} exceeds {}.".format(
                np.round(variance, 6), acc_var_max
            )
        )
    mean_acc = acc.mean(axis=0)
    nominal = float(np.linalg.norm(gravity_init))
    magnitude = float(np.linalg.norm(mean_acc))
    if abs(magnitude - nominal) > gravity_tolerance:
        raise InitializationError(
            "Mean specific force {m:.4f} m/s^2 is not within {tol} of gravity {g:.4f}.".format(
                m=magnitude, tol=gravity_tolerance, g=nominal
            )
        )
    gravity = -mean_acc / magnitude * nominal
    state = replace(NavState.at_rest(gravity), bias_gyr=gyr.mean(axis=0))
    logger.info(
        "Initialized from %d static samples: gravity %s, gyro bias %s",
        len(samples),
        np.round(gravity, 4),
        np.round(state.bias_gyr, 6),
    )
    return state
