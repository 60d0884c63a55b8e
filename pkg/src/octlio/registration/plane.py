from typing import NamedTuple

import numpy as np

# Relative bound on the middle eigenvalue below which neighbors are collinear.
COLLINEAR_RATIO = 1e-9
COLLINEAR_FLOOR = 1e-12


class PlaneFit(NamedTuple):
    """
    A local plane n.x + d = 0.

    :ivar normal: unit normal; zeros when the fit is invalid.
    :ivar d: plane offset.
    :ivar valid: True if every neighbor lies within the threshold.
    :ivar rms: root mean square point-to-plane distance of the neighbors.
    """

    normal: np.ndarray
    d: float
    valid: bool
    rms: float


def fit_planes(
    neighbors: np.ndarray, thresh: float, max_flatness: float | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Fit one plane per neighbor set by principal component analysis.

    :param neighbors: (M, K, 3) neighbor sets with K >= 3.
    :param thresh: largest allowed point-to-plane distance.
    :param max_flatness: when given, sets whose smallest covariance
        eigenvalue exceeds this fraction of the middle one are invalid too.
    :return: normals (M, 3), offsets (M,), validity (M,) and rms (M,).
    """
    neighbors = np.asarray(neighbors, dtype=float)
    count = neighbors.shape[0]
    if count == 0 or neighbors.shape[1] < 3:
        return (
            np.zeros((count, 3)),
            np.zeros(count),
            np.zeros(count, dtype=bool),
            np.zeros(count),
        )
    centroids = neighbors.mean(axis=1)
    centered = neighbors - centroids[:, None, :]
    covariance = np.einsum("mki,mkj->mij", centered, centered) / neighbors.shape[1]
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    normals = eigenvectors[:, :, 0]
    offsets = -np.einsum("mi,mi->m", normals, centroids)
    distances = np.einsum("mki,mi->mk", neighbors, normals) + offsets[:, None]
    rms = np.sqrt(np.mean(distances**2, axis=1))
    spread = eigenvalues[:, 1] > COLLINEAR_FLOOR + COLLINEAR_RATIO * eigenvalues[:, 2]
    valid = spread & np.all(np.abs(distances) <= thresh, axis=1)
    if max_flatness is not None:
        valid &= eigenvalues[:, 0] <= max_flatness * eigenvalues[:, 1]
    normals = np.where(valid[:, None], normals, 0.0)
    return normals, np.where(valid, offsets, 0.0), valid, rms


def fit_plane(neighbors, thresh: float) -> PlaneFit:
    """
    Fit a plane to a neighbor set.

    Fewer than three points, collinear points, or any neighbor farther than
    thresh from the fitted plane give an invalid fit.
    """
    points = np.asarray(neighbors, dtype=float).reshape(-1, 3)
    normals, offsets, valid, rms = fit_planes(points[None, :, :], thresh)
    return PlaneFit(normals[0], float(offsets[0]), bool(valid[0]), float(rms[0]))
