"""Small vector and polygon routines shared by the mesh and hole modules."""

from typing import Tuple
import numpy as np

from holepy.utilities._errors import ZeroVector


def unit(vector: np.ndarray) -> np.ndarray:
    """Returns the vector scaled to unit length."""
    vector = np.asarray(vector, dtype=float)
    norm = np.linalg.norm(vector)
    if norm == 0.0 or not np.isfinite(norm):
        raise ZeroVector(f"Cannot normalise vector {vector.tolist()}")
    return vector / norm


def best_fit_plane(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares plane through a set of points.

    :param points: (n, 3) array of points.
    :type points: numpy.ndarray
    :return: centroid, principal in-plane axis, and plane normal. The
        normal is the right singular vector of the centred points with
        the smallest singular value.
    :rtype: Tuple[numpy.ndarray, numpy.ndarray, numpy.ndarray]
    """
    points = np.asarray(points, dtype=float)
    centroid = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centroid, full_matrices=True)
    return centroid, vt[0], vt[2]


def plane_residual(points: np.ndarray) -> float:
    """Root mean square distance of the points from their best-fit plane."""
    points = np.asarray(points, dtype=float)
    if len(points) < 3:
        return 0.0
    centroid, _, normal = best_fit_plane(points)
    heights = (points - centroid) @ normal
    return float(np.sqrt(np.mean(heights**2)))


def signed_area_2d(polygon: np.ndarray) -> float:
    """Shoelace area of a closed 2D polygon, positive when counter-clockwise."""
    x = polygon[:, 0]
    y = polygon[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def cross_2d(a: np.ndarray, b: np.ndarray) -> float:
    """z component of the cross product of two 2D vectors."""
    return float(a[0] * b[1] - a[1] * b[0])


def point_in_triangle_2d(
    point: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray, eps: float
) -> bool:
    """Closed containment test of a point in a counter-clockwise triangle."""
    return (
        cross_2d(b - a, point - a) >= -eps
        and cross_2d(c - b, point - b) >= -eps
        and cross_2d(a - c, point - c) >= -eps
    )


def triangle_areas(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Area of every face."""
    if len(faces) == 0:
        return np.zeros(0)
    tris = vertices[faces]
    cross = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)
