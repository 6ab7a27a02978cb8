"""Surface to surface distances: point-triangle distance, sampled
one-sided distances and the two-sided Hausdorff report."""

from dataclasses import dataclass
from enum import Enum
import logging
from typing import Optional, Tuple
import numpy as np
from scipy.spatial import cKDTree

from holepy.mesh._mesh import TriangleMesh
from holepy.utilities._errors import EmptyMesh

logger = logging.getLogger(__name__)

# face samples per face when no density or budget is given
DEFAULT_SAMPLES_PER_FACE = 10
QUERY_CHUNK = 50_000


class SamplingMode(Enum):
    """Which points of a surface are measured."""

    VERTICES_ONLY = "vertices"
    VERTICES_PLUS_FACE_SAMPLES = "vertices+faces"


@dataclass(frozen=True)
class SamplingSpec:
    """
    How a surface is sampled for distance measurement.

    Vertices are always sampled. In face sampling mode the number of
    extra samples is, in order of precedence, budget, samples_per_area
    times the surface area, or 10 per face; capped at max_samples.

    :param mode: Vertices only, or vertices plus face samples.
    :type mode: SamplingMode
    :param samples_per_area: Optional - Face samples per squared unit.
    :type samples_per_area: float or None
    :param budget: Optional - Fixed number of face samples.
    :type budget: int or None
    :param max_samples: Cap on the number of face samples.
    :type max_samples: int
    :param seed: Seed of the random sampler.
    :type seed: int
    """

    mode: SamplingMode = SamplingMode.VERTICES_PLUS_FACE_SAMPLES
    samples_per_area: Optional[float] = None
    budget: Optional[int] = None
    max_samples: int = 2_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.budget is not None and self.budget <= 0:
            raise ValueError(f"Sample budget must be positive, got {self.budget}")
        if self.samples_per_area is not None and not self.samples_per_area > 0:
            raise ValueError("samples_per_area must be positive")
        if self.max_samples <= 0:
            raise ValueError("max_samples must be positive")

    def face_samples(self, mesh: TriangleMesh) -> int:
        """Number of face samples to draw on a mesh."""
        if self.mode is SamplingMode.VERTICES_ONLY or mesh.face_count == 0:
            return 0
        if self.budget is not None:
            count = self.budget
        elif self.samples_per_area is not None:
            count = int(round(self.samples_per_area * float(mesh.face_areas.sum())))
        else:
            count = DEFAULT_SAMPLES_PER_FACE * mesh.face_count
        return min(count, self.max_samples)


@dataclass(frozen=True)
class OneSidedDistance:
    """Sampled distance from one surface to another."""

    maximum: float
    mean: float
    samples: int
    weighted_sum: float
    total_weight: float


@dataclass(frozen=True)
class DistanceReport:
    """
    Two-sided distance between surfaces S and S'.

    ``delta_max`` is the larger of the two one-sided maxima and
    ``delta_avg`` the area-weighted mean distance pooled over the
    samples of both directions. Normalised values divide by the
    bounding box diagonal of S.
    """

    delta_max: float
    delta_avg: float
    forward_max: float
    forward_avg: float
    backward_max: float
    backward_avg: float
    forward_samples: int
    backward_samples: int
    bbox_diagonal: float
    seed: int = 0

    @property
    def delta_max_normalized(self) -> float:
        """delta_max divided by the bounding box diagonal."""
        return self.delta_max / self.bbox_diagonal if self.bbox_diagonal else 0.0

    @property
    def delta_avg_normalized(self) -> float:
        """delta_avg divided by the bounding box diagonal."""
        return self.delta_avg / self.bbox_diagonal if self.bbox_diagonal else 0.0

    def to_dict(self) -> dict:
        """Plain values, for JSON output."""
        return {
            "delta_max": self.delta_max,
            "delta_max_normalized": self.delta_max_normalized,
            "delta_avg": self.delta_avg,
            "delta_avg_normalized": self.delta_avg_normalized,
            "forward_max": self.forward_max,
            "forward_avg": self.forward_avg,
            "backward_max": self.backward_max,
            "backward_avg": self.backward_avg,
            "forward_samples": self.forward_samples,
            "backward_samples": self.backward_samples,
            "bbox_diagonal": self.bbox_diagonal,
            "seed": self.seed,
        }


def _dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] + u[..., 2] * v[..., 2]


def closest_points_on_triangles(
    p: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> np.ndarray:
    """Closest point of each triangle (a, b, c) to the matching point p.

    All arguments are (k, 3) arrays. The triangle is split into its
    vertex, edge and face regions and each point is projected onto the
    region it falls in. Triangles with no area fall back to their
    closest edge.
    """
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = _dot(ab, ap), _dot(ac, ap)
    bp = p - b
    d3, d4 = _dot(ab, bp), _dot(ac, bp)
    cp = p - c
    d5, d6 = _dot(ab, cp), _dot(ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    with np.errstate(divide="ignore", invalid="ignore"):
        denom = va + vb + vc
        v_in = vb / denom
        w_in = vc / denom
        result = a + ab * v_in[:, None] + ac * w_in[:, None]

        w_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        on_bc = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
        result = np.where(on_bc[:, None], b + (c - b) * w_bc[:, None], result)

        w_ac = d2 / (d2 - d6)
        on_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
        result = np.where(on_ac[:, None], a + ac * w_ac[:, None], result)

        on_c = (d6 >= 0) & (d5 <= d6)
        result = np.where(on_c[:, None], c, result)

        v_ab = d1 / (d1 - d3)
        on_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
        result = np.where(on_ab[:, None], a + ab * v_ab[:, None], result)

        on_b = (d3 >= 0) & (d4 <= d3)
        result = np.where(on_b[:, None], b, result)

        on_a = (d1 <= 0) & (d2 <= 0)
        result = np.where(on_a[:, None], a, result)

    broken = ~np.all(np.isfinite(result), axis=1)
    if broken.any():
        result[broken] = _closest_on_edges(p[broken], a[broken], b[broken], c[broken])
    return result


def _closest_on_edges(p, a, b, c) -> np.ndarray:
    best = None
    best_dist = None
    for start, end in ((a, b), (b, c), (c, a)):
        span = end - start
        length2 = _dot(span, span)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(length2 > 0, _dot(p - start, span) / length2, 0.0)
        point = start + span * np.clip(t, 0.0, 1.0)[:, None]
        offset = p - point
        dist = _dot(offset, offset)
        if best is None:
            best, best_dist = point, dist
        else:
            closer = dist < best_dist
            best = np.where(closer[:, None], point, best)
            best_dist = np.where(closer, dist, best_dist)
    return best


def point_triangle_distances(
    p: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> np.ndarray:
    """Distance from each point p to its matching triangle (a, b, c)."""
    offset = p - closest_points_on_triangles(p, a, b, c)
    return np.sqrt(_dot(offset, offset))


def point_triangle_distance(p, tri) -> float:
    """Exact Euclidean distance from a point to a closed triangle.

    :param p: The point.
    :type p: Sequence[float]
    :param tri: The three corners of the triangle.
    :type tri: Sequence[Sequence[float]]
    :rtype: float
    """
    p = np.asarray(p, dtype=np.float64).reshape(1, 3)
    tri = np.asarray(tri, dtype=np.float64).reshape(3, 3)
    return float(point_triangle_distances(p, tri[:1], tri[1:2], tri[2:])[0])


class TriangleIndex:
    """
    Exact nearest-triangle distance queries over a mesh.

    Triangle centroids are held in a k-d tree. For a query point the
    triangle with the nearest centroid gives an upper bound d0 on the
    distance. No point of a triangle is closer than its centroid
    distance minus its radius, so only triangles whose centroid lies
    within d0 plus the largest radius can do better, and those are all
    measured exactly.

    :param mesh: Mesh to index. Must have at least one face.
    :type mesh: TriangleMesh
    """

    def __init__(self, mesh: TriangleMesh) -> None:
        if mesh.face_count == 0:
            raise EmptyMesh("Cannot measure distance to a mesh with no faces")
        tris = mesh.vertices[mesh.faces]
        self._a = np.ascontiguousarray(tris[:, 0])
        self._b = np.ascontiguousarray(tris[:, 1])
        self._c = np.ascontiguousarray(tris[:, 2])
        centroids = tris.mean(axis=1)
        self._radius = float(
            np.linalg.norm(tris - centroids[:, None, :], axis=2).max()
        )
        self._tree = cKDTree(centroids)

    @property
    def face_count(self) -> int:
        """Number of indexed triangles."""
        return len(self._a)

    def distances(self, points: np.ndarray) -> np.ndarray:
        """Distance from each point to the nearest indexed triangle."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        result = np.empty(len(points))
        for start in range(0, len(points), QUERY_CHUNK):
            chunk = points[start: start + QUERY_CHUNK]
            result[start: start + len(chunk)] = self._query(chunk)
        return result

    def _query(self, points: np.ndarray) -> np.ndarray:
        _, nearest = self._tree.query(points)
        upper = point_triangle_distances(
            points, self._a[nearest], self._b[nearest], self._c[nearest]
        )
        reach = upper + self._radius
        reach = reach + 1e-9 * reach + 1e-300
        candidates = self._tree.query_ball_point(points, reach)
        counts = np.fromiter((len(c) for c in candidates), dtype=np.int64, count=len(points))
        faces = np.fromiter(
            (f for group in candidates for f in group), dtype=np.int64, count=int(counts.sum())
        )
        owners = np.repeat(np.arange(len(points)), counts)
        measured = point_triangle_distances(
            points[owners], self._a[faces], self._b[faces], self._c[faces]
        )
        best = np.full(len(points), np.inf)
        np.minimum.at(best, owners, measured)
        return np.minimum(best, upper)


def brute_force_distances(points: np.ndarray, mesh: TriangleMesh) -> np.ndarray:
    """Distance from each point to the mesh, measured against every
    triangle. Quadratic; meant for checking TriangleIndex."""
    if mesh.face_count == 0:
        raise EmptyMesh("Cannot measure distance to a mesh with no faces")
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    tris = mesh.vertices[mesh.faces]
    result = np.empty(len(points))
    for k, point in enumerate(points):
        repeated = np.broadcast_to(point, (len(tris), 3))
        result[k] = point_triangle_distances(
            repeated, tris[:, 0], tris[:, 1], tris[:, 2]
        ).min()
    return result


def sample_surface(
    mesh: TriangleMesh, spec: SamplingSpec
) -> Tuple[np.ndarray, np.ndarray]:
    """Sample points of a mesh and the area each one stands for.

    Vertices are weighted by a third of the area of their faces; face
    samples share the total area equally. Face samples are drawn from
    a generator seeded by spec.seed, so a larger count extends a
    smaller one without changing it.

    :return: (k, 3) points and (k,) weights.
    """
    areas = mesh.face_areas
    vertex_weights = np.zeros(mesh.vertex_count)
    if mesh.face_count:
        np.add.at(vertex_weights, mesh.faces.ravel(), np.repeat(areas / 3.0, 3))
    count = spec.face_samples(mesh)
    if count == 0 or not areas.sum() > 0:
        return mesh.vertices.copy(), vertex_weights

    rng = np.random.default_rng(spec.seed)
    draws = rng.random((count, 3))
    cdf = np.cumsum(areas)
    cdf /= cdf[-1]
    faces = np.minimum(np.searchsorted(cdf, draws[:, 0], side="right"), len(areas) - 1)
    root = np.sqrt(draws[:, 1])
    w = draws[:, 2]
    tris = mesh.vertices[mesh.faces[faces]]
    samples = (
        (1.0 - root)[:, None] * tris[:, 0]
        + (root * (1.0 - w))[:, None] * tris[:, 1]
        + (root * w)[:, None] * tris[:, 2]
    )
    weights = np.full(count, float(areas.sum()) / count)
    return (
        np.vstack([mesh.vertices, samples]),
        np.concatenate([vertex_weights, weights]),
    )


def one_sided_distance(
    source: TriangleMesh,
    target: TriangleMesh,
    spec: Optional[SamplingSpec] = None,
    index: Optional[TriangleIndex] = None,
) -> OneSidedDistance:
    """Distance from the samples of source to the surface of target.

    :return: Maximum and area-weighted mean distance.
    :raises EmptyMesh: when source has no vertices or target no faces
    """
    spec = SamplingSpec() if spec is None else spec
    if source.vertex_count == 0:
        raise EmptyMesh("Cannot sample a mesh with no vertices")
    index = TriangleIndex(target) if index is None else index
    points, weights = sample_surface(source, spec)
    distances = index.distances(points)
    total = float(weights.sum())
    weighted = float(np.dot(weights, distances))
    mean = weighted / total if total > 0 else float(distances.mean())
    return OneSidedDistance(float(distances.max()), mean, len(points), weighted, total)


def hausdorff_report(
    surface: TriangleMesh,
    other: TriangleMesh,
    spec: Optional[SamplingSpec] = None,
) -> DistanceReport:
    """Two-sided sampled Hausdorff distance between two meshes.

    :param surface: S, whose bounding box normalises the report.
    :type surface: TriangleMesh
    :param other: S'.
    :type other: TriangleMesh
    :param spec: Optional - Sampling of both surfaces.
    :type spec: SamplingSpec or None
    :rtype: DistanceReport
    :raises EmptyMesh: when either mesh has no faces
    """
    spec = SamplingSpec() if spec is None else spec
    if surface.face_count == 0 or other.face_count == 0:
        raise EmptyMesh("Both meshes need at least one face")
    forward = one_sided_distance(surface, other, spec)
    backward = one_sided_distance(other, surface, spec)
    total = forward.total_weight + backward.total_weight
    pooled = (forward.weighted_sum + backward.weighted_sum) / total if total > 0 else 0.0
    logger.debug(
        "Distance samples: %d forward, %d backward", forward.samples, backward.samples
    )
    return DistanceReport(
        delta_max=max(forward.maximum, backward.maximum),
        delta_avg=pooled,
        forward_max=forward.maximum,
        forward_avg=forward.mean,
        backward_max=backward.maximum,
        backward_avg=backward.mean,
        forward_samples=forward.samples,
        backward_samples=backward.samples,
        bbox_diagonal=surface.bbox_diagonal,
        seed=spec.seed,
    )
