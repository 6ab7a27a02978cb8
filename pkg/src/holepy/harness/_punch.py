"""Punching holes into meshes by removing the faces inside spheres."""

from dataclasses import dataclass, field
from enum import Enum
import logging
from typing import Tuple
import networkx as nx
import numpy as np

from holepy.harness._shapes import ShapeKind, SyntheticShape
from holepy.mesh._mesh import TriangleMesh, boundary_edges, boundary_loops
from holepy.utilities._errors import PunchBreaksManifold

logger = logging.getLogger(__name__)

# rounds of bowtie removal before giving up
MAX_REPAIRS = 20
# default punch radius, in mean edge lengths
PUNCH_RADIUS_FACTOR = 4.5


class PunchMode(Enum):
    """One sphere, or several whose removed regions may merge."""

    SINGLE_LOBE = "single-lobe"
    MULTI_LOBE = "multi-lobe"


@dataclass(frozen=True)
class PunchSpec:
    """
    Spheres whose faces are removed from a mesh.

    :param centers: (k, 3) sphere centres.
    :type centers: numpy.ndarray
    :param radii: k sphere radii, all positive.
    :type radii: numpy.ndarray
    :param mode: SINGLE_LOBE requires exactly one sphere.
    :type mode: PunchMode
    """

    centers: np.ndarray
    radii: np.ndarray
    mode: PunchMode = PunchMode.SINGLE_LOBE

    def __post_init__(self) -> None:
        centers = np.array(self.centers, dtype=np.float64).reshape(-1, 3)
        radii = np.array(self.radii, dtype=np.float64).reshape(-1)
        if len(centers) == 0 or len(centers) != len(radii):
            raise ValueError("A punch needs one radius per centre and at least one centre")
        if not np.all(radii > 0):
            raise ValueError(f"Punch radii must be positive, got {radii.tolist()}")
        if self.mode is PunchMode.SINGLE_LOBE and len(centers) != 1:
            raise ValueError("A single lobe punch takes exactly one centre")
        centers.setflags(write=False)
        radii.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    def __len__(self) -> int:
        return len(self.radii)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Mask of the points inside any of the spheres."""
        points = np.atleast_2d(points)
        inside = np.zeros(len(points), dtype=bool)
        for center, radius in zip(self.centers, self.radii):
            offset = points - center
            inside |= np.einsum("ij,ij->i", offset, offset) <= radius * radius
        return inside


@dataclass
class PunchRecord:
    """
    What a punch removed.

    ``kept_vertices[k]`` is the index in the original mesh of vertex k
    of the punched mesh.
    """

    removed_faces: Tuple[int, ...]
    repaired_faces: int
    dropped_vertices: int
    regions: int
    loops: int
    kept_vertices: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        """Plain values, for JSON output."""
        return {
            "removed_faces": len(self.removed_faces),
            "repaired_faces": self.repaired_faces,
            "dropped_vertices": self.dropped_vertices,
            "regions": self.regions,
            "loops": self.loops,
        }


def punch(mesh: TriangleMesh, spec: PunchSpec) -> Tuple[TriangleMesh, PunchRecord]:
    """Removes every face whose centroid lies in one of the punch
    spheres.

    Coordinates of the remaining vertices are copied unchanged.

    :param mesh: Mesh to punch. It is not modified.
    :type mesh: TriangleMesh
    :param spec: The spheres.
    :type spec: PunchSpec
    :return: The punched mesh and a record of what was removed.
    :raises ValueError: when a removed face touches an existing boundary
    :raises PunchBreaksManifold: when the boundary cannot be made of
        simple rings
    """
    if mesh.face_count == 0:
        return TriangleMesh(mesh.vertices, mesh.faces), _empty_record(mesh)
    centroids = mesh.vertices[mesh.faces].mean(axis=1)
    remove = spec.contains(centroids)

    rim = np.unique(np.array(boundary_edges(mesh), dtype=np.int64).reshape(-1))
    if len(rim) and np.isin(mesh.faces[remove], rim).any():
        raise ValueError("Punched region touches the outer rim of the mesh")
    if not remove.any():
        logger.warning("Punch spheres contain no face centroid, nothing removed")
    return remove_faces(mesh, remove)


def remove_faces(mesh: TriangleMesh, remove: np.ndarray) -> Tuple[TriangleMesh, PunchRecord]:
    """Removes the masked faces and repairs the boundary left behind.

    Vertices where two separate boundary wedges meet lose all their
    faces, as do faces left with no neighbour, until every boundary
    vertex has exactly two boundary edges. Vertices without faces are
    dropped.

    :raises PunchBreaksManifold: when the repair does not converge or
        removes every face
    """
    remove = np.array(remove, dtype=bool)
    faces = mesh.faces
    requested = int(remove.sum())
    for _ in range(MAX_REPAIRS):
        broken = _broken_faces(faces, ~remove)
        if not broken.any():
            break
        remove |= broken
    else:
        raise PunchBreaksManifold(
            f"Boundary still pinched after {MAX_REPAIRS} rounds of repair"
        )
    if remove.all():
        raise PunchBreaksManifold("Punch removes every face of the mesh")

    kept_faces = faces[~remove]
    kept_vertices = np.unique(kept_faces)
    remap = np.full(mesh.vertex_count, -1, dtype=np.int64)
    remap[kept_vertices] = np.arange(len(kept_vertices))
    punched = TriangleMesh(mesh.vertices[kept_vertices], remap[kept_faces])

    dropped = mesh.vertex_count - len(kept_vertices)
    if dropped:
        logger.warning("Dropped %d vertices left without faces", dropped)
    repaired = int(remove.sum()) - requested
    if repaired:
        logger.info("Removed %d more faces to unpinch the boundary", repaired)

    record = PunchRecord(
        removed_faces=tuple(np.flatnonzero(remove).tolist()),
        repaired_faces=repaired,
        dropped_vertices=dropped,
        regions=_count_regions(mesh, remove),
        loops=len(boundary_loops(punched)) - len(boundary_loops(mesh)),
        kept_vertices=kept_vertices,
    )
    logger.debug("Punch record: %s", record.to_dict())
    return punched, record


def default_punch(
    shape: SyntheticShape,
    mesh: TriangleMesh,
    on_crease: bool = True,
    radius_factor: float = PUNCH_RADIUS_FACTOR,
) -> PunchSpec:
    """A punch making one large hole on a generated shape.

    The radius is radius_factor mean edge lengths. On the crease shape
    the hole is centred on the crease; on the two-crease shape three
    overlapping lobes at both creases and the middle of the ramp make
    one complex hole. With on_crease off the hole is punched on the
    flat floor instead.
    """
    edges = np.array(mesh.edges, dtype=np.int64)
    spacing = float(
        np.linalg.norm(mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]], axis=1).mean()
    )
    radius = radius_factor * spacing
    kind, size = shape.kind, shape.size

    if kind is ShapeKind.SPHERE:
        return PunchSpec([[0.0, 0.0, size]], [radius])
    if kind is ShapeKind.TORUS:
        return PunchSpec([[size * (1.0 + shape.minor_ratio), 0.0, 0.0]], [radius])
    if kind in (ShapeKind.PLANE, ShapeKind.SADDLE):
        return PunchSpec([[0.0, 0.0, 0.0]], [radius])
    if not on_crease:
        x, z = shape.profile(-0.5 * size)
        return PunchSpec([[x, 0.0, z]], [radius])
    if kind is ShapeKind.CREASE:
        return PunchSpec([[0.0, 0.0, 0.0]], [radius])

    half = shape.crease_positions[1]
    positions = shape.profile(np.array([-half, 0.0, half]))
    centers = np.column_stack([positions[:, 0], np.zeros(3), positions[:, 1]])
    return PunchSpec(centers, np.full(3, half / 1.5), PunchMode.MULTI_LOBE)


def _broken_faces(faces: np.ndarray, kept: np.ndarray) -> np.ndarray:
    """Kept faces to remove so the boundary becomes simple rings."""
    indices = np.flatnonzero(kept)
    if len(indices) == 0:
        return np.zeros(len(faces), dtype=bool)
    sub = faces[indices]
    edges = np.sort(
        np.concatenate([sub[:, [0, 1]], sub[:, [1, 2]], sub[:, [2, 0]]]), axis=1
    )
    _, inverse, counts = np.unique(
        edges, axis=0, return_inverse=True, return_counts=True
    )
    on_boundary = counts[inverse.reshape(-1)] == 1
    degree = np.bincount(edges[on_boundary].ravel(), minlength=int(faces.max()) + 1)
    pinched = np.flatnonzero(degree > 2)
    # faces with all three edges on the boundary hang by their corners
    isolated = on_boundary.reshape(3, -1).all(axis=0)
    broken = np.isin(sub, pinched).any(axis=1) | isolated
    result = np.zeros(len(faces), dtype=bool)
    result[indices[broken]] = True
    return result


def _count_regions(mesh: TriangleMesh, remove: np.ndarray) -> int:
    graph = nx.Graph()
    graph.add_nodes_from(np.flatnonzero(remove).tolist())
    for faces in mesh.edge_faces.values():
        if len(faces) == 2 and remove[faces[0]] and remove[faces[1]]:
            graph.add_edge(faces[0], faces[1])
    return nx.number_connected_components(graph)


def _empty_record(mesh: TriangleMesh) -> PunchRecord:
    return PunchRecord((), 0, 0, 0, 0, np.arange(mesh.vertex_count))
