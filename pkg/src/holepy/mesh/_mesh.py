"""holepy triangle mesh."""

from dataclasses import dataclass
import logging
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple
import networkx as nx
import numpy as np

from holepy.utilities._errors import (
    DegenerateBoundary,
    DegenerateFace,
    DuplicateFace,
    IndexOutOfRange,
    NonManifoldEdge,
    ZeroVector,
)
from holepy.utilities._geometry import triangle_areas
from holepy.utilities._util import cyclic_pairs, edge_key

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]

# cross product norms below this multiple of the squared bbox diagonal
# mark a face as degenerate
DEGENERATE_TOLERANCE = 1e-15


class TriangleMesh:
    """
    An indexed triangle mesh with the edge and vertex adjacency needed
    to find and fill holes.

    Vertices and faces are kept in growable numpy buffers. The
    ``vertices`` and ``faces`` properties return views of the used part
    of each buffer, so callers must copy them if they need a snapshot
    that survives later additions.

    The mesh must be a 2-manifold with boundary: every edge is shared
    by one or two faces. Degenerate (zero area) faces are accepted, kept,
    and listed in ``degenerate_faces``.

    :param vertices: Optional - (n, 3) array-like of vertex coordinates.
        All coordinates must be finite.
    :type vertices: numpy.ndarray or Sequence[Sequence[float]]

    :param faces: Optional - (m, 3) array-like of vertex indices. Each
        face must reference three distinct, existing vertices.
    :type faces: numpy.ndarray or Sequence[Sequence[int]]
    """

    def __init__(self, vertices=None, faces=None) -> None:
        vertices = _as_vertex_array(vertices)
        faces = _as_face_array(faces)
        _validate_faces(faces, len(vertices))

        self._vertices = np.empty((max(len(vertices), 8), 3), dtype=np.float64)
        self._vertices[: len(vertices)] = vertices
        self._n_vertices = len(vertices)
        self._faces = np.empty((max(len(faces), 8), 3), dtype=np.int64)
        self._faces[: len(faces)] = faces
        self._n_faces = len(faces)

        self._edge_faces: Dict[Edge, List[int]] = {}
        self._vertex_faces: List[List[int]] = [[] for _ in range(len(vertices))]
        self._face_keys: Set[Tuple[int, int, int]] = set()
        self.degenerate_faces: List[int] = []

        if len(vertices):
            self._lower = vertices.min(axis=0)
            self._upper = vertices.max(axis=0)
        else:
            self._lower = np.zeros(3)
            self._upper = np.zeros(3)

        for index, face in enumerate(faces.tolist()):
            self._register_face(index, face, check_degenerate=False)
        if len(faces):
            areas2 = 2.0 * triangle_areas(vertices, faces)
            tolerance = DEGENERATE_TOLERANCE * self.bbox_diagonal**2
            self.degenerate_faces = np.flatnonzero(areas2 <= tolerance).tolist()
        if self.degenerate_faces:
            logger.warning(
                "Mesh contains %d degenerate faces; they are kept",
                len(self.degenerate_faces),
            )

    def __repr__(self) -> str:
        return (
            f"TriangleMesh(vertices={self._n_vertices}, faces={self._n_faces})"
        )

    def __str__(self) -> str:
        return (
            f"TriangleMesh with {self._n_vertices} vertices, "
            f"{len(self._edge_faces)} edges and {self._n_faces} faces"
        )

    @property
    def vertices(self) -> np.ndarray:
        """(n, 3) view of the vertex coordinates."""
        return self._vertices[: self._n_vertices]

    @property
    def faces(self) -> np.ndarray:
        """(m, 3) view of the face vertex indices."""
        return self._faces[: self._n_faces]

    @property
    def vertex_count(self) -> int:
        """Number of vertices."""
        return self._n_vertices

    @property
    def face_count(self) -> int:
        """Number of faces."""
        return self._n_faces

    @property
    def edge_count(self) -> int:
        """Number of distinct edges."""
        return len(self._edge_faces)

    @property
    def edges(self) -> List[Edge]:
        """Sorted list of edges, each with its smaller vertex first."""
        return sorted(self._edge_faces)

    @property
    def edge_faces(self) -> Mapping[Edge, List[int]]:
        """Read-only map of each edge to the faces incident to it."""
        return MappingProxyType(self._edge_faces)

    @property
    def bbox_diagonal(self) -> float:
        """Length of the bounding box diagonal."""
        return float(np.linalg.norm(self._upper - self._lower))

    @property
    def face_areas(self) -> np.ndarray:
        """Area of every face."""
        return triangle_areas(self.vertices, self.faces)

    @property
    def is_watertight(self) -> bool:
        """True when no edge is a boundary edge."""
        return all(len(faces) == 2 for faces in self._edge_faces.values())

    def incident_faces(self, a: int, b: int) -> List[int]:
        """Faces incident to the edge (a, b), in either direction."""
        return list(self._edge_faces.get(edge_key(a, b), []))

    def vertex_faces(self, vertex: int) -> List[int]:
        """Faces that use the given vertex."""
        self._check_vertex(vertex)
        return list(self._vertex_faces[vertex])

    def vertex_neighbors(self, vertex: int) -> List[int]:
        """Vertices sharing an edge with the given vertex, sorted."""
        self._check_vertex(vertex)
        neighbours = set()
        for face in self._vertex_faces[vertex]:
            neighbours.update(self._faces[face].tolist())
        neighbours.discard(vertex)
        return sorted(neighbours)

    def oriented_edge(self, a: int, b: int) -> Edge:
        """The edge (a, b) in the direction it is traversed by its first
        incident face."""
        faces = self._edge_faces.get(edge_key(a, b))
        if not faces:
            raise ValueError(f"({a}, {b}) is not an edge of the mesh")
        face = self._faces[faces[0]].tolist()
        for start, end in cyclic_pairs(face):
            if (start, end) == (a, b):
                return (a, b)
        return (b, a)

    def add_vertex(self, point: Sequence[float]) -> int:
        """Appends a vertex and returns its index."""
        point = np.asarray(point, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(point)):
            raise ValueError(f"Vertex coordinates must be finite, got {point}")
        if self._n_vertices == len(self._vertices):
            self._vertices = _grow(self._vertices)
        index = self._n_vertices
        self._vertices[index] = point
        self._n_vertices += 1
        self._vertex_faces.append([])
        if index == 0:
            self._lower = point.copy()
            self._upper = point.copy()
        else:
            self._lower = np.minimum(self._lower, point)
            self._upper = np.maximum(self._upper, point)
        return index

    def add_vertices(self, points: Iterable[Sequence[float]]) -> List[int]:
        """Appends several vertices and returns their indices."""
        return [self.add_vertex(point) for point in points]

    def set_vertex(self, vertex: int, point: Sequence[float]) -> None:
        """Moves an existing vertex."""
        self._check_vertex(vertex)
        point = np.asarray(point, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(point)):
            raise ValueError(f"Vertex coordinates must be finite, got {point}")
        self._vertices[vertex] = point
        self._lower = np.minimum(self._lower, point)
        self._upper = np.maximum(self._upper, point)

    def add_face(self, face: Sequence[int]) -> int:
        """Appends a face after checking it keeps the mesh manifold,
        and returns its index."""
        face = [int(index) for index in face]
        if len(face) != 3:
            raise ValueError(f"A face needs exactly 3 vertices, got {face}")
        for index in face:
            self._check_vertex(index)
        if len(set(face)) != 3:
            raise ValueError(f"Face {tuple(face)} repeats a vertex")
        if tuple(sorted(face)) in self._face_keys:
            raise DuplicateFace(tuple(face))
        for a, b in cyclic_pairs(face):
            count = len(self._edge_faces.get(edge_key(a, b), ()))
            if count >= 2:
                raise NonManifoldEdge(edge_key(a, b), count + 1)

        if self._n_faces == len(self._faces):
            self._faces = _grow(self._faces)
        index = self._n_faces
        self._faces[index] = face
        self._n_faces += 1
        self._register_face(index, face)
        return index

    def add_faces(self, faces: Iterable[Sequence[int]]) -> List[int]:
        """Appends several faces and returns their indices."""
        return [self.add_face(face) for face in faces]

    def rollback(self, vertex_count: int, face_count: int) -> None:
        """Discards every vertex and face appended after the mesh had
        the given counts."""
        if not 0 <= face_count <= self._n_faces:
            raise IndexOutOfRange(f"Cannot roll back to {face_count} faces")
        if not 0 <= vertex_count <= self._n_vertices:
            raise IndexOutOfRange(f"Cannot roll back to {vertex_count} vertices")
        for index in range(self._n_faces - 1, face_count - 1, -1):
            face = self._faces[index].tolist()
            for a, b in cyclic_pairs(face):
                key = edge_key(a, b)
                self._edge_faces[key].remove(index)
                if not self._edge_faces[key]:
                    del self._edge_faces[key]
            for vertex in face:
                self._vertex_faces[vertex].remove(index)
            self._face_keys.discard(tuple(sorted(face)))
        self.degenerate_faces = [f for f in self.degenerate_faces if f < face_count]
        self._n_faces = face_count
        if any(self._vertex_faces[v] for v in range(vertex_count, self._n_vertices)):
            raise RuntimeError("Rolled back vertices are still referenced")
        del self._vertex_faces[vertex_count:]
        self._n_vertices = vertex_count
        if vertex_count:
            self._lower = self.vertices.min(axis=0)
            self._upper = self.vertices.max(axis=0)

    def copy(self) -> "TriangleMesh":
        """Independent copy of the mesh."""
        return TriangleMesh(self.vertices.copy(), self.faces.copy())

    def _check_vertex(self, vertex: int) -> None:
        if not 0 <= vertex < self._n_vertices:
            raise IndexOutOfRange(
                f"Vertex index {vertex} out of range for "
                f"{self._n_vertices} vertices"
            )

    def _register_face(
        self, index: int, face: Sequence[int], check_degenerate: bool = True
    ) -> None:
        for a, b in cyclic_pairs(face):
            self._edge_faces.setdefault(edge_key(a, b), []).append(index)
        for vertex in face:
            self._vertex_faces[vertex].append(index)
        self._face_keys.add(tuple(sorted(face)))
        if not check_degenerate:
            return
        p0, p1, p2 = self._vertices[list(face)]
        norm = np.linalg.norm(np.cross(p1 - p0, p2 - p0))
        if norm <= DEGENERATE_TOLERANCE * self.bbox_diagonal**2:
            self.degenerate_faces.append(index)


@dataclass(frozen=True)
class BoundaryLoop:
    """
    An ordered, closed ring of boundary vertices around a hole.

    The loop runs against the direction its faces traverse each
    boundary edge, so the hole lies on the left when walking the loop
    on the outside of the surface.

    :param vertex_indices: Cyclic sequence of mesh vertex indices.
    :type vertex_indices: Tuple[int]
    """

    vertex_indices: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.vertex_indices) < 3:
            raise ValueError("A boundary loop needs at least 3 vertices")
        if len(set(self.vertex_indices)) != len(self.vertex_indices):
            raise ValueError("A boundary loop may not repeat a vertex")

    def __len__(self) -> int:
        return len(self.vertex_indices)

    @property
    def edge_list(self) -> List[Edge]:
        """Consecutive vertex pairs, last wrapping to first."""
        return cyclic_pairs(self.vertex_indices)

    def reversed(self) -> "BoundaryLoop":
        """The same ring traversed the other way, from the same start."""
        first, *rest = self.vertex_indices
        return BoundaryLoop((first, *reversed(rest)))


def build_mesh(vertices, faces) -> TriangleMesh:
    """Builds a validated TriangleMesh from vertices and index triples.

    :raises ValueError: for non-finite coordinates or faces repeating a vertex
    :raises IndexOutOfRange: when a face references a missing vertex
    :raises DuplicateFace: when two faces use the same three vertices
    :raises NonManifoldEdge: when an edge has three or more faces
    """
    return TriangleMesh(vertices, faces)


def boundary_edges(mesh: TriangleMesh) -> List[Edge]:
    """Edges with exactly one incident face, sorted."""
    return sorted(
        edge for edge, faces in mesh.edge_faces.items() if len(faces) == 1
    )


def boundary_loops(mesh: TriangleMesh) -> List[BoundaryLoop]:
    """Traces every boundary edge into closed, simple rings.

    Loops start at their smallest vertex and are listed in order of
    that vertex.

    :raises DegenerateBoundary: when a boundary vertex has a number of
        boundary edges other than two
    """
    graph = nx.Graph()
    graph.add_edges_from(boundary_edges(mesh))
    for vertex in sorted(graph.nodes):
        degree = graph.degree[vertex]
        if degree != 2:
            raise DegenerateBoundary(vertex, degree)

    loops = []
    for component in nx.connected_components(graph):
        start = min(component)
        first, second = sorted(graph.neighbors(start))
        # the loop walks each boundary edge against its face
        nxt = first if mesh.oriented_edge(start, first) == (first, start) else second
        ring = [start]
        previous, current = start, nxt
        while current != start:
            ring.append(current)
            a, b = graph.neighbors(current)
            previous, current = current, (b if a == previous else a)
        loops.append(BoundaryLoop(tuple(ring)))
    loops.sort(key=lambda loop: loop.vertex_indices[0])
    return loops


def face_normal(mesh: TriangleMesh, face: int) -> np.ndarray:
    """Unit normal of a face, following its winding.

    :raises DegenerateFace: when the face has (numerically) zero area
    """
    if not 0 <= face < mesh.face_count:
        raise IndexOutOfRange(f"Face index {face} out of range")
    p0, p1, p2 = mesh.vertices[mesh.faces[face]]
    cross = np.cross(p1 - p0, p2 - p0)
    norm = np.linalg.norm(cross)
    if norm == 0.0 or norm < DEGENERATE_TOLERANCE * mesh.bbox_diagonal**2:
        raise DegenerateFace(f"Face {face} has zero area")
    return cross / norm


def face_normals(mesh: TriangleMesh) -> np.ndarray:
    """Unit normals of all faces. Degenerate faces get a zero vector."""
    if mesh.face_count == 0:
        return np.zeros((0, 3))
    tris = mesh.vertices[mesh.faces]
    cross = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    norms = np.linalg.norm(cross, axis=1)
    tolerance = DEGENERATE_TOLERANCE * mesh.bbox_diagonal**2
    valid = (norms > tolerance) & (norms > 0.0)
    normals = np.zeros_like(cross)
    normals[valid] = cross[valid] / norms[valid, None]
    return normals


def vertex_normal(mesh: TriangleMesh, vertex: int) -> np.ndarray:
    """Area weighted average of the normals of the faces around a vertex.

    :raises ValueError: when the vertex has no incident face
    :raises ZeroVector: when the weighted normals cancel out
    """
    faces = mesh.vertex_faces(vertex)
    if not faces:
        raise ValueError(f"Vertex {vertex} has no incident face")
    tris = mesh.vertices[mesh.faces[faces]]
    # cross products are already weighted by twice the face area
    total = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]).sum(axis=0)
    norm = np.linalg.norm(total)
    if norm == 0.0:
        raise ZeroVector(f"Face normals around vertex {vertex} cancel out")
    return total / norm


def euler_characteristic(mesh: TriangleMesh) -> int:
    """V - E + F."""
    return mesh.vertex_count - mesh.edge_count + mesh.face_count


def audit_mesh(mesh: TriangleMesh) -> Dict[str, Optional[int]]:
    """Summary of the topology of a mesh.

    ``loops`` is None when the boundary is not made of simple rings.
    """
    edges = boundary_edges(mesh)
    try:
        loops: Optional[int] = len(boundary_loops(mesh))
    except DegenerateBoundary as err:
        logger.warning("Boundary is not a set of simple rings: %s", err)
        loops = None
    return {
        "vertices": mesh.vertex_count,
        "edges": mesh.edge_count,
        "faces": mesh.face_count,
        "boundary_edges": len(edges),
        "loops": loops,
        "euler_characteristic": euler_characteristic(mesh),
        "degenerate_faces": len(mesh.degenerate_faces),
    }


def _grow(buffer: np.ndarray) -> np.ndarray:
    bigger = np.empty((2 * len(buffer), buffer.shape[1]), dtype=buffer.dtype)
    bigger[: len(buffer)] = buffer
    return bigger


def _as_vertex_array(vertices) -> np.ndarray:
    if vertices is None:
        return np.zeros((0, 3), dtype=np.float64)
    array = np.asarray(vertices, dtype=np.float64)
    if array.size == 0:
        return np.zeros((0, 3), dtype=np.float64)
    if array.ndim != 2 or array.shape[1] != 3:
        raise ValueError(f"Vertices must have shape (n, 3), got {array.shape}")
    if not np.all(np.isfinite(array)):
        bad = int(np.argwhere(~np.isfinite(array))[0, 0])
        raise ValueError(f"Vertex {bad} has a non-finite coordinate")
    return array


def _as_face_array(faces) -> np.ndarray:
    if faces is None:
        return np.zeros((0, 3), dtype=np.int64)
    array = np.asarray(faces)
    if array.size == 0:
        return np.zeros((0, 3), dtype=np.int64)
    if array.ndim != 2 or array.shape[1] != 3:
        raise ValueError(f"Faces must have shape (m, 3), got {array.shape}")
    if not np.issubdtype(array.dtype, np.integer):
        if not np.all(np.mod(array, 1) == 0):
            raise ValueError("Face indices must be integers")
    return array.astype(np.int64)


def _validate_faces(faces: np.ndarray, vertex_count: int) -> None:
    if len(faces) == 0:
        return
    out_of_range = (faces < 0) | (faces >= vertex_count)
    if out_of_range.any():
        face, corner = np.argwhere(out_of_range)[0]
        raise IndexOutOfRange(
            f"Face {face} references vertex {faces[face, corner]}, "
            f"but the mesh has {vertex_count} vertices"
        )
    repeats = (
        (faces[:, 0] == faces[:, 1])
        | (faces[:, 1] == faces[:, 2])
        | (faces[:, 0] == faces[:, 2])
    )
    if repeats.any():
        face = int(np.argmax(repeats))
        raise ValueError(f"Face {face} {tuple(faces[face])} repeats a vertex")

    keys = np.sort(faces, axis=1)
    _, first, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
    if (counts > 1).any():
        duplicated = keys[first[counts > 1]]
        matches = np.flatnonzero((keys == duplicated[0]).all(axis=1))
        raise DuplicateFace(tuple(int(v) for v in faces[matches[1]]))

    edges = np.sort(
        np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]),
        axis=1,
    )
    unique_edges, edge_counts = np.unique(edges, axis=0, return_counts=True)
    if (edge_counts > 2).any():
        worst = int(np.argmax(edge_counts > 2))
        edge = tuple(int(v) for v in unique_edges[worst])
        raise NonManifoldEdge(edge, int(edge_counts[worst]))
