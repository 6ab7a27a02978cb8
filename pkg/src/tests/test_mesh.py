"""Tests holepy.mesh._mesh"""
# pylint: disable=protected-access
import unittest
import numpy as np
import pytest

from holepy import (
    BoundaryLoop,
    DegenerateBoundary,
    DegenerateFace,
    DuplicateFace,
    IndexOutOfRange,
    NonManifoldEdge,
    TriangleMesh,
    ZeroVector,
    audit_mesh,
    boundary_edges,
    boundary_loops,
    build_mesh,
    euler_characteristic,
    face_normal,
    vertex_normal,
)
from holepy.mesh._mesh import face_normals
from tests._fixtures import (
    open_cube,
    ring_hole,
    single_triangle,
    square_grid,
    tetrahedron,
)


class TestBuildMesh(unittest.TestCase):
    """Tests construction and validation of TriangleMesh"""

    def setUp(self):
        self.vertices = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]

    def test_counts(self) -> None:
        """A tetrahedron has 4 vertices, 6 edges and 4 faces."""
        mesh = tetrahedron()
        self.assertEqual(mesh.vertex_count, 4)
        self.assertEqual(mesh.edge_count, 6)
        self.assertEqual(mesh.face_count, 4)
        self.assertTrue(mesh.is_watertight)

    def test_empty_mesh(self) -> None:
        """A mesh may be built without vertices or faces."""
        mesh = TriangleMesh()
        self.assertEqual(mesh.vertex_count, 0)
        self.assertEqual(mesh.face_count, 0)
        self.assertEqual(boundary_loops(mesh), [])

    def test_index_out_of_range(self) -> None:
        """Faces may only reference existing vertices."""
        with pytest.raises(IndexOutOfRange):
            build_mesh(self.vertices, [[0, 1, 4]])
        with pytest.raises(IndexError):
            build_mesh(self.vertices, [[0, -1, 2]])

    def test_repeated_vertex(self) -> None:
        """A face may not use a vertex twice."""
        with pytest.raises(ValueError):
            build_mesh(self.vertices, [[0, 1, 1]])

    def test_duplicate_face(self) -> None:
        """The same three vertices may only form one face, in any order."""
        with pytest.raises(DuplicateFace) as info:
            build_mesh(self.vertices, [[0, 1, 2], [2, 0, 1]])
        self.assertEqual(info.value.face, (2, 0, 1))

    def test_non_manifold_edge(self) -> None:
        """An edge shared by three faces is rejected."""
        vertices = self.vertices + [[0.5, 0.5, 1.0]]
        with pytest.raises(NonManifoldEdge) as info:
            build_mesh(vertices, [[0, 1, 2], [1, 0, 3], [0, 1, 4]])
        self.assertEqual(info.value.edge, (0, 1))
        self.assertEqual(info.value.face_count, 3)

    def test_validation_order(self) -> None:
        """Range problems are reported before repeated vertices, and
        non-finite coordinates before either."""
        with pytest.raises(IndexOutOfRange):
            build_mesh(self.vertices, [[0, 0, 9]])
        with pytest.raises(ValueError, match="non-finite"):
            build_mesh([[0, 0, np.nan], [1, 0, 0], [0, 1, 0]], [[0, 1, 5]])

    def test_degenerate_faces_are_kept(self) -> None:
        """Zero area faces are accepted and listed."""
        mesh = build_mesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])
        self.assertEqual(mesh.degenerate_faces, [0])
        with pytest.raises(DegenerateFace):
            face_normal(mesh, 0)

    def test_bad_shapes(self) -> None:
        """Vertices must be (n, 3) and faces (m, 3)."""
        with pytest.raises(ValueError):
            TriangleMesh([[0, 0], [1, 1]])
        with pytest.raises(ValueError):
            TriangleMesh(self.vertices, [[0, 1, 2, 3]])
        with pytest.raises(ValueError):
            TriangleMesh(self.vertices, [[0, 1, 2.5]])


class TestMeshEditing(unittest.TestCase):
    """Tests adding faces, rolling back and copying"""

    def setUp(self):
        self.mesh = square_grid(2)

    def test_add_face_checks_manifold(self) -> None:
        """add_face refuses a third face on an edge."""
        apex = self.mesh.add_vertex([0.5, 0.5, 1.0])
        other_apex = self.mesh.add_vertex([0.5, 0.5, -1.0])
        edge = self.mesh.edges[0]
        self.assertEqual(len(self.mesh.incident_faces(*edge)), 1)
        self.mesh.add_face([edge[1], edge[0], apex])
        with pytest.raises(NonManifoldEdge):
            self.mesh.add_face([edge[0], edge[1], other_apex])

    def test_add_face_checks_duplicates(self) -> None:
        """add_face refuses a face that already exists."""
        face = self.mesh.faces[0].tolist()
        with pytest.raises(DuplicateFace):
            self.mesh.add_face(face[::-1])

    def test_add_face_checks_range(self) -> None:
        """add_face refuses missing vertices."""
        with pytest.raises(IndexOutOfRange):
            self.mesh.add_face([0, 1, 100])

    def test_rollback(self) -> None:
        """rollback restores the counts and adjacency of a checkpoint."""
        edges_before = self.mesh.edges
        vertices, faces = self.mesh.vertex_count, self.mesh.face_count
        centre = self.mesh.add_vertex([1.0, 1.0, 3.0])
        loop = boundary_loops(self.mesh)[0]
        self.mesh.add_faces([(a, b, centre) for a, b in loop.edge_list])
        self.assertTrue(self.mesh.is_watertight)
        self.mesh.rollback(vertices, faces)
        self.assertEqual(self.mesh.vertex_count, vertices)
        self.assertEqual(self.mesh.face_count, faces)
        self.assertEqual(self.mesh.edges, edges_before)
        assert self.mesh.bbox_diagonal == pytest.approx(np.sqrt(2.0))

    def test_copy_is_independent(self) -> None:
        """Changes to a copy leave the original alone."""
        copy = self.mesh.copy()
        copy.set_vertex(0, [5.0, 5.0, 5.0])
        copy.add_vertex([9.0, 9.0, 9.0])
        np.testing.assert_array_equal(self.mesh.vertices[0], [0.0, 0.0, 0.0])
        self.assertEqual(self.mesh.vertex_count, copy.vertex_count - 1)

    def test_vertex_neighbors(self) -> None:
        """The centre of a 2x2 grid touches the other 8 vertices in
        this triangulation except two opposite corners."""
        neighbours = self.mesh.vertex_neighbors(4)
        self.assertEqual(neighbours, [0, 1, 3, 5, 7, 8])


class TestBoundary(unittest.TestCase):
    """Tests boundary edges and loops"""

    def test_closed_mesh_has_no_boundary(self) -> None:
        """A tetrahedron has no boundary edge."""
        mesh = tetrahedron()
        self.assertEqual(boundary_edges(mesh), [])
        self.assertEqual(boundary_loops(mesh), [])

    def test_single_triangle(self) -> None:
        """One triangle is its own boundary loop."""
        loops = boundary_loops(single_triangle())
        self.assertEqual(len(loops), 1)
        self.assertEqual(sorted(loops[0].vertex_indices), [0, 1, 2])

    def test_loop_runs_against_faces(self) -> None:
        """Each loop edge is traversed the opposite way by its face."""
        mesh = open_cube()
        (loop,) = boundary_loops(mesh)
        self.assertEqual(loop.vertex_indices, (4, 5, 6, 7))
        for a, b in loop.edge_list:
            self.assertEqual(mesh.oriented_edge(a, b), (b, a))

    def test_boundary_edges_partition(self) -> None:
        """Every boundary edge belongs to exactly one loop."""
        mesh = ring_hole(6)
        loops = boundary_loops(mesh)
        self.assertEqual(len(loops), 2)
        traced = sorted(
            tuple(sorted(edge)) for loop in loops for edge in loop.edge_list
        )
        self.assertEqual(traced, boundary_edges(mesh))
        self.assertEqual(sorted(len(loop) for loop in loops), [6, 12])

    def test_pinched_boundary(self) -> None:
        """Two triangles sharing only a vertex do not form simple loops."""
        mesh = build_mesh(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]],
            [[0, 1, 2], [0, 3, 4]],
        )
        with pytest.raises(DegenerateBoundary) as info:
            boundary_loops(mesh)
        self.assertEqual(info.value.vertex, 0)
        self.assertIsNone(audit_mesh(mesh)["loops"])

    def test_boundary_loop_validation(self) -> None:
        """Loops need three distinct vertices."""
        with pytest.raises(ValueError):
            BoundaryLoop((1, 2))
        with pytest.raises(ValueError):
            BoundaryLoop((1, 2, 1))
        self.assertEqual(BoundaryLoop((1, 2, 3)).reversed().vertex_indices, (1, 3, 2))


class TestNormalsAndTopology(unittest.TestCase):
    """Tests normals, euler characteristic and audits"""

    def setUp(self):
        self.tetra = tetrahedron()

    def test_face_normal(self) -> None:
        """Normals follow the face winding."""
        np.testing.assert_allclose(face_normal(self.tetra, 0), [0, 0, -1])
        np.testing.assert_allclose(
            face_normal(self.tetra, 3), np.ones(3) / np.sqrt(3.0)
        )
        with pytest.raises(IndexOutOfRange):
            face_normal(self.tetra, 4)

    def test_face_normals_match(self) -> None:
        """The vectorised normals equal the one at a time normals."""
        normals = face_normals(self.tetra)
        for face in range(self.tetra.face_count):
            np.testing.assert_allclose(normals[face], face_normal(self.tetra, face))

    def test_vertex_normal(self) -> None:
        """Vertex normals point away from a convex solid."""
        normal = vertex_normal(self.tetra, 0)
        self.assertTrue(np.all(normal < 0))
        assert np.linalg.norm(normal) == pytest.approx(1.0)

    def test_vertex_normal_errors(self) -> None:
        """Isolated vertices have no normal; cancelling faces give a zero
        vector."""
        mesh = tetrahedron()
        lonely = mesh.add_vertex([5, 5, 5])
        with pytest.raises(ValueError):
            vertex_normal(mesh, lonely)
        # the second face lies on top of the first with opposite winding
        folded = build_mesh(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 0, 0]],
            [[0, 1, 2], [0, 2, 3]],
        )
        with pytest.raises(ZeroVector):
            vertex_normal(folded, 0)

    def test_euler_characteristic(self) -> None:
        """Closed genus 0 surfaces give 2, a disk gives 1."""
        self.assertEqual(euler_characteristic(self.tetra), 2)
        self.assertEqual(euler_characteristic(square_grid(3)), 1)
        self.assertEqual(euler_characteristic(ring_hole(5)), 0)

    def test_audit(self) -> None:
        """audit_mesh summarises the topology."""
        audit = audit_mesh(open_cube())
        self.assertEqual(
            audit,
            {
                "vertices": 8,
                "edges": 17,
                "faces": 10,
                "boundary_edges": 4,
                "loops": 1,
                "euler_characteristic": 1,
                "degenerate_faces": 0,
            },
        )
