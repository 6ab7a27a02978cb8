"""Tests holepy.holes._front"""
import unittest
import numpy as np
import pytest

from holepy import FrontCollapse, analyze_hole, boundary_loops
from holepy.holes._analysis import analyze_points
from holepy.holes._front import advance_ring, fit_height_field, initial_front
from tests._fixtures import ring_hole, single_triangle


def _bowl(x, y):
    return 0.1 * (x * x + y * y)


class TestHeightField(unittest.TestCase):
    """Tests the height fields fitted around holes"""

    def setUp(self):
        self.mesh = ring_hole(12, height=_bowl)
        loop = next(loop for loop in boundary_loops(self.mesh) if len(loop) == 12)
        self.hole = analyze_hole(self.mesh, loop)

    def test_quadric_is_reproduced(self) -> None:
        """A paraboloid is fitted exactly."""
        field = fit_height_field(self.mesh, self.hole)
        self.assertEqual(field.degree, 2)
        flat = self.hole.frame.project(self.mesh.vertices)
        np.testing.assert_allclose(field.lift(flat), self.mesh.vertices, atol=1e-9)

    def test_few_samples_give_a_plane(self) -> None:
        """Three samples only support a plane."""
        mesh = single_triangle()
        hole = analyze_hole(mesh, boundary_loops(mesh)[0])
        field = fit_height_field(mesh, hole)
        self.assertEqual(field.degree, 1)
        np.testing.assert_allclose(field(hole.project()), 0.0, atol=1e-12)


class TestAdvanceRing(unittest.TestCase):
    """Tests growing fronts"""

    def setUp(self):
        self.mesh = ring_hole(24, radius=2.0)
        loop = next(loop for loop in boundary_loops(self.mesh) if len(loop) == 24)
        self.hole = analyze_hole(self.mesh, loop)
        self.front = initial_front(self.hole)

    def test_one_generation(self) -> None:
        """A ring one spacing inward replaces the hole boundary."""
        vertices, faces = self.mesh.vertex_count, self.mesh.face_count
        ring = advance_ring(self.mesh, self.front, self.hole.ds)
        self.assertEqual(ring.generation, 1)
        self.assertEqual(len(ring), 24)
        self.assertEqual(self.mesh.vertex_count, vertices + 24)
        self.assertEqual(self.mesh.face_count, faces + 48)
        radii = np.linalg.norm(ring.points(self.mesh)[:, :2], axis=1)
        np.testing.assert_allclose(radii, 2.0 - self.hole.ds, rtol=1e-9)
        np.testing.assert_allclose(ring.points(self.mesh)[:, 2], 0.0, atol=1e-12)
        self.assertLess(ring.diameter(self.mesh), self.front.diameter(self.mesh))
        lengths = sorted(len(loop) for loop in boundary_loops(self.mesh))
        self.assertEqual(lengths, [24, 48])

    def test_stitched_faces_follow_the_surface(self) -> None:
        """New faces face the same way as the annulus."""
        ring = advance_ring(self.mesh, self.front, self.hole.ds)
        new_loop = next(
            loop
            for loop in boundary_loops(self.mesh)
            if set(loop.vertex_indices) == set(ring.vertex_ids)
        )
        hole = analyze_hole(self.mesh, new_loop)
        np.testing.assert_allclose(hole.boundary_normals[:, 2], 1.0, atol=1e-9)

    def test_merging(self) -> None:
        """Points closer than the merge radius are combined."""
        ring = advance_ring(self.mesh, self.front, self.hole.ds, merge_radius_factor=1.0)
        self.assertLess(len(ring), 24)
        self.assertGreaterEqual(len(ring), 3)

    def test_collapse_leaves_mesh_alone(self) -> None:
        """An overshooting step fails before touching the mesh."""
        vertices, faces = self.mesh.vertex_count, self.mesh.face_count
        with pytest.raises(FrontCollapse):
            advance_ring(self.mesh, self.front, 10.0)
        self.assertEqual(self.mesh.vertex_count, vertices)
        self.assertEqual(self.mesh.face_count, faces)

    def test_placeholders_refused(self) -> None:
        """Fronts need every ring point in the mesh."""
        points = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
        hole = analyze_points([-1, 0, 1], points, np.tile([0, 0, 1.0], (3, 1)))
        with pytest.raises(ValueError):
            initial_front(hole)
