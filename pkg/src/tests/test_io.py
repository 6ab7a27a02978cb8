"""Tests holepy.mesh._io"""
import io
from pathlib import Path
import struct
import tempfile
import unittest
import numpy as np
import pytest

from holepy import (
    MeshFileFormat,
    ParseError,
    SyntheticShape,
    ShapeKind,
    UnsupportedElement,
    generate,
    read_mesh,
    write_mesh,
)
from holepy.mesh._io import detect_format
from tests._fixtures import open_cube, ring_hole, square_grid, tetrahedron


def _read_text(text: str, file_format=MeshFileFormat.OBJ):
    return read_mesh(io.BytesIO(text.encode("ascii")), file_format)


class TestObj(unittest.TestCase):
    """Tests reading OBJ files"""

    def setUp(self):
        self.square = (
            "# a unit square\n"
            "v 0 0 0\n"
            "v 1 0 0\n"
            "v 1 1 0\n"
            "v 0 1 0\n"
            "vn 0 0 1\n"
            "f 1//1 2//1 3//1 4//1\n"
        )

    def test_polygon_is_fanned(self) -> None:
        """A quad becomes two triangles around its first vertex."""
        mesh = _read_text(self.square)
        self.assertEqual(mesh.vertex_count, 4)
        np.testing.assert_array_equal(mesh.faces, [[0, 1, 2], [0, 2, 3]])

    def test_negative_indices(self) -> None:
        """Negative indices count back from the latest vertex."""
        mesh = _read_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
        np.testing.assert_array_equal(mesh.faces, [[0, 1, 2]])

    def test_short_face_names_line(self) -> None:
        """A face with two vertices is reported with its line number."""
        with pytest.raises(ParseError) as info:
            _read_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n")
        self.assertEqual(info.value.line, 4)
        self.assertIn("line 4", str(info.value))

    def test_bad_values(self) -> None:
        """Zero indices, missing vertices and bad numbers are errors."""
        for text, line in [
            ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n", 4),
            ("v 0 0 0\nf 1 2 3\n", 2),
            ("v 0 0 zero\n", 1),
            ("v 0 0\n", 1),
            ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 x 3\n", 4),
        ]:
            with pytest.raises(ParseError) as info:
                _read_text(text)
            self.assertEqual(info.value.line, line, text)

    def test_refused_faces_name_their_line(self) -> None:
        """Faces the mesh refuses are traced back to their line."""
        vertices = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nv 1 1 1\n"
        for faces, line in [
            ("f 1 1 2\n", 6),
            ("f 1 2 3\nf 1 2 4\nf 3 2 1\n", 8),
            ("f 1 2 3\nf 2 1 4\nf 1 2 5\n", 8),
        ]:
            with pytest.raises(ParseError) as info:
                _read_text(vertices + faces)
            self.assertEqual(info.value.line, line, faces)

    def test_unknown_records_are_skipped(self) -> None:
        """Unknown keywords are skipped with a warning."""
        with self.assertLogs("holepy.mesh._io", level="WARNING"):
            mesh = _read_text("curv 1 2\n" + self.square)
        self.assertEqual(mesh.face_count, 2)


class TestPly(unittest.TestCase):
    """Tests reading PLY files"""

    def setUp(self):
        self.header = (
            "ply\n"
            "format ascii 1.0\n"
            "element vertex 4\n"
            "property float x\n"
            "property float y\n"
            "property float z\n"
            "element face 1\n"
            "property list uchar int vertex_index\n"
            "end_header\n"
        )
        self.body = "0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"

    def test_ascii_quad(self) -> None:
        """The vertex_index alias is accepted and quads are fanned."""
        mesh = _read_text(self.header + self.body, MeshFileFormat.PLY_ASCII)
        self.assertEqual(mesh.face_count, 2)

    def test_ascii_error_line(self) -> None:
        """Malformed records are reported with their line number."""
        body = "0 0 0\n1 0 0\n1 1\n0 1 0\n4 0 1 2 3\n"
        with pytest.raises(ParseError) as info:
            _read_text(self.header + body, MeshFileFormat.PLY_ASCII)
        self.assertEqual(info.value.line, 12)

    def test_ascii_face_errors_name_their_line(self) -> None:
        """Missing and repeated face indices give the face record line."""
        header = self.header.replace("element face 1", "element face 2")
        for face in ("3 0 1 7\n", "3 0 0 1\n"):
            body = "0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n" + face
            with pytest.raises(ParseError) as info:
                _read_text(header + body, MeshFileFormat.PLY_ASCII)
            self.assertEqual(info.value.line, 15, face)

    def test_face_element_without_list(self) -> None:
        """A face element lacking its index list names its header line."""
        header = self.header.replace(
            "property list uchar int vertex_index", "property int flags"
        )
        with pytest.raises(ParseError) as info:
            _read_text(
                header + "0 0 0\n1 0 0\n1 1 0\n0 1 0\n0\n", MeshFileFormat.PLY_ASCII
            )
        self.assertEqual(info.value.line, 7)

    def test_binary_negative_index(self) -> None:
        """A negative index in a binary triangle gives the record offset."""
        header = (
            "ply\nformat binary_little_endian 1.0\n"
            "element vertex 3\nproperty double x\nproperty double y\n"
            "property double z\nelement face 2\n"
            "property list uchar int vertex_indices\nend_header\n"
        ).encode("ascii")
        vertices = struct.pack("<9d", 0, 0, 0, 1, 0, 0, 0, 1, 0)
        faces = struct.pack("<B3i", 3, 0, 1, 2) + struct.pack("<B3i", 3, 0, -1, 2)
        with pytest.raises(ParseError) as info:
            read_mesh(io.BytesIO(header + vertices + faces))
        self.assertEqual(info.value.offset, len(header) + len(vertices) + 13)
        self.assertIsNone(info.value.line)

    def test_truncated_binary(self) -> None:
        """A short binary body is reported with a byte offset."""
        header = (
            "ply\nformat binary_little_endian 1.0\n"
            "element vertex 2\nproperty double x\nproperty double y\n"
            "property double z\nend_header\n"
        ).encode("ascii")
        data = header + struct.pack("<3d", 0.0, 0.0, 0.0)
        with pytest.raises(ParseError) as info:
            read_mesh(io.BytesIO(data))
        self.assertIsNotNone(info.value.offset)

    def test_unsupported_element(self) -> None:
        """Elements other than vertex and face are refused."""
        header = self.header.replace(
            "end_header\n", "element edge 1\nproperty int vertex1\nend_header\n"
        )
        with pytest.raises(UnsupportedElement):
            _read_text(header + self.body + "0\n", MeshFileFormat.PLY_ASCII)

    def test_empty_unknown_element_is_tolerated(self) -> None:
        """An unknown element with no records is ignored."""
        header = self.header.replace(
            "end_header\n", "element edge 0\nproperty int vertex1\nend_header\n"
        )
        mesh = _read_text(header + self.body, MeshFileFormat.PLY_ASCII)
        self.assertEqual(mesh.face_count, 2)

    def test_big_endian_is_refused(self) -> None:
        """Only ASCII and little endian binary PLY are read."""
        header = self.header.replace("ascii", "binary_big_endian")
        with pytest.raises(ParseError):
            _read_text(header, MeshFileFormat.PLY_BINARY_LE)

    def test_extra_properties_are_skipped(self) -> None:
        """Vertex colours are skipped, coordinates still read."""
        header = self.header.replace(
            "property float z\n", "property float z\nproperty uchar red\n"
        )
        body = "0 0 0 9\n1 0 0 9\n1 1 0 9\n0 1 0 9\n4 0 1 2 3\n"
        with self.assertLogs("holepy.mesh._io", level="WARNING"):
            mesh = _read_text(header + body, MeshFileFormat.PLY_ASCII)
        np.testing.assert_array_equal(mesh.vertices[2], [1, 1, 0])


class TestRoundTrip(unittest.TestCase):
    """Tests writing and reading back meshes"""

    def setUp(self):
        self.meshes = [
            tetrahedron(),
            open_cube(),
            square_grid(3, size=0.1),
            ring_hole(7, radius=np.pi),
            generate(SyntheticShape(ShapeKind.SPHERE, target_faces=300)),
            generate(SyntheticShape(ShapeKind.TORUS, target_faces=300, size=3.3)),
            generate(SyntheticShape(ShapeKind.SADDLE, target_faces=200)),
        ]
        rng = np.random.default_rng(7)
        noisy = square_grid(4)
        for vertex in range(noisy.vertex_count):
            noisy.set_vertex(vertex, noisy.vertices[vertex] + rng.normal(size=3) * 1e-3)
        self.meshes.append(noisy)

    def test_streams(self) -> None:
        """Every format reproduces topology and coordinates exactly."""
        for mesh in self.meshes:
            for file_format in MeshFileFormat:
                buffer = io.BytesIO()
                write_mesh(mesh, buffer, file_format)
                buffer.seek(0)
                back = read_mesh(buffer, file_format)
                np.testing.assert_array_equal(back.faces, mesh.faces)
                np.testing.assert_array_equal(back.vertices, mesh.vertices)

    def test_binary_is_bit_exact(self) -> None:
        """Binary PLY stores the raw doubles."""
        mesh = self.meshes[-1]
        buffer = io.BytesIO()
        write_mesh(mesh, buffer, MeshFileFormat.PLY_BINARY_LE)
        back = read_mesh(io.BytesIO(buffer.getvalue()))
        self.assertEqual(back.vertices.tobytes(), mesh.vertices.tobytes())

    def test_paths(self) -> None:
        """Formats are chosen from the file extension."""
        with tempfile.TemporaryDirectory() as folder:
            for name, expected in [
                ("mesh.obj", MeshFileFormat.OBJ),
                ("mesh.PLY", MeshFileFormat.PLY_BINARY_LE),
            ]:
                path = Path(folder) / name
                write_mesh(self.meshes[0], path)
                self.assertEqual(detect_format(path), expected)
                back = read_mesh(path)
                np.testing.assert_array_equal(back.faces, self.meshes[0].faces)

    def test_mismatched_extension(self) -> None:
        """PLY content behind an .obj name is an error."""
        with tempfile.TemporaryDirectory() as folder:
            path = Path(folder) / "mesh.obj"
            write_mesh(self.meshes[0], path, MeshFileFormat.PLY_ASCII)
            with pytest.raises(ParseError):
                read_mesh(path)
            with pytest.raises(ValueError):
                write_mesh(self.meshes[0], Path(folder) / "mesh.stl")

    def test_stream_needs_format(self) -> None:
        """Writing to a stream requires an explicit format."""
        with pytest.raises(ValueError):
            write_mesh(self.meshes[0], io.BytesIO())


class TestTrimeshInterop(unittest.TestCase):
    """Tests that PLY files are exchanged with trimesh unchanged"""

    def setUp(self):
        self.trimesh = pytest.importorskip("trimesh")
        self.mesh = generate(SyntheticShape(ShapeKind.TORUS, target_faces=400))

    def test_trimesh_reads_ours(self) -> None:
        """Both PLY encodings load in trimesh with the same vertex order."""
        for file_format in (MeshFileFormat.PLY_ASCII, MeshFileFormat.PLY_BINARY_LE):
            buffer = io.BytesIO()
            write_mesh(self.mesh, buffer, file_format)
            buffer.seek(0)
            loaded = self.trimesh.load(buffer, file_type="ply", process=False)
            np.testing.assert_array_equal(loaded.faces, self.mesh.faces)
            np.testing.assert_allclose(loaded.vertices, self.mesh.vertices, atol=1e-6)

    def test_we_read_trimesh(self) -> None:
        """PLY written by trimesh reads back with the same faces."""
        exported = self.trimesh.Trimesh(
            vertices=self.mesh.vertices, faces=self.mesh.faces, process=False
        ).export(file_type="ply")
        back = read_mesh(io.BytesIO(exported))
        np.testing.assert_array_equal(back.faces, self.mesh.faces)
        np.testing.assert_allclose(back.vertices, self.mesh.vertices, atol=1e-6)
