"""Tests holepy.cli._main"""
from contextlib import redirect_stderr, redirect_stdout
import io
import json
from pathlib import Path
import tempfile
import unittest
from unittest import mock

from holepy import FrontCollapse, boundary_loops, read_mesh, write_mesh
from holepy.cli._main import EXIT_INPUT, EXIT_OK, EXIT_PARTIAL, main
from tests._fixtures import ring_hole, tetrahedron


class CliTestCase(unittest.TestCase):
    """Runs the command line in a scratch folder."""

    def setUp(self):
        self._folder = tempfile.TemporaryDirectory()
        self.folder = Path(self._folder.name)

    def tearDown(self):
        self._folder.cleanup()

    def run_cli(self, *args):
        """Exit code and standard output of one command."""
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main([str(arg) for arg in args])
        return code, out.getvalue()

    def write(self, mesh, name):
        path = self.folder / name
        write_mesh(mesh, path)
        return path


class TestInspect(CliTestCase):
    """Tests holepy inspect"""

    def test_closed_mesh(self) -> None:
        """A closed mesh has no holes."""
        path = self.write(tetrahedron(), "tet.obj")
        code, out = self.run_cli("inspect", path)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("4 vertices, 4 faces, 0 holes", out)

    def test_json(self) -> None:
        """Holes are classified and the rim is listed apart."""
        path = self.write(ring_hole(6), "ring.ply")
        code, out = self.run_cli("inspect", path, "--open-surface", "--json")
        self.assertEqual(code, EXIT_OK)
        summary = json.loads(out)
        (hole,) = summary["holes"]
        self.assertEqual(hole["points"], 6)
        self.assertEqual(hole["hole_class"], "medium")
        self.assertEqual(hole["fracture_points"], 0)
        (rim,) = summary["rim"]
        self.assertEqual(rim["points"], 12)

    def test_audit(self) -> None:
        """The topology summary is printed and included in JSON."""
        code, out = self.run_cli("inspect", self.write(tetrahedron(), "tet.obj"))
        self.assertEqual(code, EXIT_OK)
        self.assertIn("6 edges, 0 boundary edges, Euler characteristic 2", out)
        _, out = self.run_cli("inspect", self.write(ring_hole(6), "ring.ply"), "--json")
        audit = json.loads(out)["audit"]
        self.assertEqual(audit["vertices"], 18)
        self.assertEqual(audit["boundary_edges"], 18)
        self.assertEqual(audit["loops"], 2)
        self.assertEqual(audit["euler_characteristic"], 0)

    def test_open_surface_can_be_turned_off(self) -> None:
        """--no-open-surface overrides a config file that sets it."""
        path = self.write(ring_hole(6), "ring.ply")
        config = self.folder / "open.cfg"
        config.write_text("open_surface = true\n", encoding="utf-8")
        _, out = self.run_cli("inspect", path, "--config", config, "--json")
        self.assertEqual(len(json.loads(out)["rim"]), 1)
        _, out = self.run_cli(
            "inspect", path, "--config", config, "--no-open-surface", "--json"
        )
        summary = json.loads(out)
        self.assertEqual(summary["rim"], [])
        self.assertEqual(len(summary["holes"]), 2)

    def test_corrupt_file(self) -> None:
        """Parse errors exit with the input error code and name the line."""
        path = self.folder / "broken.obj"
        path.write_text("v 0 0 0\nv 1 0\nv 0 1 0\nf 1 2 3\n", encoding="utf-8")
        with self.assertLogs("holepy.cli._main", level="ERROR") as logs:
            code, _ = self.run_cli("inspect", path)
        self.assertEqual(code, EXIT_INPUT)
        self.assertIn("line 2", logs.output[0])

    def test_missing_file(self) -> None:
        """A missing input is an input error."""
        with self.assertLogs("holepy.cli._main", level="ERROR"):
            code, _ = self.run_cli("inspect", self.folder / "nothing.obj")
        self.assertEqual(code, EXIT_INPUT)


class TestFill(CliTestCase):
    """Tests holepy fill"""

    def setUp(self):
        super().setUp()
        self.source = self.write(ring_hole(16), "ring.obj")
        self.target = self.folder / "filled" / "ring.ply"

    def test_fill(self) -> None:
        """The filled mesh and its report are written."""
        report_path = self.folder / "report.json"
        code, _ = self.run_cli(
            "fill", self.source, self.target, "--open-surface", "--report", report_path
        )
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(boundary_loops(read_mesh(self.target))), 1)
        totals = json.loads(report_path.read_text(encoding="utf-8"))["totals"]
        self.assertEqual(totals["holes"], 1)
        self.assertEqual(totals["filled"], 1)
        self.assertGreater(totals["new_faces"], 0)

    def test_method_flag(self) -> None:
        """The baseline adds no vertices."""
        code, out = self.run_cli(
            "fill", self.source, self.target, "--open-surface", "--method", "baseline",
            "--json",
        )
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["totals"]["new_vertices"], 0)

    def test_partial_fill(self) -> None:
        """Holes left open give the partial exit code, the mesh is still written."""
        with mock.patch(
            "holepy.holes._fill.fill_large", side_effect=FrontCollapse("stuck")
        ):
            with self.assertLogs("holepy.cli._main", level="WARNING"):
                code, _ = self.run_cli("fill", self.source, self.target, "--open-surface")
        self.assertEqual(code, EXIT_PARTIAL)
        self.assertEqual(len(boundary_loops(read_mesh(self.target))), 2)


class TestEval(CliTestCase):
    """Tests holepy eval"""

    def setUp(self):
        super().setUp()
        self.mesh_a = self.write(ring_hole(8), "a.obj")
        self.mesh_b = self.write(ring_hole(8), "b.ply")

    def test_identical(self) -> None:
        """Equal meshes are at distance zero and the seed is echoed."""
        code, out = self.run_cli(
            "eval", self.mesh_a, self.mesh_b, "--json", "--samples", 500, "--seed", 7
        )
        self.assertEqual(code, EXIT_OK)
        report = json.loads(out)
        self.assertAlmostEqual(report["delta_max"], 0.0, places=12)
        self.assertEqual(report["seed"], 7)
        self.assertEqual(report["forward_samples"], 24 + 500)

    def test_text(self) -> None:
        """The plain report lists every distance."""
        code, out = self.run_cli("eval", self.mesh_a, self.mesh_b, "--samples", 100)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("delta_max_normalized", out)
        self.assertIn("seed 0", out)

    def test_bad_sample_count(self) -> None:
        """Zero samples are refused."""
        with self.assertLogs("holepy.cli._main", level="ERROR"):
            code, _ = self.run_cli("eval", self.mesh_a, self.mesh_b, "--samples", 0)
        self.assertEqual(code, EXIT_INPUT)

    def test_config_file(self) -> None:
        """Flags override the configuration file."""
        config = self.folder / "run.cfg"
        config.write_text("# sampling\nseed = 4\nsample_budget = 50\n", encoding="utf-8")
        _, out = self.run_cli("eval", self.mesh_a, self.mesh_b, "--config", config, "--json")
        self.assertEqual(json.loads(out)["seed"], 4)
        _, out = self.run_cli(
            "eval", self.mesh_a, self.mesh_b, "--config", config, "--json", "--seed", 9
        )
        report = json.loads(out)
        self.assertEqual(report["seed"], 9)
        self.assertEqual(report["forward_samples"], 24 + 50)


class TestPunch(CliTestCase):
    """Tests holepy punch"""

    def test_default_crease_punch(self) -> None:
        """The crease shape is punched across its crease."""
        target = self.folder / "crease.obj"
        original = self.folder / "crease_full.obj"
        code, out = self.run_cli(
            "punch", target, "--shape", "crease", "--faces", 2000,
            "--original", original, "--json",
        )
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["loops"], 1)
        self.assertEqual(len(boundary_loops(read_mesh(target))), 2)
        self.assertEqual(len(boundary_loops(read_mesh(original))), 1)

    def test_explicit_centres(self) -> None:
        """Given centres share a single radius."""
        target = self.folder / "plane.ply"
        code, _ = self.run_cli(
            "punch", target, "--shape", "plane", "--faces", 2000,
            "--center", "-0.5,0,0", "--center", "0.5,0,0", "--radius", 0.15,
        )
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(len(boundary_loops(read_mesh(target))), 3)

    def test_radius_without_centre(self) -> None:
        """A radius alone is refused."""
        with self.assertLogs("holepy.cli._main", level="ERROR"):
            code, _ = self.run_cli("punch", self.folder / "x.obj", "--radius", 0.2)
        self.assertEqual(code, EXIT_INPUT)


class TestBench(CliTestCase):
    """Tests holepy bench"""

    def setUp(self):
        super().setUp()
        self.args = [
            "bench", "--shape", "sphere", "--faces", 1200, "--samples", 2000,
            "--methods", "centroid-only,baseline",
        ]

    def test_deterministic(self) -> None:
        """Two runs with the same seed write the same table."""
        first, second = self.folder / "one.csv", self.folder / "two.csv"
        self.assertEqual(self.run_cli(*self.args, "--output", first)[0], EXIT_OK)
        self.assertEqual(self.run_cli(*self.args, "--output", second)[0], EXIT_OK)
        self.assertEqual(
            first.read_text(encoding="utf-8"), second.read_text(encoding="utf-8")
        )

    def test_stdout(self) -> None:
        """Without an output file the table goes to standard output."""
        code, out = self.run_cli(*self.args)
        self.assertEqual(code, EXIT_OK)
        lines = out.splitlines()
        self.assertTrue(lines[0].startswith("shape,faces,holes,method"))
        self.assertEqual(len(lines), 3)

    def test_unknown_method(self) -> None:
        """Unknown method names are an input error."""
        with self.assertLogs("holepy.cli._main", level="ERROR"):
            code, _ = self.run_cli("bench", "--methods", "magic", "--faces", 300)
        self.assertEqual(code, EXIT_INPUT)
