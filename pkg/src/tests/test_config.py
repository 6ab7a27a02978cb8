"""Tests holepy.utilities._config"""
from pathlib import Path
import tempfile
import unittest
import pytest

from holepy import RunConfig
from holepy.metrics._distance import SamplingMode


class TestRunConfig(unittest.TestCase):
    """Tests RunConfig defaults, validation and files"""

    def setUp(self):
        self.config = RunConfig()
        self.folder = tempfile.TemporaryDirectory()
        self.path = Path(self.folder.name) / "run.cfg"

    def tearDown(self):
        self.folder.cleanup()

    def test_defaults(self) -> None:
        """The documented defaults."""
        self.assertEqual(self.config.small_factor, 1.5)
        self.assertEqual(self.config.medium_factor, 2.5)
        self.assertEqual(self.config.fracture_cos, 0.7)
        self.assertEqual(self.config.smooth_iterations, 3)
        self.assertEqual(self.config.ring_merge_radius_factor, 0.5)
        self.assertFalse(self.config.open_surface)
        self.assertEqual(self.config.smoothing, "laplacian")
        self.assertEqual(self.config.seed, 0)

    def test_validation(self) -> None:
        """Out of range values are refused."""
        for overrides in [
            {"small_factor": 3.0},
            {"small_factor": 0.0},
            {"fracture_cos": 1.5},
            {"smooth_iterations": -1},
            {"ring_merge_radius_factor": 0.0},
            {"smoothing": "spline"},
            {"bezier_degree": 0},
            {"sampling_mode": "faces"},
            {"samples_per_area": -2.0},
            {"sample_budget": 0},
            {"max_samples": 0},
        ]:
            with pytest.raises(ValueError):
                RunConfig(**overrides)

    def test_replace_ignores_none(self) -> None:
        """Unset overrides keep the current value."""
        changed = self.config.replace(seed=5, fracture_cos=None)
        self.assertEqual(changed.seed, 5)
        self.assertEqual(changed.fracture_cos, 0.7)
        self.assertEqual(self.config.seed, 0)
        with pytest.raises(ValueError, match="Unknown"):
            self.config.replace(colour="red")

    def test_file_round_trip(self) -> None:
        """to_file and from_file reproduce every field."""
        config = RunConfig(
            medium_factor=2.75,
            open_surface=True,
            smoothing="bezier",
            samples_per_area=1234.5678901234,
            seed=42,
        )
        config.to_file(self.path)
        self.assertEqual(RunConfig.from_file(self.path), config)
        self.assertIsNone(RunConfig.from_file(self.path).sample_budget)

    def test_comments_and_blank_lines(self) -> None:
        """Comments and blank lines are skipped."""
        self.path.write_text(
            "# tuned for scans\n\nseed = 9  # fixed\nopen_surface = yes\n",
            encoding="utf-8",
        )
        config = RunConfig.from_file(self.path)
        self.assertEqual(config.seed, 9)
        self.assertTrue(config.open_surface)

    def test_file_errors(self) -> None:
        """Bad lines name the file and line."""
        bad = ["seed 4\n", "colour = red\n", "\nseed = four\n", "open_surface = maybe\n"]
        for text in bad:
            self.path.write_text(text, encoding="utf-8")
            with pytest.raises(ValueError, match="run.cfg:"):
                RunConfig.from_file(self.path)

    def test_sampling_spec(self) -> None:
        """The sampling fields are carried into a SamplingSpec."""
        config = RunConfig(sampling_mode="vertices", sample_budget=50, seed=3)
        spec = config.sampling_spec()
        self.assertEqual(spec.mode, SamplingMode.VERTICES_ONLY)
        self.assertEqual(spec.budget, 50)
        self.assertEqual(spec.seed, 3)
