"""Run configuration shared by the library entry points and the CLI."""

from dataclasses import dataclass, fields, replace as dc_replace
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Union

logger = logging.getLogger(__name__)

SMOOTHING_MODES = ("laplacian", "bezier")
SAMPLING_MODES = ("vertices", "vertices+faces")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"'{text}' is not a boolean")


def _optional(parser: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str) -> Any:
        if text.strip().lower() in ("", "none"):
            return None
        return parser(text)

    return parse


def _format(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    # repr keeps every digit of a float
    return repr(value) if isinstance(value, float) else str(value)


@dataclass(frozen=True)
class RunConfig:
    """
    Tunables of a hole filling and evaluation run.

    :param small_factor: Holes with d_H below small_factor * ds are
        closed by connecting boundary points directly.
    :type small_factor: float
    :param medium_factor: Holes with d_H up to medium_factor * ds are
        closed with a centroid fan. Larger holes are segmented and
        filled ring by ring.
    :type medium_factor: float
    :param fracture_cos: Boundary points whose normal makes a cosine
        below this value with a neighbour's normal are fracture points.
    :type fracture_cos: float
    :param smooth_iterations: Number of umbrella smoothing passes.
    :type smooth_iterations: int
    :param ring_merge_radius_factor: New front points closer than this
        multiple of ds are merged.
    :type ring_merge_radius_factor: float
    :param open_surface: If True the longest boundary loop is treated as
        the outer rim of an open surface and left alone.
    :type open_surface: bool
    :param smoothing: "laplacian" (default) or "bezier".
    :type smoothing: str
    :param bezier_degree: Degree of the Bezier smoothing surface in each
        parameter direction.
    :type bezier_degree: int
    :param sampling_mode: "vertices" or "vertices+faces".
    :type sampling_mode: str
    :param samples_per_area: Face samples per squared model unit.
    :type samples_per_area: float or None
    :param sample_budget: Fixed number of face samples. Overrides
        samples_per_area.
    :type sample_budget: int or None
    :param max_samples: Upper bound on face samples per mesh.
    :type max_samples: int
    :param seed: Seed of the surface sampler.
    :type seed: int
    :param record_timing: Whether benchmark tables carry run times.
    :type record_timing: bool
    """

    small_factor: float = 1.5
    medium_factor: float = 2.5
    fracture_cos: float = 0.7
    smooth_iterations: int = 3
    ring_merge_radius_factor: float = 0.5
    open_surface: bool = False
    smoothing: str = "laplacian"
    bezier_degree: int = 3
    sampling_mode: str = "vertices+faces"
    samples_per_area: Optional[float] = None
    sample_budget: Optional[int] = None
    max_samples: int = 2_000_000
    seed: int = 0
    record_timing: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.small_factor < self.medium_factor:
            raise ValueError(
                "small_factor and medium_factor must satisfy "
                f"0 < small_factor < medium_factor, got {self.small_factor} "
                f"and {self.medium_factor}"
            )
        if not -1.0 <= self.fracture_cos <= 1.0:
            raise ValueError(
                f"fracture_cos must lie in [-1, 1], got {self.fracture_cos}"
            )
        if self.smooth_iterations < 0:
            raise ValueError("smooth_iterations must be non-negative")
        if not self.ring_merge_radius_factor > 0:
            raise ValueError("ring_merge_radius_factor must be positive")
        if self.smoothing not in SMOOTHING_MODES:
            raise ValueError(f"smoothing must be one of {SMOOTHING_MODES}")
        if self.bezier_degree < 1:
            raise ValueError("bezier_degree must be at least 1")
        if self.sampling_mode not in SAMPLING_MODES:
            raise ValueError(f"sampling_mode must be one of {SAMPLING_MODES}")
        if self.samples_per_area is not None and not self.samples_per_area > 0:
            raise ValueError("samples_per_area must be positive")
        if self.sample_budget is not None and self.sample_budget <= 0:
            raise ValueError("sample_budget must be positive")
        if self.max_samples <= 0:
            raise ValueError("max_samples must be positive")

    def replace(self, **overrides) -> "RunConfig":
        """Copy of this configuration with the given fields changed.
        Overrides whose value is None are ignored, so unset CLI flags
        leave file values in place."""
        changes = {key: val for key, val in overrides.items() if val is not None}
        unknown = set(changes) - set(_field_names())
        if unknown:
            raise ValueError(f"Unknown configuration keys: {sorted(unknown)}")
        return dc_replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """Field values keyed by name."""
        return {name: getattr(self, name) for name in _field_names()}

    def to_file(self, path: Union[str, Path]) -> None:
        """Writes the configuration as flat key = value lines."""
        lines = ["# holepy run configuration"]
        for name, value in self.to_dict().items():
            lines.append(f"{name} = {_format(value)}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        """Reads a key = value configuration file. Blank lines and
        lines starting with '#' are ignored."""
        values: Dict[str, Any] = {}
        text = Path(path).read_text(encoding="utf-8")
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{number}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _PARSERS:
                raise ValueError(f"{path}:{number}: unknown key '{key}'")
            try:
                values[key] = _PARSERS[key](value)
            except ValueError as err:
                raise ValueError(f"{path}:{number}: bad value for {key}") from err
        logger.debug("Loaded %d configuration values from %s", len(values), path)
        return cls(**values)

    def sampling_spec(self):
        """The metrics SamplingSpec described by this config.

        :rtype: holepy.metrics._distance.SamplingSpec
        """
        # pylint: disable=import-outside-toplevel
        from holepy.metrics._distance import SamplingMode, SamplingSpec

        return SamplingSpec(
            mode=SamplingMode(self.sampling_mode),
            samples_per_area=self.samples_per_area,
            budget=self.sample_budget,
            max_samples=self.max_samples,
            seed=self.seed,
        )


def _field_names():
    return [field.name for field in fields(RunConfig)]


_PARSERS: Dict[str, Callable[[str], Any]] = {
    "small_factor": float,
    "medium_factor": float,
    "fracture_cos": float,
    "smooth_iterations": int,
    "ring_merge_radius_factor": float,
    "open_surface": _parse_bool,
    "smoothing": str,
    "bezier_degree": int,
    "sampling_mode": str,
    "samples_per_area": _optional(float),
    "sample_budget": _optional(int),
    "max_samples": int,
    "seed": int,
    "record_timing": _parse_bool,
}
