"""Shared utilities for the holepy package."""

from holepy.utilities._config import RunConfig
from holepy.utilities._geometry import (
    best_fit_plane,
    plane_residual,
    signed_area_2d,
    triangle_areas,
    unit,
)
from holepy.utilities._util import (
    cyclic_pairs,
    edge_key,
    generate_filename_and_mkdir,
    stopwatch,
)
