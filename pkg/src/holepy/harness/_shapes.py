"""Synthetic surfaces with a known analytic form."""

from dataclasses import dataclass
from enum import Enum
import math
from typing import Optional, Tuple
import numpy as np

from holepy.mesh._mesh import TriangleMesh


class ShapeKind(Enum):
    """Analytic surfaces that can be generated."""

    SPHERE = "sphere"
    TORUS = "torus"
    PLANE = "plane"
    SADDLE = "saddle"
    CREASE = "crease"
    TWO_CREASE = "two-crease"

    @property
    def is_closed(self) -> bool:
        """Sphere and torus have no boundary, the others have one rim."""
        return self in (ShapeKind.SPHERE, ShapeKind.TORUS)


@dataclass(frozen=True)
class SyntheticShape:
    """
    A synthetic surface and the resolution to mesh it at.

    Open shapes are gridded over ``[-size, size]`` along a profile
    curve s and along y. The crease shape is a floor z = 0 for s < 0
    bent by ``crease_angle_deg`` along the line s = 0. The two-crease
    shape is a ramp rising at ``ramp_angle_deg`` between two floors,
    giving two parallel creases ``ramp_width`` apart. Both crease lines
    always lie on grid lines.

    :param kind: Which surface.
    :type kind: ShapeKind
    :param target_faces: Approximate number of faces to generate.
    :type target_faces: int
    :param size: Sphere radius, torus major radius, or half width of
        an open shape.
    :type size: float
    :param minor_ratio: Torus tube radius over its major radius.
    :type minor_ratio: float
    :param crease_angle_deg: Angle between the normals of the two
        halves of the crease shape.
    :type crease_angle_deg: float
    :param ramp_angle_deg: Slope of the ramp of the two-crease shape.
    :type ramp_angle_deg: float
    :param ramp_width: Optional - Length of the ramp along the profile,
        rounded to the grid. Half of size when not given.
    :type ramp_width: float or None
    """

    kind: ShapeKind
    target_faces: int = 50_000
    size: float = 1.0
    minor_ratio: float = 0.4
    crease_angle_deg: float = 90.0
    ramp_angle_deg: float = 60.0
    ramp_width: Optional[float] = None

    def __post_init__(self) -> None:
        if self.target_faces < 12:
            raise ValueError(f"target_faces must be at least 12, got {self.target_faces}")
        if not self.size > 0:
            raise ValueError(f"size must be positive, got {self.size}")
        if not 0 < self.minor_ratio < 1:
            raise ValueError("minor_ratio must lie in (0, 1)")
        if not 0 < self.crease_angle_deg < 180:
            raise ValueError("crease_angle_deg must lie in (0, 180)")
        if not 0 < self.ramp_angle_deg < 90:
            raise ValueError("ramp_angle_deg must lie in (0, 90)")
        if self.ramp_width is not None and not 0 < self.ramp_width < 2 * self.size:
            raise ValueError("ramp_width must lie in (0, 2 * size)")

    @property
    def grid_cells(self) -> int:
        """Quads along each side of an open shape's grid, always even."""
        cells = int(round(math.sqrt(self.target_faces / 2.0)))
        return max(2, cells + cells % 2)

    @property
    def spacing(self) -> float:
        """Grid spacing of an open shape."""
        return 2.0 * self.size / self.grid_cells

    @property
    def crease_positions(self) -> Tuple[float, ...]:
        """Profile positions s of the crease lines."""
        if self.kind is ShapeKind.CREASE:
            return (0.0,)
        if self.kind is ShapeKind.TWO_CREASE:
            half = self._ramp_half_width()
            return (-half, half)
        return ()

    def profile(self, s: np.ndarray) -> np.ndarray:
        """(x, z) of the profile curve at positions s in [-size, size]."""
        knots, xs, zs = self._profile_knots()
        s = np.asarray(s, dtype=np.float64)
        return np.stack([np.interp(s, knots, xs), np.interp(s, knots, zs)], axis=-1)

    def surface_offset(self, points: np.ndarray) -> np.ndarray:
        """Offset of points from the analytic surface, zero on it.

        Radial for the sphere and torus, vertical for the plane and
        saddle, and the distance to the profile for the crease shapes.
        """
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        if self.kind is ShapeKind.SPHERE:
            return np.linalg.norm(p, axis=1) - self.size
        if self.kind is ShapeKind.TORUS:
            tube = np.hypot(np.hypot(x, y) - self.size, z)
            return tube - self.minor_ratio * self.size
        if self.kind is ShapeKind.PLANE:
            return z
        if self.kind is ShapeKind.SADDLE:
            return z - _saddle_height(x, y, self.size)
        _, xs, zs = self._profile_knots()
        knots = np.column_stack([xs, zs])
        flat = np.column_stack([x, z])
        return np.min(
            [_segment_distance(flat, a, b) for a, b in zip(knots[:-1], knots[1:])],
            axis=0,
        )

    def _ramp_half_width(self) -> float:
        width = 0.5 * self.size if self.ramp_width is None else self.ramp_width
        steps = max(1, int(round(width / (2.0 * self.spacing))))
        steps = min(steps, self.grid_cells // 2 - 1) if self.grid_cells > 2 else 1
        return steps * self.spacing

    def _profile_knots(self):
        size = self.size
        if self.kind is ShapeKind.CREASE:
            angle = math.radians(self.crease_angle_deg)
            return (
                np.array([-size, 0.0, size]),
                np.array([-size, 0.0, size * math.cos(angle)]),
                np.array([0.0, 0.0, size * math.sin(angle)]),
            )
        if self.kind is ShapeKind.TWO_CREASE:
            angle = math.radians(self.ramp_angle_deg)
            half = self._ramp_half_width()
            top_x = -half + 2.0 * half * math.cos(angle)
            top_z = 2.0 * half * math.sin(angle)
            return (
                np.array([-size, -half, half, size]),
                np.array([-size, -half, top_x, top_x + size - half]),
                np.array([0.0, 0.0, top_z, top_z]),
            )
        return np.array([-size, size]), np.array([-size, size]), np.zeros(2)


def generate(shape: SyntheticShape) -> TriangleMesh:
    """Meshes a synthetic shape.

    The sphere is a cube sphere with an equal-angle grid on each cube
    face; the torus and the open shapes are regular grids. Faces are
    oriented outward on closed shapes and towards +z on open ones.

    :rtype: TriangleMesh
    """
    if shape.kind is ShapeKind.SPHERE:
        vertices, faces = _cube_sphere(shape)
    elif shape.kind is ShapeKind.TORUS:
        vertices, faces = _torus(shape)
    else:
        vertices, faces = _open_grid(shape)
    return TriangleMesh(vertices, faces)


def _cube_sphere(shape: SyntheticShape) -> Tuple[np.ndarray, np.ndarray]:
    n = max(1, int(round(math.sqrt(shape.target_faces / 12.0))))
    ticks = np.tan(np.linspace(-math.pi / 4.0, math.pi / 4.0, n + 1))
    ticks[0], ticks[-1] = -1.0, 1.0
    a, b = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    lattice = []
    quads = []
    for axis in range(3):
        others = [k for k in range(3) if k != axis]
        for side in (0, n):
            block = np.empty((n + 1, n + 1, 3), dtype=np.int64)
            block[..., axis] = side
            block[..., others[0]] = a
            block[..., others[1]] = b
            offset = sum(len(part) for part in lattice)
            lattice.append(block.reshape(-1, 3))
            quads.append(offset + _grid_quads(n + 1, n + 1))
    lattice = np.vstack(lattice)
    unique, inverse = np.unique(lattice, axis=0, return_inverse=True)
    cube = ticks[unique]
    vertices = shape.size * cube / np.linalg.norm(cube, axis=1)[:, None]
    faces = _split_quads(inverse.reshape(-1)[np.vstack(quads)])

    tris = vertices[faces]
    normals = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    inward = np.einsum("ij,ij->i", normals, tris.mean(axis=1)) < 0
    faces[inward] = faces[inward][:, ::-1]
    return vertices, faces


def _torus(shape: SyntheticShape) -> Tuple[np.ndarray, np.ndarray]:
    major = shape.size
    minor = shape.minor_ratio * major
    tube = max(3, int(round(math.sqrt(shape.target_faces * minor / (2.0 * major)))))
    around = max(3, int(round(shape.target_faces / (2.0 * tube))))
    u = np.linspace(0.0, 2.0 * math.pi, around, endpoint=False)
    v = np.linspace(0.0, 2.0 * math.pi, tube, endpoint=False)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ring = major + minor * np.cos(vv)
    vertices = np.column_stack(
        [(ring * np.cos(uu)).ravel(), (ring * np.sin(uu)).ravel(), (minor * np.sin(vv)).ravel()]
    )
    faces = _split_quads(_grid_quads(around, tube, wrap=True))
    return vertices, faces


def _open_grid(shape: SyntheticShape) -> Tuple[np.ndarray, np.ndarray]:
    cells = shape.grid_cells
    s = np.linspace(-shape.size, shape.size, cells + 1)
    y = np.linspace(-shape.size, shape.size, cells + 1)
    for position in shape.crease_positions:
        s[np.argmin(np.abs(s - position))] = position
    ss, yy = np.meshgrid(s, y, indexing="ij")
    if shape.kind is ShapeKind.SADDLE:
        xz = np.stack([ss, _saddle_height(ss, yy, shape.size)], axis=-1)
    else:
        xz = shape.profile(ss)
    vertices = np.column_stack([xz[..., 0].ravel(), yy.ravel(), xz[..., 1].ravel()])
    faces = _split_quads(_grid_quads(cells + 1, cells + 1))
    return vertices, faces


def _grid_quads(rows: int, cols: int, wrap: bool = False) -> np.ndarray:
    """Quads (r, c), (r + 1, c), (r + 1, c + 1), (r, c + 1) of a grid of
    rows x cols vertices indexed r * cols + c."""
    last_row = rows if wrap else rows - 1
    last_col = cols if wrap else cols - 1
    r, c = np.meshgrid(np.arange(last_row), np.arange(last_col), indexing="ij")
    r, c = r.ravel(), c.ravel()
    r1, c1 = (r + 1) % rows, (c + 1) % cols
    return np.column_stack([r * cols + c, r1 * cols + c, r1 * cols + c1, r * cols + c1])


def _split_quads(quads: np.ndarray) -> np.ndarray:
    first = quads[:, [0, 1, 2]]
    second = quads[:, [0, 2, 3]]
    return np.vstack([first, second])


def _saddle_height(x, y, size: float):
    return 0.5 * (x * x - y * y) / size


def _segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    span = b - a
    t = np.clip((points - a) @ span / float(span @ span), 0.0, 1.0)
    return np.linalg.norm(points - (a + t[:, None] * span), axis=1)
