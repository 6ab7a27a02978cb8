"""Bezier curves and tensor product Bezier surfaces."""

from dataclasses import dataclass
from typing import Union
import numpy as np
from scipy.special import comb

from holepy.utilities._errors import DomainError, IndexOutOfRange

Parameter = Union[float, np.ndarray]


@dataclass(frozen=True)
class BezierCurve:
    """
    A Bezier curve of degree n defined by n + 1 control points.

    :param control_points: (n + 1, d) array-like of control points,
        with n >= 1.
    :type control_points: numpy.ndarray
    """

    control_points: np.ndarray

    def __post_init__(self) -> None:
        points = np.array(self.control_points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or len(points) < 2:
            raise ValueError("A Bezier curve needs at least 2 control points")
        if not np.all(np.isfinite(points)):
            raise ValueError("Control points must be finite")
        points.setflags(write=False)
        object.__setattr__(self, "control_points", points)

    @property
    def degree(self) -> int:
        """Number of control points minus one."""
        return len(self.control_points) - 1


@dataclass(frozen=True)
class BezierSurface:
    """
    A tensor product Bezier surface.

    The control net is indexed ``[i, j]``, with i running along the u
    parameter and j along w.

    :param control_net: (n + 1, m + 1, d) array-like, both n and m >= 1.
    :type control_net: numpy.ndarray
    """

    control_net: np.ndarray

    def __post_init__(self) -> None:
        net = np.array(self.control_net, dtype=np.float64)
        if net.ndim == 2:
            net = net[:, :, None]
        if net.ndim != 3 or net.shape[0] < 2 or net.shape[1] < 2:
            raise ValueError("A Bezier surface needs a control net of at least 2x2")
        if not np.all(np.isfinite(net)):
            raise ValueError("Control points must be finite")
        net.setflags(write=False)
        object.__setattr__(self, "control_net", net)

    @property
    def degrees(self):
        """Degree in u and in w."""
        return self.control_net.shape[0] - 1, self.control_net.shape[1] - 1

    def row(self, j: int) -> BezierCurve:
        """The curve through the control points B[:, j]."""
        return BezierCurve(self.control_net[:, j])

    def column(self, i: int) -> BezierCurve:
        """The curve through the control points B[i, :]."""
        return BezierCurve(self.control_net[i, :])


def bernstein(n: int, i: int, t: Parameter) -> Parameter:
    """Bernstein basis polynomial C(n, i) t^i (1 - t)^(n - i).

    The binomial is computed exactly as an integer, so there is no
    factorial overflow at high degree.

    :raises IndexOutOfRange: unless 0 <= i <= n
    :raises DomainError: when t lies outside [0, 1]
    """
    if n < 0 or not 0 <= i <= n:
        raise IndexOutOfRange(f"Bernstein index {i} out of range for degree {n}")
    t = _check_domain(t)
    return float(comb(n, i, exact=True)) * t**i * (1.0 - t) ** (n - i)


def curve_eval(curve: BezierCurve, t: Parameter) -> np.ndarray:
    """Point on the curve at parameter t, by de Casteljau's algorithm.

    :param t: A scalar or an array of parameters in [0, 1].
    :return: (d,) point for scalar t, (k, d) points for an array.
    :raises DomainError: when any t lies outside [0, 1]
    """
    t = _check_domain(t)
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(t)
    net = np.broadcast_to(curve.control_points, (len(ts),) + curve.control_points.shape)
    points = _de_casteljau(net, ts)
    return points[0] if scalar else points


def surface_eval(surface: BezierSurface, u: Parameter, w: Parameter) -> np.ndarray:
    """Point on the surface at (u, w).

    Each column of the control net is first reduced at w, and the
    resulting curve is then evaluated at u.

    :raises DomainError: when u or w lies outside [0, 1]
    """
    u = _check_domain(u)
    w = _check_domain(w)
    scalar = np.ndim(u) == 0 and np.ndim(w) == 0
    us, ws = np.broadcast_arrays(np.atleast_1d(u), np.atleast_1d(w))
    net = surface.control_net
    n_u, n_w, dim = net.shape
    samples = len(us)
    # reduce along w for every i at once
    by_row = np.broadcast_to(net, (samples,) + net.shape).reshape(
        samples * n_u, n_w, dim
    )
    reduced = _de_casteljau(by_row, np.repeat(ws, n_u)).reshape(samples, n_u, dim)
    points = _de_casteljau(reduced, us)
    return points[0] if scalar else points


def bernstein_sum(curve: BezierCurve, t: float) -> np.ndarray:
    """Point on the curve from the explicit Bernstein sum. Slower and
    less stable than curve_eval, kept as a reference."""
    n = curve.degree
    weights = np.array([bernstein(n, i, t) for i in range(n + 1)])
    return weights @ curve.control_points


def surface_bernstein_sum(surface: BezierSurface, u: float, w: float) -> np.ndarray:
    """Point on the surface from the explicit double Bernstein sum."""
    n, m = surface.degrees
    row_weights = np.array([bernstein(n, i, u) for i in range(n + 1)])
    col_weights = np.array([bernstein(m, j, w) for j in range(m + 1)])
    return np.einsum("i,j,ijk->k", row_weights, col_weights, surface.control_net)


def _de_casteljau(net: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Evaluates a batch of control polygons, net of shape (k, n + 1, d),
    each at its own parameter in ts."""
    b = np.array(net, dtype=np.float64)
    n = b.shape[1] - 1
    t = ts[:, None, None]
    for j in range(1, n + 1):
        b[:, : n - j + 1] = (1.0 - t) * b[:, : n - j + 1] + t * b[:, 1 : n - j + 2]
    return b[:, 0]


def _check_domain(t: Parameter) -> Parameter:
    values = np.asarray(t, dtype=np.float64)
    if not np.all((values >= 0.0) & (values <= 1.0)):
        raise DomainError(f"Bezier parameter must lie in [0, 1], got {t}")
    return float(values) if values.ndim == 0 else values
