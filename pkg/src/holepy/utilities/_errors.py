"""Exceptions raised throughout the holepy package."""

from typing import Optional, Tuple


class HolepyError(Exception):
    """Base class of every error raised deliberately by holepy."""


class IndexOutOfRange(HolepyError, IndexError):
    """Raised when a vertex, face or basis index lies outside its valid range."""


class NonManifoldEdge(HolepyError, ValueError):
    """Raised when an edge is shared by three or more faces."""

    def __init__(self, edge: Tuple[int, int], face_count: int) -> None:
        self.edge = edge
        self.face_count = face_count
        super().__init__(
            f"Edge {edge} is incident to {face_count} faces; "
            "at most 2 are allowed."
        )


class DuplicateFace(HolepyError, ValueError):
    """Raised when the same vertex triple appears as two faces."""

    def __init__(self, face: Tuple[int, int, int]) -> None:
        self.face = face
        super().__init__(f"Face {face} appears more than once.")


class DegenerateBoundary(HolepyError, ValueError):
    """Raised when a boundary vertex does not have exactly two boundary edges."""

    def __init__(self, vertex: int, edge_count: int) -> None:
        self.vertex = vertex
        self.edge_count = edge_count
        super().__init__(
            f"Boundary vertex {vertex} has {edge_count} incident boundary "
            "edges; boundary rings must be simple."
        )


class DegenerateFace(HolepyError, ValueError):
    """Raised when the normal of a zero-area face is requested."""


class ZeroVector(HolepyError, ValueError):
    """Raised when an angle is requested against a zero-length vector."""


class InvalidChord(HolepyError, ValueError):
    """Raised when a segmentation chord leaves the hole polygon."""


class DomainError(HolepyError, ValueError):
    """Raised when a curve or surface parameter lies outside [0, 1]."""


class EmptyMesh(HolepyError, ValueError):
    """Raised when a distance is requested to or from a mesh with no faces."""


class ParseError(HolepyError, ValueError):
    """Raised when a mesh file cannot be parsed.

    :param reason: What went wrong.
    :type reason: str
    :param line: 1-based line number of an ASCII record, if known.
    :type line: int or None
    :param offset: Byte offset into a binary payload, if known.
    :type offset: int or None
    """

    def __init__(
        self,
        reason: str,
        line: Optional[int] = None,
        offset: Optional[int] = None,
    ) -> None:
        self.reason = reason
        self.line = line
        self.offset = offset
        if line is not None:
            where = f"line {line}: "
        elif offset is not None:
            where = f"byte {offset}: "
        else:
            where = ""
        super().__init__(f"{where}{reason}")


class UnsupportedElement(ParseError):
    """Raised when a PLY file declares an element other than vertex or face."""


class EarClipFailure(HolepyError, RuntimeError):
    """Raised when no valid ear remains while clipping a hole polygon."""


class FrontCollapse(HolepyError, RuntimeError):
    """Raised when an advancing front can no longer produce a valid ring."""


class PunchBreaksManifold(HolepyError, RuntimeError):
    """Raised when removing faces leaves a vertex whose star is not a disk."""
