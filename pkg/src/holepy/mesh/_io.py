"""Reading and writing triangle meshes as OBJ and PLY files."""

from dataclasses import dataclass, field
from enum import Enum
import io
import logging
from pathlib import Path
from typing import BinaryIO, List, Optional, Tuple, Union
import numpy as np

from holepy.mesh._mesh import TriangleMesh
from holepy.utilities._errors import NonManifoldEdge, ParseError, UnsupportedElement

logger = logging.getLogger(__name__)

Source = Union[str, Path, BinaryIO]

PLY_TYPES = {
    "char": "i1",
    "int8": "i1",
    "uchar": "u1",
    "uint8": "u1",
    "short": "i2",
    "int16": "i2",
    "ushort": "u2",
    "uint16": "u2",
    "int": "i4",
    "int32": "i4",
    "uint": "u4",
    "uint32": "u4",
    "float": "f4",
    "float32": "f4",
    "double": "f8",
    "float64": "f8",
}
FACE_LIST_NAMES = ("vertex_indices", "vertex_index")
OBJ_SKIPPED = ("vn", "vt", "vp", "g", "o", "s", "usemtl", "mtllib", "l")


class MeshFileFormat(Enum):
    """Supported mesh file encodings."""

    OBJ = "obj"
    PLY_ASCII = "ply-ascii"
    PLY_BINARY_LE = "ply-binary-le"

    @property
    def is_ply(self) -> bool:
        """True for either PLY encoding."""
        return self is not MeshFileFormat.OBJ


@dataclass
class _PlyProperty:
    name: str
    dtype: str
    count_dtype: Optional[str] = None

    @property
    def is_list(self) -> bool:
        return self.count_dtype is not None


@dataclass
class _PlyElement:
    name: str
    count: int
    properties: List[_PlyProperty] = field(default_factory=list)
    line: Optional[int] = None


@dataclass
class _PlyHeader:
    file_format: MeshFileFormat
    elements: List[_PlyElement]
    body_offset: int
    body_line: int


@dataclass
class _FaceOrigins:
    """Where each triangle came from: a line number, or a byte offset
    into a binary payload."""

    kind: str
    starts: np.ndarray

    def locate(self, face: int) -> dict:
        return {self.kind: int(self.starts[face])}


def detect_format(source: Source, data: Optional[bytes] = None) -> MeshFileFormat:
    """Works out the encoding of a mesh file.

    Paths are first classified by extension, then checked against the
    file content. Streams are classified by content alone.

    :raises ParseError: when the extension and the content disagree, or
        the extension is not recognised
    """
    if data is None:
        data = _read_bytes(source)
    is_ply = data[:3] == b"ply"
    if isinstance(source, (str, Path)):
        suffix = Path(source).suffix.lower()
        if suffix == ".obj":
            if is_ply:
                raise ParseError("file has an .obj extension but PLY content")
            return MeshFileFormat.OBJ
        if suffix == ".ply":
            if not is_ply:
                raise ParseError("file has a .ply extension but no 'ply' magic", 1)
            return _parse_ply_header(data).file_format
        raise ParseError(f"unrecognised mesh file extension '{suffix}'")
    if is_ply:
        return _parse_ply_header(data).file_format
    return MeshFileFormat.OBJ


def read_mesh(
    source: Source, file_format: Optional[MeshFileFormat] = None
) -> TriangleMesh:
    """Reads a triangle mesh from a path or binary stream.

    Polygons with more than three vertices are split into a fan around
    their first vertex. Normals, texture coordinates, groups and
    materials are ignored.

    :param source: Path of the file, or a readable binary stream.
    :type source: str or pathlib.Path or BinaryIO
    :param file_format: Optional - Encoding of the data. Detected when
        not given. A PLY format is checked against the header.
    :type file_format: MeshFileFormat or None
    :return: The parsed mesh.
    :rtype: TriangleMesh
    :raises ParseError: with the line number or byte offset of the fault
    :raises UnsupportedElement: for PLY elements other than vertex and face
    """
    data = _read_bytes(source)
    if file_format is None:
        file_format = detect_format(source, data)
    if file_format is MeshFileFormat.OBJ:
        vertices, faces, origins = _read_obj(data)
    else:
        header = _parse_ply_header(data)
        if header.file_format is not file_format:
            raise ParseError(
                f"header declares {header.file_format.value}, "
                f"expected {file_format.value}",
                line=2,
            )
        if file_format is MeshFileFormat.PLY_ASCII:
            vertices, faces, origins = _read_ply_ascii(data, header)
        else:
            vertices, faces, origins = _read_ply_binary(data, header)
    logger.debug("Read %d vertices and %d faces", len(vertices), len(faces))
    try:
        return TriangleMesh(vertices, faces)
    except (ValueError, IndexError) as err:
        bad = _first_bad_face(faces, len(vertices), err)
        where = {} if bad is None else origins.locate(bad)
        raise ParseError(str(err), **where) from err


def write_mesh(
    mesh: TriangleMesh,
    target: Union[str, Path, BinaryIO],
    file_format: Optional[MeshFileFormat] = None,
) -> None:
    """Writes a mesh to a path or binary stream.

    ASCII coordinates are written with 17 significant digits, which
    round-trips 64-bit floats exactly. Binary PLY stores doubles.

    :param file_format: Optional - Encoding to write. Chosen from the
        extension of a path when not given: ``.obj`` gives OBJ and
        ``.ply`` gives binary little endian PLY.
    :type file_format: MeshFileFormat or None
    """
    if file_format is None:
        if not isinstance(target, (str, Path)):
            raise ValueError("file_format is required when writing to a stream")
        suffix = Path(target).suffix.lower()
        if suffix == ".obj":
            file_format = MeshFileFormat.OBJ
        elif suffix == ".ply":
            file_format = MeshFileFormat.PLY_BINARY_LE
        else:
            raise ValueError(f"Cannot infer a mesh format from '{suffix}'")

    if file_format is MeshFileFormat.OBJ:
        payload = _obj_bytes(mesh)
    else:
        payload = _ply_bytes(mesh, binary=file_format is MeshFileFormat.PLY_BINARY_LE)

    if isinstance(target, (str, Path)):
        Path(target).write_bytes(payload)
    else:
        target.write(payload)


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if hasattr(source, "seek") and hasattr(source, "tell"):
        position = source.tell()
        data = source.read()
        source.seek(position)
        return data
    return source.read()


def _read_obj(data: bytes) -> Tuple[np.ndarray, np.ndarray, _FaceOrigins]:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as err:
        raise ParseError("OBJ file is not valid UTF-8", offset=err.start) from err

    vertices: List[Tuple[float, float, float]] = []
    faces: List[Tuple[int, int, int]] = []
    face_lines: List[int] = []
    skipped = set()
    for number, raw in enumerate(io.StringIO(text), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        keyword, args = tokens[0], tokens[1:]
        if keyword == "v":
            if len(args) < 3:
                raise ParseError("vertex needs 3 coordinates", number)
            try:
                point = tuple(float(value) for value in args[:3])
            except ValueError as err:
                raise ParseError(f"bad vertex coordinate in {args[:3]}", number) from err
            if not all(np.isfinite(point)):
                raise ParseError("vertex coordinate is not finite", number)
            vertices.append(point)
        elif keyword == "f":
            if len(args) < 3:
                raise ParseError(f"face needs at least 3 vertices, got {len(args)}", number)
            polygon = [_obj_index(arg, len(vertices), number) for arg in args]
            for k in range(1, len(polygon) - 1):
                faces.append((polygon[0], polygon[k], polygon[k + 1]))
                face_lines.append(number)
        elif keyword not in skipped:
            skipped.add(keyword)
            if keyword in OBJ_SKIPPED:
                logger.debug("Skipping OBJ '%s' records", keyword)
            else:
                logger.warning("Skipping unknown OBJ record '%s' (line %d)", keyword, number)
    return (
        np.array(vertices, dtype=np.float64).reshape(-1, 3),
        np.array(faces, dtype=np.int64).reshape(-1, 3),
        _FaceOrigins("line", np.array(face_lines, dtype=np.int64)),
    )


def _obj_index(token: str, vertex_count: int, line: int) -> int:
    try:
        index = int(token.split("/")[0])
    except ValueError as err:
        raise ParseError(f"bad face index '{token}'", line) from err
    if index == 0:
        raise ParseError("OBJ indices start at 1, got 0", line)
    # negative indices count back from the latest vertex
    resolved = index - 1 if index > 0 else vertex_count + index
    if not 0 <= resolved < vertex_count:
        raise ParseError(
            f"face index {index} refers to a missing vertex "
            f"({vertex_count} defined so far)",
            line,
        )
    return resolved


def _parse_ply_header(data: bytes) -> _PlyHeader:
    end = data.find(b"end_header")
    if not data.startswith(b"ply") or end < 0:
        raise ParseError("missing 'ply' magic or 'end_header'", 1)
    newline = data.find(b"\n", end)
    body_offset = len(data) if newline < 0 else newline + 1
    try:
        lines = data[:end].decode("ascii").splitlines()
    except UnicodeDecodeError as err:
        raise ParseError("PLY header is not ASCII", offset=err.start) from err

    file_format = None
    elements: List[_PlyElement] = []
    for number, line in enumerate(lines, start=1):
        tokens = line.split()
        if not tokens or tokens[0] in ("ply", "comment", "obj_info"):
            continue
        keyword = tokens[0]
        if keyword == "format":
            if len(tokens) != 3:
                raise ParseError("malformed format line", number)
            if tokens[1] == "ascii":
                file_format = MeshFileFormat.PLY_ASCII
            elif tokens[1] == "binary_little_endian":
                file_format = MeshFileFormat.PLY_BINARY_LE
            else:
                raise ParseError(f"unsupported PLY encoding '{tokens[1]}'", number)
        elif keyword == "element":
            if len(tokens) != 3 or not tokens[2].isdigit():
                raise ParseError("malformed element line", number)
            elements.append(_PlyElement(tokens[1], int(tokens[2]), line=number))
        elif keyword == "property":
            if not elements:
                raise ParseError("property declared before any element", number)
            elements[-1].properties.append(_ply_property(tokens, number))
        else:
            raise ParseError(f"unexpected header keyword '{keyword}'", number)

    if file_format is None:
        raise ParseError("PLY header has no format line", 2)
    for element in elements:
        if element.name not in ("vertex", "face") and element.count > 0:
            raise UnsupportedElement(
                f"PLY element '{element.name}' is not supported"
            )
    return _PlyHeader(
        file_format,
        [e for e in elements if e.name in ("vertex", "face")],
        body_offset,
        len(lines) + 2,
    )


def _ply_property(tokens: List[str], line: int) -> _PlyProperty:
    if len(tokens) == 5 and tokens[1] == "list":
        count_type, item_type = tokens[2], tokens[3]
        if count_type not in PLY_TYPES or item_type not in PLY_TYPES:
            raise ParseError(f"unknown PLY type in '{' '.join(tokens)}'", line)
        return _PlyProperty(tokens[4], PLY_TYPES[item_type], PLY_TYPES[count_type])
    if len(tokens) == 3:
        if tokens[1] not in PLY_TYPES:
            raise ParseError(f"unknown PLY type '{tokens[1]}'", line)
        return _PlyProperty(tokens[2], PLY_TYPES[tokens[1]])
    raise ParseError("malformed property line", line)


def _check_layout(header: _PlyHeader) -> None:
    for element in header.elements:
        names = [prop.name for prop in element.properties]
        if element.name == "vertex":
            missing = [axis for axis in "xyz" if axis not in names]
            if missing:
                raise ParseError(
                    f"vertex element lacks properties {missing}", element.line
                )
            extra = [n for n in names if n not in ("x", "y", "z")]
            if extra:
                logger.warning("Skipping vertex properties %s", extra)
        else:
            lists = [p for p in element.properties if p.name in FACE_LIST_NAMES]
            if len(lists) != 1 or not lists[0].is_list:
                raise ParseError("face element needs one vertex_indices list", element.line)
            extra = [n for n in names if n not in FACE_LIST_NAMES]
            if extra:
                logger.warning("Skipping face properties %s", extra)


def _read_ply_ascii(
    data: bytes, header: _PlyHeader
) -> Tuple[np.ndarray, np.ndarray, _FaceOrigins]:
    _check_layout(header)
    lines = data[header.body_offset:].decode("ascii", errors="replace").splitlines()
    cursor = 0
    vertices = np.zeros((0, 3))
    polygons: List[List[int]] = []
    starts: List[int] = []
    for element in header.elements:
        records, numbers = [], []
        for _ in range(element.count):
            while cursor < len(lines) and not lines[cursor].strip():
                cursor += 1
            number = header.body_line + cursor
            if cursor >= len(lines):
                raise ParseError(f"file ends inside the {element.name} element", number)
            tokens = lines[cursor].split()
            cursor += 1
            records.append(_ascii_record(element, tokens, number))
            numbers.append(number)
        if element.name == "vertex":
            vertices = np.array(
                [[record["x"], record["y"], record["z"]] for record in records],
                dtype=np.float64,
            ).reshape(-1, 3)
        else:
            polygons = [
                next(record[n] for n in FACE_LIST_NAMES if n in record)
                for record in records
            ]
            starts = numbers
    return (vertices, *_fan(polygons, len(vertices), "line", starts))


def _ascii_record(element: _PlyElement, tokens: List[str], line: int) -> dict:
    record = {}
    position = 0
    try:
        for prop in element.properties:
            if prop.is_list:
                count = int(tokens[position])
                values = [int(float(v)) for v in tokens[position + 1: position + 1 + count]]
                if len(values) != count:
                    raise ParseError(f"list '{prop.name}' is truncated", line)
                record[prop.name] = values
                position += 1 + count
            else:
                record[prop.name] = float(tokens[position])
                position += 1
    except (IndexError, ValueError) as err:
        raise ParseError(f"malformed {element.name} record", line) from err
    if position != len(tokens):
        raise ParseError(f"unexpected extra values in {element.name} record", line)
    return record


def _read_ply_binary(
    data: bytes, header: _PlyHeader
) -> Tuple[np.ndarray, np.ndarray, _FaceOrigins]:
    _check_layout(header)
    offset = header.body_offset
    vertices = np.zeros((0, 3))
    polygons: List[List[int]] = []
    starts: List[int] = []
    for element in header.elements:
        if element.name == "vertex" and not any(p.is_list for p in element.properties):
            dtype = np.dtype([(p.name, "<" + p.dtype) for p in element.properties])
            end = offset + dtype.itemsize * element.count
            if end > len(data):
                raise ParseError("file ends inside the vertex element", offset=len(data))
            table = np.frombuffer(data, dtype=dtype, count=element.count, offset=offset)
            vertices = np.column_stack(
                [table[axis].astype(np.float64) for axis in "xyz"]
            ).reshape(-1, 3)
            offset = end
            continue
        if element.name == "face":
            fast = _binary_triangles(data, element, offset)
            if fast is not None:
                faces, origins = fast
                missing = np.flatnonzero(((faces < 0) | (faces >= len(vertices))).any(axis=1))
                if len(missing):
                    raise ParseError(
                        "face index refers to a missing vertex",
                        **origins.locate(int(missing[0])),
                    )
                return vertices, faces, origins
        records, record_starts, offset = _binary_records(data, element, offset)
        if element.name == "vertex":
            vertices = np.array(
                [[r["x"], r["y"], r["z"]] for r in records], dtype=np.float64
            ).reshape(-1, 3)
        else:
            polygons = [
                next(r[n] for n in FACE_LIST_NAMES if n in r) for r in records
            ]
            starts = record_starts
    return (vertices, *_fan(polygons, len(vertices), "offset", starts))


def _binary_triangles(
    data: bytes, element: _PlyElement, offset: int
) -> Optional[Tuple[np.ndarray, _FaceOrigins]]:
    """Reads a face element in one go when it is a bare list of
    triangles, returning None when any record is not a triangle."""
    if len(element.properties) != 1:
        return None
    prop = element.properties[0]
    dtype = np.dtype([("n", "<" + prop.count_dtype), ("i", "<" + prop.dtype, (3,))])
    end = offset + dtype.itemsize * element.count
    if end > len(data):
        return None
    table = np.frombuffer(data, dtype=dtype, count=element.count, offset=offset)
    if not np.all(table["n"] == 3):
        return None
    starts = offset + dtype.itemsize * np.arange(element.count, dtype=np.int64)
    return table["i"].astype(np.int64).reshape(-1, 3), _FaceOrigins("offset", starts)


def _binary_records(
    data: bytes, element: _PlyElement, offset: int
) -> Tuple[list, List[int], int]:
    records, starts = [], []
    for _ in range(element.count):
        record = {}
        starts.append(offset)
        for prop in element.properties:
            if prop.is_list:
                count_type = np.dtype("<" + prop.count_dtype)
                count = int(_take(data, count_type, 1, offset)[0])
                offset += count_type.itemsize
                item_type = np.dtype("<" + prop.dtype)
                record[prop.name] = _take(data, item_type, count, offset).tolist()
                offset += item_type.itemsize * count
            else:
                item_type = np.dtype("<" + prop.dtype)
                record[prop.name] = float(_take(data, item_type, 1, offset)[0])
                offset += item_type.itemsize
        records.append(record)
    return records, starts, offset


def _take(data: bytes, dtype: np.dtype, count: int, offset: int) -> np.ndarray:
    if offset + dtype.itemsize * count > len(data):
        raise ParseError("unexpected end of binary data", offset=offset)
    return np.frombuffer(data, dtype=dtype, count=count, offset=offset)


def _fan(
    polygons: List[List[int]], vertex_count: int, kind: str, starts: List[int]
) -> Tuple[np.ndarray, _FaceOrigins]:
    """Splits polygons into triangles. starts holds the line or byte
    offset of every polygon record."""
    faces, origins = [], []
    for number, (polygon, start) in enumerate(zip(polygons, starts)):
        if len(polygon) < 3:
            raise ParseError(f"face {number} has fewer than 3 vertices", **{kind: start})
        if min(polygon) < 0 or max(polygon) >= vertex_count:
            raise ParseError(f"face {number} refers to a missing vertex", **{kind: start})
        for k in range(1, len(polygon) - 1):
            faces.append((polygon[0], polygon[k], polygon[k + 1]))
            origins.append(start)
    return (
        np.array(faces, dtype=np.int64).reshape(-1, 3),
        _FaceOrigins(kind, np.array(origins, dtype=np.int64)),
    )


def _first_bad_face(
    faces: np.ndarray, vertex_count: int, error: Exception
) -> Optional[int]:
    """Index of the first face a TriangleMesh would refuse, if any."""
    if isinstance(error, NonManifoldEdge):
        a, b = error.edge
        sharing = np.flatnonzero((faces == a).any(axis=1) & (faces == b).any(axis=1))
        return int(sharing[2]) if len(sharing) > 2 else None
    if len(faces) == 0:
        return None
    wrong = (faces < 0).any(axis=1) | (faces >= vertex_count).any(axis=1)
    wrong |= (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2])
    wrong |= faces[:, 0] == faces[:, 2]
    _, first = np.unique(np.sort(faces, axis=1), axis=0, return_index=True)
    repeated = np.ones(len(faces), dtype=bool)
    repeated[first] = False
    wrong |= repeated
    hits = np.flatnonzero(wrong)
    return int(hits[0]) if len(hits) else None


def _obj_bytes(mesh: TriangleMesh) -> bytes:
    out = io.StringIO()
    out.write(f"# holepy: {mesh.vertex_count} vertices, {mesh.face_count} faces\n")
    for x, y, z in mesh.vertices.tolist():
        out.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
    for a, b, c in (mesh.faces + 1).tolist():
        out.write(f"f {a} {b} {c}\n")
    return out.getvalue().encode("utf-8")


def _ply_bytes(mesh: TriangleMesh, binary: bool) -> bytes:
    encoding = "binary_little_endian" if binary else "ascii"
    header = (
        "ply\n"
        f"format {encoding} 1.0\n"
        "comment written by holepy\n"
        f"element vertex {mesh.vertex_count}\n"
        "property double x\n"
        "property double y\n"
        "property double z\n"
        f"element face {mesh.face_count}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    ).encode("ascii")
    if binary:
        faces = np.empty(
            mesh.face_count, dtype=[("n", "u1"), ("i", "<i4", (3,))]
        )
        faces["n"] = 3
        faces["i"] = mesh.faces
        return (
            header
            + np.ascontiguousarray(mesh.vertices, dtype="<f8").tobytes()
            + faces.tobytes()
        )
    out = io.StringIO()
    for x, y, z in mesh.vertices.tolist():
        out.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
    for a, b, c in mesh.faces.tolist():
        out.write(f"3 {a} {b} {c}\n")
    return header + out.getvalue().encode("ascii")
