"""Triangle meshes, rigid poses, and STL import/export.

Meshes are immutable index triples over a vertex array. Vertices are kept
exactly as imported (no welding); degenerate triangles are preserved and
carry a zero normal, downstream stages skip them.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import StlError

# 50-byte binary STL record: normal, three vertices, attribute count.
_STL_RECORD = np.dtype(
    [("normal", "<3f4"), ("verts", "<f4", (3, 3)), ("attr", "<u2")]
)

_UNIT_TOL = 1e-6


def euler_to_matrix(angles) -> np.ndarray:
    """Rotation matrix for extrinsic X-then-Y-then-Z Euler angles (radians)."""
    ax, ay, az = float(angles[0]), float(angles[1]), float(angles[2])
    cx, sx = math.cos(ax), math.sin(ax)
    cy, sy = math.cos(ay), math.sin(ay)
    cz, sz = math.cos(az), math.sin(az)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ ry @ rx


def matrix_to_euler(rot: np.ndarray) -> np.ndarray:
    """Extrinsic X-Y-Z Euler angles of a rotation matrix (inverse of euler_to_matrix)."""
    cy = math.hypot(rot[0, 0], rot[1, 0])
    ay = math.atan2(-rot[2, 0], cy)
    if cy > 1e-9:
        ax = math.atan2(rot[2, 1], rot[2, 2])
        az = math.atan2(rot[1, 0], rot[0, 0])
    else:
        # Gimbal lock: x and z rotations are coupled, put everything into x.
        ax = math.atan2(-rot[1, 2], rot[1, 1])
        az = 0.0
    return np.array([ax, ay, az])


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Pose:
    """Rigid transform: extrinsic X-Y-Z Euler rotation followed by translation."""

    translation: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "translation", _readonly(np.asarray(self.translation, dtype=np.float64)))
        object.__setattr__(self, "rotation", _readonly(np.asarray(self.rotation, dtype=np.float64)))
        if self.translation.shape != (3,) or self.rotation.shape != (3,):
            raise ValueError("pose needs 3 translation components and 3 angles")

    def matrix(self) -> np.ndarray:
        return euler_to_matrix(self.rotation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return points @ self.matrix().T + self.translation

    def inverse(self) -> "Pose":
        rot_t = self.matrix().T
        return Pose(-(rot_t @ self.translation), matrix_to_euler(rot_t))

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3), np.zeros(3))


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box, min/max corners componentwise."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "min", _readonly(np.asarray(self.min, dtype=np.float64)))
        object.__setattr__(self, "max", _readonly(np.asarray(self.max, dtype=np.float64)))
        if np.any(self.min > self.max):
            raise ValueError("aabb min must be <= max componentwise")

    def overlap_volume(self, other: "Aabb") -> float:
        ext = np.minimum(self.max, other.max) - np.maximum(self.min, other.min)
        if np.any(ext <= 0):
            return 0.0
        return float(ext[0] * ext[1] * ext[2])


def face_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Unit per-triangle normals; zero vector for degenerate triangles."""
    a = vertices[triangles[:, 0]]
    cross = np.cross(vertices[triangles[:, 1]] - a, vertices[triangles[:, 2]] - a)
    norm = np.linalg.norm(cross, axis=1)
    out = np.zeros_like(cross)
    ok = norm > 1e-12
    out[ok] = cross[ok] / norm[ok, None]
    return out


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle geometry with per-triangle unit normals."""

    vertices: np.ndarray
    triangles: np.ndarray
    normals: np.ndarray

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        tris = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        if not np.all(np.isfinite(verts)):
            raise ValueError("mesh vertices must be finite")
        if tris.size and (tris.min() < 0 or tris.max() >= len(verts)):
            raise ValueError("triangle index out of range")
        normals = self.normals
        computed = face_normals(verts, tris)
        if normals is None:
            normals = computed
        else:
            normals = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
            if normals.shape != tris.shape:
                raise ValueError("need one normal per triangle")
            # Keep file normals only where they are unit length; recompute the rest.
            bad = np.abs(np.linalg.norm(normals, axis=1) - 1.0) > _UNIT_TOL
            if bad.any():
                normals = normals.copy()
                normals[bad] = computed[bad]
        object.__setattr__(self, "vertices", _readonly(verts))
        object.__setattr__(self, "triangles", _readonly(tris))
        object.__setattr__(self, "normals", _readonly(normals))

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)


def parse_stl(data: bytes, scale: float = 1.0) -> TriangleMesh:
    """Parse binary or ASCII STL bytes, multiplying all coordinates by scale.

    ASCII is assumed when the payload starts with "solid" and mentions
    "facet"; everything else is treated as binary (80-byte header, u32 LE
    triangle count, 50-byte records).
    """
    if not (scale > 0 and math.isfinite(scale)):
        raise ValueError("scale must be a positive finite number")
    if data[:5] == b"solid" and b"facet" in data:
        verts, normals = _parse_ascii(data)
    else:
        verts, normals = _parse_binary(data)
    if len(verts) == 0:
        raise StlError("STL contains zero triangles")
    verts = verts * scale
    tris = np.arange(len(verts), dtype=np.int32).reshape(-1, 3)
    return TriangleMesh(verts, tris, normals)


def _parse_binary(data: bytes):
    if len(data) < 84:
        raise StlError("binary STL shorter than its 84-byte preamble")
    (count,) = struct.unpack_from("<I", data, 80)
    need = 84 + 50 * count
    if len(data) < need:
        raise StlError(
            f"binary STL truncated: {count} triangles need {need} bytes, got {len(data)}"
        )
    rec = np.frombuffer(data, dtype=_STL_RECORD, count=count, offset=84)
    verts = rec["verts"].astype(np.float64).reshape(-1, 3)
    return verts, rec["normal"].astype(np.float64)


def _parse_ascii(data: bytes):
    verts: list[list[float]] = []
    normals: list[list[float]] = []

    def fail(lineno, msg):
        raise StlError(f"ASCII STL line {lineno}: {msg}")

    def floats(lineno, fields, what):
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            fail(lineno, f"{what} expects 3 numbers, got {fields!r}")
        if len(vals) != 3:
            fail(lineno, f"{what} expects 3 numbers, got {len(vals)}")
        return vals

    lines = data.decode("latin-1").splitlines()
    tokens = [(i + 1, ln.split()) for i, ln in enumerate(lines) if ln.split()]
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (len(lines) + 1, [])

    lineno, tok = peek()
    if not tok or tok[0] != "solid":
        fail(lineno, 'expected "solid"')
    pos += 1
    while True:
        lineno, tok = peek()
        if not tok:
            fail(lineno, 'unexpected end of file, expected "facet" or "endsolid"')
        if tok[0] == "endsolid":
            break
        if tok[:2] != ["facet", "normal"]:
            fail(lineno, f'expected "facet normal", got {" ".join(tok)!r}')
        normals.append(floats(lineno, tok[2:], "facet normal"))
        pos += 1
        lineno, tok = peek()
        if tok[:2] != ["outer", "loop"]:
            fail(lineno, 'expected "outer loop"')
        pos += 1
        for _ in range(3):
            lineno, tok = peek()
            if not tok or tok[0] != "vertex":
                fail(lineno, 'expected "vertex"')
            verts.append(floats(lineno, tok[1:], "vertex"))
            pos += 1
        lineno, tok = peek()
        if tok != ["endloop"]:
            fail(lineno, 'expected "endloop"')
        pos += 1
        lineno, tok = peek()
        if tok != ["endfacet"]:
            fail(lineno, 'expected "endfacet"')
        pos += 1
    return np.array(verts, dtype=np.float64).reshape(-1, 3), np.array(
        normals, dtype=np.float64
    ).reshape(-1, 3)


def mesh_to_stl(mesh: TriangleMesh) -> bytes:
    """Serialize a mesh as binary STL."""
    out = bytearray(b"\0" * 80)
    out += struct.pack("<I", mesh.triangle_count)
    rec = np.zeros(mesh.triangle_count, dtype=_STL_RECORD)
    rec["normal"] = mesh.normals.astype(np.float32)
    rec["verts"] = mesh.vertices[mesh.triangles].astype(np.float32)
    out += rec.tobytes()
    return bytes(out)


def transform(mesh: TriangleMesh, pose: Pose) -> TriangleMesh:
    """Apply a rigid pose: vertices rotated and translated, normals rotated only."""
    rot = pose.matrix()
    return TriangleMesh(
        mesh.vertices @ rot.T + pose.translation,
        mesh.triangles,
        mesh.normals @ rot.T,
    )


def aabb(mesh: TriangleMesh) -> Aabb:
    """Componentwise bounding box over all vertices."""
    if len(mesh.vertices) == 0:
        raise ValueError("aabb of an empty mesh is undefined")
    return Aabb(mesh.vertices.min(axis=0), mesh.vertices.max(axis=0))


def concatenate(meshes) -> tuple[TriangleMesh, np.ndarray]:
    """Merge meshes into one; returns the merged mesh and a per-triangle part index."""
    meshes = list(meshes)
    if not meshes:
        raise ValueError("nothing to concatenate")
    verts = []
    tris = []
    norms = []
    part = []
    offset = 0
    for i, m in enumerate(meshes):
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        norms.append(m.normals)
        part.append(np.full(m.triangle_count, i, dtype=np.int32))
        offset += len(m.vertices)
    merged = TriangleMesh(np.vstack(verts), np.vstack(tris), np.vstack(norms))
    return merged, np.concatenate(part)
