import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthpipe.errors import StlError
from synthpipe.mesh import (
    Aabb,
    Pose,
    TriangleMesh,
    aabb,
    concatenate,
    euler_to_matrix,
    matrix_to_euler,
    mesh_to_stl,
    parse_stl,
    transform,
)


def binary_stl(triangles, header=b"\0" * 80):
    """Hand-build binary STL bytes: header + count + 50-byte records."""
    out = bytearray(header[:80].ljust(80, b"\0"))
    out += struct.pack("<I", len(triangles))
    for tri in triangles:
        nx, ny, nz = tri.get("normal", (0.0, 0.0, 0.0))
        out += struct.pack("<3f", nx, ny, nz)
        for v in tri["verts"]:
            out += struct.pack("<3f", *v)
        out += struct.pack("<H", 0)
    return bytes(out)


ONE_TRI = [{"verts": [(0, 0, 0), (1, 0, 0), (0, 1, 0)], "normal": (0, 0, 1)}]

ASCII_ONE_TRI = """solid demo
  facet normal 0 0 1
    outer loop
      vertex 0 0 0
      vertex 1 0 0
      vertex 0 1 0
    endloop
  endfacet
endsolid demo
"""

UNIT_CUBE_CORNERS = np.array(
    [[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float
)


def cube_mesh(center=(0.5, 0.5, 0.5), size=1.0):
    """12-triangle axis-aligned cube."""
    c = np.asarray(center, dtype=float)
    verts = (UNIT_CUBE_CORNERS - 0.5) * size + c
    faces = []
    for axis in range(3):
        for side in (0, 1):
            ids = [i for i in range(8) if (i >> (2 - axis)) & 1 == side]
            a, b, cc, d = ids
            faces += [[a, b, cc], [b, d, cc]]
    return TriangleMesh(verts, np.array(faces, dtype=np.int32), None)


class TestParseStl:
    def test_binary_single_triangle(self):
        mesh = parse_stl(binary_stl(ONE_TRI), scale=1.0)
        assert mesh.triangle_count == 1
        assert any(np.allclose(v, (1, 0, 0)) for v in mesh.vertices)

    def test_scale_applies_to_all_coordinates(self):
        mesh = parse_stl(binary_stl(ONE_TRI), scale=0.001)
        assert any(np.allclose(v, (0.001, 0, 0)) for v in mesh.vertices)

    def test_ascii_matches_binary(self):
        a = parse_stl(ASCII_ONE_TRI.encode())
        b = parse_stl(binary_stl(ONE_TRI))
        assert a.triangle_count == b.triangle_count
        assert np.allclose(np.sort(a.vertices, axis=0), np.sort(b.vertices, axis=0), atol=1e-6)

    def test_parse_determinism(self):
        data = binary_stl(ONE_TRI)
        m1, m2 = parse_stl(data), parse_stl(data)
        assert np.array_equal(m1.vertices, m2.vertices)
        assert np.array_equal(m1.triangles, m2.triangles)

    def test_truncated_binary(self):
        data = binary_stl(ONE_TRI)[:-10]
        with pytest.raises(StlError, match="truncated"):
            parse_stl(data)

    def test_zero_triangles(self):
        with pytest.raises(StlError, match="zero"):
            parse_stl(binary_stl([]))

    def test_ascii_error_reports_line(self):
        bad = ASCII_ONE_TRI.replace("vertex 1 0 0", "vertx 1 0 0")
        with pytest.raises(StlError, match="line 5"):
            parse_stl(bad.encode())

    def test_ascii_bad_number_reports_line(self):
        bad = ASCII_ONE_TRI.replace("vertex 1 0 0", "vertex 1 oops 0")
        with pytest.raises(StlError, match="line 5"):
            parse_stl(bad.encode())

    def test_binary_with_solid_prefix_header(self):
        # "solid" in the header without any "facet" text must parse as binary
        data = binary_stl(ONE_TRI, header=b"solid-ish exporter")
        assert parse_stl(data).triangle_count == 1

    def test_degenerate_normal_recomputed(self):
        mesh = parse_stl(binary_stl(ONE_TRI))  # stored normal (0,0,1) is unit, kept
        assert np.allclose(mesh.normals[0], (0, 0, 1))
        zero_norm = [{"verts": ONE_TRI[0]["verts"], "normal": (0, 0, 0)}]
        mesh = parse_stl(binary_stl(zero_norm))
        assert abs(np.linalg.norm(mesh.normals[0]) - 1.0) <= 1e-6

    def test_roundtrip_through_writer(self):
        mesh = cube_mesh()
        again = parse_stl(mesh_to_stl(mesh))
        assert again.triangle_count == mesh.triangle_count
        flat_a = mesh.vertices[mesh.triangles].reshape(-1, 3)
        assert np.allclose(flat_a, again.vertices, atol=1e-6)

    def test_rejects_bad_scale(self):
        for s in (0.0, -1.0, float("nan")):
            with pytest.raises(ValueError):
                parse_stl(binary_stl(ONE_TRI), scale=s)


class TestMeshInvariants:
    def test_triangle_index_bounds(self):
        with pytest.raises(ValueError, match="index"):
            TriangleMesh(np.zeros((3, 3)), np.array([[0, 1, 3]]), None)

    def test_nonfinite_vertices_rejected(self):
        verts = np.array([[0, 0, 0], [1, 0, 0], [0, np.nan, 0]])
        with pytest.raises(ValueError, match="finite"):
            TriangleMesh(verts, np.array([[0, 1, 2]]), None)

    def test_normals_unit_for_nondegenerate(self):
        mesh = cube_mesh()
        lengths = np.linalg.norm(mesh.normals, axis=1)
        assert np.all(np.abs(lengths - 1.0) <= 1e-6)


class TestPose:
    def test_identity_leaves_vertices(self):
        mesh = cube_mesh()
        out = transform(mesh, Pose.identity())
        assert np.allclose(out.vertices, mesh.vertices, atol=0)

    def test_z_quarter_turn(self):
        pose = Pose((0, 0, 0), (0, 0, math.pi / 2))
        mesh = TriangleMesh([[1, 0, 0], [0, 0, 0], [0, 0, 1]], [[0, 1, 2]], None)
        out = transform(mesh, pose)
        assert np.allclose(out.vertices[0], (0, 1, 0), atol=1e-9)

    def test_translation(self):
        pose = Pose((0, 0, 2), (0, 0, 0))
        mesh = TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]], None)
        assert np.allclose(transform(mesh, pose).vertices[0], (0, 0, 2))

    def test_rotation_matrix_is_orthonormal(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            rot = euler_to_matrix(rng.uniform(-math.pi, math.pi, 3))
            assert np.allclose(rot.T @ rot, np.eye(3), atol=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(-3.0, 3.0), min_size=3, max_size=3),
        st.lists(st.floats(-3.1, 3.1), min_size=3, max_size=3),
    )
    def test_transform_inverse_roundtrip(self, translation, rotation):
        pose = Pose(translation, rotation)
        mesh = cube_mesh()
        back = transform(transform(mesh, pose), pose.inverse())
        assert np.allclose(back.vertices, mesh.vertices, atol=1e-9)

    def test_euler_matrix_roundtrip_gimbal_lock(self):
        for ay in (math.pi / 2, -math.pi / 2):
            angles = np.array([0.3, ay, 0.0])
            rot = euler_to_matrix(angles)
            again = euler_to_matrix(matrix_to_euler(rot))
            assert np.allclose(rot, again, atol=1e-9)


class TestAabb:
    def test_unit_cube(self):
        box = aabb(cube_mesh())
        assert np.allclose(box.min, (0, 0, 0))
        assert np.allclose(box.max, (1, 1, 1))

    def test_single_vertex(self):
        mesh = TriangleMesh([[2, 3, 4], [2, 3, 4], [2, 3, 4]], [[0, 1, 2]], None)
        box = aabb(mesh)
        assert np.allclose(box.min, (2, 3, 4))
        assert np.allclose(box.max, (2, 3, 4))

    def test_translated_cube(self):
        out = transform(cube_mesh(), Pose((0, 0, 1), (0, 0, 0)))
        box = aabb(out)
        assert np.allclose(box.min, (0, 0, 1))
        assert np.allclose(box.max, (1, 1, 2))

    def test_translation_shifts_aabb_exactly(self):
        mesh = cube_mesh()
        t = np.array([0.25, -1.5, 3.0])
        before = aabb(mesh)
        after = aabb(transform(mesh, Pose(t, (0, 0, 0))))
        assert np.array_equal(after.min, before.min + t)
        assert np.array_equal(after.max, before.max + t)

    def test_invalid_ordering_rejected(self):
        with pytest.raises(ValueError):
            Aabb((1, 0, 0), (0, 1, 1))

    def test_overlap_volume(self):
        a = Aabb((0, 0, 0), (1, 1, 1))
        assert a.overlap_volume(Aabb((2, 0, 0), (3, 1, 1))) == 0.0
        assert a.overlap_volume(Aabb((1, 0, 0), (2, 1, 1))) == 0.0  # shared face
        assert a.overlap_volume(Aabb((0.5, 0, 0), (1.5, 1, 1))) == pytest.approx(0.5)


def test_concatenate_tracks_parts():
    a, b = cube_mesh(), cube_mesh(center=(3, 0, 0))
    merged, part = concatenate([a, b])
    assert merged.triangle_count == 24
    assert list(np.unique(part)) == [0, 1]
    assert np.all(part[:12] == 0) and np.all(part[12:] == 1)
