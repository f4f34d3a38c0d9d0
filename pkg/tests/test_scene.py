import math

import numpy as np
import pytest

from synthpipe.mesh import Pose, aabb, transform
from synthpipe.scene import (
    CategorySpec,
    RandomizationRange,
    SceneObject,
    SceneSpec,
    build_scene,
    detect_collisions,
    make_plane_mesh,
    sample_pose,
    scene_rng,
    settle,
)
from synthpipe.shading import Material

from test_mesh import cube_mesh

GRAY = Material(base_color=(0.5, 0.5, 0.5))


def fixed_range(x=0.0, y=0.0, z=1.0, rx=0.0, ry=0.0, rz=0.0):
    return RandomizationRange(
        x=(x, x), y=(y, y), drop_z=(z, z), rx=(rx, rx), ry=(ry, ry), rz=(rz, rz)
    )


def make_object(obj_id, mesh=None, pose=None, active=True):
    mesh = mesh if mesh is not None else cube_mesh(center=(0, 0, 0))
    return SceneObject(
        id=obj_id,
        class_id=max(obj_id - 1, -1),
        mesh=mesh,
        materials=(GRAY,),
        tri_material=np.zeros(mesh.triangle_count, dtype=np.int32),
        pose=pose or Pose.identity(),
        active=active,
    )


def spec_with(categories, max_attempts=20, plane_z=0.0):
    return SceneSpec(
        plane_mesh=make_plane_mesh(4.0, 4.0, plane_z),
        plane_material=GRAY,
        plane_z=plane_z,
        categories=tuple(categories),
        max_attempts=max_attempts,
    )


class TestSamplePose:
    def test_degenerate_range_is_exact(self):
        rng = scene_rng(1, 0)
        pose = sample_pose(fixed_range(x=0.3, y=-0.2, z=1.5, rx=0.1, ry=0.2, rz=0.3), rng)
        assert np.array_equal(pose.translation, [0.3, -0.2, 1.5])
        assert np.array_equal(pose.rotation, [0.1, 0.2, 0.3])

    def test_deterministic_for_seed(self):
        r = RandomizationRange(x=(-1, 1), y=(-1, 1), drop_z=(0, 2), rx=(0, 6), ry=(0, 6), rz=(0, 6))
        a = sample_pose(r, scene_rng(42, 3))
        b = sample_pose(r, scene_rng(42, 3))
        assert np.array_equal(a.translation, b.translation)
        assert np.array_equal(a.rotation, b.rotation)

    def test_uniform_mean(self):
        r = RandomizationRange(x=(0, 1), y=(0, 0), drop_z=(0, 0))
        rng = scene_rng(7, 0)
        xs = [sample_pose(r, rng).translation[0] for _ in range(10_000)]
        assert abs(np.mean(xs) - 0.5) < 0.02

    def test_consumes_six_draws(self):
        r = fixed_range()
        rng_a, rng_b = scene_rng(5, 1), scene_rng(5, 1)
        sample_pose(r, rng_a)
        rng_b.uniform(size=6)
        assert rng_a.uniform() == rng_b.uniform()

    def test_bad_interval_rejected(self):
        with pytest.raises(ValueError, match="drop_z"):
            RandomizationRange(x=(0, 1), y=(0, 1), drop_z=(2, 1))


class TestSettle:
    def test_cube_drops_to_plane(self):
        obj = make_object(1, pose=Pose((0, 0, 1.0), (0, 0, 0)))
        pose = settle(obj, plane_z=0.0)
        assert pose.translation[2] == pytest.approx(0.5, abs=1e-12)

    def test_already_resting_unchanged(self):
        obj = make_object(1, pose=Pose((0, 0, 0.5), (0, 0, 0)))
        pose = settle(obj, plane_z=0.0)
        assert pose.translation[2] == pytest.approx(0.5, abs=1e-12)
        assert np.array_equal(pose.rotation, obj.pose.rotation)

    def test_rotated_cube_matches_brute_force(self):
        pose = Pose((0.2, -0.1, 2.0), (math.pi / 4, 0, 0))
        obj = make_object(1, pose=pose)
        settled = settle(obj, plane_z=0.0)
        # independent check: scan every transformed vertex
        world = transform(obj.mesh, settled)
        assert world.vertices[:, 2].min() == pytest.approx(0.0, abs=1e-9)
        expected_half_extent = math.sqrt(2) / 2
        assert settled.translation[2] == pytest.approx(expected_half_extent, abs=1e-9)

    def test_xy_and_rotation_preserved(self):
        pose = Pose((1.5, -2.0, 3.0), (0.3, 0.2, 0.1))
        settled = settle(make_object(1, pose=pose), plane_z=0.25)
        assert settled.translation[0] == 1.5
        assert settled.translation[1] == -2.0
        assert np.array_equal(settled.rotation, pose.rotation)

    def test_passive_object_rejected(self):
        with pytest.raises(ValueError, match="active"):
            settle(make_object(0, active=False), plane_z=0.0)


class TestDetectCollisions:
    def test_far_apart(self):
        objs = [
            make_object(1, pose=Pose((0, 0, 0), (0, 0, 0))),
            make_object(2, pose=Pose((5, 0, 0), (0, 0, 0))),
        ]
        assert detect_collisions(objs) == set()

    def test_overlapping(self):
        objs = [
            make_object(1, pose=Pose((0, 0, 0), (0, 0, 0))),
            make_object(2, pose=Pose((0.5, 0, 0), (0, 0, 0))),
        ]
        assert detect_collisions(objs) == {1, 2}

    def test_shared_face_is_not_a_collision(self):
        objs = [
            make_object(1, pose=Pose((0, 0, 0), (0, 0, 0))),
            make_object(2, pose=Pose((1.0, 0, 0), (0, 0, 0))),
        ]
        assert detect_collisions(objs) == set()

    def test_passive_objects_ignored(self):
        objs = [
            make_object(1, pose=Pose((0, 0, 0), (0, 0, 0))),
            make_object(0, pose=Pose((0, 0, 0), (0, 0, 0)), active=False),
        ]
        assert detect_collisions(objs) == set()


def one_cube_category(name="cube", rand=None):
    mesh = cube_mesh(center=(0, 0, 0), size=0.4)
    return CategorySpec(
        name=name,
        mesh=mesh,
        materials=(GRAY,),
        tri_material=np.zeros(mesh.triangle_count, dtype=np.int32),
        range=rand or RandomizationRange(
            x=(-1, 1), y=(-1, 1), drop_z=(0.1, 0.8), rx=(0, 6.28), ry=(0, 6.28), rz=(0, 6.28)
        ),
    )


class TestBuildScene:
    def test_single_object_settled_not_collided(self):
        scene = build_scene(spec_with([one_cube_category()]), seed=11, scene_index=0)
        (obj,) = scene.active_objects()
        assert not obj.collided
        world = transform(obj.mesh, obj.pose)
        assert abs(world.vertices[:, 2].min() - scene.plane_z) <= 1e-6

    def test_bit_identical_reruns(self):
        spec = spec_with([one_cube_category("a"), one_cube_category("b")])
        s1 = build_scene(spec, seed=9, scene_index=4)
        s2 = build_scene(spec, seed=9, scene_index=4)
        for o1, o2 in zip(s1.objects, s2.objects):
            assert np.array_equal(o1.pose.translation, o2.pose.translation)
            assert np.array_equal(o1.pose.rotation, o2.pose.rotation)
            assert o1.collided == o2.collided

    def test_streams_independent_of_build_order(self):
        spec = spec_with([one_cube_category()])
        later_first = build_scene(spec, seed=3, scene_index=8)
        build_scene(spec, seed=3, scene_index=2)
        again = build_scene(spec, seed=3, scene_index=8)
        assert np.array_equal(later_first.objects[1].pose.translation,
                              again.objects[1].pose.translation)

    def test_forced_overlap_flags_both(self):
        pinned = fixed_range(x=0.0, y=0.0, z=0.5)
        spec = spec_with(
            [one_cube_category("a", pinned), one_cube_category("b", pinned)], max_attempts=1
        )
        scene = build_scene(spec, seed=1, scene_index=0)
        assert all(o.collided for o in scene.active_objects())

    def test_resampling_avoids_collisions_when_possible(self):
        spec = spec_with([one_cube_category("a"), one_cube_category("b")], max_attempts=50)
        hits = 0
        for idx in range(20):
            scene = build_scene(spec, seed=21, scene_index=idx)
            hits += sum(o.collided for o in scene.active_objects())
        assert hits == 0  # plenty of room and a generous budget

    def test_collided_flags_match_detect_collisions(self):
        pinned = fixed_range(x=0.0, y=0.0, z=0.5)
        spec = spec_with(
            [one_cube_category("a", pinned), one_cube_category("b", pinned),
             one_cube_category("c")], max_attempts=1
        )
        scene = build_scene(spec, seed=2, scene_index=0)
        flagged = {o.id for o in scene.active_objects() if o.collided}
        assert flagged == detect_collisions(scene.objects)

    def test_exactly_one_passive_object(self):
        scene = build_scene(spec_with([one_cube_category()]), seed=0, scene_index=0)
        assert sum(not o.active for o in scene.objects) == 1
        assert scene.objects[0].id == 0


def test_settling_invariant_over_1000_builds():
    # Resting invariant: every non-collided active object touches the plane.
    spec = spec_with([one_cube_category("a"), one_cube_category("b")])
    checked = 0
    for idx in range(500):
        scene = build_scene(spec, seed=1234, scene_index=idx)
        for obj in scene.active_objects():
            if obj.collided:
                continue
            world = transform(obj.mesh, obj.pose)
            assert abs(world.vertices[:, 2].min() - scene.plane_z) <= 1e-6
            checked += 1
    assert checked >= 900
