"""Randomized scene construction.

Objects get uniformly sampled poses inside configured ranges, are dropped
analytically onto the support plane (lowest transformed vertex lands on
plane_z), and are re-sampled while their bounding boxes overlap previously
placed objects. Layouts that stay in collision after the attempt budget are
kept with a `collided` flag so postprocessing can discard them.

Everything is a pure function of (spec, seed, scene_index): the per-scene
RNG stream is derived by hashing the pair through numpy's SeedSequence, so
scenes can be built in any order or in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Aabb, Pose, TriangleMesh, aabb, transform
from .shading import Material

# Face-touching contacts (settled objects abut the plane and each other)
# must not count as collisions.
EPS_VOLUME = 1e-9


@dataclass(frozen=True)
class RandomizationRange:
    """Per-axis sampling intervals: x/y position, drop height, Euler angles."""

    x: tuple[float, float]
    y: tuple[float, float]
    drop_z: tuple[float, float]
    rx: tuple[float, float] = (0.0, 0.0)
    ry: tuple[float, float] = (0.0, 0.0)
    rz: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for name in ("x", "y", "drop_z", "rx", "ry", "rz"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"range {name}: lower bound {lo} > upper bound {hi}")


@dataclass
class SceneObject:
    """One placed instance; the background plane is the only passive object.

    Composite categories merge several part meshes into one rigid mesh;
    `tri_material` maps each triangle to an entry of `materials`.
    """

    id: int
    class_id: int
    mesh: TriangleMesh
    materials: tuple[Material, ...]
    tri_material: np.ndarray
    pose: Pose
    active: bool = True
    collided: bool = False

    def world_mesh(self) -> TriangleMesh:
        return transform(self.mesh, self.pose)

    def world_aabb(self) -> Aabb:
        return aabb(self.world_mesh())


@dataclass
class Scene:
    objects: list[SceneObject]
    plane_z: float
    rng_seed: int
    scene_index: int

    def active_objects(self) -> list[SceneObject]:
        return [o for o in self.objects if o.active]

    def object_by_id(self, object_id: int) -> SceneObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(f"no object with id {object_id}")


@dataclass(frozen=True)
class CategorySpec:
    """Template for one detection class: merged mesh, materials, sampling range."""

    name: str
    mesh: TriangleMesh
    materials: tuple[Material, ...]
    tri_material: np.ndarray
    range: RandomizationRange


@dataclass(frozen=True)
class SceneSpec:
    """Everything build_scene needs: the plane plus one template per category."""

    plane_mesh: TriangleMesh
    plane_material: Material
    plane_z: float
    categories: tuple[CategorySpec, ...]
    max_attempts: int = 20


def scene_rng(seed: int, scene_index: int) -> np.random.Generator:
    """Independent per-scene generator; the child seed is SeedSequence's hash of (seed, scene_index)."""
    return np.random.default_rng(np.random.SeedSequence([seed, scene_index]))


def sample_pose(rand_range: RandomizationRange, rng: np.random.Generator) -> Pose:
    """Uniform pose inside the range; always consumes exactly 6 draws, in x y z rx ry rz order."""
    draws = [
        rng.uniform(*rand_range.x),
        rng.uniform(*rand_range.y),
        rng.uniform(*rand_range.drop_z),
        rng.uniform(*rand_range.rx),
        rng.uniform(*rand_range.ry),
        rng.uniform(*rand_range.rz),
    ]
    return Pose(draws[:3], draws[3:])


def _settled_pose(mesh: TriangleMesh, pose: Pose, plane_z: float) -> Pose:
    rotated_z = (mesh.vertices @ pose.matrix().T)[:, 2]
    tz = plane_z - rotated_z.min()
    return Pose([pose.translation[0], pose.translation[1], tz], pose.rotation)


def settle(obj: SceneObject, plane_z: float) -> Pose:
    """Translate along z so the lowest transformed vertex rests exactly on plane_z."""
    if not obj.active:
        raise ValueError("only active objects settle; the plane is passive")
    return _settled_pose(obj.mesh, obj.pose, plane_z)


def detect_collisions(objects, eps_vol: float = EPS_VOLUME) -> set[int]:
    """Ids of active objects whose AABBs overlap another's by more than eps_vol.

    Symmetric by construction: a collision reports both participants.
    """
    active = [o for o in objects if o.active]
    boxes = [o.world_aabb() for o in active]
    hit: set[int] = set()
    for i in range(len(active)):
        for j in range(i + 1, len(active)):
            if boxes[i].overlap_volume(boxes[j]) > eps_vol:
                hit.add(active[i].id)
                hit.add(active[j].id)
    return hit


def build_scene(spec: SceneSpec, seed: int, scene_index: int) -> Scene:
    """Deterministically build one scene: sample, settle, reject-resample, flag.

    Each category is placed in order with up to spec.max_attempts samples
    (the first sample counts as an attempt); a sample is accepted when its
    settled AABB clears every previously placed object. Whatever layout
    remains after the budget is kept, and collided flags are set from a
    final detect_collisions pass over the finished scene.
    """
    rng = scene_rng(seed, scene_index)
    plane = SceneObject(
        id=0,
        class_id=-1,
        mesh=spec.plane_mesh,
        materials=(spec.plane_material,),
        tri_material=np.zeros(spec.plane_mesh.triangle_count, dtype=np.int32),
        pose=Pose.identity(),
        active=False,
    )
    placed: list[SceneObject] = []
    boxes: list[Aabb] = []
    for index, cat in enumerate(spec.categories):
        pose = None
        box = None
        for _attempt in range(max(1, spec.max_attempts)):
            pose = _settled_pose(cat.mesh, sample_pose(cat.range, rng), spec.plane_z)
            box = aabb(transform(cat.mesh, pose))
            if all(box.overlap_volume(b) <= EPS_VOLUME for b in boxes):
                break
        placed.append(
            SceneObject(
                id=index + 1,
                class_id=index,
                mesh=cat.mesh,
                materials=cat.materials,
                tri_material=np.asarray(cat.tri_material, dtype=np.int32),
                pose=pose,
                active=True,
            )
        )
        boxes.append(box)

    objects = [plane] + placed
    for oid in detect_collisions(objects):
        next(o for o in objects if o.id == oid).collided = True
    return Scene(objects=objects, plane_z=spec.plane_z, rng_seed=seed, scene_index=scene_index)


def make_plane_mesh(size_x: float, size_y: float, z: float) -> TriangleMesh:
    """Two-triangle support plane centered on the z axis."""
    hx, hy = size_x / 2.0, size_y / 2.0
    verts = np.array(
        [[-hx, -hy, z], [hx, -hy, z], [hx, hy, z], [-hx, hy, z]], dtype=np.float64
    )
    tris = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)
    return TriangleMesh(verts, tris, None)
