"""Z-buffered triangle rasterization of a scene into RGB / depth / instance-ID buffers.

Two-pass design: a visibility pass (the hot kernel, numba or numpy, see
backend.py) fills a depth buffer and a triangle-index buffer; a deferred
shading pass then computes colors once per covered pixel with a single
shared numpy code path. Annotations derive from coverage, so there is no
antialiasing and no shadows; back faces are shaded toward the camera
because CAD meshes frequently have inconsistent winding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import get_visibility_kernel
from .camera import Camera
from .scene import Scene
from .shading import CHECKER_DARK, CheckerTexture, Material, WaveTexture, lighting

NEAR_PLANE = 1e-4
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RenderOutput:
    """rgb: (H,W,3) uint8; depth: (H,W) forward distance, +inf where empty;
    instance_ids: (H,W) int32, 0 for background and the passive plane."""

    rgb: np.ndarray
    depth: np.ndarray
    instance_ids: np.ndarray


@dataclass
class _Prep:
    """Screen-space triangle soup plus per-triangle lookup tables."""

    xs: np.ndarray          # (T,3) pixel x
    ys: np.ndarray          # (T,3) pixel y
    invz: np.ndarray        # (T,3) 1 / camera forward depth
    local: np.ndarray       # (T,3,3) object-local vertex positions
    normal: np.ndarray      # (T,3) world-space unit face normal
    slot: np.ndarray        # (T,) index into material tables
    inst: np.ndarray        # (T,) instance id written to the id buffer
    base: np.ndarray        # (M,3) material base colors
    tex_kind: np.ndarray    # (M,) 0 none, 1 wave, 2 checker
    tex_axis: np.ndarray    # (M,3)
    tex_scale: np.ndarray   # (M,) wave period or checker cell
    tex_contrast: np.ndarray
    spec: np.ndarray        # (M,) specular strength
    metal: np.ndarray       # (M,) bool

    @property
    def count(self) -> int:
        return len(self.slot)


def _material_tables(materials: list[Material]):
    m = len(materials)
    base = np.zeros((m, 3))
    kind = np.zeros(m, dtype=np.int8)
    axis = np.zeros((m, 3))
    scale = np.ones(m)
    contrast = np.zeros(m)
    spec = np.zeros(m)
    metal = np.zeros(m, dtype=bool)
    for i, mat in enumerate(materials):
        base[i] = mat.base_color
        spec[i] = mat.specular_strength
        metal[i] = mat.metallic
        if isinstance(mat.texture, WaveTexture):
            kind[i] = 1
            axis[i] = mat.texture.axis
            scale[i] = mat.texture.period
            contrast[i] = mat.texture.contrast
        elif isinstance(mat.texture, CheckerTexture):
            kind[i] = 2
            scale[i] = mat.texture.cell
    return base, kind, axis, scale, contrast, spec, metal


def _clip_near(cam: np.ndarray, local: np.ndarray):
    """Clip one camera-space triangle against z = NEAR_PLANE.

    Returns (cam_tris, local_tris) with 0..2 output triangles; local
    positions are lerped with the same weights (clipping is affine).
    """
    out_c: list[np.ndarray] = []
    out_l: list[np.ndarray] = []
    for i in range(3):
        a_c, b_c = cam[i], cam[(i + 1) % 3]
        a_l, b_l = local[i], local[(i + 1) % 3]
        a_in = a_c[2] > NEAR_PLANE
        b_in = b_c[2] > NEAR_PLANE
        if a_in:
            out_c.append(a_c)
            out_l.append(a_l)
        if a_in != b_in:
            t = (NEAR_PLANE - a_c[2]) / (b_c[2] - a_c[2])
            out_c.append(a_c + t * (b_c - a_c))
            out_l.append(a_l + t * (b_l - a_l))
    if len(out_c) < 3:
        return np.empty((0, 3, 3)), np.empty((0, 3, 3))
    tris_c = [np.stack([out_c[0], out_c[k], out_c[k + 1]]) for k in range(1, len(out_c) - 1)]
    tris_l = [np.stack([out_l[0], out_l[k], out_l[k + 1]]) for k in range(1, len(out_l) - 1)]
    return np.stack(tris_c), np.stack(tris_l)


def _flatten(scene: Scene, camera: Camera, only_id: int | None = None) -> _Prep:
    """Transform, near-clip, and project every rendered triangle.

    only_id restricts output to a single active object (and drops the
    plane), which is how solo coverage is computed.
    """
    rot_cam = camera.matrix()
    f = camera.focal_px
    half_w = camera.width / 2.0
    half_h = camera.height / 2.0

    materials: list[Material] = []
    cam_parts, local_parts, normal_parts, slot_parts, inst_parts = [], [], [], [], []
    for obj in scene.objects:
        if only_id is not None and (obj.id != only_id or not obj.active):
            continue
        tris = obj.mesh.triangles
        if len(tris) == 0:
            continue
        world = obj.pose.apply(obj.mesh.vertices)
        cam = (world - camera.position) @ rot_cam
        cam_tri = cam[tris]
        local_tri = obj.mesh.vertices[tris]
        edge1 = world[tris[:, 1]] - world[tris[:, 0]]
        edge2 = world[tris[:, 2]] - world[tris[:, 0]]
        normal = np.cross(edge1, edge2)
        norm = np.linalg.norm(normal, axis=1)
        ok = norm > 1e-12
        normal[ok] /= norm[ok, None]

        slot_base = len(materials)
        materials.extend(obj.materials)
        slot = slot_base + np.asarray(obj.tri_material, dtype=np.int32)
        inst_id = obj.id if obj.active else 0

        z = cam_tri[:, :, 2]
        front = (z > NEAR_PLANE).sum(axis=1)
        full = front == 3
        cam_parts.append(cam_tri[full])
        local_parts.append(local_tri[full])
        normal_parts.append(normal[full])
        slot_parts.append(slot[full])
        inst_parts.append(np.full(int(full.sum()), inst_id, dtype=np.int32))
        for t in np.nonzero((front == 1) | (front == 2))[0]:
            cam_c, local_c = _clip_near(cam_tri[t], local_tri[t])
            if len(cam_c) == 0:
                continue
            cam_parts.append(cam_c)
            local_parts.append(local_c)
            normal_parts.append(np.repeat(normal[t][None, :], len(cam_c), axis=0))
            slot_parts.append(np.full(len(cam_c), slot[t], dtype=np.int32))
            inst_parts.append(np.full(len(cam_c), inst_id, dtype=np.int32))

    if cam_parts:
        cam_all = np.concatenate(cam_parts)
        local_all = np.concatenate(local_parts)
        normal_all = np.concatenate(normal_parts)
        slot_all = np.concatenate(slot_parts)
        inst_all = np.concatenate(inst_parts)
    else:
        cam_all = np.empty((0, 3, 3))
        local_all = np.empty((0, 3, 3))
        normal_all = np.empty((0, 3))
        slot_all = np.empty(0, dtype=np.int32)
        inst_all = np.empty(0, dtype=np.int32)

    z = cam_all[:, :, 2]
    xs = half_w + f * cam_all[:, :, 0] / np.where(z > 0, z, 1.0)
    ys = half_h + f * cam_all[:, :, 1] / np.where(z > 0, z, 1.0)
    invz = 1.0 / np.where(z > 0, z, np.inf)

    base, kind, axis, scale, contrast, spec, metal = _material_tables(materials)
    return _Prep(
        xs=np.ascontiguousarray(xs),
        ys=np.ascontiguousarray(ys),
        invz=np.ascontiguousarray(invz),
        local=local_all,
        normal=normal_all,
        slot=slot_all,
        inst=inst_all,
        base=base,
        tex_kind=kind,
        tex_axis=axis,
        tex_scale=scale,
        tex_contrast=contrast,
        spec=spec,
        metal=metal,
    )


def _run_visibility(prep: _Prep, camera: Camera, backend: str | None):
    depth = np.full((camera.height, camera.width), np.inf, dtype=np.float64)
    tri = np.full((camera.height, camera.width), -1, dtype=np.int32)
    if prep.count:
        _, kernel = get_visibility_kernel(backend)
        kernel(prep.xs, prep.ys, prep.invz, depth, tri)
    return depth, tri


def _shade_buffers(prep, camera, lights, ambient, background, depth, tri):
    rgb = np.empty((camera.height, camera.width, 3), dtype=np.uint8)
    rgb[:, :] = _to_bytes(np.asarray(background, dtype=np.float64))
    mask = tri >= 0
    if not mask.any():
        return rgb
    t = tri[mask]
    rows, cols = np.nonzero(mask)
    px = cols + 0.5
    py = rows + 0.5

    x0, x1, x2 = prep.xs[t, 0], prep.xs[t, 1], prep.xs[t, 2]
    y0, y1, y2 = prep.ys[t, 0], prep.ys[t, 1], prep.ys[t, 2]
    inv_area = 1.0 / ((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0))
    w0 = ((x1 - px) * (y2 - py) - (y1 - py) * (x2 - px)) * inv_area
    w1 = ((x2 - px) * (y0 - py) - (y2 - py) * (x0 - px)) * inv_area
    w2 = 1.0 - w0 - w1

    # Perspective-correct interpolation: attributes are linear in a/z.
    wa = w0 * prep.invz[t, 0]
    wb = w1 * prep.invz[t, 1]
    wc = w2 * prep.invz[t, 2]
    iz = wa + wb + wc
    local = (
        wa[:, None] * prep.local[t, 0]
        + wb[:, None] * prep.local[t, 1]
        + wc[:, None] * prep.local[t, 2]
    ) / iz[:, None]

    z = depth[mask]
    ray_cam = np.stack(
        [(px - camera.width / 2.0) / camera.focal_px,
         (py - camera.height / 2.0) / camera.focal_px,
         np.ones_like(px)],
        axis=1,
    )
    world = camera.position + z[:, None] * (ray_cam @ camera.matrix().T)
    view = camera.position - world
    view /= np.linalg.norm(view, axis=1, keepdims=True)
    normal = prep.normal[t]
    facing = np.sum(normal * view, axis=1) < 0
    normal = np.where(facing[:, None], -normal, normal)

    s = prep.slot[t]
    factor = np.ones(len(s))
    wave = prep.tex_kind[s] == 1
    if wave.any():
        sw = s[wave]
        phase = np.einsum("ij,ij->i", local[wave], prep.tex_axis[sw]) / prep.tex_scale[sw]
        factor[wave] = 1.0 - prep.tex_contrast[sw] * (0.5 + 0.5 * np.sin(_TWO_PI * phase))
    checker = prep.tex_kind[s] == 2
    if checker.any():
        sc = s[checker]
        parity = (
            np.floor(local[checker] / prep.tex_scale[sc][:, None]).sum(axis=1).astype(np.int64) & 1
        )
        factor[checker] = np.where(parity == 0, 1.0, CHECKER_DARK)
    albedo = prep.base[s] * factor[:, None]

    color = lighting(
        albedo, normal, view, prep.spec[s], prep.metal[s], lights, ambient, position=world
    )
    rgb[mask] = _to_bytes(color)
    return rgb


def _to_bytes(color: np.ndarray) -> np.ndarray:
    return (np.clip(color, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def rasterize(
    scene: Scene,
    camera: Camera,
    lights=(),
    ambient: float = 0.0,
    background=(0.0, 0.0, 0.0),
    backend: str | None = None,
) -> RenderOutput:
    """Render the scene; deterministic for identical inputs.

    The instance-ID buffer records, per pixel, the id of the nearest active
    object; the plane and empty pixels write 0.
    """
    prep = _flatten(scene, camera)
    depth, tri = _run_visibility(prep, camera, backend)
    ids = np.zeros(depth.shape, dtype=np.int32)
    covered = tri >= 0
    ids[covered] = prep.inst[tri[covered]]
    rgb = _shade_buffers(prep, camera, lights, ambient, background, depth, tri)
    return RenderOutput(rgb=rgb, depth=depth, instance_ids=ids)


def solo_pixel_count(
    scene: Scene, camera: Camera, object_id: int, backend: str | None = None
) -> int:
    """Pixels the object would cover rendered alone (plane excluded).

    The denominator of the visibility fraction: comparing it with the
    object's pixel count in the full render measures occlusion.
    """
    obj = scene.object_by_id(object_id)
    if not obj.active:
        raise ValueError(f"object {object_id} is passive; solo coverage applies to active objects")
    prep = _flatten(scene, camera, only_id=object_id)
    _, tri = _run_visibility(prep, camera, backend)
    return int(np.count_nonzero(tri >= 0))
