"""Pipeline configuration: one JSON file drives every stage.

The dataset manifest records a hash of the canonical config serialization,
so generated datasets are self-describing. Angles are radians, lengths are
meters (after per-asset scaling); the full schema is documented in the
README and demonstrated by the demo config.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .annotate import DEFAULT_MIN_PIXELS, DEFAULT_MIN_VISIBILITY
from .camera import Camera
from .errors import ConfigError
from .mesh import TriangleMesh, concatenate, parse_stl
from .scene import CategorySpec, RandomizationRange, SceneSpec, make_plane_mesh
from .shading import CheckerTexture, Light, Material, WaveTexture


@dataclass(frozen=True)
class PostprocessConfig:
    min_visibility: float = DEFAULT_MIN_VISIBILITY
    min_pixels: int = DEFAULT_MIN_PIXELS


@dataclass(frozen=True)
class OutputConfig:
    image_format: str = "ppm"
    dump_instance_ids: bool = False


@dataclass(frozen=True)
class PipelineConfig:
    seed: int
    image_count: int
    camera: Camera
    lights: tuple[Light, ...]
    ambient: float
    background: tuple[float, float, float]
    scene: SceneSpec
    category_names: tuple[str, ...]
    postprocess: PostprocessConfig
    output: OutputConfig
    config_hash: str
    raw: dict


def config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


class _Reader:
    """Dict walker producing ConfigError messages with full field paths."""

    def __init__(self, data, path=""):
        if not isinstance(data, dict):
            raise ConfigError(f"{path or 'config'}: expected an object")
        self.data = data
        self.path = path

    def _fail(self, key, msg):
        where = f"{self.path}.{key}" if self.path else key
        raise ConfigError(f"{where}: {msg}")

    def has(self, key):
        return key in self.data

    def child(self, key, default=None):
        val = self.data.get(key, default)
        if val is None:
            self._fail(key, "required section missing")
        where = f"{self.path}.{key}" if self.path else key
        if not isinstance(val, dict):
            raise ConfigError(f"{where}: expected an object")
        return _Reader(val, where)

    def get(self, key, kind, default=..., lo=None, hi=None):
        if key not in self.data:
            if default is ...:
                self._fail(key, "required field missing")
            return default
        val = self.data[key]
        if kind is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if kind is int and isinstance(val, float) and val.is_integer():
            val = int(val)
        if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
            self._fail(key, f"expected {kind.__name__}, got {type(val).__name__}")
        if lo is not None and val < lo:
            self._fail(key, f"must be >= {lo}, got {val}")
        if hi is not None and val > hi:
            self._fail(key, f"must be <= {hi}, got {val}")
        return val

    def vector(self, key, n, default=..., lo=None, hi=None):
        if key not in self.data:
            if default is ...:
                self._fail(key, "required field missing")
            return default
        val = self.data[key]
        if not isinstance(val, (list, tuple)) or len(val) != n:
            self._fail(key, f"expected a list of {n} numbers")
        out = []
        for v in val:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                self._fail(key, "entries must be numbers")
            if lo is not None and v < lo or hi is not None and v > hi:
                self._fail(key, f"entries must be in [{lo}, {hi}]")
            out.append(float(v))
        return tuple(out)

    def interval(self, key, default=...):
        pair = self.vector(key, 2, default=default)
        if pair is not default and pair[0] > pair[1]:
            self._fail(key, f"interval lower bound {pair[0]} > upper bound {pair[1]}")
        return pair


def _parse_texture(reader: _Reader | None):
    if reader is None:
        return None
    kind = reader.get("kind", str)
    if kind == "wave":
        return WaveTexture(
            axis=reader.vector("axis", 3),
            period=reader.get("period", float, lo=1e-12),
            contrast=reader.get("contrast", float, default=0.5, lo=0.0, hi=1.0),
        )
    if kind == "checker":
        return CheckerTexture(cell=reader.get("cell", float, lo=1e-12))
    reader._fail("kind", f"unknown texture kind {kind!r} (wave or checker)")


def _parse_material(reader: _Reader) -> Material:
    texture = None
    if reader.has("texture") and reader.data["texture"] is not None:
        texture = _parse_texture(reader.child("texture"))
    try:
        return Material(
            base_color=reader.vector("base_color", 3, lo=0.0, hi=1.0),
            texture=texture,
            specular_strength=reader.get("specular_strength", float, default=0.0, lo=0.0, hi=1.0),
            metallic=reader.get("metallic", bool, default=False),
        )
    except ValueError as exc:
        raise ConfigError(f"{reader.path}: {exc}") from exc


def _parse_range(reader: _Reader) -> RandomizationRange:
    return RandomizationRange(
        x=reader.interval("x"),
        y=reader.interval("y"),
        drop_z=reader.interval("drop_z"),
        rx=reader.interval("rx", default=(0.0, 0.0)),
        ry=reader.interval("ry", default=(0.0, 0.0)),
        rz=reader.interval("rz", default=(0.0, 0.0)),
    )


def _parse_light(entry, path) -> Light:
    r = _Reader(entry, path)
    kind = r.get("kind", str)
    if kind == "directional":
        vec = r.vector("direction", 3)
    elif kind == "point":
        vec = r.vector("position", 3)
    else:
        r._fail("kind", f"unknown light kind {kind!r} (directional or point)")
    try:
        return Light(
            kind=kind,
            vector=vec,
            intensity=r.get("intensity", float, default=1.0, lo=0.0),
            color=r.vector("color", 3, default=(1.0, 1.0, 1.0), lo=0.0, hi=1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_config(path, seed_override=None, count_override=None) -> PipelineConfig:
    """Load, validate, and resolve a pipeline config, parsing all referenced meshes."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}")

    effective = dict(raw)
    if seed_override is not None:
        effective["seed"] = seed_override
    if count_override is not None:
        effective["image_count"] = count_override

    root = _Reader(effective)
    seed = root.get("seed", int, lo=0)
    image_count = root.get("image_count", int, lo=1)

    cam = root.child("camera")
    try:
        camera = Camera(
            position=cam.vector("position", 3),
            rotation=cam.vector("rotation", 3),
            fov=cam.get("fov", float, default=np.pi / 3),
            resolution=tuple(int(v) for v in cam.vector("resolution", 2, default=(640.0, 640.0))),
        )
    except ValueError as exc:
        raise ConfigError(f"camera: {exc}") from exc

    lights_raw = effective.get("lights", [])
    if not isinstance(lights_raw, list):
        raise ConfigError("lights: expected a list")
    lights = tuple(_parse_light(entry, f"lights[{i}]") for i, entry in enumerate(lights_raw))

    ambient = root.get("ambient", float, default=0.0, lo=0.0)
    background = root.vector("background", 3, default=(0.0, 0.0, 0.0), lo=0.0, hi=1.0)

    plane = root.child("plane")
    plane_size = plane.vector("size", 2, lo=1e-9)
    plane_z = plane.get("z", float, default=0.0)
    plane_material = _parse_material(plane.child("material"))

    assets_raw = effective.get("assets")
    if not isinstance(assets_raw, dict) or not assets_raw:
        raise ConfigError("assets: expected a non-empty object of named assets")
    assets: dict[str, tuple[TriangleMesh, Material]] = {}
    for name, entry in assets_raw.items():
        r = _Reader(entry, f"assets.{name}")
        mesh_path = path.parent / r.get("path", str)
        if not mesh_path.exists():
            r._fail("path", f"mesh file not found: {mesh_path}")
        scale = r.get("scale", float, default=1.0)
        if scale <= 0:
            r._fail("scale", f"must be positive, got {scale}")
        mesh = parse_stl(mesh_path.read_bytes(), scale=scale)
        assets[name] = (mesh, _parse_material(r.child("material")))

    default_range = None
    if "randomization" in effective:
        default_range = _parse_range(root.child("randomization"))

    categories_raw = effective.get("categories")
    if not isinstance(categories_raw, list) or not categories_raw:
        raise ConfigError("categories: expected a non-empty list")
    categories = []
    names = []
    for i, entry in enumerate(categories_raw):
        r = _Reader(entry, f"categories[{i}]")
        name = r.get("name", str)
        if name in names:
            r._fail("name", f"duplicate category name {name!r}")
        names.append(name)
        asset_names = entry.get("assets")
        if not isinstance(asset_names, list) or not asset_names:
            r._fail("assets", "expected a non-empty list of asset names")
        parts = []
        for an in asset_names:
            if an not in assets:
                r._fail("assets", f"unknown asset {an!r}")
            parts.append(assets[an])
        merged, part_index = concatenate([m for m, _ in parts])
        if r.has("range"):
            cat_range = _parse_range(r.child("range"))
        elif default_range is not None:
            cat_range = default_range
        else:
            r._fail("range", "no per-category range and no top-level randomization section")
        categories.append(
            CategorySpec(
                name=name,
                mesh=merged,
                materials=tuple(mat for _, mat in parts),
                tri_material=part_index,
                range=cat_range,
            )
        )

    scene = SceneSpec(
        plane_mesh=make_plane_mesh(plane_size[0], plane_size[1], plane_z),
        plane_material=plane_material,
        plane_z=plane_z,
        categories=tuple(categories),
        max_attempts=root.get("max_attempts", int, default=20, lo=1),
    )

    post = PostprocessConfig()
    if "postprocess" in effective:
        p = root.child("postprocess")
        post = PostprocessConfig(
            min_visibility=p.get("min_visibility", float, default=DEFAULT_MIN_VISIBILITY, lo=0.0, hi=1.0),
            min_pixels=p.get("min_pixels", int, default=DEFAULT_MIN_PIXELS, lo=1),
        )

    output = OutputConfig()
    if "output" in effective:
        o = root.child("output")
        fmt = o.get("image_format", str, default="ppm")
        if fmt not in ("ppm", "png"):
            o._fail("image_format", f"expected 'ppm' or 'png', got {fmt!r}")
        output = OutputConfig(
            image_format=fmt,
            dump_instance_ids=o.get("dump_instance_ids", bool, default=False),
        )

    return PipelineConfig(
        seed=seed,
        image_count=image_count,
        camera=camera,
        lights=lights,
        ambient=ambient,
        background=background,
        scene=scene,
        category_names=tuple(names),
        postprocess=post,
        output=output,
        config_hash=config_hash(effective),
        raw=effective,
    )
