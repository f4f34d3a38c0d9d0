"""Procedural demo assets: planetary-gear-style parts plus a ready config.

`python -m synthpipe.demo OUTDIR` writes binary STL meshes (authored in
millimeters, imported with scale 0.001) and a config.json wired to them,
so the full pipeline can run without any external CAD files. The chosen
camera, light, and material values are illustrative defaults, not
measurements.
"""

from __future__ import annotations

import argparse
import json
import math
from pathlib import Path

import numpy as np

from .mesh import TriangleMesh, mesh_to_stl


def _extrude_polygon(points_2d: np.ndarray, thickness: float, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Extrude a star-shaped polygon (triangulable by fanning from its centroid)."""
    n = len(points_2d)
    cx, cy, cz = center
    z0, z1 = cz - thickness / 2.0, cz + thickness / 2.0
    bottom = np.column_stack([points_2d[:, 0] + cx, points_2d[:, 1] + cy, np.full(n, z0)])
    top = np.column_stack([points_2d[:, 0] + cx, points_2d[:, 1] + cy, np.full(n, z1)])
    verts = [bottom, top, [[cx, cy, z0]], [[cx, cy, z1]]]
    vb, vt, cb, ct = 0, n, 2 * n, 2 * n + 1
    tris = []
    for i in range(n):
        j = (i + 1) % n
        tris.append([vb + i, vb + j, vt + i])      # side
        tris.append([vb + j, vt + j, vt + i])
        tris.append([cb, vb + j, vb + i])          # caps
        tris.append([ct, vt + i, vt + j])
    return TriangleMesh(np.vstack(verts), np.array(tris, dtype=np.int32), None)


def make_gear(teeth: int, root_radius: float, tip_radius: float, thickness: float,
              center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Spur gear approximation: square teeth alternating between two radii."""
    angles = []
    radii = []
    step = 2.0 * math.pi / teeth
    for t in range(teeth):
        base = t * step
        for frac, r in ((0.0, root_radius), (0.25, root_radius), (0.25, tip_radius),
                        (0.75, tip_radius), (0.75, root_radius)):
            angles.append(base + frac * step)
            radii.append(r)
    angles = np.array(angles)
    radii = np.array(radii)
    pts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    return _extrude_polygon(pts, thickness, center)


def make_cylinder(radius: float, thickness: float, segments: int = 40,
                  center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    angles = np.linspace(0.0, 2.0 * math.pi, segments, endpoint=False)
    pts = np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])
    return _extrude_polygon(pts, thickness, center)


def make_ring(outer_radius: float, inner_radius: float, thickness: float,
              segments: int = 48) -> TriangleMesh:
    """Annulus: quad strips for both walls and both caps."""
    angles = np.linspace(0.0, 2.0 * math.pi, segments, endpoint=False)
    cos_a, sin_a = np.cos(angles), np.sin(angles)
    z0, z1 = -thickness / 2.0, thickness / 2.0
    rings = []
    for r, z in ((outer_radius, z0), (outer_radius, z1), (inner_radius, z0), (inner_radius, z1)):
        rings.append(np.column_stack([r * cos_a, r * sin_a, np.full(segments, z)]))
    verts = np.vstack(rings)
    ob, ot, ib, it_ = 0, segments, 2 * segments, 3 * segments
    tris = []
    for i in range(segments):
        j = (i + 1) % segments
        tris += [[ob + i, ob + j, ot + i], [ob + j, ot + j, ot + i]]       # outer wall
        tris += [[ib + i, it_ + i, ib + j], [ib + j, it_ + i, it_ + j]]    # inner wall
        tris += [[ob + i, ib + i, ob + j], [ob + j, ib + i, ib + j]]       # bottom cap
        tris += [[ot + i, ot + j, it_ + i], [ot + j, it_ + j, it_ + i]]    # top cap
    return TriangleMesh(verts, np.array(tris, dtype=np.int32), None)


def _plastic(color, period_mm=1.2):
    return {
        "base_color": list(color),
        "texture": {"kind": "wave", "axis": [0.0, 0.0, 1.0], "period": period_mm / 1000.0,
                    "contrast": 0.35},
        "specular_strength": 0.25,
        "metallic": False,
    }


_STEEL = {
    "base_color": [0.75, 0.77, 0.8],
    "texture": None,
    "specular_strength": 0.9,
    "metallic": True,
}


def demo_config(image_count: int = 20, seed: int = 7) -> dict:
    tilt = 0.35
    spin = 2.0 * math.pi
    return {
        "seed": seed,
        "image_count": image_count,
        "camera": {
            "position": [0.0, 0.0, 1.1],
            "rotation": [math.pi, 0.0, 0.0],
            "fov": math.pi / 3.0,
            "resolution": [640, 640],
        },
        "ambient": 0.3,
        "background": [0.08, 0.08, 0.1],
        "lights": [
            {"kind": "directional", "direction": [0.4, -0.25, -1.0], "intensity": 0.9,
             "color": [1.0, 0.98, 0.92]}
        ],
        "plane": {
            "size": [1.6, 1.6],
            "z": 0.0,
            "material": {
                "base_color": [0.62, 0.6, 0.58],
                "texture": {"kind": "checker", "cell": 0.2},
                "specular_strength": 0.05,
                "metallic": False,
            },
        },
        "assets": {
            "sun_gear": {"path": "assets/sun_gear.stl", "scale": 0.001,
                         "material": _plastic([0.9, 0.75, 0.15])},
            "spur_gear": {"path": "assets/spur_gear.stl", "scale": 0.001,
                          "material": _plastic([0.8, 0.2, 0.15])},
            "ring_gear": {"path": "assets/ring_gear.stl", "scale": 0.001,
                          "material": _plastic([0.2, 0.4, 0.8])},
            "holder_plate": {"path": "assets/holder_plate.stl", "scale": 0.001,
                             "material": _plastic([0.25, 0.25, 0.28], period_mm=1.6)},
            "holder_bearings": {"path": "assets/holder_bearings.stl", "scale": 0.001,
                                "material": dict(_STEEL)},
        },
        "categories": [
            {"name": "SunGear", "assets": ["sun_gear"]},
            {"name": "SpurGear", "assets": ["spur_gear"]},
            {"name": "GearRing", "assets": ["ring_gear"]},
            {"name": "Holder", "assets": ["holder_plate", "holder_bearings"]},
        ],
        "randomization": {
            "x": [-0.22, 0.22],
            "y": [-0.22, 0.22],
            "drop_z": [0.02, 0.2],
            "rx": [-tilt, tilt],
            "ry": [-tilt, tilt],
            "rz": [0.0, spin],
        },
        "max_attempts": 20,
        "postprocess": {"min_visibility": 0.25, "min_pixels": 16},
        "output": {"image_format": "ppm", "dump_instance_ids": False},
    }


def build_demo(out_dir, image_count: int = 20, seed: int = 7) -> Path:
    """Write demo STL assets and config.json; returns the config path."""
    out = Path(out_dir)
    assets = out / "assets"
    assets.mkdir(parents=True, exist_ok=True)

    # Authored in millimeters; the config imports with scale 0.001.
    meshes = {
        "sun_gear": make_gear(10, 24.0, 30.0, 14.0),
        "spur_gear": make_gear(14, 33.0, 40.0, 14.0),
        "ring_gear": make_ring(62.0, 50.0, 16.0),
        "holder_plate": make_cylinder(70.0, 10.0),
        "holder_bearings": _bearings(),
    }
    for name, mesh in meshes.items():
        (assets / f"{name}.stl").write_bytes(mesh_to_stl(mesh))

    config_path = out / "config.json"
    config_path.write_text(json.dumps(demo_config(image_count, seed), indent=2) + "\n")
    return config_path


def _bearings() -> TriangleMesh:
    """Three bearing discs sitting on the holder plate, one merged mesh."""
    parts = []
    for k in range(3):
        angle = 2.0 * math.pi * k / 3.0
        parts.append(
            make_cylinder(12.0, 8.0, segments=28,
                          center=(42.0 * math.cos(angle), 42.0 * math.sin(angle), 9.0))
        )
    verts = np.vstack([p.vertices for p in parts])
    offsets = np.cumsum([0] + [len(p.vertices) for p in parts[:-1]])
    tris = np.vstack([p.triangles + off for p, off in zip(parts, offsets)])
    return TriangleMesh(verts, tris, None)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="write demo STL assets and a pipeline config")
    parser.add_argument("out_dir", help="directory for assets/ and config.json")
    parser.add_argument("--count", type=int, default=20, help="image_count in the config")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    path = build_demo(args.out_dir, args.count, args.seed)
    print(f"demo config written to {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
