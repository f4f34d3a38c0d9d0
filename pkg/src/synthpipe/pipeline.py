"""Dataset pipeline stages: generate, postprocess, convert, split.

A dataset directory is self-describing:

    images/<stem>.ppm        rendered frames (png when configured)
    ids/<stem>.pgm           16-bit instance-ID dumps (optional)
    raw_instances.json       pre-filter per-object statistics
    manifest.json            seed, config hash, image list, postprocess record
    annotations.coco.json    final annotations (after postprocess)
    quarantine/              images whose annotations were all removed
    labels/                  YOLO export (after convert)

Every byte except file timestamps is a pure function of (config, seed):
scene RNG streams are split per scene index, images are written
independently, and all JSON is serialized canonically.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .annotate import InstanceStats, extract_instances, filter_instances, parse_coco, write_coco, coco_to_yolo, yolo_lines
from .config import PipelineConfig
from .errors import ConfigError, DataError
from .imageio import write_image, write_pgm16
from .raster import rasterize, solo_pixel_count
from .scene import build_scene

THREADS_ENV = "SYNTHPIPE_THREADS"

MANIFEST_NAME = "manifest.json"
RAW_INSTANCES_NAME = "raw_instances.json"
COCO_NAME = "annotations.coco.json"


def _write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _thread_count(explicit=None) -> int:
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}")
    return 1


def generate(config: PipelineConfig, out_dir, threads=None) -> dict:
    """Render every scene and write images plus the pre-filter annotation dump."""
    out = Path(out_dir)
    images_dir = out / "images"
    images_dir.mkdir(parents=True, exist_ok=True)
    ids_dir = out / "ids"
    if config.output.dump_instance_ids:
        ids_dir.mkdir(exist_ok=True)

    def render_one(index: int) -> dict:
        scene = build_scene(config.scene, config.seed, index)
        render = rasterize(
            scene,
            config.camera,
            config.lights,
            ambient=config.ambient,
            background=config.background,
        )
        solo = {o.id: solo_pixel_count(scene, config.camera, o.id) for o in scene.active_objects()}
        stats = extract_instances(render, scene, solo)
        stem = f"img_{index:06d}"
        file_name = f"{stem}.{config.output.image_format}"
        write_image(images_dir / file_name, render.rgb)
        if config.output.dump_instance_ids:
            write_pgm16(ids_dir / f"{stem}.pgm", render.instance_ids)
        return {
            "file_name": file_name,
            "scene_index": index,
            "width": config.camera.width,
            "height": config.camera.height,
            "instances": [
                {
                    "object_id": s.object_id,
                    "class_id": s.class_id,
                    "bbox": list(s.bbox_px) if s.bbox_px else None,
                    "visible_pixels": s.visible_pixels,
                    "solo_pixels": s.solo_pixels,
                    "visibility": s.visibility,
                    "collided": s.collided,
                }
                for s in stats
            ],
        }

    workers = _thread_count(threads)
    indices = range(config.image_count)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(render_one, indices))
    else:
        entries = [render_one(i) for i in indices]

    _write_json(out / RAW_INSTANCES_NAME, {"images": entries})
    manifest = {
        "tool": "synthpipe",
        "version": __version__,
        "seed": config.seed,
        "image_count": config.image_count,
        "config_hash": config.config_hash,
        "categories": list(config.category_names),
        "image_format": config.output.image_format,
        "postprocess_defaults": {
            "min_visibility": config.postprocess.min_visibility,
            "min_pixels": config.postprocess.min_pixels,
        },
        "images": [
            {k: e[k] for k in ("file_name", "scene_index", "width", "height")} for e in entries
        ],
        "postprocess": None,
    }
    _write_json(out / MANIFEST_NAME, manifest)
    return manifest


def load_manifest(dataset_dir) -> dict:
    path = Path(dataset_dir) / MANIFEST_NAME
    if not path.exists():
        raise DataError(f"missing {MANIFEST_NAME} in {dataset_dir}; run generate first")
    return json.loads(path.read_text())


def postprocess(dataset_dir, min_visibility=None, min_pixels=None) -> dict:
    """Filter collided/invisible instances, drop empty images, write final COCO.

    Dropped images are moved to quarantine/ and recorded in the manifest.
    """
    dataset = Path(dataset_dir)
    manifest = load_manifest(dataset)
    raw_path = dataset / RAW_INSTANCES_NAME
    if not raw_path.exists():
        raise DataError(f"missing {RAW_INSTANCES_NAME} in {dataset_dir}")
    raw = json.loads(raw_path.read_text())

    defaults = manifest.get("postprocess_defaults", {})
    if min_visibility is None:
        min_visibility = defaults.get("min_visibility", 0.25)
    if min_pixels is None:
        min_pixels = defaults.get("min_pixels", 16)

    quarantine = dataset / "quarantine"
    kept_images = []
    dropped = []
    for entry in raw["images"]:
        stats = [
            InstanceStats(
                object_id=i["object_id"],
                class_id=i["class_id"],
                bbox_px=tuple(i["bbox"]) if i["bbox"] else None,
                visible_pixels=i["visible_pixels"],
                solo_pixels=i["solo_pixels"],
                visibility=min(1.0, i["visible_pixels"] / max(i["solo_pixels"], 1)),
                collided=i["collided"],
            )
            for i in entry["instances"]
        ]
        kept, _removed, drop = filter_instances(stats, min_visibility, min_pixels)
        if drop:
            dropped.append(entry["file_name"])
            src = dataset / "images" / entry["file_name"]
            if src.exists():
                quarantine.mkdir(exist_ok=True)
                os.replace(src, quarantine / entry["file_name"])
        else:
            kept_images.append((entry["file_name"], entry["width"], entry["height"], kept))

    coco_bytes = write_coco(kept_images, manifest["categories"])
    (dataset / COCO_NAME).write_bytes(coco_bytes)
    manifest["postprocess"] = {
        "min_visibility": min_visibility,
        "min_pixels": min_pixels,
        "dropped_images": dropped,
    }
    _write_json(dataset / MANIFEST_NAME, manifest)
    return manifest


def convert(coco_path, out_dir) -> list[str]:
    """COCO JSON -> per-image YOLO txt files plus classes.txt; returns written names."""
    coco_path = Path(coco_path)
    if not coco_path.exists():
        raise DataError(f"COCO file not found: {coco_path}")
    ds = parse_coco(coco_path.read_bytes())
    per_image = coco_to_yolo(ds)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for file_name in sorted(per_image):
        stem = Path(file_name).stem
        (out / f"{stem}.txt").write_text(yolo_lines(per_image[file_name]))
        names.append(f"{stem}.txt")
    classes = [c.name for c in sorted(ds.categories, key=lambda c: c.id)]
    (out / "classes.txt").write_text("".join(n + "\n" for n in classes))
    return names


def _surviving_images(dataset_dir) -> list[str]:
    manifest = load_manifest(dataset_dir)
    names = [e["file_name"] for e in manifest["images"]]
    post = manifest.get("postprocess")
    if post:
        gone = set(post["dropped_images"])
        names = [n for n in names if n not in gone]
    return names


def split(dataset_dir, counts=None, fractions=None, seed: int = 0, out_dir=None) -> dict:
    """Seeded shuffle then partition into train/val/test; leftovers stay unassigned."""
    names = sorted(_surviving_images(dataset_dir))
    n = len(names)
    if counts is not None and fractions is not None:
        raise ConfigError("give either counts or fractions, not both")
    if counts is None and fractions is None:
        raise ConfigError("split needs counts or fractions")
    if fractions is not None:
        if any(f < 0 for f in fractions) or sum(fractions) > 1.0 + 1e-9:
            raise ConfigError(f"fractions must be nonnegative and sum to <= 1, got {fractions}")
        counts = [int(np.floor(f * n)) for f in fractions]
    counts = list(counts) + [0] * (3 - len(counts))
    if len(counts) > 3 or any(c < 0 for c in counts):
        raise ConfigError(f"counts must be up to three nonnegative integers, got {counts}")
    if sum(counts) > n:
        raise ConfigError(f"requested {sum(counts)} images but only {n} are available")

    order = np.random.default_rng(seed).permutation(n)
    shuffled = [names[i] for i in order]
    subsets = {}
    start = 0
    for subset, count in zip(("train", "val", "test"), counts):
        subsets[subset] = sorted(shuffled[start : start + count])
        start += count

    manifest = {
        "seed": seed,
        "counts": {k: len(v) for k, v in subsets.items()},
        "subsets": subsets,
    }
    out = Path(out_dir) if out_dir else Path(dataset_dir) / "splits"
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "split.json", manifest)
    for subset, files in subsets.items():
        (out / f"{subset}.txt").write_text("".join(f + "\n" for f in files))
    return manifest
