"""Annotated preview images for the inspect command.

Box outlines and class-index digits are burned directly into the pixel
array, so previews work without any imaging dependency.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .annotate import parse_coco
from .errors import DataError
from .imageio import read_image, write_image
from .pipeline import COCO_NAME, RAW_INSTANCES_NAME, load_manifest

log = logging.getLogger(__name__)

PALETTE = (
    (230, 60, 50),
    (60, 170, 230),
    (80, 200, 90),
    (240, 190, 40),
    (190, 90, 220),
    (250, 130, 30),
    (90, 220, 200),
    (230, 120, 160),
)

# 3x5 digit glyphs, row-major bits.
_DIGITS = {
    "0": "111101101101111", "1": "010110010010111", "2": "111001111100111",
    "3": "111001111001111", "4": "101101111001001", "5": "111100111001111",
    "6": "111100111101111", "7": "111001010010010", "8": "111101111101111",
    "9": "111101111001111",
}


def draw_box(rgb: np.ndarray, bbox, color, thickness: int = 2) -> None:
    h, w = rgb.shape[:2]
    x, y, bw, bh = (int(round(v)) for v in bbox)
    x2, y2 = x + bw, y + bh
    for t in range(thickness):
        top, bottom = y + t, y2 - 1 - t
        left, right = x + t, x2 - 1 - t
        if 0 <= top < h:
            rgb[top, max(x, 0) : min(x2, w)] = color
        if 0 <= bottom < h:
            rgb[bottom, max(x, 0) : min(x2, w)] = color
        if 0 <= left < w:
            rgb[max(y, 0) : min(y2, h), left] = color
        if 0 <= right < w:
            rgb[max(y, 0) : min(y2, h), right] = color


def draw_label(rgb: np.ndarray, text: str, x: int, y: int, color, scale: int = 2) -> None:
    h, w = rgb.shape[:2]
    cursor = x
    for ch in text:
        glyph = _DIGITS.get(ch)
        if glyph is None:
            cursor += 4 * scale
            continue
        for r in range(5):
            for c in range(3):
                if glyph[r * 3 + c] == "1":
                    rr, cc = y + r * scale, cursor + c * scale
                    rgb[max(rr, 0) : min(rr + scale, h), max(cc, 0) : min(cc + scale, w)] = color
        cursor += 4 * scale


def inspect_image(dataset_dir, image_name: str, out_path=None) -> str:
    """Write a preview with burned-in boxes; return a per-instance text summary."""
    dataset = Path(dataset_dir)
    manifest = load_manifest(dataset)
    post = manifest.get("postprocess")
    if post and image_name in post.get("dropped_images", []):
        raise DataError(f"image {image_name!r} was removed by postprocess")
    known = {e["file_name"] for e in manifest["images"]}
    if image_name not in known:
        raise DataError(f"unknown image {image_name!r}")
    image_path = dataset / "images" / image_name
    if not image_path.exists():
        raise DataError(f"image file missing: {image_path}")

    annotations = _annotations_for(dataset, image_name)
    if not annotations:
        log.warning("image %s has no annotations", image_name)

    rgb = read_image(image_path).copy()
    lines = [f"{image_name}: {len(annotations)} annotation(s)"]
    categories = manifest.get("categories", [])
    for class_index, bbox in annotations:
        color = PALETTE[class_index % len(PALETTE)]
        draw_box(rgb, bbox, color)
        draw_label(rgb, str(class_index), int(bbox[0]) + 4, int(bbox[1]) + 4, color)
        name = categories[class_index] if class_index < len(categories) else f"class{class_index}"
        lines.append(
            f"  class {class_index} ({name}) bbox=({bbox[0]:.0f}, {bbox[1]:.0f}, "
            f"{bbox[2]:.0f}, {bbox[3]:.0f})"
        )

    stem = Path(image_name).stem
    suffix = Path(image_name).suffix
    out = Path(out_path) if out_path else dataset / f"{stem}_preview{suffix}"
    write_image(out, rgb)
    lines.append(f"preview written to {out}")
    return "\n".join(lines)


def _annotations_for(dataset: Path, image_name: str) -> list[tuple[int, tuple]]:
    """(class_index, bbox) pairs from final COCO, falling back to the raw dump."""
    coco_path = dataset / COCO_NAME
    if coco_path.exists():
        ds = parse_coco(coco_path.read_bytes())
        index = {c.id: k for k, c in enumerate(sorted(ds.categories, key=lambda c: c.id))}
        image_ids = {im.id for im in ds.images if im.file_name == image_name}
        return [
            (index[a.category_id], a.bbox)
            for a in ds.annotations
            if a.image_id in image_ids
        ]
    raw_path = dataset / RAW_INSTANCES_NAME
    if not raw_path.exists():
        raise DataError(f"no annotations found in {dataset}; run generate/postprocess first")
    raw = json.loads(raw_path.read_text())
    for entry in raw["images"]:
        if entry["file_name"] == image_name:
            return [
                (i["class_id"], tuple(i["bbox"]))
                for i in entry["instances"]
                if i["bbox"] is not None
            ]
    return []
