"""Annotation extraction, postprocess filtering, and COCO / YOLO formats.

COCO boxes are top-left x, y plus width, height in pixels (floats). YOLO
records are `class cx cy w h [conf]` with center and size normalized to the
image dimensions, one text file per image named after the image stem.
Serialization is byte-stable: fixed key order, annotations sorted by
(image_id, id), reals rounded to 6 decimals.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .raster import RenderOutput
from .scene import Scene

log = logging.getLogger(__name__)

DEFAULT_MIN_VISIBILITY = 0.25
DEFAULT_MIN_PIXELS = 16


@dataclass(frozen=True)
class InstanceStats:
    """Per-object render statistics; the raw material for annotations.

    visibility = visible_pixels / max(solo_pixels, 1), clamped to 1 to
    absorb one-pixel rasterization jitter.
    """

    object_id: int
    class_id: int
    bbox_px: tuple[int, int, int, int] | None
    visible_pixels: int
    solo_pixels: int
    visibility: float
    collided: bool


def extract_instances(render: RenderOutput, scene: Scene, solo_counts) -> list[InstanceStats]:
    """One InstanceStats per active object, including fully hidden ones."""
    ids = render.instance_ids
    known = {o.id for o in scene.objects}
    present = set(np.unique(ids).tolist()) - {0}
    if not present <= known:
        raise DataError(f"instance buffer references unknown object ids {sorted(present - known)}")
    stats = []
    for obj in scene.active_objects():
        if obj.id not in solo_counts:
            raise DataError(f"missing solo pixel count for object {obj.id}")
        mask = ids == obj.id
        visible = int(np.count_nonzero(mask))
        if visible:
            rows, cols = np.nonzero(mask)
            x, y = int(cols.min()), int(rows.min())
            bbox = (x, y, int(cols.max()) - x + 1, int(rows.max()) - y + 1)
        else:
            bbox = None
        solo = int(solo_counts[obj.id])
        stats.append(
            InstanceStats(
                object_id=obj.id,
                class_id=obj.class_id,
                bbox_px=bbox,
                visible_pixels=visible,
                solo_pixels=solo,
                visibility=min(1.0, visible / max(solo, 1)),
                collided=obj.collided,
            )
        )
    return stats


def filter_instances(
    stats,
    min_visibility: float = DEFAULT_MIN_VISIBILITY,
    min_pixels: int = DEFAULT_MIN_PIXELS,
):
    """Split stats into (kept, removed, drop_image).

    Removal is strict less-than, so an instance exactly at a threshold is
    kept; collided instances are always removed. drop_image is set when
    nothing survives.
    """
    kept, removed = [], []
    for s in stats:
        if s.collided or s.visibility < min_visibility or s.visible_pixels < min_pixels:
            removed.append(s)
        else:
            kept.append(s)
    return kept, removed, len(kept) == 0


# --- COCO ------------------------------------------------------------------


@dataclass
class CocoImage:
    id: int
    file_name: str
    width: int
    height: int


@dataclass
class CocoAnnotation:
    id: int
    image_id: int
    category_id: int
    bbox: tuple[float, float, float, float]
    area: float
    iscrowd: int = 0


@dataclass
class CocoCategory:
    id: int
    name: str


@dataclass
class CocoDataset:
    images: list[CocoImage] = field(default_factory=list)
    annotations: list[CocoAnnotation] = field(default_factory=list)
    categories: list[CocoCategory] = field(default_factory=list)

    def image_by_id(self, image_id: int) -> CocoImage:
        for im in self.images:
            if im.id == image_id:
                return im
        raise KeyError(image_id)

    def validate(self) -> "CocoDataset":
        for name, ids in (
            ("images", [i.id for i in self.images]),
            ("annotations", [a.id for a in self.annotations]),
            ("categories", [c.id for c in self.categories]),
        ):
            if len(ids) != len(set(ids)):
                raise DataError(f"duplicate ids in COCO {name}")
        image_ids = {i.id for i in self.images}
        cat_ids = {c.id for c in self.categories}
        for a in self.annotations:
            if a.image_id not in image_ids:
                raise DataError(f"annotation {a.id} references missing image {a.image_id}")
            if a.category_id not in cat_ids:
                raise DataError(f"annotation {a.id} references missing category {a.category_id}")
        return self


def build_coco(per_image, categories) -> CocoDataset:
    """Assemble a CocoDataset from per-image kept stats.

    per_image: iterable of (file_name, width, height, stats). Image ids and
    annotation ids are assigned sequentially in the given order; category
    ids are 1-based in declaration order (class_id k -> category k + 1).
    """
    ds = CocoDataset(categories=[CocoCategory(i + 1, n) for i, n in enumerate(categories)])
    seen = set()
    ann_id = 1
    for image_id, (file_name, width, height, stats) in enumerate(per_image, start=1):
        if file_name in seen:
            raise DataError(f"duplicate image file name {file_name!r}")
        seen.add(file_name)
        ds.images.append(CocoImage(image_id, file_name, int(width), int(height)))
        for s in stats:
            if s.bbox_px is None:
                raise DataError(f"object {s.object_id} has no pixels; filter before writing COCO")
            x, y, w, h = (float(v) for v in s.bbox_px)
            ds.annotations.append(
                CocoAnnotation(ann_id, image_id, s.class_id + 1, (x, y, w, h), w * h)
            )
            ann_id += 1
    return ds.validate()


def serialize_coco(ds: CocoDataset) -> bytes:
    """Canonical COCO JSON: fixed key order, sorted annotations, 6-decimal reals."""

    def r6(v: float) -> float:
        return round(float(v), 6)

    doc = {
        "images": [
            {"id": i.id, "file_name": i.file_name, "width": i.width, "height": i.height}
            for i in sorted(ds.images, key=lambda i: i.id)
        ],
        "annotations": [
            {
                "id": a.id,
                "image_id": a.image_id,
                "category_id": a.category_id,
                "bbox": [r6(v) for v in a.bbox],
                "area": r6(a.area),
                "iscrowd": a.iscrowd,
            }
            for a in sorted(ds.annotations, key=lambda a: (a.image_id, a.id))
        ],
        "categories": [
            {"id": c.id, "name": c.name} for c in sorted(ds.categories, key=lambda c: c.id)
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode()


def write_coco(per_image, categories) -> bytes:
    """build_coco + serialize_coco in one step."""
    return serialize_coco(build_coco(per_image, categories))


def parse_coco(data: bytes) -> CocoDataset:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed COCO JSON: {exc}") from exc
    try:
        ds = CocoDataset(
            images=[
                CocoImage(int(i["id"]), str(i["file_name"]), int(i["width"]), int(i["height"]))
                for i in doc.get("images", [])
            ],
            annotations=[
                CocoAnnotation(
                    int(a["id"]),
                    int(a["image_id"]),
                    int(a["category_id"]),
                    tuple(float(v) for v in a["bbox"]),
                    float(a.get("area", a["bbox"][2] * a["bbox"][3])),
                    int(a.get("iscrowd", 0)),
                )
                for a in doc.get("annotations", [])
            ],
            categories=[
                CocoCategory(int(c["id"]), str(c["name"])) for c in doc.get("categories", [])
            ],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"COCO structure error: {exc!r}") from exc
    return ds.validate()


# --- YOLO ------------------------------------------------------------------


@dataclass(frozen=True)
class YoloRecord:
    """Normalized box: class index plus center/size in [0, 1]."""

    class_index: int
    cx: float
    cy: float
    w: float
    h: float
    confidence: float | None = None


def coco_to_yolo(ds: CocoDataset) -> dict[str, list[YoloRecord]]:
    """Per-image YOLO records; class index is the rank of category_id.

    Boxes poking out of the image are clamped with a warning; boxes fully
    outside are an error.
    """
    ds.validate()
    class_index = {c.id: k for k, c in enumerate(sorted(ds.categories, key=lambda c: c.id))}
    out: dict[str, list[YoloRecord]] = {im.file_name: [] for im in ds.images}
    images = {im.id: im for im in ds.images}
    for a in sorted(ds.annotations, key=lambda a: (a.image_id, a.id)):
        im = images[a.image_id]
        if im.width <= 0 or im.height <= 0:
            raise DataError(f"image {im.file_name!r} has non-positive dimensions")
        x, y, w, h = a.bbox
        x2, y2 = x + w, y + h
        cx_, cy_ = max(x, 0.0), max(y, 0.0)
        cw = min(x2, float(im.width)) - cx_
        ch = min(y2, float(im.height)) - cy_
        if cw <= 0 or ch <= 0:
            raise DataError(f"annotation {a.id} lies fully outside image {im.file_name!r}")
        if (cx_, cy_, cw, ch) != (x, y, w, h):
            log.warning("annotation %d exceeds image bounds; clamped", a.id)
        out[im.file_name].append(
            YoloRecord(
                class_index[a.category_id],
                (cx_ + cw / 2.0) / im.width,
                (cy_ + ch / 2.0) / im.height,
                cw / im.width,
                ch / im.height,
            )
        )
    return out


def yolo_lines(records) -> str:
    """Byte-stable YOLO text: 6 decimal places, one record per line."""
    lines = []
    for r in records:
        line = f"{r.class_index} {r.cx:.6f} {r.cy:.6f} {r.w:.6f} {r.h:.6f}"
        if r.confidence is not None:
            line += f" {r.confidence:.6f}"
        lines.append(line)
    return "".join(line + "\n" for line in lines)


def parse_yolo(lines, n_classes: int | None = None) -> list[YoloRecord]:
    """Parse YOLO text lines: 5 fields (ground truth) or 6 (detection + confidence)."""
    out = []
    for lineno, raw in enumerate(lines, start=1):
        fields = raw.split()
        if not fields:
            continue
        if len(fields) not in (5, 6):
            raise DataError(f"YOLO line {lineno}: expected 5 or 6 fields, got {len(fields)}")
        try:
            cls = int(fields[0])
            vals = [float(v) for v in fields[1:]]
        except ValueError as exc:
            raise DataError(f"YOLO line {lineno}: {exc}") from exc
        if cls < 0 or (n_classes is not None and cls >= n_classes):
            raise DataError(f"YOLO line {lineno}: class index {cls} out of range")
        for v in vals[:4]:
            if v < -1e-6 or v > 1.0 + 1e-6:
                raise DataError(f"YOLO line {lineno}: normalized value {v} out of [0, 1]")
        conf = vals[4] if len(vals) == 5 else None
        if conf is not None and not 0.0 <= conf <= 1.0:
            raise DataError(f"YOLO line {lineno}: confidence {conf} out of [0, 1]")
        out.append(YoloRecord(cls, vals[0], vals[1], vals[2], vals[3], conf))
    return out


def yolo_to_bbox(record: YoloRecord, width: float, height: float):
    """Denormalize a YOLO record to a pixel-space (x, y, w, h) box."""
    w = record.w * width
    h = record.h * height
    return (record.cx * width - w / 2.0, record.cy * height - h / 2.0, w, h)
