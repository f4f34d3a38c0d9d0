"""Loaders turning annotation files into evaluation inputs.

Ground truth arrives as a COCO JSON file or a YOLO directory (txt files
plus classes.txt); detections as a COCO-results JSON array
([{image_id, category_id, bbox, score}]) or per-image YOLO files with a
trailing confidence column. Image keys are file stems. YOLO ground truth
is evaluated in normalized coordinates (IoU is scale invariant), so no
image sizes are needed when both sides are YOLO.
"""

from __future__ import annotations

import json
from pathlib import Path

from .annotate import parse_coco, parse_yolo, yolo_to_bbox
from .errors import DataError
from .evaluation import Detection, GroundTruth


def _stem(name: str) -> str:
    return Path(name).stem


class GroundTruthSet:
    """Parsed ground truth plus the context needed to interpret detections."""

    def __init__(self, gts, categories, space: str, coco=None):
        self.gts = gts
        self.categories = categories
        self.space = space          # "pixel" (COCO) or "normalized" (YOLO)
        self.coco = coco

    @property
    def image_keys(self) -> set[str]:
        return {g.image_key for g in self.gts}


def load_ground_truth(path) -> GroundTruthSet:
    path = Path(path)
    if path.is_dir():
        return _gt_from_yolo_dir(path)
    ds = parse_coco(path.read_bytes())
    cats = sorted(ds.categories, key=lambda c: c.id)
    index = {c.id: k for k, c in enumerate(cats)}
    gts = [
        GroundTruth(_stem(ds.image_by_id(a.image_id).file_name), index[a.category_id], a.bbox)
        for a in ds.annotations
    ]
    return GroundTruthSet(gts, [c.name for c in cats], "pixel", coco=ds)


def _gt_from_yolo_dir(path: Path) -> GroundTruthSet:
    categories = _read_classes(path)
    gts = []
    for txt in sorted(path.glob("*.txt")):
        if txt.name == "classes.txt":
            continue
        records = parse_yolo(
            txt.read_text().splitlines(),
            n_classes=len(categories) if categories else None,
        )
        for r in records:
            gts.append(GroundTruth(txt.stem, r.class_index, yolo_to_bbox(r, 1.0, 1.0)))
    if not gts:
        raise DataError(f"no YOLO ground truth found under {path}")
    if not categories:
        n = max(g.class_index for g in gts) + 1
        categories = [f"class{i}" for i in range(n)]
    return GroundTruthSet(gts, categories, "normalized")


def _read_classes(path: Path):
    classes_file = path / "classes.txt"
    if classes_file.exists():
        return [ln.strip() for ln in classes_file.read_text().splitlines() if ln.strip()]
    return []


def load_detections(path, gt: GroundTruthSet) -> list[Detection]:
    path = Path(path)
    if path.is_dir():
        if gt.space != "normalized" and gt.coco is None:
            raise DataError("YOLO detections need YOLO or COCO ground truth context")
        return _dets_from_yolo_dir(path, gt)
    return _dets_from_coco_results(path, gt)


def _dets_from_yolo_dir(path: Path, gt: GroundTruthSet) -> list[Detection]:
    dims = {}
    if gt.space == "pixel":
        # Denormalize into the ground truth's pixel space via the COCO image table.
        dims = {_stem(im.file_name): (im.width, im.height) for im in gt.coco.images}
    dets = []
    for txt in sorted(path.glob("*.txt")):
        if txt.name == "classes.txt":
            continue
        key = txt.stem
        if gt.image_keys and key not in gt.image_keys:
            raise DataError(f"detections for unknown image {key!r}")
        records = parse_yolo(txt.read_text().splitlines(), n_classes=len(gt.categories))
        w, h = dims.get(key, (1.0, 1.0))
        for lineno, r in enumerate(records, start=1):
            if r.confidence is None:
                raise DataError(f"{txt.name} line {lineno}: detection lines need a confidence field")
            dets.append(Detection(key, r.class_index, yolo_to_bbox(r, w, h), r.confidence))
    return dets


def _dets_from_coco_results(path: Path, gt: GroundTruthSet) -> list[Detection]:
    if gt.space != "pixel" or gt.coco is None:
        raise DataError("COCO-results detections need COCO ground truth (pixel-space keys)")
    try:
        doc = json.loads(path.read_bytes())
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed detections JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise DataError("COCO results must be a JSON array")
    cats = sorted(gt.coco.categories, key=lambda c: c.id)
    index = {c.id: k for k, c in enumerate(cats)}
    images = {im.id: im for im in gt.coco.images}
    dets = []
    for k, entry in enumerate(doc):
        try:
            image_id = int(entry["image_id"])
            category_id = int(entry["category_id"])
            bbox = tuple(float(v) for v in entry["bbox"])
            score = float(entry["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"detection entry {k}: {exc!r}") from exc
        if image_id not in images:
            raise DataError(f"detection entry {k} references unknown image id {image_id}")
        if category_id not in index:
            raise DataError(f"detection entry {k} references unknown category {category_id}")
        dets.append(Detection(_stem(images[image_id].file_name), index[category_id], bbox, score))
    return dets
