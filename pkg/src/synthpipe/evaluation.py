"""Detection scoring: IoU, greedy matching, interpolated AP, report tables.

AP uses 101-point interpolation (precision envelope sampled at recalls
0.00, 0.01, ..., 1.00) and mAP@0.5:0.95 averages the ten IoU thresholds
0.50 to 0.95 in steps of 0.05. The "All" row is the arithmetic mean over
classes present in the ground truth; the interpolation scheme and the
confidence cutoff are echoed in the report so numbers stay comparable.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

IOU_THRESHOLDS = tuple((50 + 5 * i) / 100.0 for i in range(10))
DEFAULT_CONF_THRESHOLD = 0.25
RECALL_POINTS = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class Detection:
    image_key: str
    class_index: int
    bbox: tuple[float, float, float, float]
    confidence: float

    def __post_init__(self):
        if self.bbox[2] <= 0 or self.bbox[3] <= 0:
            raise ValueError("detection box needs positive width and height")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must be in [0, 1]")


@dataclass(frozen=True)
class GroundTruth:
    image_key: str
    class_index: int
    bbox: tuple[float, float, float, float]


def iou(a, b) -> float:
    """Intersection area over union area of two (x, y, w, h) boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = min(ax + aw, bx + bw) - max(ax, bx)
    iy = min(ay + ah, by + bh) - max(ay, by)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (aw * ah + bw * bh - inter)


@dataclass
class MatchResult:
    pairs: list[tuple[int, int]]    # (detection index, ground-truth index)
    det_is_tp: list[bool]
    tp: int
    fp: int
    fn: int


def match_detections(dets, gts, iou_threshold: float) -> MatchResult:
    """Greedy one-image one-class matching.

    Detections are visited in descending confidence (stable, so equal
    confidences keep input order); each claims the unmatched ground truth
    with the highest IoU, provided that IoU reaches the threshold. IoU ties
    go to the lowest ground-truth index.
    """
    order = sorted(range(len(dets)), key=lambda i: -dets[i].confidence)
    taken = [False] * len(gts)
    pairs = []
    det_is_tp = [False] * len(dets)
    for di in order:
        best_iou = 0.0
        best_gi = -1
        for gi, gt in enumerate(gts):
            if taken[gi]:
                continue
            v = iou(dets[di].bbox, gt.bbox)
            if v > best_iou:
                best_iou = v
                best_gi = gi
        if best_gi >= 0 and best_iou >= iou_threshold:
            taken[best_gi] = True
            pairs.append((di, best_gi))
            det_is_tp[di] = True
    tp = len(pairs)
    return MatchResult(pairs, det_is_tp, tp, len(dets) - tp, len(gts) - tp)


def average_precision(scored, total_gt: int) -> float:
    """101-point interpolated AP from (confidence, is_tp) pairs.

    With no ground truth: 0.0 if any detection exists, 1.0 when the class
    is entirely empty (callers exclude such classes from means).
    """
    if total_gt == 0:
        return 0.0 if scored else 1.0
    if not scored:
        return 0.0
    conf = np.array([c for c, _ in scored])
    flags = np.array([bool(t) for _, t in scored])
    order = np.argsort(-conf, kind="stable")
    flags = flags[order]
    cum_tp = np.cumsum(flags)
    cum_fp = np.cumsum(~flags)
    precision = cum_tp / (cum_tp + cum_fp)
    recall = cum_tp / total_gt
    # Monotone non-increasing precision envelope, sampled at fixed recalls.
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_POINTS, side="left")
    valid = idx < len(envelope)
    return float(np.where(valid, envelope[np.minimum(idx, len(envelope) - 1)], 0.0).mean())


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    ap50: float
    ap: float                      # mean over IOU_THRESHOLDS
    ap_by_threshold: tuple[float, ...]
    tp: int
    fp: int
    fn: int
    gt_count: int
    det_count: int


@dataclass
class EvalReport:
    classes: dict[str, ClassMetrics]
    all_row: ClassMetrics
    iou_thresholds: tuple[float, ...]
    conf_threshold: float
    interpolation: str = "101-point"

    def text(self) -> str:
        rows = [("Class", "Precision", "Recall", "mAP@0.5", "mAP@0.5:0.95")]
        ordered = [("All", self.all_row)] + list(self.classes.items())
        for name, m in ordered:
            rows.append(
                (name, f"{m.precision:.3f}", f"{m.recall:.3f}", f"{m.ap50:.3f}", f"{m.ap:.3f}")
            )
        widths = [max(len(r[c]) for r in rows) for c in range(5)]
        lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)) for row in rows]
        header = (
            f"precision/recall at IoU {self.iou_thresholds[0]:.2f}, "
            f"confidence >= {self.conf_threshold:.2f}; AP interpolation: {self.interpolation}"
        )
        return "\n".join([header] + lines) + "\n"

    def to_json(self) -> str:
        def row(m: ClassMetrics):
            return {
                "precision": m.precision,
                "recall": m.recall,
                "ap50": m.ap50,
                "ap50_95": m.ap,
                "ap_by_threshold": {f"{t:.2f}": v for t, v in zip(self.iou_thresholds, m.ap_by_threshold)},
                "tp": m.tp,
                "fp": m.fp,
                "fn": m.fn,
                "gt_count": m.gt_count,
                "det_count": m.det_count,
            }

        doc = {
            "interpolation": self.interpolation,
            "iou_thresholds": list(self.iou_thresholds),
            "conf_threshold": self.conf_threshold,
            "all": row(self.all_row),
            "classes": {name: row(m) for name, m in self.classes.items()},
        }
        return json.dumps(doc, indent=2) + "\n"


def evaluate(
    dets,
    gts,
    categories,
    iou_thresholds=IOU_THRESHOLDS,
    conf_threshold: float = DEFAULT_CONF_THRESHOLD,
) -> EvalReport:
    """Score detections against ground truth over a shared image set.

    Per class: AP at every threshold pooled over images, plus single-point
    precision/recall at the first threshold with the confidence cutoff
    applied. The "All" row averages classes present in the ground truth.
    """
    gt_images = {g.image_key for g in gts}
    known_classes = set(range(len(categories)))
    for d in dets:
        if d.class_index not in known_classes:
            raise DataError(f"detection references unknown class {d.class_index}")
        if gt_images and d.image_key not in gt_images:
            raise DataError(f"detection references unknown image {d.image_key!r}")

    by_class_gt = defaultdict(lambda: defaultdict(list))
    by_class_det = defaultdict(lambda: defaultdict(list))
    for g in gts:
        by_class_gt[g.class_index][g.image_key].append(g)
    for d in dets:
        by_class_det[d.class_index][d.image_key].append(d)

    classes: dict[str, ClassMetrics] = {}
    for ci, name in enumerate(categories):
        gt_by_img = by_class_gt.get(ci, {})
        det_by_img = by_class_det.get(ci, {})
        total_gt = sum(len(v) for v in gt_by_img.values())
        total_det = sum(len(v) for v in det_by_img.values())
        images = sorted(set(gt_by_img) | set(det_by_img))

        aps = []
        for thr in iou_thresholds:
            scored = []
            for key in images:
                img_dets = det_by_img.get(key, [])
                res = match_detections(img_dets, gt_by_img.get(key, []), thr)
                scored.extend(
                    (d.confidence, flag) for d, flag in zip(img_dets, res.det_is_tp)
                )
            aps.append(average_precision(scored, total_gt))

        # Single-point precision/recall: confidence cutoff, IoU at the first threshold.
        tp = fp = 0
        for key in images:
            strong = [d for d in det_by_img.get(key, []) if d.confidence >= conf_threshold]
            res = match_detections(strong, gt_by_img.get(key, []), iou_thresholds[0])
            tp += res.tp
            fp += res.fp
        fn = total_gt - tp
        if tp + fp > 0:
            precision = tp / (tp + fp)
        else:
            precision = 1.0 if total_gt == 0 else 0.0
        if total_gt > 0:
            recall = tp / total_gt
        else:
            recall = 1.0 if total_det == 0 else 0.0
        classes[name] = ClassMetrics(
            precision=precision,
            recall=recall,
            ap50=aps[0],
            ap=float(np.mean(aps)),
            ap_by_threshold=tuple(aps),
            tp=tp,
            fp=fp,
            fn=fn,
            gt_count=total_gt,
            det_count=total_det,
        )

    present = [m for m in classes.values() if m.gt_count > 0]
    if present:
        all_row = ClassMetrics(
            precision=float(np.mean([m.precision for m in present])),
            recall=float(np.mean([m.recall for m in present])),
            ap50=float(np.mean([m.ap50 for m in present])),
            ap=float(np.mean([m.ap for m in present])),
            ap_by_threshold=tuple(
                float(np.mean([m.ap_by_threshold[k] for m in present]))
                for k in range(len(iou_thresholds))
            ),
            tp=sum(m.tp for m in present),
            fp=sum(m.fp for m in present),
            fn=sum(m.fn for m in present),
            gt_count=sum(m.gt_count for m in present),
            det_count=sum(m.det_count for m in present),
        )
    else:
        all_row = ClassMetrics(0.0, 0.0, 0.0, 0.0, tuple(0.0 for _ in iou_thresholds), 0, 0, 0, 0, 0)
    return EvalReport(
        classes=classes,
        all_row=all_row,
        iou_thresholds=tuple(iou_thresholds),
        conf_threshold=conf_threshold,
    )


def training_iterations(train_size: int, batch_size: int, epochs: int) -> float:
    """Exact (dataset size / batch size) * epochs, no rounding."""
    if batch_size <= 0:
        raise ValueError("batch_size must be positive")
    return (train_size / batch_size) * epochs
