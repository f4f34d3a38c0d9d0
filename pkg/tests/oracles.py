"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written in plain Python loops, separate
from the library code paths: pixel-counting IoU, exhaustive assignment
search, and a from-scratch PR-curve evaluator.
"""

from itertools import permutations


def pixel_iou(a, b, step=0.125):
    """IoU by counting sample points on a grid covering both boxes."""
    x0 = min(a[0], b[0])
    y0 = min(a[1], b[1])
    x1 = max(a[0] + a[2], b[0] + b[2])
    y1 = max(a[1] + a[3], b[1] + b[3])
    inter = union = 0
    y = y0 + step / 2
    while y < y1:
        x = x0 + step / 2
        while x < x1:
            in_a = a[0] <= x < a[0] + a[2] and a[1] <= y < a[1] + a[3]
            in_b = b[0] <= x < b[0] + b[2] and b[1] <= y < b[1] + b[3]
            if in_a and in_b:
                inter += 1
            if in_a or in_b:
                union += 1
            x += step
        y += step
    return inter / union if union else 0.0


def naive_iou(a, b):
    ax2, ay2 = a[0] + a[2], a[1] + a[3]
    bx2, by2 = b[0] + b[2], b[1] + b[3]
    iw = min(ax2, bx2) - max(a[0], b[0])
    ih = min(ay2, by2) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a[2] * a[3] + b[2] * b[3] - inter)


def max_tp_assignment(det_boxes, gt_boxes, threshold):
    """Maximum achievable TP count over all injective det->gt assignments."""
    n_det, n_gt = len(det_boxes), len(gt_boxes)
    if n_det == 0 or n_gt == 0:
        return 0
    ok = [
        [naive_iou(d, g) >= threshold for g in gt_boxes]
        for d in det_boxes
    ]
    best = 0
    slots = list(range(n_gt)) + [None] * n_det
    for perm in set(permutations(slots, n_det)):
        used = [g for g in perm if g is not None]
        if len(used) != len(set(used)):
            continue
        tp = sum(1 for di, gi in enumerate(perm) if gi is not None and ok[di][gi])
        best = max(best, tp)
    return best


def naive_greedy_match(dets, gt_boxes, threshold):
    """(conf, is_tp) per detection; dets are (conf, box) pairs.

    Mirrors the matching definition with independent code: descending
    confidence (stable), claim the unmatched GT with the highest IoU when it
    reaches the threshold, IoU ties to the lowest GT index.
    """
    indexed = list(enumerate(dets))
    indexed.sort(key=lambda p: -p[1][0])
    taken = set()
    flags = {}
    for di, (conf, box) in indexed:
        best_v, best_g = 0.0, None
        for gi, gbox in enumerate(gt_boxes):
            if gi in taken:
                continue
            v = naive_iou(box, gbox)
            if v > best_v:
                best_v, best_g = v, gi
        if best_g is not None and best_v >= threshold:
            taken.add(best_g)
            flags[di] = True
        else:
            flags[di] = False
    return [(dets[i][0], flags[i]) for i in range(len(dets))]


def naive_ap(scored, total_gt):
    """101-point interpolated AP, computed with explicit loops."""
    if total_gt == 0:
        return 0.0 if scored else 1.0
    if not scored:
        return 0.0
    ordered = sorted(range(len(scored)), key=lambda i: -scored[i][0])
    points = []
    tp = fp = 0
    for i in ordered:
        if scored[i][1]:
            tp += 1
        else:
            fp += 1
        points.append((tp / total_gt, tp / (tp + fp)))
    total = 0.0
    for k in range(101):
        r = k / 100.0
        candidates = [p for rec, p in points if rec >= r - 1e-12]
        total += max(candidates) if candidates else 0.0
    return total / 101.0


def naive_evaluate(dets, gts, n_classes, thresholds, conf_threshold):
    """Full evaluation re-implemented with dict/loop plumbing.

    dets: (image, class, box, conf); gts: (image, class, box).
    Returns {class: {"ap_by_threshold", "ap", "ap50", "precision", "recall",
    "tp", "fp", "fn", "gt_count"}}.
    """
    out = {}
    for ci in range(n_classes):
        class_gts = [(img, box) for img, c, box in gts if c == ci]
        class_dets = [(img, box, conf) for img, c, box, conf in dets if c == ci]
        images = sorted({img for img, _ in class_gts} | {img for img, _, _ in class_dets})
        total_gt = len(class_gts)

        aps = []
        for thr in thresholds:
            scored = []
            for img in images:
                img_dets = [(conf, box) for i, box, conf in class_dets if i == img]
                img_gts = [box for i, box in class_gts if i == img]
                scored.extend(naive_greedy_match(img_dets, img_gts, thr))
            aps.append(naive_ap(scored, total_gt))

        tp = fp = 0
        for img in images:
            img_dets = [(conf, box) for i, box, conf in class_dets
                        if i == img and conf >= conf_threshold]
            img_gts = [box for i, box in class_gts if i == img]
            for _conf, flag in naive_greedy_match(img_dets, img_gts, thresholds[0]):
                if flag:
                    tp += 1
                else:
                    fp += 1
        fn = total_gt - tp
        if tp + fp > 0:
            precision = tp / (tp + fp)
        else:
            precision = 1.0 if total_gt == 0 else 0.0
        if total_gt > 0:
            recall = tp / total_gt
        else:
            recall = 1.0 if not class_dets else 0.0
        out[ci] = {
            "ap_by_threshold": aps,
            "ap": sum(aps) / len(aps),
            "ap50": aps[0],
            "precision": precision,
            "recall": recall,
            "tp": tp,
            "fp": fp,
            "fn": fn,
            "gt_count": total_gt,
        }
    return out
