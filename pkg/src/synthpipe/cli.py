"""Command-line entry point orchestrating the pipeline stages.

    synthpipe generate    --config cfg.json --out dataset/
    synthpipe postprocess dataset/
    synthpipe convert     dataset/annotations.coco.json --out dataset/labels
    synthpipe split       dataset/ --counts 400,101
    synthpipe evaluate    --gt gt.json --det results.json
    synthpipe inspect     dataset/ img_000000.ppm

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 data-integrity
error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, DataError, PipelineError
from .evaluation import DEFAULT_CONF_THRESHOLD, evaluate
from .eval_io import load_detections, load_ground_truth
from . import pipeline
from .preview import inspect_image


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for I/O here.
    def error(self, message):
        raise ConfigError(message)


def _parse_numbers(text: str, kind):
    try:
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated {kind.__name__}s, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="synthpipe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="render scenes and write a dataset directory")
    gen.add_argument("--config", required=True, help="pipeline config JSON")
    gen.add_argument("--out", required=True, help="dataset output directory")
    gen.add_argument("--seed", type=int, default=None, help="override config seed")
    gen.add_argument("--count", type=int, default=None, help="override config image_count")
    gen.add_argument("--threads", type=int, default=None,
                     help=f"worker threads (default 1, or ${pipeline.THREADS_ENV})")

    post = sub.add_parser("postprocess", help="filter annotations, drop empty images")
    post.add_argument("dataset", help="dataset directory from generate")
    post.add_argument("--min-visibility", type=float, default=None)
    post.add_argument("--min-pixels", type=int, default=None)

    conv = sub.add_parser("convert", help="COCO JSON to YOLO labels")
    conv.add_argument("coco", help="COCO annotations file")
    conv.add_argument("--out", required=True, help="output directory for YOLO txt files")

    spl = sub.add_parser("split", help="seeded train/val/test partition")
    spl.add_argument("dataset", help="dataset directory")
    spl.add_argument("--counts", default=None, help="train,val[,test] image counts")
    spl.add_argument("--fractions", default=None, help="train,val[,test] fractions")
    spl.add_argument("--seed", type=int, default=0)
    spl.add_argument("--out", default=None, help="output directory (default DATASET/splits)")

    ev = sub.add_parser("evaluate", help="score detections against ground truth")
    ev.add_argument("--gt", required=True, help="COCO JSON file or YOLO directory")
    ev.add_argument("--det", required=True, help="COCO-results JSON or YOLO directory")
    ev.add_argument("--format", choices=["coco", "yolo"], default=None,
                    help="assert the detection input format")
    ev.add_argument("--conf-threshold", type=float, default=DEFAULT_CONF_THRESHOLD,
                    help="confidence cutoff for the precision/recall columns")
    ev.add_argument("--out", default=None, help="also write the report as JSON")

    ins = sub.add_parser("inspect", help="write an annotated preview of one image")
    ins.add_argument("dataset", help="dataset directory")
    ins.add_argument("image", help="image file name inside the dataset")
    ins.add_argument("--out", default=None, help="preview output path")

    return parser


def _cmd_generate(args) -> int:
    config = load_config(args.config, seed_override=args.seed, count_override=args.count)
    manifest = pipeline.generate(config, args.out, threads=args.threads)
    print(f"generated {manifest['image_count']} images into {args.out}")
    return 0


def _cmd_postprocess(args) -> int:
    manifest = pipeline.postprocess(args.dataset, args.min_visibility, args.min_pixels)
    post = manifest["postprocess"]
    kept = len(manifest["images"]) - len(post["dropped_images"])
    print(
        f"kept {kept} images, dropped {len(post['dropped_images'])} "
        f"(min_visibility={post['min_visibility']}, min_pixels={post['min_pixels']})"
    )
    return 0


def _cmd_convert(args) -> int:
    names = pipeline.convert(args.coco, args.out)
    print(f"wrote {len(names)} YOLO label files to {args.out}")
    return 0


def _cmd_split(args) -> int:
    counts = _parse_numbers(args.counts, int) if args.counts else None
    fractions = _parse_numbers(args.fractions, float) if args.fractions else None
    manifest = pipeline.split(args.dataset, counts=counts, fractions=fractions,
                              seed=args.seed, out_dir=args.out)
    print(", ".join(f"{k}: {v}" for k, v in manifest["counts"].items()))
    return 0


def _cmd_evaluate(args) -> int:
    if args.format is not None:
        is_dir = Path(args.det).is_dir()
        if (args.format == "yolo") != is_dir:
            raise ConfigError(
                f"--format {args.format} does not match the detection input "
                f"({'directory' if is_dir else 'file'})"
            )
    gt = load_ground_truth(args.gt)
    dets = load_detections(args.det, gt)
    report = evaluate(dets, gt.gts, gt.categories, conf_threshold=args.conf_threshold)
    print(report.text(), end="")
    if args.out:
        Path(args.out).write_text(report.to_json())
        print(f"report written to {args.out}")
    return 0


def _cmd_inspect(args) -> int:
    print(inspect_image(args.dataset, args.image, args.out))
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "postprocess": _cmd_postprocess,
    "convert": _cmd_convert,
    "split": _cmd_split,
    "evaluate": _cmd_evaluate,
    "inspect": _cmd_inspect,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
