"""Command-line entry point.

Subcommands: extract, eval, synth, batch, render.  Exit codes: 0 success,
1 error, 2 success with recoverable warnings.  NETLIFT_LOG selects the
log level (error, warn, info, debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import evaluate, pipeline, raster, reconstruct, spectre, synth
from .geometry import BBox, NetliftError
from .raster import ThresholdSpec

log = logging.getLogger("netlift")


def _setup_logging() -> None:
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    level = levels.get(os.environ.get("NETLIFT_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _threshold(text: str) -> ThresholdSpec:
    if text.lower() == "otsu":
        return ThresholdSpec.otsu()
    return ThresholdSpec.fixed(int(text))


def _load_ignore_regions(path) -> tuple[BBox, ...]:
    data = json.loads(Path(path).read_text())
    return tuple(BBox.of(*(int(v) for v in quad)) for quad in data)


def _pipeline_config(args) -> pipeline.PipelineConfig:
    ignore = ()
    if getattr(args, "ignore_regions", None):
        ignore = _load_ignore_regions(args.ignore_regions)
    return pipeline.PipelineConfig(
        threshold=_threshold(args.threshold),
        invert=args.invert,
        margin=args.margin,
        snap=args.snap,
        stroke_override=args.stroke,
        turn_tolerance=args.turn_tol,
        infer_crossings=args.infer_crossings,
        ignore_regions=ignore,
    )


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", default="otsu", help="fixed level 0..255 or 'otsu'")
    p.add_argument("--invert", action="store_true", help="treat light pixels as ink")
    p.add_argument("--margin", type=int, default=2, help="element blanking margin, px")
    p.add_argument("--snap", type=float, default=6.0, help="pin snap radius, px")
    p.add_argument("--stroke", type=int, default=None, help="override stroke estimate, px")
    p.add_argument("--turn-tol", type=float, default=30.0, help="turn detection angle, deg")
    p.add_argument("--infer-crossings", action="store_true")
    p.add_argument("--ignore-regions", default=None, help="JSON file of [x0,y0,x1,y1] boxes")


def cmd_extract(args) -> int:
    config = _pipeline_config(args)
    try:
        result = pipeline.extract_paths(args.image, args.detections, config)
    except NetliftError as exc:
        print(f"error[extract]: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem
    spectre.save_netlist(result.netlist, out / f"{stem}.scs")
    reconstruct.save_schematic(result.schematic, out / f"{stem}.schematic.json")
    (out / f"{stem}.svg").write_text(reconstruct.render_svg(result.schematic))
    img = raster.load_image(args.image)
    (out / f"{stem}.nets.json").write_text(
        json.dumps(pipeline.netgeoms_to_dict(result, img.width, img.height), indent=2) + "\n"
    )
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{stem}: {len(result.netlist.components)} components, {len(result.netlist.nets)} nets")
    return 2 if result.warnings else 0


def cmd_eval(args) -> int:
    try:
        gt = spectre.load_netlist(args.truth)
        pred = spectre.load_netlist(args.prediction)
    except NetliftError as exc:
        print(f"error[eval]: {exc}", file=sys.stderr)
        return 1
    report = evaluate.best_permutation_score(gt, pred, budget=args.budget)
    print(
        f"tp={report.tp} fp={report.fp} fn={report.fn} "
        f"precision={report.precision:.4f} recall={report.recall:.4f} "
        f"f1={report.f1:.4f} exact={report.exact}"
    )
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_synth(args) -> int:
    configs = [
        synth.config_for(args.difficulty, seed, markings=args.markings)
        for seed in range(args.seed, args.seed + args.count)
    ]
    try:
        manifest = synth.emit_corpus(configs, args.out)
    except NetliftError as exc:
        print(f"error[synth]: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(manifest['circuits'])} circuits to {args.out}")
    return 0


def _batch_one(entry: dict, root: str, config_args: dict) -> dict:
    """Extract and score one manifest entry; pure given its inputs."""
    rootp = Path(root)
    name = entry.get("name", "?")
    t0 = time.perf_counter()
    try:
        files = entry["files"]
        config = pipeline.PipelineConfig(**{k: v for k, v in config_args.items() if k != "use_markings"})
        if config_args.get("use_markings") and "markings" in files:
            data = json.loads((rootp / files["markings"]).read_text())
            config.ignore_regions = tuple(BBox.of(*(int(v) for v in q)) for q in data)
        result = pipeline.extract_paths(
            rootp / files["image"], rootp / files["detections"], config
        )
        gt = spectre.load_netlist(rootp / files["netlist"])
        report = evaluate.best_permutation_score(gt, result.netlist)
        return {
            "name": name,
            "difficulty": entry.get("difficulty", "?"),
            "f1": report.f1,
            "exact": report.exact,
            "seconds": time.perf_counter() - t0,
            "warnings": len(result.warnings),
            "reason": "",
        }
    except Exception as exc:  # per-circuit failures score 0 and batch continues
        return {
            "name": name,
            "difficulty": entry.get("difficulty", "?"),
            "f1": 0.0,
            "exact": True,
            "seconds": time.perf_counter() - t0,
            "warnings": 0,
            "reason": f"{type(exc).__name__}: {exc}",
        }


def run_batch(manifest_path, jobs: int = 0, use_markings: bool = False, config=None) -> tuple[list[dict], str]:
    """Score every circuit in a manifest; returns per-circuit rows and the table text."""
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    entries = manifest.get("circuits", [])
    root = str(manifest_path.parent)
    config = config or pipeline.PipelineConfig()
    config_args = {
        "threshold": config.threshold,
        "invert": config.invert,
        "margin": config.margin,
        "snap": config.snap,
        "stroke_override": config.stroke_override,
        "turn_tolerance": config.turn_tolerance,
        "infer_crossings": config.infer_crossings,
        "use_markings": use_markings,
    }
    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_batch_one, entries, [root] * len(entries), [config_args] * len(entries)))
    else:
        rows = [_batch_one(e, root, config_args) for e in entries]
    rows.sort(key=lambda r: r["name"])
    return rows, format_batch_table(rows)


def format_batch_table(rows: list[dict]) -> str:
    by_diff: dict[str, list[dict]] = {}
    for r in rows:
        by_diff.setdefault(r["difficulty"], []).append(r)
    lines = [f"{'split':<10} {'n':>4} {'mean F1':>8} {'perfect':>8} {'mean s':>7}"]
    for diff in sorted(by_diff):
        group = by_diff[diff]
        mean_f1 = sum(r["f1"] for r in group) / len(group)
        perfect = sum(1 for r in group if r["f1"] >= 1.0 - 1e-12)
        mean_s = sum(r["seconds"] for r in group) / len(group)
        lines.append(f"{diff:<10} {len(group):>4} {mean_f1:>8.4f} {perfect:>5}/{len(group):<3} {mean_s:>7.3f}")
    if rows:
        mean_f1 = sum(r["f1"] for r in rows) / len(rows)
        perfect = sum(1 for r in rows if r["f1"] >= 1.0 - 1e-12)
        lines.append(f"{'all':<10} {len(rows):>4} {mean_f1:>8.4f} {perfect:>5}/{len(rows):<3}")
    return "\n".join(lines)


def cmd_batch(args) -> int:
    config = _pipeline_config(args)
    try:
        rows, table = run_batch(args.manifest, jobs=args.jobs, use_markings=args.use_markings, config=config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error[batch]: {exc}", file=sys.stderr)
        return 1
    for r in rows:
        if r["reason"]:
            print(f"{r['name']}: F1=0 ({r['reason']})", file=sys.stderr)
    print(table)
    return 0


def cmd_render(args) -> int:
    try:
        doc = reconstruct.load_schematic(args.schematic)
    except NetliftError as exc:
        print(f"error[render]: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out) if args.out else Path(args.schematic).with_suffix(".svg")
    out.write_text(reconstruct.render_svg(doc))
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netlift", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="image + detections -> netlist/schematic/SVG")
    p.add_argument("image")
    p.add_argument("detections")
    p.add_argument("--out", default=".", help="output directory")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="score predicted netlist against ground truth")
    p.add_argument("truth")
    p.add_argument("prediction")
    p.add_argument("--json", default=None, help="also write a JSON report")
    p.add_argument("--budget", type=int, default=1_000_000, help="search node budget")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a ground-truthed synthetic corpus")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--difficulty", choices=synth.DIFFICULTIES, default="easy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--markings", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("batch", help="extract+eval every circuit in a manifest")
    p.add_argument("manifest")
    p.add_argument("--jobs", type=int, default=0, help="parallel workers (default: cpu count)")
    p.add_argument("--use-markings", action="store_true", help="blank marking boxes from the manifest")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("render", help="schematic JSON -> SVG")
    p.add_argument("schematic")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NetliftError as exc:
        print(f"error[{args.command}]: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
