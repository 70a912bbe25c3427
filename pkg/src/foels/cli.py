"""Command-line front end: ``foels detect | eval | synth``.

Exit status: 0 on success, 1 for bad or missing input, 2 when an internal
estimate or invariant fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import DetectorConfig
from .errors import FoelsError, InputError
from .evaluation import evaluate_dirs, read_scene_list, results_csv
from .flow_io import load_flo, save_flo
from .images import load_image, mask_to_gray, save_image
from .pipeline import detect, write_outputs
from .segmentation import default_class_table, load_panoptic, read_class_table, save_panoptic
from .synth import ground_truth_foe, parse_scene

log = logging.getLogger("foels")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


def _load_config(args) -> DetectorConfig:
    cfg = DetectorConfig()
    if args.config:
        cfg = DetectorConfig.from_text(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _label_paths(flow_path: Path) -> tuple[Path, Path]:
    stem = flow_path.name[: -len(".flo")] if flow_path.name.endswith(".flo") else flow_path.stem
    return flow_path.with_name(f"{stem}.class.pgm"), flow_path.with_name(f"{stem}.inst.pgm")


def _detect_one(flow_path, class_path, inst_path, table_path, cfg, out_dir, diagnostics,
                frame_path=None) -> list[str]:
    flow_path = Path(flow_path)
    table = read_class_table(table_path) if table_path else default_class_table()
    det = detect(load_flo(flow_path), load_panoptic(class_path, inst_path), table, cfg)
    frame_rgb = load_image(frame_path) if frame_path else None
    name = flow_path.name[: -len(".flo")] if flow_path.name.endswith(".flo") else flow_path.stem
    return [str(p) for p in write_outputs(det, out_dir, name, diagnostics, frame_rgb)]


def cmd_detect(args) -> int:
    cfg = _load_config(args)
    if args.print_config:
        sys.stdout.write(cfg.to_text())
        return EXIT_OK
    if not args.out:
        raise InputError("detect needs --out")
    if args.batch:
        flows = sorted(Path(args.batch).glob("*.flo"))
        if not flows:
            raise InputError(f"no .flo files in {args.batch}")
        jobs = [(f, *_label_paths(f), args.classes, cfg, args.out, args.diagnostics) for f in flows]
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                results = list(pool.map(_detect_one, *zip(*jobs)))
        else:
            results = [_detect_one(*job) for job in jobs]
        for written in results:
            log.info("wrote %s", ", ".join(written))
        return EXIT_OK
    if not args.flow:
        raise InputError("detect needs a flow file or --batch")
    class_path, inst_path = _label_paths(Path(args.flow))
    written = _detect_one(args.flow, args.class_map or class_path, args.inst_map or inst_path,
                          args.classes, cfg, args.out, args.diagnostics, args.frame)
    log.info("wrote %s", ", ".join(written))
    return EXIT_OK


def cmd_eval(args) -> int:
    include = read_scene_list(args.scenes) if args.scenes else None
    exclude = read_scene_list(args.exclude) if args.exclude else []
    rows, per_scene, overall = evaluate_dirs(args.pred, args.gt, include, exclude)
    text = results_csv(rows, per_scene, overall)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for scene_path in args.scene:
        scene_path = Path(scene_path)
        sf = parse_scene(scene_path.read_text(encoding="utf-8"), default_name=scene_path.stem)
        frame = sf.render()
        name = sf.name
        files = {"flow": f"{name}.flo", "class": f"{name}.class.pgm",
                 "instance": f"{name}.inst.pgm", "ground_truth": f"{name}.gt.pgm"}
        save_flo(out / files["flow"], frame.flow)
        save_panoptic(frame.panoptic, out / files["class"], out / files["instance"])
        save_image(out / files["ground_truth"], mask_to_gray(frame.moving))
        manifest = {"name": name, "files": files, "scene": sf.to_text(),
                    "width": sf.intrinsics.width, "height": sf.intrinsics.height}
        try:
            foe = ground_truth_foe(sf.intrinsics, sf.motion)
            manifest["foe"] = {"h": list(foe.h), "sign": foe.sign}
        except FoelsError:
            manifest["foe"] = None
        (out / f"{name}.manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        log.info("wrote %s", name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="foels", description="FoE-based moving object detection")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect moving objects in one frame or a directory")
    d.add_argument("flow", nargs="?", help=".flo file; labels default to <frame>.class.pgm/.inst.pgm")
    d.add_argument("--class-map")
    d.add_argument("--inst-map")
    d.add_argument("--classes", help="class prior table (default: bundled COCO-panoptic table)")
    d.add_argument("--config", help="'key value' config file")
    d.add_argument("--seed", type=int)
    d.add_argument("--diagnostics", action="store_true", help="also write every stage panel")
    d.add_argument("--frame", help="RGB frame used as the overlay background")
    d.add_argument("--batch", help="process every <frame>.flo in this directory")
    d.add_argument("--jobs", type=int, default=1)
    d.add_argument("--print-config", action="store_true", help="print the effective config and exit")
    d.add_argument("-o", "--out")
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("eval", help="IoU of predicted masks against ground truth")
    e.add_argument("pred")
    e.add_argument("gt")
    e.add_argument("--scenes", help="only these scenes (one name per line)")
    e.add_argument("--exclude", help="skip these scenes (one name per line)")
    e.add_argument("-o", "--out", help="CSV path (default: stdout)")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="render synthetic frames from scene files")
    s.add_argument("scene", nargs="+", help="scene description files")
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, OSError, ValueError) as exc:
        print(f"foels: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FoelsError as exc:
        print(f"foels: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
