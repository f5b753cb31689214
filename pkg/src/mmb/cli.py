"""Command-line interface: ``detect``, ``eval-det``, ``eval-mot``, ``synth``, ``overlay``.

Every subcommand accepts ``--config FILE`` with flat ``key = value`` lines
whose keys are flag names (``pf-gate = 7`` or ``pf_gate = 7``); flags given
on the command line win over the file.  Failures exit nonzero with a single
stderr line of the form ``mmb: error: <Kind>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import frameio
from .amfd import AmfdParams
from .detect import GateParams, MmbConfig, run_mmb
from .frameio import FormatError
from .lrmc import LrmcParams
from .metrics import clear_mot, match_detections, pr_curve_and_ap, sot_rates
from .pipeline_filter import PfParams
from .synth import Occluder, SynthConfig, generate

GT_COLOR = (255, 105, 180)  # pink
TP_COLOR = (255, 255, 0)    # yellow
FP_COLOR = (255, 0, 0)      # red


class CliError(Exception):
    pass


# ---------------------------------------------------------------- config file

def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read config ({exc.strerror})") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise FormatError(f"{path}:{lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _coerce(action: argparse.Action, value: str, where: str):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        truth = value.lower()
        if truth not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
            raise FormatError(f"{where}: expected a boolean, got {value!r}")
        on = truth in ("1", "true", "yes", "on")
        return on if isinstance(action, argparse._StoreTrueAction) else not on
    conv = action.type or str
    try:
        v = conv(value)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: bad value {value!r}") from exc
    if action.choices is not None and v not in action.choices:
        raise FormatError(f"{where}: {v!r} is not one of {sorted(action.choices)}")
    if action.nargs in ("*", "+") or isinstance(action, argparse._AppendAction):
        return [v]
    return v


def apply_config(parser: argparse.ArgumentParser, path: str) -> None:
    actions = {a.dest: a for a in parser._actions if a.option_strings}
    for key, value in read_config_file(path).items():
        if key not in actions or key == "config":
            raise FormatError(f"{path}: unknown key {key!r}")
        parser.set_defaults(**{key: _coerce(actions[key], value, f"{path}: {key}")})


# ------------------------------------------------------------------- parsers

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file with defaults for these flags")
    p.add_argument("--json", action="store_true", help="print the report as JSON")


def _add_detect_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("differencing")
    g.add_argument("--k", type=float, default=4.0, help="threshold = mean + k * std")
    g.add_argument("--morph-kernel", type=int, default=3, help="odd structuring element size")
    g = p.add_argument_group("background")
    g.add_argument("--L", dest="L", type=float, default=4.0, help="sub-group length in seconds")
    g.add_argument("--rank", type=int, default=1, help="background rank")
    g.add_argument("--fps", type=float, default=None, help="override the sequence frame rate")
    g = p.add_argument_group("blob gate")
    g.add_argument("--area-min", type=float, default=5)
    g.add_argument("--area-max", type=float, default=80)
    g.add_argument("--ar-min", type=float, default=1.0)
    g.add_argument("--ar-max", type=float, default=6.0)
    g.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    g = p.add_argument_group("fusion")
    g.add_argument("--roi-gating", action="store_true", help="keep background boxes only where differencing fired")
    g.add_argument("--merge-iou", type=float, default=0.3, help="overlap needed to merge two boxes")
    g.add_argument("--merge-measure", choices=("iou", "iomin"), default="iomin")
    g = p.add_argument_group("pipeline filter")
    g.add_argument("--pf-window", type=int, default=5)
    g.add_argument("--pf-gate", type=float, default=7.0)
    g.add_argument("--pf-confirm", type=int, default=3)
    g.add_argument("--pf-stride", type=int, default=1)
    g.add_argument("--pf-allow-static", action="store_true", help="let zero-displacement pairs associate")
    g = p.add_argument_group("ablation")
    branch = g.add_mutually_exclusive_group()
    branch.add_argument("--amfd-only", action="store_true")
    branch.add_argument("--lrmc-only", action="store_true")
    g.add_argument("--no-pf", action="store_true")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="mmb", description="Moving-object detection for satellite-style video.")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("detect", help="detect moving objects in a frame directory")
    p.add_argument("sequence", help="directory of frame images")
    p.add_argument("-o", "--output", required=True, help="detections CSV to write")
    p.add_argument("--debug-dir", help="write per-frame branch masks here")
    _add_detect_flags(p)
    _add_common(p)
    subs["detect"] = p

    p = sub.add_parser("eval-det", help="precision, recall, F1 and AP of detections")
    p.add_argument("predictions")
    p.add_argument("ground_truth")
    p.add_argument("--box-format", choices=("topleft", "center"), default="topleft")
    _add_common(p)
    subs["eval-det"] = p

    p = sub.add_parser("eval-mot", help="CLEAR-MOT scores of tracked detections")
    p.add_argument("hypotheses")
    p.add_argument("ground_truth")
    p.add_argument("--box-format", choices=("topleft", "center"), default="topleft")
    p.add_argument("--mot-gate", type=float, default=0.0, help="minimum IoU for a match besides overlap")
    p.add_argument("--sot", action="store_true", help="also score as a single-object track (one box per frame)")
    p.add_argument("--alpha", type=float, default=5.0, help="center-error threshold for DPR")
    p.add_argument("--beta", type=float, default=0.5, help="overlap threshold for OSR")
    _add_common(p)
    subs["eval-mot"] = p

    p = sub.add_parser("synth", help="write a synthetic sequence and its ground truth")
    p.add_argument("output_dir")
    p.add_argument("--gt", help="ground-truth CSV path (default OUTPUT_DIR/gt.csv)")
    d = SynthConfig()
    p.add_argument("--width", type=int, default=d.width)
    p.add_argument("--height", type=int, default=d.height)
    p.add_argument("--num-frames", type=int, default=d.num_frames)
    p.add_argument("--fps", type=float, default=d.frame_rate_hz)
    p.add_argument("--num-targets", type=int, default=d.num_targets)
    p.add_argument("--size-min", type=int, default=d.target_size_range[0])
    p.add_argument("--size-max", type=int, default=d.target_size_range[1])
    p.add_argument("--contrast", type=float, default=d.target_contrast)
    p.add_argument("--speed-min", type=float, default=d.speed_range[0])
    p.add_argument("--speed-max", type=float, default=d.speed_range[1])
    p.add_argument("--jitter", type=float, default=d.jitter)
    p.add_argument("--noise-sigma", type=float, default=d.noise_sigma)
    p.add_argument("--illum-amplitude", type=float, default=d.illumination[0])
    p.add_argument("--illum-period", type=float, default=d.illumination[1])
    p.add_argument("--background-level", type=float, default=d.background_level)
    p.add_argument("--background-variation", type=float, default=d.background_variation)
    p.add_argument("--background-smoothness", type=float, default=d.background_smoothness)
    p.add_argument("--clutter-rate", type=float, default=d.clutter_rate)
    p.add_argument("--occluder", action="append", default=[], metavar="X,Y,W,H[,I]",
                   help="static occluder; repeatable; I fixes its intensity")
    p.add_argument("--seed", type=int, default=d.seed)
    _add_common(p)
    subs["synth"] = p

    p = sub.add_parser("overlay", help="draw ground truth and scored detections onto frames")
    p.add_argument("sequence")
    p.add_argument("predictions")
    p.add_argument("ground_truth")
    p.add_argument("-o", "--output-dir", required=True)
    p.add_argument("--box-format", choices=("topleft", "center"), default="topleft")
    _add_common(p)
    subs["overlay"] = p
    return parser, subs


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sp = subs[args.command]
        apply_config(sp, args.config)
        args = parser.parse_args(argv)
        if args.command == "detect" and args.amfd_only and args.lrmc_only:
            raise CliError("amfd-only and lrmc-only are mutually exclusive")
    return args


# ---------------------------------------------------------------- subcommands

def config_from_args(args: argparse.Namespace) -> MmbConfig:
    return MmbConfig(
        amfd=AmfdParams(k=args.k, morph_kernel=args.morph_kernel),
        lrmc=LrmcParams(L=args.L, rank_r=args.rank, k=args.k, morph_kernel=args.morph_kernel),
        gate=GateParams(args.area_min, args.area_max, args.ar_min, args.ar_max, args.connectivity),
        pf=PfParams(args.pf_window, args.pf_gate, args.pf_confirm, args.pf_stride, not args.pf_allow_static),
        roi_gating=args.roi_gating,
        merge_iou=args.merge_iou,
        merge_measure=args.merge_measure,
        use_amfd=not args.lrmc_only,
        use_lrmc=not args.amfd_only,
        use_pf=not args.no_pf,
    )


def _save_mask(mask: np.ndarray, path: Path) -> None:
    Image.fromarray(mask.astype(np.uint8) * 255).save(path)


def cmd_detect(args) -> dict:
    cfg = config_from_args(args)
    seq = frameio.load_sequence(args.sequence, args.fps)
    maps: dict | None = {} if args.debug_dir else None
    result = run_mmb(seq, cfg, maps)
    dets = result.flat()
    frameio.save_detections(dets, args.output)
    if args.debug_dir:
        out = Path(args.debug_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, per_frame in maps.items():
            for t, (mask, _) in enumerate(per_frame):
                _save_mask(mask, out / f"{name}_{t:06d}.png")
    return {
        "frames": len(seq),
        "detections": len(dets),
        "tracks": len({d.track_id for d in dets if d.track_id >= 0}),
        "output": str(args.output),
    }


def cmd_eval_det(args) -> dict:
    preds = frameio.load_detections(args.predictions, args.box_format)
    gts = frameio.load_annotations(args.ground_truth, args.box_format)
    return pr_curve_and_ap(preds, gts).as_dict()


def _sot_pairs(preds, gts):
    p_by = {r.frame: r.bbox for r in preds}
    g_by = {r.frame: r.bbox for r in gts}
    if len(p_by) != len(preds) or len(g_by) != len(gts):
        raise CliError("single-object scoring needs at most one box per frame in each file")
    if set(p_by) != set(g_by):
        raise CliError("single-object scoring needs predictions and ground truth on the same frames")
    frames = sorted(g_by)
    return [p_by[f] for f in frames], [g_by[f] for f in frames]


def cmd_eval_mot(args) -> dict:
    hyps = frameio.load_detections(args.hypotheses, args.box_format)
    gts = frameio.load_annotations(args.ground_truth, args.box_format)
    made = clear_mot(hyps, gts, args.mot_gate)
    report = made.as_dict()
    report["mota"] = made.mota * 100.0  # percent
    if args.sot:
        sot = sot_rates(*_sot_pairs(hyps, gts), alpha=args.alpha, beta=args.beta)
        report.update(dpr=sot.dpr_at_alpha, osr=sot.osr_at_beta, alpha=sot.alpha, beta=sot.beta)
    return report


def _parse_occluder(text: str) -> Occluder:
    parts = text.split(",")
    if len(parts) not in (4, 5):
        raise CliError(f"occluder {text!r}: expected X,Y,W,H[,I]")
    try:
        x, y, w, h = (int(v) for v in parts[:4])
        intensity = float(parts[4]) if len(parts) == 5 else None
    except ValueError as exc:
        raise CliError(f"occluder {text!r}: {exc}") from exc
    return Occluder(x, y, w, h, intensity)


def cmd_synth(args) -> dict:
    cfg = SynthConfig(
        width=args.width, height=args.height, num_frames=args.num_frames, frame_rate_hz=args.fps,
        num_targets=args.num_targets, target_size_range=(args.size_min, args.size_max),
        target_contrast=args.contrast, speed_range=(args.speed_min, args.speed_max),
        jitter=args.jitter, noise_sigma=args.noise_sigma,
        illumination=(args.illum_amplitude, args.illum_period),
        background_level=args.background_level, background_variation=args.background_variation,
        background_smoothness=args.background_smoothness, clutter_rate=args.clutter_rate,
        occluders=tuple(_parse_occluder(o) for o in args.occluder), seed=args.seed,
    )
    seq, records = generate(cfg)
    frameio.save_sequence(seq, args.output_dir)
    gt_path = Path(args.gt) if args.gt else Path(args.output_dir) / "gt.csv"
    frameio.save_annotations(records, gt_path)
    return {"frames": len(seq), "records": len(records), "output_dir": str(args.output_dir), "gt": str(gt_path)}


def draw_box(rgb: np.ndarray, bbox, color) -> None:
    """Paint the 1-px border of the pixels covered by ``bbox`` (clipped)."""
    H, W = rgb.shape[:2]
    x, y, w, h = bbox
    x0, y0 = math.floor(x), math.floor(y)
    x1, y1 = math.ceil(x + w) - 1, math.ceil(y + h) - 1
    if x1 < 0 or y1 < 0 or x0 >= W or y0 >= H:
        return
    cx0, cy0, cx1, cy1 = max(x0, 0), max(y0, 0), min(x1, W - 1), min(y1, H - 1)
    if y0 >= 0:
        rgb[y0, cx0:cx1 + 1] = color
    if y1 < H:
        rgb[y1, cx0:cx1 + 1] = color
    if x0 >= 0:
        rgb[cy0:cy1 + 1, x0] = color
    if x1 < W:
        rgb[cy0:cy1 + 1, x1] = color


def cmd_overlay(args) -> dict:
    seq = frameio.load_sequence(args.sequence)
    preds = frameio.records_by_frame(frameio.load_detections(args.predictions, args.box_format), len(seq))
    gts = frameio.records_by_frame(frameio.load_annotations(args.ground_truth, args.box_format), len(seq))
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_tp = n_fp = 0
    for fr in seq.frames:
        gray = np.clip(np.round(fr.pixels), 0, 255).astype(np.uint8)
        rgb = np.repeat(gray[:, :, None], 3, axis=2)
        p, g = preds[fr.index], gts[fr.index]
        _, _, _, pairs = match_detections(p, g)
        hit = {i for i, _ in pairs}
        for r in g:
            draw_box(rgb, r.bbox, GT_COLOR)
        for i, r in enumerate(p):
            draw_box(rgb, r.bbox, TP_COLOR if i in hit else FP_COLOR)
        n_tp += len(hit)
        n_fp += len(p) - len(hit)
        Image.fromarray(rgb).save(out / f"overlay_{fr.index:06d}.png")
    return {"frames": len(seq), "tp": n_tp, "fp": n_fp, "output_dir": str(out)}


COMMANDS = {
    "detect": cmd_detect,
    "eval-det": cmd_eval_det,
    "eval-mot": cmd_eval_mot,
    "synth": cmd_synth,
    "overlay": cmd_overlay,
}


def _format_report(report: dict) -> str:
    def fmt(v):
        return f"{v:.4f}" if isinstance(v, float) else str(v)
    return "\n".join(f"{k}: {fmt(v)}" for k, v in report.items())


def _json_safe(report: dict) -> dict:
    return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in report.items()}


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        report = COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse already printed its usage line
        return int(exc.code or 0)
    except (CliError, FormatError, ValueError, OSError) as exc:
        kind = type(exc).__name__
        msg = " ".join(str(exc).split())
        print(f"mmb: error: {kind}: {msg}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps(_json_safe(report), sort_keys=True))
    else:
        print(_format_report(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
