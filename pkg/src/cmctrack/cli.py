"""``cmctrack`` command line: track, eval, synth and bench subcommands.

Exit codes: 0 success, 1 input error, 2 configuration error.  Diagnostics go
to stderr; results go to files or stdout.
"""
from __future__ import annotations

import argparse
import logging
import queue
import sys
import threading
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, build_tracker_config, load_synth_script, load_tracker_config, read_sections
from .imaging import ImageFormatError, load_frame, save_pgm
from .metrics import MetricsInputError, evaluate
from .mot_io import (
    LayoutError,
    MotFormatError,
    SequenceLayout,
    format_results,
    last_frame,
    read_detections,
    read_tracks,
    write_detections,
    write_gt,
)
from .synth import ScriptError, render_sequence
from .tracker import STAGES, InputError, Tracker, TrackerConfig

log = logging.getLogger("cmctrack")

EXIT_OK, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2
INPUT_ERRORS = (MotFormatError, LayoutError, ImageFormatError, InputError, MetricsInputError, OSError)
PREFETCH = 4


def prefetch(paths, capacity: int = PREFETCH):
    """Yield ``(frame, decode_seconds)`` with decoding running ahead on a thread."""
    q: queue.Queue = queue.Queue(maxsize=capacity)
    stop = threading.Event()

    def work():
        try:
            for p in paths:
                if stop.is_set():
                    return
                t0 = time.perf_counter()
                frame = load_frame(p)
                q.put((frame, time.perf_counter() - t0))
        except BaseException as exc:  # handed to the consumer
            q.put(exc)
            return
        q.put(None)

    th = threading.Thread(target=work, daemon=True)
    th.start()
    try:
        while True:
            item = q.get()
            if item is None:
                return
            if isinstance(item, BaseException):
                raise item
            yield item
    finally:
        stop.set()
        while th.is_alive():
            try:
                q.get_nowait()
            except queue.Empty:
                th.join(0.01)


def _tracker_overrides(args) -> dict:
    return {
        "tracker": {
            "max_age": args.max_age,
            "min_hits": args.min_hits,
            "iou_threshold": args.iou_threshold,
            "min_confidence": args.min_confidence,
            "emit_coasting": True if args.emit_coasting else None,
            "warmup_output": True if args.warmup_output else None,
        },
        "motion": {"technique": args.technique, "seed": args.seed},
        "noise": {},
    }


def _load_sequence(args) -> tuple[SequenceLayout, TrackerConfig, list]:
    layout = SequenceLayout.load(args.seq)
    cfg = load_tracker_config(args.config, _tracker_overrides(args), frame_rate=layout.frame_rate)
    dets = read_detections(layout.det_path, layout.seq_length)
    return layout, cfg, dets


def _run(layout: SequenceLayout, cfg: TrackerConfig, dets, frames=None):
    """One tracking pass; returns outputs, the tracker and per-frame decode times."""
    tracker = Tracker(cfg)
    outputs, decode = [], []
    source = ((f, 0.0) for f in frames) if frames is not None else prefetch(layout.frame_paths())
    for k, (frame, dt) in enumerate(source):
        decode.append(dt)
        outputs.append(tracker.step(frame, dets[k]))
    return outputs, tracker, decode


def timing_report(tracker: Tracker, decode: list[float]) -> str:
    n = len(decode)
    lines = [f"frames: {n}"]
    total = np.zeros(n)
    lines.append(f"{'stage':<10} {'total ms':>10} {'per frame ms':>13}")
    lines.append(f"{'decode':<10} {1e3 * sum(decode):10.1f} {1e3 * sum(decode) / max(n, 1):13.2f}")
    for s in STAGES:
        t = np.asarray(tracker.timings[s])
        total += t
        lines.append(f"{s:<10} {1e3 * t.sum():10.1f} {1e3 * t.sum() / max(n, 1):13.2f}")
    fps = n / total.sum() if total.sum() > 0 else float("inf")
    lines.append(f"fps (excluding decode and detection): {fps:.2f}")
    return "\n".join(lines) + "\n"


def cmd_track(args) -> int:
    layout, cfg, dets = _load_sequence(args)
    outputs, tracker, decode = _run(layout, cfg, dets)
    text = format_results(outputs)
    if args.out == "-":
        sys.stdout.write(text)
        sys.stderr.write(timing_report(tracker, decode))
    else:
        Path(args.out).write_text(text)
        sys.stdout.write(timing_report(tracker, decode))
    return EXIT_OK


def cmd_eval(args) -> int:
    n_gt, n_res = last_frame(args.gt), last_frame(args.result)
    n = n_gt
    if n_res and n_res != n_gt:
        # an empty result file has no length of its own and is evaluated over the gt range
        n = min(n_gt, n_res)
        log.warning("gt covers %d frames but result covers %d; evaluating frames 1..%d", n_gt, n_res, n)
    gt = read_tracks(args.gt, n)
    res = read_tracks(args.result, n, ignore_zero_flag=False)
    report = evaluate(gt, res, args.iou)
    if args.format in ("table", "both"):
        sys.stdout.write(report.to_table())
    if args.format in ("kv", "both"):
        sys.stdout.write(report.to_keyvalue())
    return EXIT_OK


def cmd_synth(args) -> int:
    script = load_synth_script(args.script, seed=args.seed)
    try:
        seq = render_sequence(script)
    except ScriptError as exc:
        raise ConfigError(str(exc)) from None
    root = Path(args.out_dir)
    (root / "img1").mkdir(parents=True, exist_ok=True)
    (root / "gt").mkdir(exist_ok=True)
    (root / "det").mkdir(exist_ok=True)
    for k, frame in enumerate(seq.frames):
        save_pgm(frame, root / "img1" / f"{k + 1:06d}.pgm")
    write_gt(root / "gt" / "gt.txt", seq.gt)
    write_detections(root / "det" / "det.txt", seq.detections)
    vw, vh = script.viewport
    layout = SequenceLayout(root, root.name, script.frame_rate, script.num_frames, vw, vh)
    layout.write_seqinfo()
    layout.validate()
    log.info("wrote %d frames to %s", script.num_frames, root)
    return EXIT_OK


def _percentile_rows(name: str, per_frame: dict[str, np.ndarray]) -> list[str]:
    rows = []
    for stage, t in per_frame.items():
        rows.append(
            f"{name:<11} {stage:<10} {1e3 * np.median(t):10.3f} {1e3 * np.percentile(t, 95):10.3f}"
        )
    return rows


def cmd_bench(args) -> int:
    if args.repeats < 1:
        raise ConfigError("--repeats must be >= 1")
    layout = SequenceLayout.load(args.seq)
    values = read_sections(args.config)
    dets = read_detections(layout.det_path, layout.seq_length)
    t0 = time.perf_counter()
    frames = [load_frame(p) for p in layout.frame_paths()]
    decode = time.perf_counter() - t0
    techniques = ["affine", "homography"] if args.technique == "both" else [args.technique]
    lines = [
        f"sequence: {layout.name} ({len(frames)} frames, {layout.im_width}x{layout.im_height}), repeats: {args.repeats}",
        f"decode: {1e3 * decode / max(len(frames), 1):.3f} ms/frame (excluded below)",
        f"{'technique':<11} {'stage':<10} {'median ms':>10} {'p95 ms':>10}",
    ]
    summary = []
    for tech in techniques:
        args.technique = tech
        cfg = build_tracker_config(values, _tracker_overrides(args), frame_rate=layout.frame_rate)
        stages: dict[str, list[float]] = {s: [] for s in STAGES}
        for _ in range(args.repeats):
            _, tracker, _ = _run(layout, cfg, dets, frames)
            for s in STAGES:
                stages[s].extend(tracker.timings[s])
        per_frame = {s: np.asarray(v) for s, v in stages.items()}
        per_frame["total"] = sum(per_frame[s] for s in STAGES)
        lines.extend(_percentile_rows(tech, per_frame))
        fps = len(per_frame["total"]) / per_frame["total"].sum() if per_frame["total"].sum() > 0 else float("inf")
        summary.append(f"{tech}: {fps:.2f} fps")
    lines.extend(summary)
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _add_tracker_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("seq", help="sequence directory (img1/, det/det.txt, seqinfo.ini)")
    p.add_argument("--config", help="INI file with [tracker], [motion], [noise] sections")
    p.add_argument("--seed", type=int, default=None, help="RANSAC seed (overrides config)")
    p.add_argument("--max-age", type=int, default=None)
    p.add_argument("--min-hits", type=int, default=None)
    p.add_argument("--iou-threshold", type=float, default=None)
    p.add_argument("--min-confidence", type=float, default=None)
    p.add_argument("--emit-coasting", action="store_true", help="also report unmatched confirmed tracks")
    p.add_argument(
        "--warmup-output", action="store_true", help="report unconfirmed tracks during the first min_hits frames"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmctrack", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="run the tracker on a MOT-layout sequence")
    _add_tracker_flags(p)
    p.add_argument("--technique", choices=("affine", "homography"), default=None)
    p.add_argument("-o", "--out", required=True, help="result file ('-' for stdout)")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score a result file against ground truth")
    p.add_argument("gt")
    p.add_argument("result")
    p.add_argument("--iou", type=float, default=0.5, help="IoU for CLEAR and identity matching")
    p.add_argument("--format", choices=("table", "kv", "both"), default="both")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="render a synthetic sequence in MOT layout")
    p.add_argument("out_dir")
    p.add_argument("--script", help="INI script with [synth], [camera], [box.N] sections")
    p.add_argument("--seed", type=int, default=None, help="corruption seed (overrides script)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="per-stage latency of motion estimation and tracking")
    _add_tracker_flags(p)
    p.add_argument("--technique", choices=("affine", "homography", "both"), default="both")
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
