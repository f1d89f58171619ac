"""MOTChallenge text formats and sequence directories.

Frames are 1-based in files and 0-based everywhere in memory; the
conversion happens only in this module.
"""
from __future__ import annotations

import configparser
import logging
from dataclasses import dataclass
from pathlib import Path

from .geometry import BBox
from .imaging import GrayFrame, list_frame_files, load_frame
from .metrics import TrackSequence
from .tracker import Detection, FrameOutput

log = logging.getLogger(__name__)


class MotFormatError(ValueError):
    pass


class LayoutError(ValueError):
    pass


def _parse_rows(path, min_cols: int):
    path = Path(path)
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            parts = [p.strip() for p in text.replace(" ", "").split(",")]
            if len(parts) < min_cols:
                raise MotFormatError(f"{path}:{lineno}: expected at least {min_cols} fields, got {len(parts)}")
            try:
                frame = int(float(parts[0]))
                tid = int(float(parts[1]))
                vals = [float(p) for p in parts[2:min_cols]]
                extra = [float(p) for p in parts[min_cols:]]
            except ValueError as exc:
                raise MotFormatError(f"{path}:{lineno}: non-numeric field ({exc})") from None
            if frame < 1:
                raise MotFormatError(f"{path}:{lineno}: frame {frame} (MOT frames start at 1)")
            left, top, w, h = vals[:4]
            try:
                box = BBox.from_ltwh(left, top, w, h)
            except ValueError as exc:
                raise MotFormatError(f"{path}:{lineno}: {exc}") from None
            rows.append((lineno, frame, tid, box, vals[4:] + extra))
    return rows


def read_detections(path, num_frames: int | None = None) -> list[list[Detection]]:
    """``frame,-1,left,top,width,height,conf,...`` -> per-frame detections (0-based)."""
    rows = _parse_rows(path, 7)
    last = max((r[1] for r in rows), default=0)
    n = last if num_frames is None else num_frames
    if last > n:
        raise MotFormatError(f"{path}: detections reference frame {last} beyond sequence length {n}")
    out: list[list[Detection]] = [[] for _ in range(n)]
    for lineno, frame, _tid, box, rest in rows:
        conf = rest[0]
        if not 0.0 <= conf <= 1.0:
            # some detectors emit unnormalised scores; clamp instead of failing
            log.warning("%s:%d: confidence %g outside [0, 1], clamped", path, lineno, conf)
            conf = min(max(conf, 0.0), 1.0)
        out[frame - 1].append(Detection(box, conf))
    return out


def read_tracks(path, num_frames: int | None = None, ignore_zero_flag: bool = True) -> TrackSequence:
    """Ground-truth or result file as a TrackSequence.

    Ground-truth rows whose 7th column is 0 (MOT "ignore" flag) are skipped
    when ``ignore_zero_flag`` is set.
    """
    rows = _parse_rows(path, 6)
    last = max((r[1] for r in rows), default=0)
    n = last if num_frames is None else max(num_frames, 0)
    frames: list[list[tuple[int, BBox]]] = [[] for _ in range(n)]
    seen: set[tuple[int, int]] = set()
    for lineno, frame, tid, box, rest in rows:
        if ignore_zero_flag and rest and rest[0] == 0:
            continue
        if frame > n:
            continue
        if (frame, tid) in seen:
            raise MotFormatError(f"{path}:{lineno}: id {tid} appears twice in frame {frame}")
        seen.add((frame, tid))
        frames[frame - 1].append((tid, box))
    return TrackSequence(frames)


def last_frame(path) -> int:
    return max((r[1] for r in _parse_rows(path, 6)), default=0)


def format_results(outputs: list[FrameOutput]) -> str:
    lines = []
    for out in outputs:
        scores = out.scores or [1.0] * len(out.entries)
        for (tid, box), conf in zip(out.entries, scores):
            left, top, w, h = box.to_ltwh()
            lines.append(f"{out.frame_index + 1},{tid},{left:.2f},{top:.2f},{w:.2f},{h:.2f},{conf:.2f},-1,-1,-1")
    return "".join(line + "\n" for line in lines)


def write_results(path, outputs: list[FrameOutput]) -> None:
    Path(path).write_text(format_results(outputs))


def write_gt(path, gt: TrackSequence) -> None:
    lines = []
    for k, frame in enumerate(gt.frames):
        for tid, box in frame:
            left, top, w, h = box.to_ltwh()
            lines.append(f"{k + 1},{tid},{left:.2f},{top:.2f},{w:.2f},{h:.2f},1,1,1")
    Path(path).write_text("".join(line + "\n" for line in lines))


def write_detections(path, dets: list[list[Detection]]) -> None:
    lines = []
    for k, frame in enumerate(dets):
        for d in frame:
            left, top, w, h = d.bbox.to_ltwh()
            lines.append(f"{k + 1},-1,{left:.2f},{top:.2f},{w:.2f},{h:.2f},{d.confidence:.2f},-1,-1,-1")
    Path(path).write_text("".join(line + "\n" for line in lines))


@dataclass
class SequenceLayout:
    root: Path
    name: str
    frame_rate: float
    seq_length: int
    im_width: int
    im_height: int
    im_dir: str = "img1"
    im_ext: str = ".pgm"

    @property
    def frame_dir(self) -> Path:
        return self.root / self.im_dir

    @property
    def det_path(self) -> Path:
        return self.root / "det" / "det.txt"

    @property
    def gt_path(self) -> Path:
        return self.root / "gt" / "gt.txt"

    def frame_paths(self) -> list[Path]:
        files = list_frame_files(self.frame_dir)
        return files

    @classmethod
    def load(cls, root) -> "SequenceLayout":
        root = Path(root)
        ini = root / "seqinfo.ini"
        if not ini.is_file():
            raise LayoutError(f"{root}: missing seqinfo.ini")
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read(ini)
            sec = cp["Sequence"]
            layout = cls(
                root=root,
                name=sec.get("name", root.name),
                frame_rate=float(sec["frameRate"]),
                seq_length=int(sec["seqLength"]),
                im_width=int(sec["imWidth"]),
                im_height=int(sec["imHeight"]),
                im_dir=sec.get("imDir", "img1"),
                im_ext=sec.get("imExt", ".pgm"),
            )
        except (KeyError, ValueError, configparser.Error) as exc:
            raise LayoutError(f"{ini}: bad or missing field ({exc})") from None
        layout.validate()
        return layout

    def validate(self) -> None:
        if self.frame_rate <= 0:
            raise LayoutError(f"{self.root}: frameRate must be positive")
        if self.seq_length < 0:
            raise LayoutError(f"{self.root}: negative seqLength")
        if not self.frame_dir.is_dir():
            raise LayoutError(f"{self.root}: missing frame directory {self.im_dir}/")
        files = self.frame_paths()
        numbers = []
        for f in files:
            try:
                numbers.append(int(f.stem))
            except ValueError:
                raise LayoutError(f"{f}: frame file name is not a frame number") from None
        expected = list(range(1, self.seq_length + 1))
        if numbers != expected:
            missing = sorted(set(expected) - set(numbers))
            extra = sorted(set(numbers) - set(expected))
            raise LayoutError(
                f"{self.frame_dir}: frames must cover 1..{self.seq_length}"
                + (f"; missing {missing[:5]}" if missing else "")
                + (f"; unexpected {extra[:5]}" if extra else "")
            )
        if not self.det_path.is_file():
            raise LayoutError(f"{self.root}: missing det/det.txt")

    def write_seqinfo(self) -> None:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["Sequence"] = {
            "name": self.name,
            "imDir": self.im_dir,
            "frameRate": f"{self.frame_rate:g}",
            "seqLength": str(self.seq_length),
            "imWidth": str(self.im_width),
            "imHeight": str(self.im_height),
            "imExt": self.im_ext,
        }
        with open(self.root / "seqinfo.ini", "w") as fh:
            cp.write(fh)


class FrameSource:
    """Lazily decoded frames of a sequence, indexable 0-based."""

    def __init__(self, paths):
        self.paths = list(paths)

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, k: int) -> GrayFrame:
        return load_frame(self.paths[k])
