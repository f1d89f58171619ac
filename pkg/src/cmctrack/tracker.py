"""Per-frame tracking loop: camera motion, prediction, association, lifecycle."""
from __future__ import annotations

import enum
import time
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .association import build_cost_matrix, solve_assignment
from .geometry import BBox, CameraMotion, boxes_to_array
from .imaging import GrayFrame
from .kalman import NoiseConfig, PredictionFailed, TrackState, init_state, predict, update
from .motion import MotionConfig, MotionEstimate, estimate_motion, frame_pyramid

STAGES = ("motion", "predict", "associate", "update")


class InputError(ValueError):
    pass


class TrackStatus(enum.Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DEAD = "dead"


@dataclass(frozen=True)
class Detection:
    bbox: BBox
    confidence: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass
class Track:
    id: int
    state: TrackState
    hits: int = 1
    hit_streak: int = 1
    time_since_update: int = 0
    status: TrackStatus = TrackStatus.TENTATIVE
    score: float = 1.0

    @property
    def bbox(self) -> BBox:
        return self.state.bbox


@dataclass
class FrameOutput:
    frame_index: int
    entries: list[tuple[int, BBox]] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)
    motion: CameraMotion = field(default_factory=CameraMotion.identity)


@dataclass
class TrackerConfig:
    max_age: int = 10
    min_hits: int = 3
    iou_threshold: float = 0.3
    min_confidence: float = 0.3
    emit_coasting: bool = False
    warmup_output: bool = False
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    motion: MotionConfig = field(default_factory=MotionConfig)

    def __post_init__(self):
        if self.max_age < 1 or self.min_hits < 1:
            raise ValueError("max_age and min_hits must be >= 1")
        if not 0.0 <= self.iou_threshold <= 1.0:
            raise ValueError("iou_threshold must lie in [0, 1]")


class Tracker:
    """Stateful tracker for one sequence.  Frames must be fed in order.

    The instance pickles cleanly, so a run can be checkpointed between
    frames and resumed with identical output.
    """

    def __init__(self, cfg: TrackerConfig | None = None):
        self.cfg = cfg or TrackerConfig()
        self.tracks: list[Track] = []
        self.next_id = 1
        self.frame_index = 0
        self._prev_pyramid = None
        self._frame_shape: tuple[int, int] | None = None
        self.timings: dict[str, list[float]] = defaultdict(list)
        self.last_motion = MotionEstimate.identity()

    def _rng(self) -> np.random.Generator:
        # per-frame stream: resuming from a checkpoint replays the same draws
        return np.random.default_rng([self.cfg.motion.seed, self.frame_index])

    def _estimate(self, frame: GrayFrame | None) -> CameraMotion:
        if frame is None:
            self._prev_pyramid = None
            return CameraMotion.identity()
        self._frame_shape = frame.data.shape
        pyr = frame_pyramid(frame, self.cfg.motion)
        if self._prev_pyramid is None or self._prev_pyramid.shapes != pyr.shapes:
            est = MotionEstimate.identity()
        else:
            est = estimate_motion(
                None, None, self.cfg.motion, rng=self._rng(), prev_pyramid=self._prev_pyramid, curr_pyramid=pyr
            )
        self._prev_pyramid = pyr
        self.last_motion = est
        return est.motion

    def step(
        self,
        frame: GrayFrame | None,
        detections: list[Detection],
        motion: CameraMotion | None = None,
    ) -> FrameOutput:
        """Advance one frame.

        ``motion`` overrides estimation (e.g. a known camera transform); when
        both it and ``frame`` are None the identity motion is used.
        """
        cfg = self.cfg
        t0 = time.perf_counter()
        if motion is None:
            motion = self._estimate(frame)
        elif frame is not None:
            self._frame_shape = frame.data.shape
        t1 = time.perf_counter()

        missed: list[Track] = []
        live: list[Track] = []
        for trk in self.tracks:
            try:
                trk.state = predict(trk.state, motion, cfg.noise)
                live.append(trk)
            except PredictionFailed:
                missed.append(trk)
        t2 = time.perf_counter()

        dets = [d for d in detections if d.confidence >= cfg.min_confidence]
        cost = build_cost_matrix(
            np.array([t.state.mean for t in live]).reshape(-1, 4), boxes_to_array([d.bbox for d in dets])
        )
        result = solve_assignment(cost, cfg.iou_threshold)
        t3 = time.perf_counter()

        for ti, di in result.matches:
            trk = live[ti]
            trk.state = update(trk.state, dets[di].bbox, cfg.noise)
            trk.hits += 1
            trk.hit_streak += 1
            trk.time_since_update = 0
            trk.score = dets[di].confidence
            if trk.status is TrackStatus.TENTATIVE and trk.hit_streak >= cfg.min_hits:
                trk.status = TrackStatus.CONFIRMED
        for ti in result.unmatched_tracks:
            missed.append(live[ti])
        for trk in missed:
            trk.time_since_update += 1
            trk.hit_streak = 0
            if trk.status is TrackStatus.TENTATIVE or trk.time_since_update > cfg.max_age:
                trk.status = TrackStatus.DEAD
        spawned = []
        for di in result.unmatched_detections:
            trk = Track(self.next_id, init_state(dets[di].bbox, cfg.noise), score=dets[di].confidence)
            self.next_id += 1
            if cfg.min_hits <= 1:
                trk.status = TrackStatus.CONFIRMED
            spawned.append(trk)
        self.tracks = [t for t in self.tracks if t.status is not TrackStatus.DEAD] + spawned
        t4 = time.perf_counter()

        out = FrameOutput(self.frame_index, motion=motion)
        # SORT convention: during the first min_hits frames nothing could be
        # confirmed yet, so freshly matched tracks are reported as they are
        warmup = cfg.warmup_output and self.frame_index < cfg.min_hits
        for trk in self.tracks:
            if trk.status is TrackStatus.TENTATIVE and warmup:
                out.entries.append((trk.id, trk.bbox))
                out.scores.append(trk.score)
                continue
            if trk.status is not TrackStatus.CONFIRMED:
                continue
            if trk.time_since_update == 0 or (cfg.emit_coasting and self._in_view(trk.bbox)):
                out.entries.append((trk.id, trk.bbox))
                out.scores.append(trk.score)
        for name, dt in zip(STAGES, (t1 - t0, t2 - t1, t3 - t2, t4 - t3)):
            self.timings[name].append(dt)
        self.frame_index += 1
        return out

    def _in_view(self, box: BBox) -> bool:
        if self._frame_shape is None:
            return True
        h, w = self._frame_shape
        return 0.0 <= box.x_c <= w and 0.0 <= box.y_c <= h


def run_sequence(frames, det_source, cfg: TrackerConfig | None = None, motions=None) -> list[FrameOutput]:
    """Run a fresh tracker over a whole sequence.

    ``frames`` and ``det_source`` are indexable per frame (0-based); frames
    may be None entries when ``motions`` supplies the camera transforms.
    """
    n = len(det_source)
    if frames is not None and len(frames) != n:
        raise InputError(f"{len(frames)} frames but detections for {n}")
    if motions is not None and len(motions) != n:
        raise InputError(f"{len(motions)} motions but detections for {n}")
    tracker = Tracker(cfg)
    outputs = []
    for k in range(n):
        frame = frames[k] if frames is not None else None
        m = motions[k] if motions is not None else None
        outputs.append(tracker.step(frame, det_source[k], motion=m))
    return outputs


__all__ = [
    "Detection",
    "FrameOutput",
    "InputError",
    "Track",
    "TrackStatus",
    "Tracker",
    "TrackerConfig",
    "run_sequence",
]
