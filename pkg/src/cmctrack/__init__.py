"""Camera-motion-compensated multi-object tracking.

SORT-style tracking-by-detection whose Kalman prediction is driven by an
inter-frame affine (or homography) camera motion estimated from sparse
Lucas-Kanade optical flow.
"""
from .association import linear_sum_assignment, solve_assignment
from .geometry import BBox, CameraMotion, MotionKind, iou
from .imaging import GrayFrame, build_pyramid, load_frame
from .kalman import NoiseConfig, TrackState, init_state, predict, update
from .metrics import MetricsReport, TrackSequence, evaluate
from .motion import MotionConfig, MotionEstimate, estimate_affine, estimate_homography, estimate_motion
from .synth import SynthScript, default_script, render_sequence, true_motion
from .tracker import Detection, FrameOutput, Tracker, TrackerConfig, run_sequence

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "CameraMotion",
    "Detection",
    "FrameOutput",
    "GrayFrame",
    "MetricsReport",
    "MotionConfig",
    "MotionEstimate",
    "MotionKind",
    "NoiseConfig",
    "SynthScript",
    "TrackSequence",
    "TrackState",
    "Tracker",
    "TrackerConfig",
    "build_pyramid",
    "default_script",
    "estimate_affine",
    "estimate_homography",
    "estimate_motion",
    "evaluate",
    "init_state",
    "iou",
    "linear_sum_assignment",
    "load_frame",
    "predict",
    "render_sequence",
    "run_sequence",
    "solve_assignment",
    "true_motion",
    "update",
]
