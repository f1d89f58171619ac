"""Four-state box filter whose prediction is driven by the camera motion.

The state is ``[x_c, y_c, w, h]`` with no velocity terms: prediction moves
only the box center through the inter-frame transform and keeps the size,
and the measurement is the full state (H = I).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import BBox, CameraMotion, DegenerateProjection

SIGMA_Q = 0.05
SIGMA_R = 0.00625
INIT_COV_FACTOR = 10.0


class PredictionFailed(ArithmeticError):
    pass


@dataclass(frozen=True)
class NoiseConfig:
    sigma_q: float = SIGMA_Q
    sigma_r: float = SIGMA_R
    delta_t: float = 0.033

    def __post_init__(self):
        if min(self.sigma_q, self.sigma_r, self.delta_t) <= 0:
            raise ValueError("noise factors and delta_t must be strictly positive")

    @staticmethod
    def delta_t_for(frame_rate: float) -> float:
        """Frame period rounded to milliseconds: 30 FPS -> 0.033, 10 FPS -> 0.1."""
        if frame_rate <= 0:
            raise ValueError("frame rate must be positive")
        return round(1.0 / frame_rate, 3)

    @classmethod
    def for_frame_rate(cls, frame_rate: float, **kw) -> "NoiseConfig":
        return cls(delta_t=cls.delta_t_for(frame_rate), **kw)

    @property
    def Q(self) -> np.ndarray:
        return np.eye(4) * (self.sigma_q**2) * self.delta_t

    @property
    def R(self) -> np.ndarray:
        return np.eye(4) * (self.sigma_r**2) * self.delta_t


@dataclass(frozen=True)
class TrackState:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(4)
        cov = np.array(self.covariance, dtype=float).reshape(4, 4)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def bbox(self) -> BBox:
        return BBox(*(float(v) for v in self.mean))


def init_state(det: BBox, cfg: NoiseConfig) -> TrackState:
    var = INIT_COV_FACTOR * cfg.sigma_r**2 * cfg.delta_t
    return TrackState(det.as_array(), np.eye(4) * var)


def predict(s: TrackState, m: CameraMotion, cfg: NoiseConfig) -> TrackState:
    x, y, w, h = s.mean
    try:
        if m.is_identity:
            nx, ny = x, y
        else:
            nx, ny = m.apply(x, y)
        J2 = m.jacobian(x, y)
    except DegenerateProjection as exc:
        raise PredictionFailed(str(exc)) from exc
    if not (np.isfinite(nx) and np.isfinite(ny)):
        raise PredictionFailed("projected center is not finite")
    J = np.eye(4)
    J[:2, :2] = J2
    P = J @ s.covariance @ J.T + cfg.Q
    P = 0.5 * (P + P.T)
    return TrackState(np.array([nx, ny, w, h]), P)


def update(s: TrackState, z: BBox, cfg: NoiseConfig) -> TrackState:
    P = s.covariance
    R = cfg.R
    S = P + R
    try:
        K = np.linalg.solve(S, P).T  # P S^-1 (both symmetric)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("innovation covariance is singular") from exc
    innovation = z.as_array() - s.mean
    mean = s.mean + K @ innovation
    IK = np.eye(4) - K
    P_new = IK @ P @ IK.T + K @ R @ K.T
    P_new = 0.5 * (P_new + P_new.T)
    return TrackState(mean, P_new)
