"""Deterministic synthetic MOT sequences with a scripted camera.

Coordinate convention: each frame k has a 2x3 affine ``V_k`` mapping world
pixels to viewport pixels (x right, y down).  A camera panning by +t in the
world therefore moves scene content by -t in the viewport, and the
inter-frame motion is ``V_k o V_{k-1}^-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import BBox, CameraMotion
from .imaging import GrayFrame, bilinear
from .metrics import TrackSequence
from .tracker import Detection

MIN_VISIBLE = 0.25


class ScriptError(ValueError):
    pass


@dataclass(frozen=True)
class BoxSpec:
    box: BBox  # world coordinates
    texture_seed: int = 0


@dataclass
class SynthScript:
    world_size: tuple[int, int]
    viewport: tuple[int, int]
    boxes: list[BoxSpec]
    camera_path: list[np.ndarray]
    jitter_sigma: float = 0.0
    drop_prob: float = 0.0
    fp_rate: float = 0.0
    seed: int = 0
    frame_rate: float = 30.0

    def __post_init__(self):
        self.camera_path = [np.asarray(v, dtype=float).reshape(2, 3) for v in self.camera_path]
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ScriptError("drop_prob must lie in [0, 1]")
        if self.fp_rate < 0 or self.jitter_sigma < 0:
            raise ScriptError("fp_rate and jitter_sigma must be non-negative")
        if self.frame_rate <= 0:
            raise ScriptError("frame_rate must be positive")
        for k, v in enumerate(self.camera_path):
            if abs(np.linalg.det(v[:, :2])) < 1e-12:
                raise ScriptError(f"camera transform {k} is not invertible")

    @property
    def num_frames(self) -> int:
        return len(self.camera_path)


def pan_zoom_path(
    n_frames: int,
    viewport: tuple[int, int],
    start: tuple[float, float],
    pan: tuple[float, float] = (0.0, 0.0),
    zoom: float = 1.0,
) -> list[np.ndarray]:
    """Camera centred on ``start + k * pan`` (world px) with scale ``zoom ** k``."""
    if zoom <= 0:
        raise ScriptError("zoom must be positive")
    vw, vh = viewport
    path = []
    for k in range(n_frames):
        z = zoom**k
        cx = start[0] + k * pan[0]
        cy = start[1] + k * pan[1]
        path.append(np.array([[z, 0.0, vw / 2 - z * cx], [0.0, z, vh / 2 - z * cy]]))
    return path


def _to3(v: np.ndarray) -> np.ndarray:
    return np.vstack([v, [0.0, 0.0, 1.0]])


def true_motion(script: SynthScript, k: int) -> CameraMotion:
    """Exact viewport-to-viewport transform from frame k-1 to frame k."""
    if not 1 <= k < script.num_frames:
        raise IndexError(f"frame {k} outside 1..{script.num_frames - 1}")
    m = _to3(script.camera_path[k]) @ np.linalg.inv(_to3(script.camera_path[k - 1]))
    return CameraMotion.affine(m[:2].reshape(-1))


def true_motions(script: SynthScript) -> list[CameraMotion]:
    """Per-frame motions aligned with frame indices (identity for frame 0)."""
    return [CameraMotion.identity()] + [true_motion(script, k) for k in range(1, script.num_frames)]


def _interp_matrix(n_out: int, n_in: int, cell: float) -> np.ndarray:
    pos = np.arange(n_out) / cell
    i0 = np.clip(np.floor(pos).astype(int), 0, n_in - 2)
    f = pos - i0
    m = np.zeros((n_out, n_in))
    m[np.arange(n_out), i0] = 1.0 - f
    m[np.arange(n_out), i0 + 1] = f
    return m


def value_noise(width: int, height: int, rng: np.random.Generator, cells=(48, 24, 12, 6)) -> np.ndarray:
    """Band-limited value noise in [0, 1]: octaves of bilinearly upsampled lattices."""
    out = np.zeros((height, width))
    amp_total = 0.0
    for i, cell in enumerate(cells):
        gw = int(np.ceil(width / cell)) + 2
        gh = int(np.ceil(height / cell)) + 2
        grid = rng.random((gh, gw))
        amp = 0.6**i
        out += amp * (_interp_matrix(height, gh, cell) @ grid @ _interp_matrix(width, gw, cell).T)
        amp_total += amp
    out /= amp_total
    lo, hi = out.min(), out.max()
    return (out - lo) / max(hi - lo, 1e-12)


def _box_texture(w: int, h: int, seed: int) -> np.ndarray:
    """High-contrast aperiodic patch with a dark frame.

    A regular checkerboard would alias in the coarse pyramid levels and pull
    optical flow onto the wrong period, so the patch is multi-scale value noise
    pushed towards black and white.
    """
    rng = np.random.default_rng(seed)
    noise = value_noise(max(w, 2), max(h, 2), rng, cells=(32, 16, 8, 4))[:h, :w]
    tex = 127.5 + 112.5 * np.tanh(4.0 * (noise - 0.5))
    tex[:3, :] = 10
    tex[-3:, :] = 10
    tex[:, :3] = 10
    tex[:, -3:] = 10
    return tex


def render_world(script: SynthScript) -> np.ndarray:
    W, H = script.world_size
    rng = np.random.default_rng([script.seed, 1])
    world = 40.0 + 175.0 * value_noise(W, H, rng)
    for spec in script.boxes:
        b = spec.box
        x0, y0 = int(round(b.left)), int(round(b.top))
        x1, y1 = int(round(b.right)), int(round(b.bottom))
        x0c, y0c, x1c, y1c = max(x0, 0), max(y0, 0), min(x1, W), min(y1, H)
        if x1c <= x0c or y1c <= y0c:
            continue
        tex = _box_texture(x1 - x0, y1 - y0, spec.texture_seed)
        world[y0c:y1c, x0c:x1c] = tex[y0c - y0 : y1c - y0, x0c - x0 : x1c - x0]
    return world


def render_frame(script: SynthScript, k: int, world: np.ndarray | None = None) -> GrayFrame:
    world = render_world(script) if world is None else world
    vw, vh = script.viewport
    inv = np.linalg.inv(_to3(script.camera_path[k]))
    us, vs = np.meshgrid(np.arange(vw, dtype=float), np.arange(vh, dtype=float))
    wx = inv[0, 0] * us + inv[0, 1] * vs + inv[0, 2]
    wy = inv[1, 0] * us + inv[1, 1] * vs + inv[1, 2]
    H, W = world.shape
    np.clip(wx, 0, W - 1, out=wx)
    np.clip(wy, 0, H - 1, out=wy)
    img = bilinear(world, wx, wy)
    return GrayFrame(np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8))


def project_box(v: np.ndarray, box: BBox, viewport: tuple[int, int]) -> BBox | None:
    """World box seen through ``v``, clipped to the viewport; None if < 25 % visible."""
    xs = np.array([box.left, box.right, box.right, box.left])
    ys = np.array([box.top, box.top, box.bottom, box.bottom])
    px = v[0, 0] * xs + v[0, 1] * ys + v[0, 2]
    py = v[1, 0] * xs + v[1, 1] * ys + v[1, 2]
    x1, x2, y1, y2 = px.min(), px.max(), py.min(), py.max()
    full = (x2 - x1) * (y2 - y1)
    vw, vh = viewport
    cx1, cx2 = max(x1, 0.0), min(x2, float(vw))
    cy1, cy2 = max(y1, 0.0), min(y2, float(vh))
    if cx2 <= cx1 or cy2 <= cy1:
        return None
    if (cx2 - cx1) * (cy2 - cy1) < MIN_VISIBLE * full:
        return None
    return BBox.from_xyxy(cx1, cy1, cx2, cy2)


def ground_truth(script: SynthScript) -> TrackSequence:
    frames = []
    for v in script.camera_path:
        frame = []
        for i, spec in enumerate(script.boxes):
            b = project_box(v, spec.box, script.viewport)
            if b is not None:
                frame.append((i + 1, b))
        frames.append(frame)
    return TrackSequence(frames)


def corrupt(script: SynthScript, gt: TrackSequence) -> list[list[Detection]]:
    rng = np.random.default_rng([script.seed, 2])
    vw, vh = script.viewport
    out = []
    for frame in gt.frames:
        dets = []
        for _, b in frame:
            if script.drop_prob > 0 and rng.random() < script.drop_prob:
                continue
            if script.jitter_sigma > 0:
                j = rng.normal(0.0, script.jitter_sigma, 4)
                b = BBox(b.x_c + j[0], b.y_c + j[1], max(b.w + j[2], 2.0), max(b.h + j[3], 2.0))
            dets.append(Detection(b, 1.0))
        if script.fp_rate > 0:
            for _ in range(int(rng.poisson(script.fp_rate))):
                w, h = rng.uniform(30, 120, 2)
                x, y = rng.uniform(w / 2, vw - w / 2), rng.uniform(h / 2, vh - h / 2)
                dets.append(Detection(BBox(x, y, w, h), float(rng.uniform(0.5, 1.0))))
        out.append(dets)
    return out


@dataclass
class SynthSequence:
    script: SynthScript
    frames: list[GrayFrame]
    gt: TrackSequence
    detections: list[list[Detection]]
    motions: list[CameraMotion] = field(default_factory=list)


def render_sequence(script: SynthScript, with_frames: bool = True) -> SynthSequence:
    gt = ground_truth(script)
    seen = {i for frame in gt.frames for i, _ in frame}
    missing = [i + 1 for i in range(len(script.boxes)) if i + 1 not in seen]
    if missing:
        raise ScriptError(f"boxes {missing} are never at least {MIN_VISIBLE:.0%} visible")
    frames = []
    if with_frames:
        world = render_world(script)
        frames = [render_frame(script, k, world) for k in range(script.num_frames)]
    return SynthSequence(script, frames, gt, corrupt(script, gt), true_motions(script))


def place_boxes(
    n: int,
    region: tuple[float, float, float, float],
    rng: np.random.Generator,
    size_range: tuple[float, float] = (60.0, 140.0),
    gap: float = 40.0,
    max_tries: int = 10000,
) -> list[BoxSpec]:
    """Non-overlapping boxes with centres inside ``region`` = (x0, y0, x1, y1)."""
    x0, y0, x1, y1 = region
    boxes: list[BoxSpec] = []
    for _ in range(max_tries):
        if len(boxes) == n:
            break
        w, h = rng.uniform(*size_range, 2)
        cand = BBox(float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)), float(w), float(h))
        clear = all(
            abs(cand.x_c - o.box.x_c) > (cand.w + o.box.w) / 2 + gap
            or abs(cand.y_c - o.box.y_c) > (cand.h + o.box.h) / 2 + gap
            for o in boxes
        )
        if clear:
            boxes.append(BoxSpec(cand, int(rng.integers(0, 2**31 - 1))))
    if len(boxes) < n:
        raise ScriptError(f"could only place {len(boxes)} of {n} boxes")
    return boxes


def default_script(
    n_frames: int = 100,
    n_boxes: int = 8,
    viewport: tuple[int, int] = (1280, 720),
    pan: tuple[float, float] = (4.0, 1.0),
    zoom: float = 1.002,
    jitter_sigma: float = 0.0,
    drop_prob: float = 0.0,
    fp_rate: float = 0.0,
    seed: int = 0,
    layout_seed: int = 7,
    frame_rate: float = 30.0,
) -> SynthScript:
    """Pan + zoom sequence with boxes laid out over the first view."""
    vw, vh = viewport
    margin = 300
    end_x = pan[0] * n_frames
    end_y = pan[1] * n_frames
    world = (int(vw + abs(end_x) + 2 * margin), int(vh + abs(end_y) + 2 * margin))
    start = (margin + vw / 2 + max(0.0, -end_x), margin + vh / 2 + max(0.0, -end_y))
    path = pan_zoom_path(n_frames, viewport, start, pan, zoom)
    first_view = (start[0] - vw / 2 + 80, start[1] - vh / 2 + 80, start[0] + vw / 2 - 80, start[1] + vh / 2 - 80)
    boxes = place_boxes(n_boxes, first_view, np.random.default_rng(layout_seed))
    return SynthScript(
        world_size=world,
        viewport=viewport,
        boxes=boxes,
        camera_path=path,
        jitter_sigma=jitter_sigma,
        drop_prob=drop_prob,
        fp_rate=fp_rate,
        seed=seed,
        frame_rate=frame_rate,
    )
