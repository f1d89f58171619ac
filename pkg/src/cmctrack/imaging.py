"""Grayscale frames, Netpbm I/O, Gaussian pyramids and bilinear sampling."""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Point2

# 5-tap binomial kernel used for pyramid smoothing.
BINOMIAL5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
MIN_LEVEL_SIZE = 8


class ImageFormatError(ValueError):
    pass


class PyramidError(ValueError):
    pass


class OutOfBounds(IndexError):
    pass


@dataclass(frozen=True)
class GrayFrame:
    """Single-channel 8-bit image; ``data`` has shape (height, width)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"frame data must be 2-D, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255):
                raise ValueError("frame intensities must lie in [0, 255]")
            arr = np.rint(arr).astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_bytes(cls, width: int, height: int, raw: bytes) -> "GrayFrame":
        if len(raw) != width * height:
            raise ValueError(f"expected {width * height} bytes, got {len(raw)}")
        return cls(np.frombuffer(raw, dtype=np.uint8).reshape(height, width))


def _read_header(buf: bytes, n_fields: int) -> tuple[list[bytes], int]:
    """Tokenise a Netpbm header, skipping comments; returns tokens and data offset."""
    tokens: list[bytes] = []
    pos = 0
    n = len(buf)
    while len(tokens) < n_fields:
        while pos < n and buf[pos : pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise ImageFormatError("truncated Netpbm header")
        if buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(buf[start:pos])
    # exactly one whitespace byte separates the header from the raster
    if pos >= n or not buf[pos : pos + 1].isspace():
        raise ImageFormatError("truncated Netpbm header")
    return tokens, pos + 1


def decode_netpbm(buf: bytes) -> GrayFrame:
    if len(buf) < 2:
        raise ImageFormatError("file too short")
    magic = buf[:2]
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"unsupported image format {magic!r} (need binary P5/P6)")
    tokens, offset = _read_header(buf, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise ImageFormatError(f"malformed Netpbm header: {tokens}") from exc
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"only maxval 255 is supported, got {maxval}")
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    raster = buf[offset:]
    if len(raster) < expected:
        raise ImageFormatError(
            f"raster has {len(raster)} bytes, header implies {expected} ({width}x{height})"
        )
    if len(raster) > expected:
        raise ImageFormatError(
            f"raster has {len(raster)} bytes, more than header implies ({expected})"
        )
    pixels = np.frombuffer(raster, dtype=np.uint8)
    if channels == 1:
        return GrayFrame(pixels.reshape(height, width))
    rgb = pixels.reshape(height, width, 3).astype(float)
    lum = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return GrayFrame(np.clip(np.floor(lum + 0.5), 0, 255).astype(np.uint8))


def load_frame(path) -> GrayFrame:
    with open(path, "rb") as fh:
        buf = fh.read()
    try:
        return decode_netpbm(buf)
    except ImageFormatError as exc:
        raise ImageFormatError(f"{path}: {exc}") from None


def encode_pgm(frame: GrayFrame) -> bytes:
    header = f"P5\n{frame.width} {frame.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(frame.data).tobytes()


def save_pgm(frame: GrayFrame, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(frame))


_NUM = re.compile(r"(\d+)")


def list_frame_files(directory) -> list[Path]:
    """Image files in ``directory`` ordered by the number in their file name."""
    exts = {".pgm", ".ppm"}
    files = [Path(directory) / f for f in os.listdir(directory)]
    files = [f for f in files if f.suffix.lower() in exts]

    def key(p: Path):
        m = _NUM.findall(p.stem)
        return (int(m[-1]) if m else -1, p.name)

    return sorted(files, key=key)


def smooth(img: np.ndarray) -> np.ndarray:
    """Separable 5-tap binomial blur with clamp-to-edge borders."""
    p = np.pad(img, 2, mode="edge")
    k = BINOMIAL5
    rows = k[0] * p[:, :-4] + k[1] * p[:, 1:-3] + k[2] * p[:, 2:-2] + k[3] * p[:, 3:-1] + k[4] * p[:, 4:]
    return k[0] * rows[:-4] + k[1] * rows[1:-3] + k[2] * rows[2:-2] + k[3] * rows[3:-1] + k[4] * rows[4:]


def downsample(img: np.ndarray) -> np.ndarray:
    """``smooth(img)[::2, ::2]`` cropped to floor(h/2) x floor(w/2), evaluated only where kept."""
    h, w = img.shape
    h2, w2 = h // 2, w // 2
    p = np.pad(img, 2, mode="edge")
    k = BINOMIAL5
    # horizontal pass at even output columns only
    cols = [p[:, i : i + 2 * w2 : 2] for i in range(5)]
    rows = k[0] * cols[0] + k[1] * cols[1] + k[2] * cols[2] + k[3] * cols[3] + k[4] * cols[4]
    taps = [rows[i : i + 2 * h2 : 2] for i in range(5)]
    return k[0] * taps[0] + k[1] * taps[1] + k[2] * taps[2] + k[3] * taps[3] + k[4] * taps[4]


@dataclass(frozen=True)
class Pyramid:
    levels: list = field(default_factory=list)
    _padded: dict = field(default_factory=dict, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.levels)

    def padded(self, level: int, pad: int) -> np.ndarray:
        """Edge-replicated copy of a level, cached per (level, pad)."""
        key = (level, pad)
        if key not in self._padded:
            self._padded[key] = np.pad(self.levels[level], pad, mode="edge")
        return self._padded[key]

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return [lvl.shape for lvl in self.levels]


def max_levels(width: int, height: int) -> int:
    n = 1
    while min(width >> n, height >> n) >= MIN_LEVEL_SIZE:
        n += 1
    return n


def build_pyramid(frame, levels: int = 3) -> Pyramid:
    if levels < 1:
        raise PyramidError("a pyramid needs at least one level")
    img = frame.data if isinstance(frame, GrayFrame) else np.asarray(frame)
    h, w = img.shape
    if levels > max_levels(w, h):
        raise PyramidError(
            f"{levels} levels is too many for a {w}x{h} image "
            f"(smallest level must be >= {MIN_LEVEL_SIZE} px)"
        )
    out = [np.asarray(img, dtype=np.float64)]
    for _ in range(levels - 1):
        out.append(downsample(out[-1]))
    for lvl in out:
        lvl.setflags(write=False)
    return Pyramid(out)


def bilinear(img: np.ndarray, xs, ys) -> np.ndarray:
    """Vectorised bilinear lookup; coordinates must already be inside the image."""
    h, w = img.shape
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    np.clip(x0, 0, w - 2, out=x0)
    np.clip(y0, 0, h - 2, out=y0)
    fx = xs - x0
    fy = ys - y0
    flat = img.reshape(-1)
    i00 = y0 * w + x0
    v00 = flat[i00]
    v01 = flat[i00 + 1]
    v10 = flat[i00 + w]
    v11 = flat[i00 + w + 1]
    top = v00 + fx * (v01 - v00)
    bot = v10 + fx * (v11 - v10)
    return top + fy * (bot - top)


def sample_bilinear(img: np.ndarray, p: Point2) -> float:
    img = np.asarray(img, dtype=float)
    h, w = img.shape
    if not (0.0 <= p.x <= w - 1 and 0.0 <= p.y <= h - 1):
        raise OutOfBounds(f"sample at ({p.x}, {p.y}) outside {w}x{h} image")
    if w == 1 or h == 1:
        # degenerate strip: fall back to 1-D interpolation
        line = img.reshape(-1)
        t = p.x if h == 1 else p.y
        i = min(int(np.floor(t)), line.size - 2) if line.size > 1 else 0
        if line.size == 1:
            return float(line[0])
        return float(line[i] + (t - i) * (line[i + 1] - line[i]))
    return float(bilinear(img, np.array([p.x]), np.array([p.y]))[0])
