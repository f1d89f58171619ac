"""INI-style configuration for the tracker and the synthetic generator.

A config file holds flat ``key = value`` pairs under ``[tracker]``,
``[motion]`` and ``[noise]``.  Keys left out keep their dataclass defaults.
Synthetic scripts use the same format with ``[synth]`` and ``[camera]``
sections, plus optional ``[box.N]`` sections for explicit world boxes.
"""
from __future__ import annotations

import configparser
import dataclasses

from .geometry import BBox
from .kalman import NoiseConfig
from .motion import MotionConfig
from .synth import BoxSpec, SynthScript, default_script
from .tracker import TrackerConfig


class ConfigError(ValueError):
    pass


_SECTIONS = {"tracker": TrackerConfig, "motion": MotionConfig, "noise": NoiseConfig}
_NESTED = {"noise", "motion"}


def _coerce(raw: str, default, where: str):
    try:
        if isinstance(default, bool):
            v = raw.strip().lower()
            if v in ("1", "true", "yes", "on"):
                return True
            if v in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {type(default).__name__}") from None


def _field_defaults(cls) -> dict:
    out = {}
    for f in dataclasses.fields(cls):
        if f.name in _NESTED:
            continue
        out[f.name] = f.default if f.default is not dataclasses.MISSING else f.default_factory()
    return out


def _read_ini(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cp


def read_sections(path=None) -> dict[str, dict[str, str]]:
    """Raw string values per known section; unknown sections or keys are errors."""
    values: dict[str, dict[str, str]] = {s: {} for s in _SECTIONS}
    if path is None:
        return values
    cp = _read_ini(path)
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"{path}: unknown section [{sec}]")
        allowed = _field_defaults(_SECTIONS[sec])
        for key, raw in cp[sec].items():
            if key not in allowed:
                raise ConfigError(f"{path}: unknown key {key!r} in [{sec}]")
            values[sec][key] = raw
    return values


def build_tracker_config(
    values: dict[str, dict[str, str]] | None = None,
    overrides: dict[str, dict[str, object]] | None = None,
    frame_rate: float | None = None,
) -> TrackerConfig:
    """Typed TrackerConfig from raw file values plus already-typed overrides.

    ``noise.delta_t`` defaults to the rounded frame period when a frame rate
    is known and the key is not set explicitly.
    """
    values = values or {}
    overrides = overrides or {}
    typed: dict[str, dict] = {}
    for sec, cls in _SECTIONS.items():
        defaults = _field_defaults(cls)
        kw = {k: _coerce(v, defaults[k], f"[{sec}] {k}") for k, v in values.get(sec, {}).items()}
        for k, v in overrides.get(sec, {}).items():
            if v is not None:
                kw[k] = v
        typed[sec] = kw
    if frame_rate is not None and "delta_t" not in typed["noise"]:
        typed["noise"]["delta_t"] = NoiseConfig.delta_t_for(frame_rate)
    try:
        noise = NoiseConfig(**typed["noise"])
        motion = MotionConfig(**typed["motion"])
        return TrackerConfig(noise=noise, motion=motion, **typed["tracker"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_tracker_config(path=None, overrides=None, frame_rate: float | None = None) -> TrackerConfig:
    return build_tracker_config(read_sections(path), overrides, frame_rate)


def render_config(cfg: TrackerConfig) -> str:
    """Config file text that reproduces ``cfg``."""
    lines = []
    for sec, obj in (("tracker", cfg), ("motion", cfg.motion), ("noise", cfg.noise)):
        lines.append(f"[{sec}]")
        for f in dataclasses.fields(obj):
            if f.name in _NESTED:
                continue
            v = getattr(obj, f.name)
            lines.append(f"{f.name} = {str(v).lower() if isinstance(v, bool) else v}")
        lines.append("")
    return "\n".join(lines)


SYNTH_DEFAULTS = {
    "frames": 100,
    "boxes": 8,
    "width": 1280,
    "height": 720,
    "frame_rate": 30.0,
    "seed": 0,
    "layout_seed": 7,
    "jitter_sigma": 0.0,
    "drop_prob": 0.0,
    "fp_rate": 0.0,
}
CAMERA_DEFAULTS = {"pan_x": 4.0, "pan_y": 1.0, "zoom": 1.002}
BOX_KEYS = ("x", "y", "w", "h")


def load_synth_script(path=None, seed: int | None = None) -> SynthScript:
    """SynthScript from a script file (or the built-in default when ``path`` is None).

    Explicit ``[box.N]`` sections give world-frame centre/size (``x, y, w, h``)
    and an optional ``texture_seed``; without them boxes are placed at random
    over the first view using ``layout_seed``.
    """
    syn = dict(SYNTH_DEFAULTS)
    cam = dict(CAMERA_DEFAULTS)
    boxes: list[BoxSpec] = []
    if path is not None:
        cp = _read_ini(path)
        for sec in cp.sections():
            if sec == "synth":
                target, defaults = syn, SYNTH_DEFAULTS
            elif sec == "camera":
                target, defaults = cam, CAMERA_DEFAULTS
            elif sec.startswith("box."):
                boxes.append(_parse_box(path, sec, cp[sec]))
                continue
            else:
                raise ConfigError(f"{path}: unknown section [{sec}]")
            for key, raw in cp[sec].items():
                if key not in defaults:
                    raise ConfigError(f"{path}: unknown key {key!r} in [{sec}]")
                target[key] = _coerce(raw, defaults[key], f"[{sec}] {key}")
    if seed is not None:
        syn["seed"] = seed
    try:
        script = default_script(
            n_frames=syn["frames"],
            n_boxes=syn["boxes"] if not boxes else 0,
            viewport=(syn["width"], syn["height"]),
            pan=(cam["pan_x"], cam["pan_y"]),
            zoom=cam["zoom"],
            jitter_sigma=syn["jitter_sigma"],
            drop_prob=syn["drop_prob"],
            fp_rate=syn["fp_rate"],
            seed=syn["seed"],
            layout_seed=syn["layout_seed"],
            frame_rate=syn["frame_rate"],
        )
        if boxes:
            script = dataclasses.replace(script, boxes=boxes)
    except ValueError as exc:
        raise ConfigError(f"bad synthetic script: {exc}") from None
    return script


def _parse_box(path, sec: str, items) -> BoxSpec:
    vals = {}
    for key in BOX_KEYS:
        if key not in items:
            raise ConfigError(f"{path}: [{sec}] is missing {key!r}")
        vals[key] = _coerce(items[key], 0.0, f"[{sec}] {key}")
    extra = set(items) - set(BOX_KEYS) - {"texture_seed"}
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)} in [{sec}]")
    try:
        box = BBox(vals["x"], vals["y"], vals["w"], vals["h"])
    except ValueError as exc:
        raise ConfigError(f"{path}: [{sec}] {exc}") from None
    return BoxSpec(box, _coerce(items.get("texture_seed", "0"), 0, f"[{sec}] texture_seed"))


__all__ = [
    "ConfigError",
    "build_tracker_config",
    "load_synth_script",
    "load_tracker_config",
    "read_sections",
    "render_config",
]
