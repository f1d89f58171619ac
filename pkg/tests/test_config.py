import pytest

from cmctrack.config import (
    ConfigError,
    build_tracker_config,
    load_synth_script,
    load_tracker_config,
    read_sections,
    render_config,
)
from cmctrack.kalman import SIGMA_Q, SIGMA_R
from cmctrack.tracker import TrackerConfig


def ini(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_defaults_without_file():
    cfg = load_tracker_config()
    assert cfg == TrackerConfig()
    assert (cfg.noise.sigma_q, cfg.noise.sigma_r) == (SIGMA_Q, SIGMA_R)


def test_file_values_are_typed(tmp_path):
    p = ini(tmp_path, "[tracker]\nmax_age = 5\nemit_coasting = yes\n[motion]\ntechnique = homography\n"
                      "[noise]\nsigma_q = 0.1\n")
    cfg = load_tracker_config(p)
    assert cfg.max_age == 5 and cfg.emit_coasting is True
    assert cfg.motion.technique == "homography"
    assert cfg.noise.sigma_q == 0.1


def test_overrides_beat_file_and_none_is_ignored(tmp_path):
    p = ini(tmp_path, "[tracker]\nmax_age = 5\nmin_hits = 2\n")
    cfg = load_tracker_config(p, {"tracker": {"max_age": 9, "min_hits": None}})
    assert (cfg.max_age, cfg.min_hits) == (9, 2)


def test_delta_t_follows_frame_rate_unless_set(tmp_path):
    assert load_tracker_config(frame_rate=10).noise.delta_t == 0.1
    assert load_tracker_config(frame_rate=30).noise.delta_t == 0.033
    p = ini(tmp_path, "[noise]\ndelta_t = 0.05\n")
    assert load_tracker_config(p, frame_rate=10).noise.delta_t == 0.05


@pytest.mark.parametrize(
    "text, pattern",
    [
        ("[tracker]\nmax_ages = 3\n", "unknown key"),
        ("[tracking]\nmax_age = 3\n", "unknown section"),
        ("[tracker]\nmax_age = three\n", "cannot parse"),
        ("[tracker]\nemit_coasting = maybe\n", "cannot parse"),
        ("[motion]\ntechnique = projective\n", "technique"),
        ("[noise]\nsigma_r = 0\n", "positive"),
        ("max_age = 3\n", "section"),
    ],
)
def test_config_errors(tmp_path, text, pattern):
    with pytest.raises(ConfigError, match=pattern):
        load_tracker_config(ini(tmp_path, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        read_sections(tmp_path / "nope.ini")


def test_render_config_round_trip(tmp_path):
    cfg = build_tracker_config(overrides={"tracker": {"max_age": 4, "emit_coasting": True},
                                          "motion": {"technique": "homography", "seed": 11}})
    p = ini(tmp_path, render_config(cfg))
    assert load_tracker_config(p) == cfg


def test_synth_script_defaults():
    s = load_synth_script()
    assert s.num_frames == 100 and len(s.boxes) == 8 and s.viewport == (1280, 720)


def test_synth_script_file_and_seed(tmp_path):
    p = ini(tmp_path, "[synth]\nframes = 12\nboxes = 3\nwidth = 480\nheight = 360\njitter_sigma = 1.5\n"
                      "[camera]\npan_x = -2\nzoom = 1.0\n")
    s = load_synth_script(p, seed=9)
    assert (s.num_frames, len(s.boxes), s.viewport, s.seed, s.jitter_sigma) == (12, 3, (480, 360), 9, 1.5)


def test_synth_script_explicit_boxes(tmp_path):
    p = ini(tmp_path, "[synth]\nframes = 5\nwidth = 320\nheight = 240\n"
                      "[box.1]\nx = 500\ny = 400\nw = 40\nh = 60\ntexture_seed = 3\n"
                      "[box.2]\nx = 560\ny = 420\nw = 30\nh = 30\n")
    s = load_synth_script(p)
    assert [(b.box.x_c, b.box.w, b.texture_seed) for b in s.boxes] == [(500, 40, 3), (560, 30, 0)]


@pytest.mark.parametrize(
    "text",
    [
        "[synth]\nframes = ten\n",
        "[synth]\ncolour = red\n",
        "[scene]\n",
        "[box.1]\nx = 1\ny = 2\nw = 3\n",
        "[box.1]\nx = 1\ny = 2\nw = -3\nh = 4\n",
        "[synth]\ndrop_prob = 2\n",
        "[camera]\nzoom = 0\n",
    ],
)
def test_synth_script_errors(tmp_path, text):
    with pytest.raises(ConfigError):
        load_synth_script(ini(tmp_path, text))
