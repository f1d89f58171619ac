import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"

_criteria: dict[str, tuple[int, str]] = {}
_results: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title, soft=False): acceptance criterion number and title")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criteria[item.nodeid] = (m.args[0], m.args[1], m.kwargs.get("soft", False))


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    n, _, soft = _criteria[report.nodeid]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if soft and outcome == "PASS":
            # soft criteria are measured and reported, never gated
            met = [v for k, v in report.user_properties if k == "target_met"]
            outcome = "SOFT PASS" if met and all(met) else "SOFT FAIL, not gated"
        _results[n] = (outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    titles = {n: t for n, t, _ in _criteria.values()}
    for n in sorted(titles):
        outcome, detail = _results.get(n, ("NOT RUN", ""))
        line = f"[{outcome}] {n}. {titles[n]}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def textured(width: int, height: int, seed: int = 0) -> np.ndarray:
    """Smooth random texture in [0, 255] used by flow and corner tests."""
    from cmctrack.synth import value_noise

    return 255.0 * value_noise(width, height, np.random.default_rng(seed))


def wave_texture(width: int, height: int, shift=(0.0, 0.0), seed: int = 0, warp=None) -> np.ndarray:
    """Sum of random plane waves sampled at ``p - shift`` (or ``warp^-1(p)``), as uint8.

    Because the texture is analytic, a shifted or warped copy is exact up to
    the final 8-bit rounding, with no resampling bias.
    """
    r = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:height, 0:width].astype(float)
    if warp is not None:
        inv = np.linalg.inv(warp)
        u = inv[0, 0] * xs + inv[0, 1] * ys + inv[0, 2]
        v = inv[1, 0] * xs + inv[1, 1] * ys + inv[1, 2]
        xs, ys = u, v
    xs = xs - shift[0]
    ys = ys - shift[1]
    img = np.zeros((height, width))
    for _ in range(12):
        wavelength = r.uniform(9.0, 40.0)
        theta = r.uniform(0, np.pi)
        phase = r.uniform(0, 2 * np.pi)
        k = 2 * np.pi / wavelength
        img += np.cos(k * (np.cos(theta) * xs + np.sin(theta) * ys) + phase)
    img = (img - img.min()) / (img.max() - img.min())
    return np.rint(20 + 215 * img).astype(np.uint8)


def pink_texture(width: int, height: int, shift=(0.0, 0.0), seed: int = 0, n_waves: int = 40) -> np.ndarray:
    """Analytic texture with a natural-image-like 1/f spectrum, sampled at ``p - shift``.

    Wavelengths are log-uniform in [8, 160] px with amplitude proportional to
    wavelength, so coarse pyramid levels keep unambiguous structure.  The
    intensity mapping does not depend on ``shift``, so shifted copies are
    exact up to 8-bit rounding.
    """
    r = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:height, 0:width].astype(float)
    xs = xs - shift[0]
    ys = ys - shift[1]
    img = np.zeros((height, width))
    power = 0.0
    for _ in range(n_waves):
        wavelength = float(np.exp(r.uniform(np.log(8.0), np.log(160.0))))
        theta = r.uniform(0, 2 * np.pi)
        phase = r.uniform(0, 2 * np.pi)
        amp = wavelength / 160.0
        k = 2 * np.pi / wavelength
        img += amp * np.cos(k * (np.cos(theta) * xs + np.sin(theta) * ys) + phase)
        power += amp * amp / 2
    return np.clip(np.rint(127.5 + 45.0 * img / np.sqrt(power)), 0, 255).astype(np.uint8)
