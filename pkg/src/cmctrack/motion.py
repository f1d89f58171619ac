"""Inter-frame camera motion from sparse optical flow.

Pipeline: Shi-Tomasi corners on the previous frame, pyramidal Lucas-Kanade
into the current frame, then a RANSAC affine (or homography) fit on the
resulting correspondences.  Any failure collapses to the identity motion so
the tracker never stops on a bad frame.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import CameraMotion, MotionKind
from .imaging import GrayFrame, Pyramid, build_pyramid, max_levels

log = logging.getLogger(__name__)

MIN_EIG_LK = 1e-4


class EstimationFailed(RuntimeError):
    pass


class FlowConfigError(ValueError):
    pass


@dataclass
class MotionConfig:
    technique: str = "affine"  # or "homography"
    max_corners: int = 200
    quality_level: float = 0.01
    min_distance: float = 20.0
    window: int = 10
    levels: int = 3
    max_iters: int = 30
    eps: float = 0.01
    ransac_threshold: float = 3.0
    ransac_iters: int = 100
    ransac_confidence: float = 0.999
    min_inliers: int = 10
    seed: int = 0
    downscale: int = 1

    def __post_init__(self):
        if self.technique not in ("affine", "homography"):
            raise ValueError(f"unknown motion technique {self.technique!r}")
        if not 0 < self.quality_level < 1:
            raise ValueError("quality_level must lie in (0, 1)")
        if self.levels < 1 or self.window < 1 or self.max_iters < 1:
            raise ValueError("levels, window and max_iters must be positive")
        if self.downscale < 1:
            raise ValueError("downscale must be >= 1")


@dataclass(frozen=True)
class FeatureSet:
    points: np.ndarray  # (N, 2) x, y
    scores: np.ndarray  # (N,) min eigenvalue, descending

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def empty(cls) -> "FeatureSet":
        return cls(np.zeros((0, 2)), np.zeros(0))


@dataclass(frozen=True)
class FlowMatches:
    prev: np.ndarray  # (N, 2)
    curr: np.ndarray  # (N, 2)
    status: np.ndarray  # (N,) bool

    def __len__(self) -> int:
        return len(self.prev)

    def good(self) -> tuple[np.ndarray, np.ndarray]:
        if self.status.all():
            return self.prev, self.curr
        return self.prev[self.status], self.curr[self.status]

    @classmethod
    def from_points(cls, prev, curr, status=None) -> "FlowMatches":
        prev = np.asarray(prev, dtype=float).reshape(-1, 2)
        curr = np.asarray(curr, dtype=float).reshape(-1, 2)
        if status is None:
            status = np.ones(len(prev), dtype=bool)
        return cls(prev, curr, np.asarray(status, dtype=bool))


@dataclass(frozen=True)
class MotionEstimate:
    motion: CameraMotion
    inlier_count: int = 0
    inlier_ratio: float = 0.0
    mean_reprojection_error: float = 0.0
    inliers: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool), repr=False)

    @classmethod
    def identity(cls) -> "MotionEstimate":
        return cls(CameraMotion.identity())


# ---------------------------------------------------------------------------
# Shi-Tomasi corners


def min_eigen_response(img: np.ndarray) -> np.ndarray:
    """Smaller eigenvalue of the 3x3-summed Sobel structure tensor at every pixel.

    The outermost 2-pixel frame, where the 5x5 support would leave the
    image, is set to zero.
    """
    f = np.asarray(img, dtype=np.float32)
    h, w = f.shape
    out = np.zeros((h, w), dtype=np.float32)
    if h < 5 or w < 5:
        return out
    # Sobel [1 2 1]^T x [-1 0 1] / 8, valid region only (shape h-2, w-2)
    sy = f[:-2] + f[2:]
    sy += 2.0 * f[1:-1]
    gx = sy[:, 2:] - sy[:, :-2]
    sx = f[:, :-2] + f[:, 2:]
    sx += 2.0 * f[:, 1:-1]
    gy = sx[2:] - sx[:-2]
    gx *= 0.125
    gy *= 0.125

    def box3(a):
        r = a[:, :-2] + a[:, 1:-1]
        r += a[:, 2:]
        o = r[:-2] + r[1:-1]
        o += r[2:]
        return o  # shape (h-4, w-4)

    a = box3(gx * gx)
    b = box3(gx * gy)
    c = box3(gy * gy)
    half_tr = a + c
    half_tr *= 0.5
    a -= c
    a *= 0.5
    a *= a
    b *= b
    a += b
    np.sqrt(a, out=a)
    half_tr -= a
    np.maximum(half_tr, 0.0, out=half_tr)
    out[2:-2, 2:-2] = half_tr
    return out


def _is_local_max3(r: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Whether r[ys, xs] is >= each of its 8 neighbours (outside counts as -inf)."""
    p = np.pad(r, 1, mode="constant", constant_values=-np.inf)
    v = r[ys, xs]
    ok = np.ones(len(ys), dtype=bool)
    for dy in range(3):
        for dx in range(3):
            if dy == 1 and dx == 1:
                continue
            ok &= v >= p[ys + dy, xs + dx]
    return ok


def select_corners(
    response: np.ndarray, max_corners: int, quality_level: float, min_distance: float, border: int = 2
) -> FeatureSet:
    """Threshold, local-max and greedy min-distance suppression of a corner map."""
    r = np.array(response, dtype=np.float64)
    if border > 0:
        r[:border] = 0
        r[-border:] = 0
        r[:, :border] = 0
        r[:, -border:] = 0
    peak = float(r.max()) if r.size else 0.0
    if peak <= 1e-12:
        return FeatureSet.empty()
    ys, xs = np.nonzero((r >= quality_level * peak) & (r > 0))
    lm = _is_local_max3(r, ys, xs)
    ys, xs = ys[lm], xs[lm]
    vals = r[ys, xs]
    # stable sort: equal responses keep raster order
    order = np.argsort(-vals, kind="stable")
    xs, ys, vals = xs[order], ys[order], vals[order]

    if min_distance <= 0:
        keep = np.arange(min(len(xs), max_corners))
        pts = np.stack([xs[keep], ys[keep]], axis=1).astype(float)
        return FeatureSet(pts, vals[keep])

    cell = float(min_distance)
    grid: dict[tuple[int, int], list[tuple[float, float]]] = {}
    d2 = min_distance * min_distance
    kept: list[int] = []
    for i in range(len(xs)):
        x, y = float(xs[i]), float(ys[i])
        cx, cy = int(x // cell), int(y // cell)
        ok = True
        for gy in (cy - 1, cy, cy + 1):
            for gx in (cx - 1, cx, cx + 1):
                for qx, qy in grid.get((gx, gy), ()):
                    if (qx - x) ** 2 + (qy - y) ** 2 < d2:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if not ok:
            continue
        grid.setdefault((cx, cy), []).append((x, y))
        kept.append(i)
        if len(kept) >= max_corners:
            break
    kept_arr = np.array(kept, dtype=np.intp)
    pts = np.stack([xs[kept_arr], ys[kept_arr]], axis=1).astype(float)
    return FeatureSet(pts, vals[kept_arr])


def detect_features(
    frame, max_corners: int = 200, quality_level: float = 0.01, min_distance: float = 20.0, border: int = 2
) -> FeatureSet:
    """Shi-Tomasi corners, strongest first.

    ``border`` excludes corners closer than that to the image edge; the motion
    pipeline sets it to the LK patch radius so no corner is spent on a patch
    that cannot fit inside the frame.
    """
    if not 0 < quality_level < 1:
        raise ValueError("quality_level must lie in (0, 1)")
    img = frame.data if isinstance(frame, GrayFrame) else np.asarray(frame)
    return select_corners(min_eigen_response(img), max_corners, quality_level, min_distance, max(border, 2))


# ---------------------------------------------------------------------------
# Pyramidal Lucas-Kanade


class _PatchSampler:
    """Bilinear sampling of square patches on an edge-padded pyramid level.

    All points of a patch share one fractional offset, so a patch is a single
    integer gather of (2r+2)^2 pixels blended with four scalar weights.
    """

    def __init__(self, padded: np.ndarray, pad: int, radius: int):
        self.flat = padded.reshape(-1)
        self.wp = padded.shape[1]
        self.pad = pad
        self.r = radius
        ar = np.arange(2 * radius + 2)
        self.grid = ar[:, None] * self.wp + ar[None, :]
        h, w = padded.shape[0] - 2 * pad, padded.shape[1] - 2 * pad
        # furthest a centre may sit outside the image before the gather leaves the padding
        slack = pad - radius - 1
        self.lo = -float(slack)
        self.hi_x = w - 1.0 + slack
        self.hi_y = h - 1.0 + slack

    def __call__(self, cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
        cx = np.clip(cx, self.lo, self.hi_x)
        cy = np.clip(cy, self.lo, self.hi_y)
        x0 = np.floor(cx)
        y0 = np.floor(cy)
        fx = (cx - x0)[:, None, None]
        fy = (cy - y0)[:, None, None]
        base = (y0.astype(np.intp) - self.r + self.pad) * self.wp + (x0.astype(np.intp) - self.r + self.pad)
        P = self.flat[base[:, None, None] + self.grid]
        top = P[:, :-1, :-1] + fx * (P[:, :-1, 1:] - P[:, :-1, :-1])
        bot = P[:, 1:, :-1] + fx * (P[:, 1:, 1:] - P[:, 1:, :-1])
        return top + fy * (bot - top)


def _inside(cx: np.ndarray, cy: np.ndarray, radius: int, shape) -> np.ndarray:
    h, w = shape
    return (cx - radius >= 0) & (cy - radius >= 0) & (cx + radius <= w - 1) & (cy + radius <= h - 1)


def track_features(
    prev: Pyramid,
    curr: Pyramid,
    features,
    window: int = 10,
    max_iters: int = 30,
    eps: float = 0.01,
) -> FlowMatches:
    """Coarse-to-fine iterative Lucas-Kanade for every feature at once.

    Coarser levels sample with clamp-to-edge so features near the border can
    still get an initial guess; the full-resolution level requires the whole
    patch to stay inside the image, otherwise the feature's status is False.
    """
    if len(prev) != len(curr) or prev.shapes != curr.shapes:
        raise FlowConfigError(f"pyramid shapes differ: {prev.shapes} vs {curr.shapes}")
    pts = np.asarray(features.points if isinstance(features, FeatureSet) else features, dtype=float)
    pts = pts.reshape(-1, 2)
    n = len(pts)
    if n == 0:
        return FlowMatches.from_points(pts, pts, np.zeros(0, dtype=bool))

    side = 2 * window + 1
    npix = side * side
    pad = 2 * (window + 2)

    status = np.ones(n, dtype=bool)
    guess = np.zeros((n, 2))
    flow = np.zeros((n, 2))
    for lvl in range(len(prev) - 1, -1, -1):
        shape = prev.levels[lvl].shape
        strict = lvl == 0
        p = pts / (1 << lvl)
        sample_I = _PatchSampler(prev.padded(lvl, pad), pad, window + 1)  # +1 margin for gradients
        sample_J = _PatchSampler(curr.padded(lvl, pad), pad, window)

        idx = np.flatnonzero(status)
        if strict:
            ok = _inside(p[idx, 0], p[idx, 1], window + 1, shape)
            status[idx[~ok]] = False
            idx = idx[ok]
        patch = sample_I(p[idx, 0], p[idx, 1])
        Ix = ((patch[:, 1:-1, 2:] - patch[:, 1:-1, :-2]) * 0.5).reshape(-1, npix)
        Iy = ((patch[:, 2:, 1:-1] - patch[:, :-2, 1:-1]) * 0.5).reshape(-1, npix)
        I0 = patch[:, 1:-1, 1:-1].reshape(-1, npix)

        gxx = np.einsum("ij,ij->i", Ix, Ix)
        gxy = np.einsum("ij,ij->i", Ix, Iy)
        gyy = np.einsum("ij,ij->i", Iy, Iy)
        half_tr = (gxx + gyy) / 2
        min_eig = (half_tr - np.sqrt(((gxx - gyy) / 2) ** 2 + gxy * gxy)) / npix
        det = gxx * gyy - gxy * gxy
        good = (min_eig >= MIN_EIG_LK) & (det > 0)
        status[idx[~good]] = False
        idx, Ix, Iy, I0 = idx[good], Ix[good], Iy[good], I0[good]
        gxx, gxy, gyy, det = gxx[good], gxy[good], gyy[good], det[good]

        nu = np.zeros((len(idx), 2))
        active = np.ones(len(idx), dtype=bool)
        for _ in range(max_iters):
            a = np.flatnonzero(active)
            if a.size == 0:
                break
            q = p[idx[a]] + guess[idx[a]] + nu[a]
            if strict:
                ok = _inside(q[:, 0], q[:, 1], window, shape)
                if not ok.all():
                    status[idx[a[~ok]]] = False
                    active[a[~ok]] = False
                    a, q = a[ok], q[ok]
                    if a.size == 0:
                        break
            diff = I0[a] - sample_J(q[:, 0], q[:, 1]).reshape(-1, npix)
            bx = np.einsum("ij,ij->i", diff, Ix[a])
            by = np.einsum("ij,ij->i", diff, Iy[a])
            ex = (gyy[a] * bx - gxy[a] * by) / det[a]
            ey = (gxx[a] * by - gxy[a] * bx) / det[a]
            nu[a, 0] += ex
            nu[a, 1] += ey
            done = ex * ex + ey * ey < eps * eps
            active[a[done]] = False

        diverged = np.hypot(nu[:, 0], nu[:, 1]) > window
        status[idx[diverged]] = False
        if lvl > 0:
            guess[idx] = 2.0 * (guess[idx] + nu)
        else:
            flow[idx] = guess[idx] + nu

    curr_pts = pts + flow
    h0, w0 = prev.levels[0].shape
    inside = (
        (curr_pts[:, 0] >= 0) & (curr_pts[:, 0] <= w0 - 1) & (curr_pts[:, 1] >= 0) & (curr_pts[:, 1] <= h0 - 1)
    )
    status &= inside & np.isfinite(curr_pts).all(axis=1)
    return FlowMatches(pts, curr_pts, status)


# ---------------------------------------------------------------------------
# Robust model fitting


REFINE_ROUNDS = 3
SCORE_SUBSET = 2000


def _ransac_iterations(inlier_frac: float, sample_size: int, confidence: float, cap: int) -> int:
    if inlier_frac <= 0:
        return cap
    good = inlier_frac**sample_size
    if good >= 1.0:
        return 1
    need = math.log(1.0 - confidence) / math.log(1.0 - good)
    return min(cap, max(1, int(math.ceil(need))))


def _affine_from_3(src: np.ndarray, dst: np.ndarray):
    M = np.column_stack([src, np.ones(3)])
    det = np.linalg.det(M)
    if abs(det) < 1e-6:
        return None
    sol = np.linalg.solve(M, dst)  # (3, 2): columns are the two output rows
    return sol.T.reshape(-1)


def fit_affine_lstsq(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Least-squares affine through centred normal equations.

    The centred moments are formed from raw ones (a few matrix products) so
    large match sets cost no per-point temporaries.
    """
    n = len(src)
    if n < 3:
        raise EstimationFailed("need at least 3 points for an affine fit")
    ones = np.ones(n)
    c_src = ones @ src / n
    c_dst = ones @ dst / n
    N = src.T @ src - n * np.outer(c_src, c_src)
    B = src.T @ dst - n * np.outer(c_src, c_dst)
    scale = np.trace(N)
    if scale <= 1e-12 * max(1.0, float(c_src @ c_src)):
        raise EstimationFailed("degenerate affine fit (all points coincide)")
    eig = np.linalg.eigvalsh(N)
    if eig[0] <= 1e-10 * scale:
        raise EstimationFailed("degenerate affine fit (points are collinear)")
    L = np.linalg.solve(N, B).T  # 2x2 linear block
    t = c_dst - L @ c_src
    return np.array([L[0, 0], L[0, 1], t[0], L[1, 0], L[1, 1], t[1]])


def _affine_errors(a: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    x, y = src[:, 0], src[:, 1]
    ex = a[0] * x + a[1] * y + a[2] - dst[:, 0]
    ey = a[3] * x + a[4] * y + a[5] - dst[:, 1]
    return ex * ex + ey * ey


def _hartley(pts: np.ndarray) -> np.ndarray:
    c = pts.mean(axis=0)
    d = np.mean(np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]))
    if d <= 0:
        raise EstimationFailed("degenerate point set")
    s = math.sqrt(2.0) / d
    return np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])


def fit_homography_dlt(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Normalised direct linear transform; returns a 3x3 matrix with h33 == 1."""
    n = len(src)
    if n < 4:
        raise EstimationFailed("need at least 4 points for a homography")
    T1 = _hartley(src)
    T2 = _hartley(dst)
    s = src @ T1[:2, :2].T + T1[:2, 2]
    d = dst @ T2[:2, :2].T + T2[:2, 2]
    x, y, u, v = s[:, 0], s[:, 1], d[:, 0], d[:, 1]
    one, zero = np.ones(n), np.zeros(n)
    A = np.empty((2 * n, 9))
    A[0::2] = np.column_stack([-x, -y, -one, zero, zero, zero, u * x, u * y, u])
    A[1::2] = np.column_stack([zero, zero, zero, -x, -y, -one, v * x, v * y, v])
    _, sv, vt = np.linalg.svd(A)
    if n >= 5 and sv[-2] <= 1e-12 * sv[0]:
        raise EstimationFailed("degenerate homography fit")
    Hn = vt[-1].reshape(3, 3)
    H = np.linalg.inv(T2) @ Hn @ T1
    if abs(H[2, 2]) < 1e-12:
        raise EstimationFailed("homography h33 vanishes")
    H = H / H[2, 2]
    if not np.isfinite(H).all() or abs(np.linalg.det(H)) < 1e-12:
        raise EstimationFailed("singular homography")
    return H


def _homography_errors(H: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    x, y = src[:, 0], src[:, 1]
    den = H[2, 0] * x + H[2, 1] * y + H[2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (H[0, 0] * x + H[0, 1] * y + H[0, 2]) / den
        v = (H[1, 0] * x + H[1, 1] * y + H[1, 2]) / den
        err = (u - dst[:, 0]) ** 2 + (v - dst[:, 1]) ** 2
    err[~np.isfinite(err) | (np.abs(den) < 1e-9)] = np.inf
    return err


def _collinear(a, b, c, tol: float = 1e-6) -> bool:
    return abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) < tol


def _any_three_collinear(pts: np.ndarray) -> bool:
    for i, j, k in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        if _collinear(pts[i], pts[j], pts[k]):
            return True
    return False


def _draw_sample(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    # rejection sampling; choice(replace=False) permutes all n indices per draw
    while True:
        idx = rng.integers(0, n, size=k)
        if len(np.unique(idx)) == k:
            return idx


def _ransac(src, dst, sample_size, solve_minimal, fit_all, errors, threshold, iters, min_inliers, rng, confidence):
    n = len(src)
    thr2 = threshold * threshold
    # very large match sets score hypotheses on a fixed random subset; the
    # winner is then re-scored and refit on every match
    if n > SCORE_SUBSET:
        sub = rng.integers(0, n, size=SCORE_SUBSET)
        s_src, s_dst = src[sub], dst[sub]
    else:
        s_src, s_dst = src, dst
    m = len(s_src)
    best_model = None
    best_count = -1
    best_err = np.inf
    budget = iters
    it = 0
    while it < budget:
        it += 1
        sample = _draw_sample(rng, m, sample_size)
        model = solve_minimal(s_src[sample], s_dst[sample])
        if model is None:
            continue
        err = errors(model, s_src, s_dst)
        mask = err < thr2
        count = int(mask.sum())
        if count < best_count:
            continue
        score = float(err[mask].sum()) if count else np.inf
        if count > best_count or score < best_err:
            best_model, best_count, best_err = model, count, score
            budget = min(budget, _ransac_iterations(count / m, sample_size, confidence, iters))
    if best_model is None:
        raise EstimationFailed("every minimal sample was degenerate")
    best_mask = errors(best_model, src, dst) < thr2
    best_count = int(best_mask.sum())
    if best_count < max(min_inliers, sample_size):
        raise EstimationFailed(f"only {best_count} inliers (need {max(min_inliers, sample_size)})")
    model = fit_all(src[best_mask], dst[best_mask])
    # re-select inliers under the refit model; the minimal-sample mask is cut
    # around a noisy model and would otherwise bias the final fit
    err = None
    for _ in range(REFINE_ROUNDS):
        err = errors(model, src, dst)
        mask = err < thr2
        if mask.sum() < best_mask.sum() or np.array_equal(mask, best_mask):
            break
        try:
            refined = fit_all(src[mask], dst[mask])
        except EstimationFailed:
            break
        model, best_mask, err = refined, mask, None
    if err is None:
        err = errors(model, src, dst)
    err = err[best_mask]
    mean_err = float(np.mean(np.sqrt(err)))
    return model, best_mask, mean_err


def _prepare(matches: FlowMatches, need: int):
    src, dst = matches.good()
    if len(src) < need:
        raise EstimationFailed(f"{len(src)} usable matches, need at least {need}")
    return src, dst


def estimate_affine(
    matches: FlowMatches,
    ransac_threshold: float = 3.0,
    ransac_iters: int = 100,
    min_inliers: int = 10,
    rng: np.random.Generator | None = None,
    confidence: float = 0.999,
) -> MotionEstimate:
    src, dst = _prepare(matches, 3)
    rng = np.random.default_rng(0) if rng is None else rng
    coeffs, mask, mean_err = _ransac(
        src, dst, 3, _affine_from_3, fit_affine_lstsq, _affine_errors,
        ransac_threshold, ransac_iters, min_inliers, rng, confidence,
    )
    return _finish(CameraMotion.affine(coeffs), matches, mask, mean_err)


def _homography_from_4(src, dst):
    if _any_three_collinear(src) or _any_three_collinear(dst):
        return None
    try:
        return fit_homography_dlt(src, dst)
    except EstimationFailed:
        return None


def estimate_homography(
    matches: FlowMatches,
    ransac_threshold: float = 3.0,
    ransac_iters: int = 100,
    min_inliers: int = 10,
    rng: np.random.Generator | None = None,
    confidence: float = 0.999,
) -> MotionEstimate:
    src, dst = _prepare(matches, 4)
    rng = np.random.default_rng(0) if rng is None else rng
    H, mask, mean_err = _ransac(
        src, dst, 4, _homography_from_4, fit_homography_dlt, _homography_errors,
        ransac_threshold, ransac_iters, min_inliers, rng, confidence,
    )
    return _finish(CameraMotion.homography(H), matches, mask, mean_err)


def _finish(motion, matches, mask, mean_err) -> MotionEstimate:
    full = np.zeros(len(matches), dtype=bool)
    full[np.flatnonzero(matches.status)[mask]] = True
    n_good = int(matches.status.sum())
    count = int(mask.sum())
    return MotionEstimate(motion, count, count / n_good if n_good else 0.0, mean_err, full)


# ---------------------------------------------------------------------------
# Whole pipeline


def _rescale(motion: CameraMotion, factor: int) -> CameraMotion:
    """Lift a motion estimated on ``factor``-decimated frames to full resolution."""
    if motion.is_identity or factor == 1:
        return motion
    S = np.diag([float(factor), float(factor), 1.0])
    return CameraMotion.from_matrix(S @ motion.matrix() @ np.linalg.inv(S))


def _decimate(frame: GrayFrame, factor: int) -> np.ndarray:
    img = frame.data.astype(np.float64)
    h, w = img.shape
    h2, w2 = h // factor, w // factor
    return img[: h2 * factor, : w2 * factor].reshape(h2, factor, w2, factor).mean(axis=(1, 3))


def frame_pyramid(frame: GrayFrame, cfg: MotionConfig) -> Pyramid:
    img = frame.data if cfg.downscale == 1 else _decimate(frame, cfg.downscale)
    h, w = img.shape
    return build_pyramid(img, min(cfg.levels, max_levels(w, h)))


def estimate_motion(
    prev: GrayFrame | None,
    curr: GrayFrame | None,
    cfg: MotionConfig | None = None,
    rng: np.random.Generator | None = None,
    prev_pyramid: Pyramid | None = None,
    curr_pyramid: Pyramid | None = None,
) -> MotionEstimate:
    """Camera motion from ``prev`` to ``curr``; identity on any failure."""
    cfg = cfg or MotionConfig()
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    try:
        if prev_pyramid is None:
            if prev is None:
                raise EstimationFailed("no previous frame")
            prev_pyramid = frame_pyramid(prev, cfg)
        if curr_pyramid is None:
            if curr is None:
                raise EstimationFailed("no current frame")
            curr_pyramid = frame_pyramid(curr, cfg)
        if prev_pyramid.shapes != curr_pyramid.shapes:
            raise EstimationFailed(f"frame sizes differ: {prev_pyramid.shapes[0]} vs {curr_pyramid.shapes[0]}")
        feats = detect_features(
            prev_pyramid.levels[0],
            cfg.max_corners,
            cfg.quality_level,
            cfg.min_distance / cfg.downscale,
            border=cfg.window + 1,
        )
        if len(feats) == 0:
            raise EstimationFailed("no trackable features")
        matches = track_features(prev_pyramid, curr_pyramid, feats, cfg.window, cfg.max_iters, cfg.eps)
        fit = estimate_affine if cfg.technique == "affine" else estimate_homography
        est = fit(
            matches,
            cfg.ransac_threshold / cfg.downscale,
            cfg.ransac_iters,
            cfg.min_inliers,
            rng=rng,
            confidence=cfg.ransac_confidence,
        )
    except (EstimationFailed, ValueError, np.linalg.LinAlgError) as exc:
        log.debug("motion estimation fell back to identity: %s", exc)
        return MotionEstimate.identity()
    if cfg.downscale != 1:
        est = MotionEstimate(
            _rescale(est.motion, cfg.downscale),
            est.inlier_count,
            est.inlier_ratio,
            est.mean_reprojection_error * cfg.downscale,
            est.inliers,
        )
    return est


__all__ = [
    "EstimationFailed",
    "FeatureSet",
    "FlowConfigError",
    "FlowMatches",
    "MotionConfig",
    "MotionEstimate",
    "MotionKind",
    "detect_features",
    "estimate_affine",
    "estimate_homography",
    "estimate_motion",
    "fit_affine_lstsq",
    "fit_homography_dlt",
    "frame_pyramid",
    "select_corners",
    "track_features",
]
