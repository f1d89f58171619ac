import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmctrack.geometry import BBox, CameraMotion
from cmctrack.kalman import NoiseConfig, PredictionFailed, TrackState, init_state, predict, update

CFG = NoiseConfig()  # sigma_q 0.05, sigma_r 0.00625, delta_t 0.033

coord = st.floats(-1000, 2000, allow_nan=False)
size = st.floats(1, 400, allow_nan=False)
boxes = st.builds(BBox, coord, coord, size, size)


@st.composite
def affines(draw):
    lin = draw(st.lists(st.floats(-1.5, 1.5, allow_nan=False), min_size=4, max_size=4))
    if abs(lin[0] * lin[3] - lin[1] * lin[2]) < 1e-3:
        lin = [1.0, 0.0, 0.0, 1.0]
    tx, ty = draw(st.floats(-50, 50)), draw(st.floats(-50, 50))
    return CameraMotion.affine([lin[0], lin[1], tx, lin[2], lin[3], ty])


@st.composite
def states(draw):
    b = draw(boxes)
    s = init_state(b, CFG)
    # random SPD covariance keeps the tests away from the diagonal special case
    m = np.array(draw(st.lists(st.floats(-1, 1), min_size=16, max_size=16))).reshape(4, 4)
    return TrackState(s.mean, m @ m.T + 0.1 * np.eye(4))


def test_paper_noise_defaults():
    assert (CFG.sigma_q, CFG.sigma_r, CFG.delta_t) == (0.05, 0.00625, 0.033)
    assert NoiseConfig.delta_t_for(30) == 0.033
    assert NoiseConfig.delta_t_for(10) == 0.1
    np.testing.assert_array_equal(CFG.Q, np.eye(4) * 0.05**2 * 0.033)
    np.testing.assert_array_equal(CFG.R, np.eye(4) * 0.00625**2 * 0.033)


def test_noise_config_validation():
    with pytest.raises(ValueError):
        NoiseConfig(sigma_q=0)
    with pytest.raises(ValueError):
        NoiseConfig.delta_t_for(0)


def test_init_state():
    s = init_state(BBox(100, 100, 40, 60), CFG)
    np.testing.assert_array_equal(s.mean, [100, 100, 40, 60])
    np.testing.assert_allclose(np.diag(s.covariance), 10 * 0.00625**2 * 0.033, rtol=1e-15)
    assert 10 * 0.00625**2 * 0.033 == pytest.approx(1.2890625e-5, rel=1e-12)
    t = init_state(BBox(100, 100, 40, 60), CFG)
    np.testing.assert_array_equal(s.covariance, t.covariance)


def test_identity_predict_adds_exactly_q():
    s = init_state(BBox(10, 20, 5, 6), CFG)
    p = predict(s, CameraMotion.identity(), CFG)
    np.testing.assert_array_equal(p.mean, s.mean)
    np.testing.assert_allclose(p.covariance - s.covariance, np.eye(4) * 0.05**2 * 0.033, atol=1e-18)


def test_translation_predict():
    s = TrackState([10, 10, 4, 4], np.eye(4))
    p = predict(s, CameraMotion.affine([1, 0, 3, 0, 1, -2]), CFG)
    np.testing.assert_array_equal(p.mean, [13, 8, 4, 4])


def test_rotation_keeps_size_bits():
    th = 0.3
    m = CameraMotion.affine([np.cos(th), -np.sin(th), 0, np.sin(th), np.cos(th), 0])
    s = TrackState([50.0, 20.0, 12.345678901, 7.0000001], np.eye(4))
    p = predict(s, m, CFG)
    assert p.mean[2] == s.mean[2] and p.mean[3] == s.mean[3]


def test_scale_affine_scales_position_covariance():
    s = TrackState([0, 0, 10, 10], np.eye(4))
    p = predict(s, CameraMotion.affine([2, 0, 0, 0, 2, 0]), CFG)
    np.testing.assert_allclose(np.diag(p.covariance), [4 + CFG.Q[0, 0]] * 2 + [1 + CFG.Q[0, 0]] * 2)


def test_homography_uses_projective_jacobian():
    h = CameraMotion.homography([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1e-3, 0.0, 1.0]])
    s = TrackState([100.0, 50.0, 10, 10], np.eye(4))
    p = predict(s, h, CFG)
    J = np.eye(4)
    J[:2, :2] = h.jacobian(100.0, 50.0)
    np.testing.assert_allclose(p.covariance, J @ J.T + CFG.Q, atol=1e-15)
    assert p.mean[0] == pytest.approx(100 / 1.1)


def test_degenerate_homography_fails():
    h = CameraMotion.homography([[1, 0, 0], [0, 1, 0], [0.01, 0, 1]])
    with pytest.raises(PredictionFailed):
        predict(TrackState([-100.0, 0, 5, 5], np.eye(4)), h, CFG)


@given(states(), affines())
def test_predict_matches_propagation_arithmetic(s, m):
    a11, a12, a13, a21, a22, a23 = m.coefficients
    x, y, w, h = s.mean
    p = predict(s, m, CFG)
    assert p.mean[0] == pytest.approx(a11 * x + a12 * y + a13, abs=1e-12)
    assert p.mean[1] == pytest.approx(a21 * x + a22 * y + a23, abs=1e-12)
    assert p.mean[2] == w and p.mean[3] == h


@given(states(), st.floats(-100, 100), st.floats(-100, 100))
def test_identity_predict_commutes_with_translation(s, dx, dy):
    shifted = TrackState(s.mean + [dx, dy, 0, 0], s.covariance)
    a = predict(shifted, CameraMotion.identity(), CFG)
    b = predict(s, CameraMotion.identity(), CFG)
    np.testing.assert_allclose(a.mean, b.mean + [dx, dy, 0, 0], atol=1e-9)
    np.testing.assert_array_equal(a.covariance, b.covariance)


def test_zero_innovation_shrinks_covariance():
    s = predict(init_state(BBox(10, 10, 5, 5), CFG), CameraMotion.identity(), CFG)
    u = update(s, s.bbox, CFG)
    np.testing.assert_allclose(u.mean, s.mean, atol=1e-12)
    assert np.trace(u.covariance) < np.trace(s.covariance)


def test_wide_prior_snaps_to_measurement():
    s = TrackState([0, 0, 10, 10], np.eye(4) * 1e4)
    z = BBox(50, -20, 30, 12)
    u = update(s, z, CFG)
    np.testing.assert_allclose(u.mean, z.as_array(), rtol=1e-2)


def test_repeated_updates_converge():
    s = TrackState([0, 0, 10, 10], np.eye(4) * 5.0)
    z = BBox(7, 3, 12, 9)
    traces = []
    for _ in range(40):
        s = update(s, z, CFG)
        traces.append(np.trace(s.covariance))
    assert np.all(np.diff(traces) <= 1e-15)
    np.testing.assert_allclose(s.mean, z.as_array(), atol=1e-6)


@given(states(), st.lists(st.tuples(affines(), boxes), min_size=1, max_size=12))
def test_covariance_stays_spd(s, steps):
    for m, z in steps:
        s = predict(s, m, CFG)
        s = update(s, z, CFG)
        P = s.covariance
        assert np.abs(P - P.T).max() <= 1e-9
        np.linalg.cholesky(P)
        assert np.all(np.diag(P) > 0)


@given(states(), boxes)
def test_update_is_pure(s, z):
    a = update(s, z, CFG)
    b = update(TrackState(s.mean.copy(), s.covariance.copy()), z, CFG)
    np.testing.assert_array_equal(a.mean, b.mean)
    np.testing.assert_array_equal(a.covariance, b.covariance)


def test_tracking_error_bounded_under_known_motion():
    rng = np.random.default_rng(0)
    box = np.array([400.0, 300.0, 50.0, 40.0])
    s = init_state(BBox(*box), CFG)
    for _ in range(100):
        a = [1 + rng.normal(0, 0.005), rng.normal(0, 0.003), rng.normal(0, 5),
             rng.normal(0, 0.003), 1 + rng.normal(0, 0.005), rng.normal(0, 5)]
        m = CameraMotion.affine(a)
        box[:2] = m.apply(box[0], box[1])
        s = update(predict(s, m, CFG), BBox(*box), CFG)
        assert np.hypot(*(s.mean[:2] - box[:2])) < 2.0


def test_state_is_immutable():
    s = init_state(BBox(1, 1, 1, 1), CFG)
    with pytest.raises(ValueError):
        s.mean[0] = 5
