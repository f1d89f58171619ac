import numpy as np
import pytest

from cmctrack.geometry import BBox
from cmctrack.motion import estimate_motion
from cmctrack.synth import (
    BoxSpec,
    ScriptError,
    SynthScript,
    default_script,
    ground_truth,
    pan_zoom_path,
    project_box,
    render_sequence,
    true_motion,
    true_motions,
)

VIEW = (320, 240)


def script_with(path, boxes=None, **kw):
    boxes = boxes or [BoxSpec(BBox(400, 300, 60, 80), 1), BoxSpec(BBox(520, 330, 50, 50), 2)]
    return SynthScript(world_size=(1000, 700), viewport=VIEW, boxes=boxes, camera_path=path, **kw)


def test_pan_convention_moves_content_left():
    # camera centre moves +3 px/frame in x (tx = 3 * frame)
    path = pan_zoom_path(6, VIEW, start=(450, 320), pan=(3.0, 0.0))
    gt = ground_truth(script_with(path))
    for k in range(1, 6):
        for (i0, b0), (i1, b1) in zip(gt.frames[k - 1], gt.frames[k]):
            assert i0 == i1
            assert b1.x_c - b0.x_c == pytest.approx(-3.0, abs=1e-9)
            assert b1.y_c == pytest.approx(b0.y_c, abs=1e-9)
    m = true_motion(script_with(path), 3).matrix()
    np.testing.assert_allclose(m, [[1, 0, -3], [0, 1, 0], [0, 0, 1]], atol=1e-12)


def test_inverse_transform_recovers_world_box():
    path = pan_zoom_path(4, VIEW, start=(450, 320), pan=(3.0, -2.0), zoom=1.05)
    script = script_with(path)
    world = script.boxes[0].box
    for k, v in enumerate(path):
        b = project_box(v, world, VIEW)
        inv = np.linalg.inv(np.vstack([v, [0, 0, 1]]))
        x, y, _ = inv @ [b.x_c, b.y_c, 1.0]
        assert (x, y) == pytest.approx((world.x_c, world.y_c), abs=1e-9)


def test_identity_path():
    path = [np.array([[1.0, 0, -250], [0, 1.0, -200]])] * 5
    script = script_with(path)
    gt = ground_truth(script)
    assert all(f == gt.frames[0] for f in gt.frames)
    for k in range(1, 5):
        np.testing.assert_allclose(true_motion(script, k).matrix(), np.eye(3), atol=1e-12)


def test_zoom_composes_to_scaled_linear_block():
    path = pan_zoom_path(5, VIEW, start=(450, 320), zoom=1.01)
    m = true_motion(script_with(path), 4).matrix()
    np.testing.assert_allclose(m[:2, :2], np.diag([1.01, 1.01]), atol=1e-12)
    # the viewport centre is the fixed point of a pure zoom about the camera centre
    c = m @ [VIEW[0] / 2, VIEW[1] / 2, 1.0]
    assert c[:2] == pytest.approx([VIEW[0] / 2, VIEW[1] / 2], abs=1e-9)


def test_true_motion_range():
    script = script_with(pan_zoom_path(3, VIEW, start=(450, 320)))
    with pytest.raises(IndexError):
        true_motion(script, 0)
    with pytest.raises(IndexError):
        true_motion(script, 3)
    assert len(true_motions(script)) == 3 and true_motions(script)[0].is_identity


def test_script_validation():
    good = pan_zoom_path(2, VIEW, start=(450, 320))
    with pytest.raises(ScriptError):
        script_with(good, drop_prob=1.5)
    with pytest.raises(ScriptError):
        script_with(good, jitter_sigma=-1.0)
    with pytest.raises(ScriptError):
        script_with([good[0], np.zeros((2, 3))])
    with pytest.raises(ScriptError):
        pan_zoom_path(2, VIEW, start=(0, 0), zoom=0.0)


def test_never_visible_box_rejected():
    path = pan_zoom_path(2, VIEW, start=(450, 320))
    with pytest.raises(ScriptError):
        render_sequence(script_with(path, boxes=[BoxSpec(BBox(950, 650, 40, 40))]), with_frames=False)


def test_visibility_threshold_drops_mostly_hidden_boxes():
    v = np.array([[1.0, 0, 0], [0, 1.0, 0]])
    assert project_box(v, BBox(-12, 100, 40, 40), VIEW) is None  # 20% visible
    edge = project_box(v, BBox(-10, 100, 40, 40), VIEW)  # exactly 25% visible is kept
    assert edge is not None and edge.w == pytest.approx(10.0)
    b = project_box(v, BBox(-5, 100, 40, 40), VIEW)
    assert b is not None and b.left == 0.0 and b.w == pytest.approx(15.0)


def test_zero_corruption_detections_equal_gt():
    seq = render_sequence(default_script(n_frames=20, n_boxes=5, viewport=(640, 400)), with_frames=False)
    for dets, frame in zip(seq.detections, seq.gt.frames):
        assert [d.bbox for d in dets] == [b for _, b in frame]
        assert all(d.confidence == 1.0 for d in dets)


def test_corruption_statistics():
    script = default_script(n_frames=60, n_boxes=5, viewport=(640, 400), jitter_sigma=2.0, drop_prob=0.2,
                            fp_rate=1.0, seed=3)
    seq = render_sequence(script, with_frames=False)
    n_gt = seq.gt.num_boxes
    n_det = sum(len(f) for f in seq.detections)
    # expected detections = 0.8 * gt + 60 false positives
    assert abs(n_det - (0.8 * n_gt + 60)) < 4 * np.sqrt(0.16 * n_gt + 60)


def test_same_script_is_bit_identical():
    script = default_script(n_frames=4, n_boxes=3, viewport=(480, 360), jitter_sigma=1.5, drop_prob=0.1, fp_rate=0.5)
    a, b = render_sequence(script), render_sequence(script)
    assert all(np.array_equal(x.data, y.data) for x, y in zip(a.frames, b.frames))
    assert a.gt == b.gt
    assert a.detections == b.detections


def test_seed_changes_detections_not_gt():
    kw = dict(n_frames=10, n_boxes=3, viewport=(480, 360), jitter_sigma=1.5)
    a = render_sequence(default_script(seed=1, **kw), with_frames=False)
    b = render_sequence(default_script(seed=2, **kw), with_frames=False)
    assert a.gt == b.gt
    assert a.detections != b.detections


@pytest.mark.parametrize("pan, zoom", [((20.0, 0.0), 1.0), ((-12.0, 9.0), 1.0), ((6.0, -3.0), 1.004)])
def test_estimate_motion_recovers_true_motion(pan, zoom):
    script = default_script(n_frames=4, n_boxes=3, viewport=(480, 360), pan=pan, zoom=zoom)
    seq = render_sequence(script)
    for k in range(1, script.num_frames):
        est = estimate_motion(seq.frames[k - 1], seq.frames[k]).motion.matrix()
        true = seq.motions[k].matrix()
        assert np.max(np.abs(est[:2, 2] - true[:2, 2])) < 0.5
        assert np.max(np.abs(est[:2, :2] - true[:2, :2])) < 1e-2
