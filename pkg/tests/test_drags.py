import numpy as np
import pytest

from uniflow import (
    AnnotationSet,
    DataError,
    DragTrajectory,
    densify,
    drag_flow,
    load_annotation,
    resample_trajectory,
    save_annotation,
    sparse_flow,
)
from uniflow.drags import SparseFlowSequence, densify_frame


def ann(trajs, width=64, height=64, num_frames=4):
    return AnnotationSet([DragTrajectory(t) for t in trajs], width, height, num_frames)


# ---------------------------------------------------------------------------
# resampling
# ---------------------------------------------------------------------------

def test_two_points_two_frames():
    out = resample_trajectory(DragTrajectory([(10, 10), (12, 10)]), 2)
    assert np.array_equal(out, [[10, 10], [12, 10]])


def test_linear_fallback_midpoint():
    out = resample_trajectory(DragTrajectory([(0, 0), (10, 0)]), 3)
    assert np.allclose(out[1], [5, 0])


def test_endpoints_always_exact():
    rng = np.random.default_rng(0)
    for n_pts in (2, 3, 4, 7):
        pts = rng.uniform(0, 50, size=(n_pts, 2))
        for frames in (2, 5, 9):
            out = resample_trajectory(DragTrajectory(pts), frames)
            assert np.array_equal(out[0], pts[0])
            assert np.array_equal(out[-1], pts[-1])


def _catmull_oracle(p0, p1, p2, p3, s):
    # direct spline evaluation, kept separate from the library version
    return 0.5 * (
        (2 * p1)
        + (-p0 + p2) * s
        + (2 * p0 - 5 * p1 + 4 * p2 - p3) * s * s
        + (-p0 + 3 * p1 - 3 * p2 + p3) * s * s * s
    )


def test_collinear_points_stay_on_line():
    pts = np.array([[0.0, 0.0], [1.0, 0.5], [2.0, 1.0], [3.0, 1.5]])
    out = resample_trajectory(DragTrajectory(pts), 7)
    direction = np.array([2.0, 1.0]) / np.sqrt(5.0)
    rel = out - pts[0]
    cross = rel[:, 0] * direction[1] - rel[:, 1] * direction[0]
    assert np.abs(cross).max() < 1e-9
    # spot-check the middle sample against direct segment evaluation
    pad = np.vstack([pts[0], pts, pts[-1]])
    u = np.linspace(0, 3, 7)[3]
    seg = int(u)
    expect = _catmull_oracle(pad[seg], pad[seg + 1], pad[seg + 2], pad[seg + 3], u - seg)
    assert np.allclose(out[3], expect, atol=1e-12)


def test_resample_argument_errors():
    with pytest.raises(DataError):
        DragTrajectory([(1, 1)])
    with pytest.raises(DataError):
        resample_trajectory(DragTrajectory([(0, 0), (1, 1)]), 1)


# ---------------------------------------------------------------------------
# sparse flow
# ---------------------------------------------------------------------------

def test_two_point_difference():
    out = sparse_flow(ann([[(10, 10), (12, 10)]], num_frames=2))
    assert len(out.frames) == 1
    assert set(out.frames[0]) == {(10, 10)}
    assert np.allclose(out.frames[0][(10, 10)], [2, 0])


def test_stationary_trajectory_zero_displacement():
    out = sparse_flow(ann([[(5, 5), (5, 5), (5, 5)]], num_frames=5))
    for frame in out.frames:
        assert np.allclose(frame[(5, 5)], [0, 0])


def test_coincident_anchors_average():
    out = sparse_flow(
        ann([[(10, 10), (12, 10)], [(10, 10), (10, 12)]], num_frames=2)
    )
    assert np.allclose(out.frames[0][(10, 10)], [1, 1])


def test_empty_annotation_gives_empty_maps():
    out = sparse_flow(ann([], num_frames=3))
    assert len(out.frames) == 2
    assert all(len(frame) == 0 for frame in out.frames)


def test_frame_count_is_l_minus_one():
    out = sparse_flow(ann([[(0, 0), (8, 8)]], num_frames=7))
    assert len(out.frames) == 6


# ---------------------------------------------------------------------------
# densification
# ---------------------------------------------------------------------------

def test_densify_exact_at_control_point():
    field = densify_frame({(20, 20): np.array([2.0, 0.0])}, 64, 64, sigma=8.0)
    assert np.array_equal(field.data[20, 20], [2.0, 0.0])


def test_densify_empty_is_zero():
    seq = drag_flow(ann([], num_frames=3))
    for f in seq:
        assert (f.data == 0).all()


def test_densify_kernel_value_matches_formula():
    sigma = 8.0
    field = densify_frame({(32, 32): np.array([10.0, 0.0])}, 128, 128, sigma=sigma)
    # oracle: w / (w + eps_bg) at distance 3 sigma, eps_bg = exp(-8) from the
    # 4-sigma cutoff radius
    w = np.exp(-((3.0 * sigma) ** 2) / (2 * sigma**2))
    expect = 10.0 * w / (w + np.exp(-8.0))
    got = field.data[32, 32 + 24, 0]
    assert abs(got - expect) < 1e-12
    # and zero beyond the cutoff radius
    assert field.data[32, 32 + 33, 0] == 0.0


def test_densify_monotone_decay():
    rng = np.random.default_rng(5)
    for _ in range(20):
        sigma = float(rng.uniform(2.0, 10.0))
        cx, cy = int(rng.integers(20, 44)), int(rng.integers(20, 44))
        f = rng.uniform(-5, 5, size=2)
        field = densify_frame({(cx, cy): f}, 64, 64, sigma=sigma)
        row = np.hypot(field.data[cy, cx:, 0], field.data[cy, cx:, 1])
        assert (np.diff(row) <= 1e-12).all()


def test_densify_linear_in_flow():
    entries = {(10, 10): np.array([1.0, -2.0]), (30, 20): np.array([0.5, 4.0])}
    scaled = {k: 3.0 * v for k, v in entries.items()}
    a = densify_frame(entries, 48, 48, sigma=5.0)
    b = densify_frame(scaled, 48, 48, sigma=5.0)
    assert np.allclose(b.data, 3.0 * a.data, atol=1e-12)


def test_densify_rejects_bad_sigma():
    with pytest.raises(DataError):
        densify(SparseFlowSequence([{}]), 8, 8, sigma=0.0)


# ---------------------------------------------------------------------------
# schema
# ---------------------------------------------------------------------------

def test_annotation_round_trip(tmp_path):
    a = ann([[(1.5, 2.5), (3.0, 4.0), (5.0, 6.0)]], num_frames=5)
    p = tmp_path / "ann.json"
    save_annotation(a, p)
    back = load_annotation(p)
    assert back.width == a.width and back.height == a.height
    assert back.num_frames == a.num_frames
    assert np.array_equal(back.trajectories[0].points, a.trajectories[0].points)


def test_annotation_rejects_out_of_canvas():
    with pytest.raises(DataError):
        ann([[(0, 0), (64, 10)]], width=64)
    with pytest.raises(DataError):
        ann([[(0, 0), (-1, 10)]])


def test_annotation_rejects_short_clip():
    with pytest.raises(DataError):
        ann([[(0, 0), (1, 1)]], num_frames=1)
