import numpy as np
import pytest

from iclseg.edges import (
    EdgeMap,
    edge_ap_at_recall,
    edge_pr_curve,
    edges_from_field,
    label_boundaries,
)
from iclseg.field import encode_labels_as_colors

from .oracles import pr_curve_brute_exact


def test_label_boundaries_marks_both_sides():
    labels = np.zeros((4, 4), dtype=int)
    labels[:, 2:] = 1
    edges = label_boundaries(labels)
    assert edges[:, 1].all() and edges[:, 2].all()
    assert not edges[:, 0].any() and not edges[:, 3].any()


def test_constant_field_has_no_edges():
    em = edges_from_field(np.full((6, 6, 3), 123.0))
    assert em.strength.max() == 0.0
    assert not em.thinned.any()


def test_step_edge_survives_nms_on_both_columns():
    labels = np.zeros((8, 8), dtype=int)
    labels[:, 4:] = 1
    field = encode_labels_as_colors(labels, seed=0)
    em = edges_from_field(field)
    # the two columns astride the step tie in strength; ties keep both
    assert em.thinned[2:6, 3].all() and em.thinned[2:6, 4].all()
    assert not em.thinned[:, :3].any() and not em.thinned[:, 5:].any()


def test_edge_map_scores_only_on_thinned_pixels():
    labels = np.zeros((8, 8), dtype=int)
    labels[2:6, 2:6] = 1
    em = edges_from_field(encode_labels_as_colors(labels, seed=1))
    assert (em.strength[em.thinned] > 0).all()


def test_pr_half_coverage_frozen():
    gt = np.zeros((4, 4), dtype=bool)
    gt[0, :] = True
    strength = np.zeros((4, 4))
    thinned = np.zeros((4, 4), dtype=bool)
    thinned[0, :2] = True  # half of GT, nothing else
    strength[0, :2] = 5.0
    curve = edge_pr_curve(EdgeMap(strength, np.zeros((4, 4)), thinned), gt, tolerance=0.0)
    assert curve.precisions[-1] == 1.0
    assert curve.recalls[-1] == 0.5


def test_pr_orders_high_to_low_with_monotone_recall():
    rng = np.random.default_rng(3)
    strength = rng.uniform(0, 1, (10, 10))
    thinned = rng.random((10, 10)) < 0.3
    gt = rng.random((10, 10)) < 0.3
    if not gt.any():
        gt[0, 0] = True
    curve = edge_pr_curve(EdgeMap(strength, np.zeros((10, 10)), thinned), gt, tolerance=1.5)
    assert all(a >= b for a, b in zip(curve.thresholds, curve.thresholds[1:]))
    assert all(b >= a - 1e-15 for a, b in zip(curve.recalls, curve.recalls[1:]))


def test_pr_matches_brute_force_at_zero_tolerance():
    rng = np.random.default_rng(10)
    for _ in range(20):
        h, w = rng.integers(3, 10, 2)
        strength = np.round(rng.uniform(0, 1, (h, w)), 2)
        thinned = rng.random((h, w)) < 0.4
        gt = rng.random((h, w)) < 0.4
        if not gt.any():
            gt[0, 0] = True
        curve = edge_pr_curve(EdgeMap(strength, np.zeros((h, w)), thinned), gt, tolerance=0.0)
        bt, br, bp = pr_curve_brute_exact(strength, thinned, gt)
        assert curve.thresholds == pytest.approx(bt)
        assert curve.recalls == pytest.approx(br)
        assert curve.precisions == pytest.approx(bp)


def test_pr_requires_ground_truth_and_handles_empty_predictions():
    gt = np.zeros((4, 4), dtype=bool)
    em = EdgeMap(np.zeros((4, 4)), np.zeros((4, 4)), np.zeros((4, 4), dtype=bool))
    with pytest.raises(ValueError):
        edge_pr_curve(em, gt)
    gt[1, 1] = True
    curve = edge_pr_curve(em, gt)
    assert curve.recalls == [0.0] and curve.precisions == [0.0]
    assert edge_ap_at_recall(curve, 0.2) == 0.0


def test_tolerance_allows_one_pixel_slack():
    gt = np.zeros((5, 5), dtype=bool)
    gt[2, 2] = True
    strength = np.zeros((5, 5))
    thinned = np.zeros((5, 5), dtype=bool)
    thinned[2, 3] = True  # one pixel off
    strength[2, 3] = 1.0
    em = EdgeMap(strength, np.zeros((5, 5)), thinned)
    assert edge_pr_curve(em, gt, tolerance=0.0).precisions[-1] == 0.0
    assert edge_pr_curve(em, gt, tolerance=1.0).precisions[-1] == 1.0


def test_ap_perfect_curve_is_exactly_one():
    from iclseg.edges import PRCurve

    curve = PRCurve(thresholds=[1.0], recalls=[1.0], precisions=[1.0])
    assert edge_ap_at_recall(curve, 0.2) == 1.0


def test_ap_unattained_recall_scores_zero():
    from iclseg.edges import PRCurve

    curve = PRCurve(thresholds=[1.0, 0.5], recalls=[0.05, 0.1], precisions=[1.0, 1.0])
    ap = edge_ap_at_recall(curve, 0.2)
    # grid points above recall 0.1 contribute 0
    attained = sum(1 for g in np.linspace(0, 0.2, 101) if g <= 0.1 + 1e-12)
    assert ap == pytest.approx(attained / 101.0)
    with pytest.raises(ValueError):
        edge_ap_at_recall(curve, 0.0)


def test_ideal_scene_edges_score_perfectly():
    labels = np.zeros((16, 16), dtype=int)
    labels[3:8, 3:8] = 1
    labels[9:14, 9:14] = 2
    field = encode_labels_as_colors(labels, seed=4)
    em = edges_from_field(field)
    gt = label_boundaries(labels)
    curve = edge_pr_curve(em, gt, tolerance=0.0075 * np.hypot(16, 16))
    assert edge_ap_at_recall(curve, 0.2) == 1.0
