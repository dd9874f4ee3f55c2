import numpy as np
import pytest

from iclseg.field import encode_labels_as_colors
from iclseg.loss import loss_total
from iclseg.metrics import center_point, mask_iou
from iclseg.optim import (
    Adam,
    GradientDescent,
    OptimConfig,
    make_optimizer,
    optimize_direct_field,
)
from iclseg.prompting import prompt_mask


def test_config_validation():
    with pytest.raises(ValueError):
        OptimConfig(iterations=0)
    with pytest.raises(ValueError):
        OptimConfig(method="momentum")


def test_gradient_descent_step():
    p = [np.array([1.0, -2.0])]
    GradientDescent(p, lr=0.5).step([np.array([2.0, 2.0])])
    assert p[0].tolist() == [0.0, -3.0]


def test_adam_first_step_is_signed_learning_rate():
    # With bias correction, the very first Adam step is lr * g/(|g| + eps'),
    # i.e. almost exactly lr in the gradient's direction.
    p = [np.array([0.0, 0.0, 0.0])]
    Adam(p, lr=0.1).step([np.array([3.0, -0.004, 0.0])])
    assert p[0][0] == pytest.approx(-0.1, rel=1e-6)
    assert p[0][1] == pytest.approx(0.1, rel=1e-4)
    assert p[0][2] == 0.0


def test_adam_two_steps_match_hand_rolled_update():
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    p = [np.array([1.0])]
    opt = Adam(p, lr=lr, beta1=b1, beta2=b2, eps=eps)
    g1, g2 = np.array([0.3]), np.array([-0.2])
    opt.step([g1])
    opt.step([g2])
    x = 1.0
    m = v = 0.0
    for t, g in ((1, 0.3), (2, -0.2)):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1**t)
        vh = v / (1 - b2**t)
        x -= lr * mh / (np.sqrt(vh) + eps)
    assert p[0][0] == pytest.approx(x, rel=1e-15)


def test_make_optimizer_selects_method():
    params = [np.zeros(2)]
    assert isinstance(make_optimizer(params, OptimConfig(method="adam")), Adam)
    assert isinstance(make_optimizer(params, OptimConfig(method="gd")), GradientDescent)


def test_optimize_seeded_runs_are_bit_identical():
    labels = np.zeros((8, 8), dtype=int)
    labels[2:6, 2:6] = 1
    config = OptimConfig(iterations=25, learning_rate=2.0, seed=3)
    f1, t1 = optimize_direct_field(labels, config=config)
    f2, t2 = optimize_direct_field(labels, config=config)
    assert np.array_equal(f1, f2)
    assert [r.total for r in t1.reports] == [r.total for r in t2.reports]


def test_optimize_decreases_loss():
    labels = np.zeros((12, 12), dtype=int)
    labels[3:9, 3:9] = 1
    _, trace = optimize_direct_field(labels, config=OptimConfig(iterations=120, seed=0))
    assert trace.reports[-1].total < trace.reports[0].total


def test_optimize_single_instance_groups_and_prompts():
    labels = np.zeros((16, 16), dtype=int)
    labels[4:12, 4:12] = 1
    field, trace = optimize_direct_field(
        labels, config=OptimConfig(iterations=500, learning_rate=2.0, seed=0)
    )
    assert trace.reports[-1].l_var < 1.0
    gt = labels == 1
    mask = prompt_mask(field, [center_point(gt)])
    assert mask_iou(mask, gt) == 1.0


def test_optimized_field_still_scores_with_ideal_reference():
    # The optimized loss should land well below a mediocre hand coloring.
    labels = np.zeros((10, 10), dtype=int)
    labels[1:5, 1:5] = 1
    labels[6:9, 5:9] = 2
    field, trace = optimize_direct_field(labels, config=OptimConfig(iterations=200, seed=1))
    ideal = encode_labels_as_colors(labels, seed=0)
    assert trace.reports[-1].total < 2.0 * loss_total(ideal, labels).total + 50.0
