"""First-order optimizers, direct field optimization, and gradient checking."""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .loss import LossReport, LossWeights, loss_gradient, loss_total
from .field import COLOR_SCALE


@dataclass
class OptimConfig:
    iterations: int = 500
    learning_rate: float = 2.0
    method: str = "adam"  # "adam" or "gd"
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.method not in ("adam", "gd"):
            raise ValueError(f"unknown optimizer method {self.method!r}")


@dataclass
class TrainTrace:
    """Per-iteration loss reports plus wall-clock seconds.

    Only ``reports`` is deterministic; ``seconds`` is diagnostic and excluded
    from reproducibility comparisons.
    """

    reports: list[LossReport] = dc_field(default_factory=list)
    seconds: list[float] = dc_field(default_factory=list)


class Adam:
    """Adam over a list of parameter arrays, updated in place."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


class GradientDescent:
    """Plain gradient descent over a list of parameter arrays."""

    def __init__(self, params, lr):
        self.params = list(params)
        self.lr = lr

    def step(self, grads):
        for p, g in zip(self.params, grads):
            p -= self.lr * g


def make_optimizer(params, config: OptimConfig):
    if config.method == "adam":
        return Adam(params, config.learning_rate, config.beta1, config.beta2, config.eps)
    return GradientDescent(params, config.learning_rate)


def optimize_direct_field(
    labels: np.ndarray,
    weights: LossWeights | None = None,
    config: OptimConfig | None = None,
) -> tuple[np.ndarray, TrainTrace]:
    """Optimize a free-form color field against a label map.

    The field is initialized uniformly at random in [0, 255] from the seed and
    updated directly with the analytic loss gradient.  Values are not clamped:
    separation pressure may push colors outside [0, 255], which is fine for
    downstream prompting and can be mapped back per ``normalize_field``.
    Raises on non-finite loss or field values, naming the iteration.
    """
    weights = weights or LossWeights()
    config = config or OptimConfig()
    labels = np.asarray(labels)
    rng = np.random.default_rng(config.seed)
    field = rng.uniform(0.0, COLOR_SCALE, size=(*labels.shape, 3))
    opt = make_optimizer([field], config)
    trace = TrainTrace()
    for it in range(config.iterations):
        t0 = time.perf_counter()
        grad, report = loss_gradient(field, labels, weights, return_report=True)
        if not np.isfinite(report.total):
            raise FloatingPointError(f"loss diverged at iteration {it}")
        opt.step([grad])
        if not np.all(np.isfinite(field)):
            raise FloatingPointError(f"field diverged at iteration {it}")
        trace.reports.append(report)
        trace.seconds.append(time.perf_counter() - t0)
    return field, trace


def finite_difference_check(
    field: np.ndarray,
    labels: np.ndarray,
    weights: LossWeights | None = None,
    epsilon: float = 1e-3,
    floor: float = 1e-8,
) -> float:
    """Worst-case deviation of the analytic gradient from central differences.

    Per coordinate the deviation ``|fd - analytic|`` is reported as-is while it
    sits below the absolute floor and relative to ``max(|fd|, |analytic|)``
    above it; the maximum over all coordinates is returned.  Central
    differences are exact only away from the smooth-L1 kinks at ``|d| = beta``,
    so callers probing random fields should keep deviations off that set.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    weights = weights or LossWeights()
    field = np.array(field, dtype=np.float64)
    analytic = loss_gradient(field, labels, weights)
    worst = 0.0
    flat = field.ravel()
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + epsilon
        hi = loss_total(field, labels, weights).total
        flat[k] = orig - epsilon
        lo = loss_total(field, labels, weights).total
        flat[k] = orig
        fd = (hi - lo) / (2.0 * epsilon)
        an = analytic.ravel()[k]
        err = abs(fd - an)
        if err > floor:
            err = err / max(abs(fd), abs(an))
        worst = max(worst, err)
    return worst


def sample_check_case(
    width: int,
    height: int,
    rng: np.random.Generator,
    max_instances: int = 4,
    beta: float = 1.0,
    kink_margin: float = 0.01,
    max_attempts: int = 1000,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw a random (field, labels) pair suited to finite-difference checks.

    Pairs whose pixel deviations from their instance mean land within
    ``kink_margin`` of the smooth-L1 kink at ``|d| = beta`` are redrawn, since
    central differences straddling the kink are biased beyond the check
    tolerance even when the analytic gradient is correct.
    """
    from .field import instance_means

    for _ in range(max_attempts):
        n = int(rng.integers(1, max_instances + 1))
        labels = rng.integers(0, n + 1, size=(height, width))
        _, labels = np.unique(labels, return_inverse=True)
        labels = labels.reshape(height, width).astype(np.int64)
        field = rng.uniform(0.0, 255.0, size=(height, width, 3))
        mu = instance_means(field, labels).means
        dev = field - mu[labels]
        if np.min(np.abs(np.abs(dev) - beta)) > kink_margin:
            return field, labels
    raise RuntimeError(f"no kink-free case found in {max_attempts} attempts")
