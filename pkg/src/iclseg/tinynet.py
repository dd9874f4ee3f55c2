"""A minimal convolutional predictor trained directly on the coloring loss.

Fixed architecture: 3x3 conv (3->16), ReLU, 3x3 conv (16->16), ReLU,
3x3 conv (16->3), all zero-padded stride 1.  Input colors are rescaled to
[0, 1] and the head output is scaled back by 255, so both training loss and
raw outputs live in color units; prediction additionally maps the output
through ``normalize_field`` for the prompting stack.  Forward and backward
passes are written out by hand on im2col matrices; no autograd is involved
anywhere.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from .field import normalize_field, normalize_field_backward, validate_field
from .loss import LossWeights, loss_gradient, loss_total
from .optim import OptimConfig, TrainTrace, make_optimizer

CHANNELS = (3, 16, 16, 3)
KERNEL = 3
CHECKPOINT_VERSION = 1


def _im2col(x: np.ndarray) -> np.ndarray:
    """(H, W, C) -> (H*W, 9C) patches under zero padding, kernel offsets major."""
    h, w, c = x.shape
    xp = np.pad(x, ((1, 1), (1, 1), (0, 0)))
    cols = np.empty((h * w, 9 * c))
    k = 0
    for dy in range(KERNEL):
        for dx in range(KERNEL):
            cols[:, k * c : (k + 1) * c] = xp[dy : dy + h, dx : dx + w].reshape(h * w, c)
            k += 1
    return cols


def _col2im(dcols: np.ndarray, h: int, w: int, c: int) -> np.ndarray:
    """Adjoint of _im2col: scatter patch gradients back onto the padded grid."""
    dxp = np.zeros((h + 2, w + 2, c))
    k = 0
    for dy in range(KERNEL):
        for dx in range(KERNEL):
            dxp[dy : dy + h, dx : dx + w] += dcols[:, k * c : (k + 1) * c].reshape(h, w, c)
            k += 1
    return dxp[1:-1, 1:-1]


class TinyNet:
    """Parameters plus hand-written forward/backward for the fixed stack."""

    def __init__(self, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for cin, cout in zip(CHANNELS[:-1], CHANNELS[1:]):
            limit = np.sqrt(6.0 / (cin * KERNEL * KERNEL))  # He-uniform fan-in
            self.weights.append(rng.uniform(-limit, limit, size=(cout, cin, KERNEL, KERNEL)))
            self.biases.append(np.zeros(cout))

    def parameters(self) -> list[np.ndarray]:
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    def named_parameters(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases), start=1):
            out.append((f"w{i}", w))
            out.append((f"b{i}", b))
        return out

    @staticmethod
    def _wmat(w: np.ndarray) -> np.ndarray:
        cout, cin = w.shape[0], w.shape[1]
        return w.transpose(2, 3, 1, 0).reshape(9 * cin, cout)

    def forward(self, image: np.ndarray, cache: dict | None = None) -> np.ndarray:
        """Raw (un-normalized) output field on the [0, 255] scale."""
        image = validate_field(image)
        h, w = image.shape[:2]
        x = image / 255.0
        acts = [x]
        for layer, (wt, b) in enumerate(zip(self.weights, self.biases)):
            cols = _im2col(x)
            z = cols @ self._wmat(wt) + b
            if layer < len(self.weights) - 1:
                z = np.maximum(z, 0.0)
            x = z.reshape(h, w, -1)
            if cache is not None:
                cache[f"cols{layer}"] = cols
                cache[f"act{layer}"] = x
            acts.append(x)
        return x * 255.0

    def backward(self, image: np.ndarray, cache: dict, grad_raw: np.ndarray) -> list[np.ndarray]:
        """Parameter gradients given d(loss)/d(raw output); order matches parameters()."""
        h, w = image.shape[:2]
        grads_w: list[np.ndarray] = [None] * len(self.weights)
        grads_b: list[np.ndarray] = [None] * len(self.biases)
        delta = (grad_raw * 255.0).reshape(h * w, -1)
        for layer in range(len(self.weights) - 1, -1, -1):
            if layer < len(self.weights) - 1:
                relu_mask = cache[f"act{layer}"].reshape(h * w, -1) > 0
                delta = delta * relu_mask
            cols = cache[f"cols{layer}"]
            wt = self.weights[layer]
            cin = wt.shape[1]
            dwmat = cols.T @ delta
            grads_w[layer] = dwmat.reshape(KERNEL, KERNEL, cin, -1).transpose(3, 2, 0, 1)
            grads_b[layer] = delta.sum(axis=0)
            if layer > 0:
                dcols = delta @ self._wmat(wt).T
                delta = _col2im(dcols, h, w, cin).reshape(h * w, cin)
        grads = []
        for gw, gb in zip(grads_w, grads_b):
            grads.extend((gw, gb))
        return grads


def predict(net: TinyNet, image: np.ndarray) -> np.ndarray:
    """Deterministic forward pass mapped onto [0, 255] by normalize_field."""
    return normalize_field(net.forward(image))


def train_tiny_net(
    dataset,
    weights: LossWeights | None = None,
    config: OptimConfig | None = None,
) -> tuple[TinyNet, TrainTrace]:
    """Train on (image, labels) pairs with minibatch 1.

    Sample order is a fixed seed-derived permutation per epoch.  The loss is
    computed on the network's raw scaled output: the final x255 stage already
    places it in color units, and the min-max normalization used at predict
    time must stay out of the objective because a single outlier pixel would
    rescale every other pixel's gradient through the shared min/max, which in
    practice collapses the bulk of the output range.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValueError("training dataset is empty")
    weights = weights or LossWeights()
    config = config or OptimConfig(iterations=300, learning_rate=1e-2, seed=0)
    net = TinyNet(seed=config.seed)
    opt = make_optimizer(net.parameters(), config)
    order_rng = np.random.default_rng(config.seed + 1)
    order: list[int] = []
    trace = TrainTrace()
    for it in range(config.iterations):
        if not order:
            order = list(order_rng.permutation(len(dataset)))
        image, labels = dataset[order.pop(0)]
        t0 = time.perf_counter()
        cache: dict = {}
        raw = net.forward(image, cache)
        grad_raw, report = loss_gradient(raw, labels, weights, return_report=True)
        if not np.isfinite(report.total):
            raise FloatingPointError(f"loss diverged at iteration {it}")
        grads = net.backward(image, cache, grad_raw)
        opt.step(grads)
        for p in net.parameters():
            if not np.all(np.isfinite(p)):
                raise FloatingPointError(f"parameters diverged at iteration {it}")
        trace.reports.append(report)
        trace.seconds.append(time.perf_counter() - t0)
    return net, trace


def save_checkpoint(net: TinyNet, path) -> Path:
    """Write parameters as versioned JSON; float repr round-trips exactly."""
    payload = {
        "version": CHECKPOINT_VERSION,
        "arch": {"channels": list(CHANNELS), "kernel": KERNEL},
        "params": {
            name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in net.named_parameters()
        },
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload) + "\n")
    return path


def load_checkpoint(path) -> TinyNet:
    payload = json.loads(Path(path).read_text())
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {payload.get('version')!r}")
    arch = payload.get("arch", {})
    if tuple(arch.get("channels", ())) != CHANNELS or arch.get("kernel") != KERNEL:
        raise ValueError(f"{path}: checkpoint architecture mismatch: {arch}")
    net = TinyNet(seed=0)
    for name, arr in net.named_parameters():
        entry = payload["params"][name]
        data = np.array(entry["data"], dtype=np.float64)
        if tuple(entry["shape"]) != arr.shape:
            raise ValueError(
                f"{path}: parameter {name} shape {entry['shape']} != expected {list(arr.shape)}"
            )
        arr[...] = data.reshape(arr.shape)
    return net


def parameter_gradient_check(
    net: TinyNet,
    image: np.ndarray,
    labels: np.ndarray,
    weights: LossWeights | None = None,
    epsilon: float = 1e-5,
    floor: float = 1e-8,
) -> float:
    """Finite-difference check of the full train-step gradient w.r.t. parameters.

    The default step is smaller than the field-level check uses because a
    parameter perturbation shifts every pre-activation at once; larger steps
    routinely straddle ReLU switch points and bias the central difference.
    """
    weights = weights or LossWeights()
    cache: dict = {}
    raw = net.forward(image, cache)
    grad_out = loss_gradient(normalize_field(raw), labels, weights)
    analytic = net.backward(image, cache, normalize_field_backward(raw, grad_out))

    def total() -> float:
        return loss_total(normalize_field(net.forward(image)), labels, weights).total

    worst = 0.0
    for param, an in zip(net.parameters(), analytic):
        flat_p = param.ravel()
        flat_a = an.ravel()
        for k in range(flat_p.size):
            orig = flat_p[k]
            flat_p[k] = orig + epsilon
            hi = total()
            flat_p[k] = orig - epsilon
            lo = total()
            flat_p[k] = orig
            fd = (hi - lo) / (2.0 * epsilon)
            err = abs(fd - flat_a[k])
            if err > floor:
                err = err / max(abs(fd), abs(flat_a[k]))
            worst = max(worst, err)
    return worst
