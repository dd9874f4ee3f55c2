"""Instance coloring losses over color fields.

For a field ``p`` and a label map with instances ``1..n`` plus background 0,
the objective is

    total = l_var + lambda_sep * l_sep + lambda_mean * l_mean

``l_var`` pulls every pixel toward its instance's mean color (background
pixels toward black), ``l_sep`` pushes pixels away from the mean colors of
the instances they do not belong to, and ``l_mean`` pushes the mean colors
themselves apart.  Everything is computed on the [0, 255] color scale in
double precision with a fixed reduction order (pixels row-major, instances
ascending), so repeated evaluations are bit-identical.

The gradient is fully analytic and flows through the instance means; the
background mean is a constant (black) and contributes no gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import validate_field, validate_labels


@dataclass
class LossWeights:
    """Term weights and switches.

    ``instance_cap`` bounds the number of instances entering the loss: when a
    label map has more, only the largest (by pixel count, ties toward smaller
    ids) are kept and the remaining instances' pixels are excluded from every
    sum -- they are dropped, not re-labelled as background.
    """

    lambda_sep: float = 300.0
    lambda_mean: float = 300.0
    smooth_l1_beta: float = 1.0
    enable_var: bool = True
    enable_sep: bool = True
    enable_mean: bool = True
    instance_cap: int = 1250


@dataclass
class LossReport:
    l_var: float
    l_sep: float
    l_mean: float
    total: float


def _smooth_l1(d: np.ndarray, beta: float) -> np.ndarray:
    a = np.abs(d)
    return np.where(a < beta, d * d / (2.0 * beta), a - beta / 2.0)


def _smooth_l1_deriv(d: np.ndarray, beta: float) -> np.ndarray:
    return np.where(np.abs(d) < beta, d / beta, np.sign(d))


def apply_instance_cap(labels: np.ndarray, cap: int) -> tuple[np.ndarray, np.ndarray]:
    """Keep the ``cap`` largest instances of a label map.

    Returns ``(relabelled, include)`` where ``relabelled`` uses contiguous ids
    for the kept instances (original ascending order preserved) and
    ``include`` marks the pixels that still participate in sums.  With
    ``n <= cap`` this is the identity.
    """
    labels = np.asarray(labels)
    n = validate_labels(labels)
    if cap < 1:
        raise ValueError("instance cap must be >= 1")
    if n <= cap:
        return labels, np.ones(labels.shape, dtype=bool)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    # Stable sort on negated sizes: ties resolve toward the smaller id.
    order = np.argsort(-sizes[1:], kind="stable") + 1
    kept = np.sort(order[:cap])
    remap = np.zeros(n + 1, dtype=labels.dtype)
    remap[kept] = np.arange(1, cap + 1, dtype=labels.dtype)
    keep_pixel = np.isin(labels, kept)
    include = keep_pixel | (labels == 0)
    return np.where(keep_pixel, remap[labels], 0), include


def _evaluate(
    field: np.ndarray,
    labels: np.ndarray,
    weights: LossWeights,
    want_grad: bool,
) -> tuple[LossReport, np.ndarray | None]:
    field = validate_field(field)
    labels = np.asarray(labels)
    if field.shape[:2] != labels.shape:
        raise ValueError(
            f"field {field.shape[:2]} and labels {labels.shape} disagree on size"
        )
    labels, include = apply_instance_cap(labels, weights.instance_cap)

    mask = include.ravel()
    flat = labels.ravel()[mask].astype(np.int64)
    pix = field.reshape(-1, 3)[mask]
    npx = flat.size
    n = int(flat.max(initial=0))
    beta = weights.smooth_l1_beta

    sizes = np.bincount(flat, minlength=n + 1)
    comps = npx - sizes
    sizes_safe = np.maximum(sizes, 1)
    sums = np.stack(
        [np.bincount(flat, weights=pix[:, c], minlength=n + 1) for c in range(3)], axis=1
    )
    mu = sums / sizes_safe[:, None]
    mu[0] = 0.0

    l_var = l_sep = l_mean = 0.0
    grad = np.zeros((npx, 3)) if want_grad else None

    dev = pix - mu[flat]  # per-pixel deviation from own instance mean

    if weights.enable_var:
        psi = _smooth_l1(dev, beta)
        per_inst = np.bincount(flat, weights=psi.sum(axis=1), minlength=n + 1)
        l_var = float((per_inst / sizes_safe).sum())
        if want_grad:
            dpsi = _smooth_l1_deriv(dev, beta)
            grad += dpsi / sizes_safe[flat, None]
            inst_dpsi = np.stack(
                [np.bincount(flat, weights=dpsi[:, c], minlength=n + 1) for c in range(3)],
                axis=1,
            )
            corr = inst_dpsi / (sizes_safe.astype(np.float64) ** 2)[:, None]
            corr[0] = 0.0  # background mean is constant
            grad -= corr[flat]

    need_dist = weights.enable_sep
    if need_dist:
        diff = pix[None, :, :] - mu[:, None, :]  # (n+1, npx, 3)
        dist2 = np.einsum("inc,inc->in", diff, diff)
        phi = 1.0 / (1.0 + dist2)
        idx = np.arange(npx)
        phi_own = phi[flat, idx]
        w = np.zeros(n + 1)
        nz = comps > 0
        w[nz] = 1.0 / (np.sqrt(sizes_safe[nz].astype(np.float64)) * comps[nz])
        sum_all = phi.sum(axis=1)
        sum_own = np.bincount(flat, weights=phi_own, minlength=n + 1)
        l_sep = float((w * (sum_all - sum_own)).sum())
        if want_grad:
            dphi = -phi * phi  # d/dr of 1/(1+r)
            wdphi = w[:, None] * dphi
            a = wdphi.sum(axis=0)  # sum_i w_i phi'_ik
            b = np.einsum("in,ic->nc", wdphi, mu)
            own_wdphi = wdphi[flat, idx]
            direct = 2.0 * (a[:, None] * pix - b) - 2.0 * own_wdphi[:, None] * dev
            # Flow through the own-instance mean: every pixel of instance i
            # shifts mu_i by 1/|S_i|, which moves all of i's complement terms.
            s_all = dphi.sum(axis=1)
            p_all = np.einsum("in,nc->ic", dphi, pix)
            own_dphi = dphi[flat, idx]
            s_own = np.bincount(flat, weights=own_dphi, minlength=n + 1)
            p_own = np.stack(
                [
                    np.bincount(flat, weights=own_dphi * pix[:, c], minlength=n + 1)
                    for c in range(3)
                ],
                axis=1,
            )
            comp_vec = (p_all - p_own) - mu * (s_all - s_own)[:, None]
            coef = np.zeros(n + 1)
            coef[1:] = 2.0 * w[1:] / sizes_safe[1:]
            grad += weights.lambda_sep * (direct - coef[flat, None] * comp_vec[flat])

    if weights.enable_mean and n > 0:
        dm = mu[:, None, :] - mu[None, :, :]
        rho = np.einsum("ijc,ijc->ij", dm, dm)
        pm = 1.0 / (1.0 + rho)
        norm = 1.0 / (n * (n + 1))
        l_mean = float(np.triu(pm, 1).sum() * norm)
        if want_grad:
            wm = -pm * pm
            np.fill_diagonal(wm, 0.0)
            gmu = (2.0 * norm) * (wm.sum(axis=1)[:, None] * mu - wm @ mu)
            gmu[0] = 0.0
            grad += weights.lambda_mean * (gmu[flat] / sizes_safe[flat, None])

    total = l_var + weights.lambda_sep * l_sep + weights.lambda_mean * l_mean
    report = LossReport(l_var=l_var, l_sep=l_sep, l_mean=l_mean, total=total)
    if not want_grad:
        return report, None
    out = np.zeros_like(field)
    out.reshape(-1, 3)[mask] = grad
    return report, out


def loss_var(field: np.ndarray, labels: np.ndarray, beta: float = 1.0) -> float:
    """Within-instance deviation term (smooth-L1 distance to the instance mean)."""
    w = LossWeights(smooth_l1_beta=beta, enable_var=True, enable_sep=False, enable_mean=False)
    return _evaluate(field, labels, w, want_grad=False)[0].l_var


def loss_sep(field: np.ndarray, labels: np.ndarray) -> float:
    """Pixel-to-foreign-mean proximity term (unweighted by lambda_sep)."""
    w = LossWeights(enable_var=False, enable_sep=True, enable_mean=False)
    return _evaluate(field, labels, w, want_grad=False)[0].l_sep


def loss_mean(field: np.ndarray, labels: np.ndarray) -> float:
    """Mean-to-mean proximity term over all id pairs including background."""
    w = LossWeights(enable_var=False, enable_sep=False, enable_mean=True)
    return _evaluate(field, labels, w, want_grad=False)[0].l_mean


def loss_total(
    field: np.ndarray, labels: np.ndarray, weights: LossWeights | None = None
) -> LossReport:
    """All enabled terms and their weighted total; disabled terms report 0."""
    return _evaluate(field, labels, weights or LossWeights(), want_grad=False)[0]


def loss_gradient(
    field: np.ndarray,
    labels: np.ndarray,
    weights: LossWeights | None = None,
    return_report: bool = False,
):
    """Analytic d(total)/d(field), flowing through the instance means.

    Pixels excluded by the instance cap receive zero gradient.  With
    ``return_report=True`` also returns the LossReport of the same evaluation.
    """
    report, grad = _evaluate(field, labels, weights or LossWeights(), want_grad=True)
    if return_report:
        return grad, report
    return grad
