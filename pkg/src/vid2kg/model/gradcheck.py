"""Central-finite-difference verification of the analytic gradients."""

from __future__ import annotations

import numpy as np

from vid2kg.model.network import example_gradients, example_losses
from vid2kg.model.params import ModelParams

# below this magnitude the comparison switches to absolute error, so that
# near-zero gradient pairs are not divided by near-zero denominators
_SMALL = 1e-6


def _joint_loss(params: ModelParams, e, record) -> float:
    return example_losses(params, e, record).loss


def gradient_check(
    params: ModelParams,
    record,
    e,
    epsilon: float = 1e-5,
    samples_per_array: int = 4,
    rng=None,
) -> float:
    """Max relative error between analytic and numeric gradients.

    Samples entries from every parameter array, including arrays the example
    never touches (their analytic gradient is zero and the numeric one must
    agree).  Parameters are perturbed in place and restored.
    """
    e = np.asarray(e, dtype=np.float64)
    if rng is None:
        rng = np.random.default_rng(0)
    _, bag, _ = example_gradients(params, e, record)
    worst = 0.0
    for _name, arr in params.named_arrays():
        grad = bag.get(arr)
        flat = arr.reshape(-1)
        if flat.size == 0:
            continue
        k = min(samples_per_array, flat.size)
        indices = rng.choice(flat.size, size=k, replace=False)
        for i in indices:
            original = flat[i]
            flat[i] = original + epsilon
            upper = _joint_loss(params, e, record)
            flat[i] = original - epsilon
            lower = _joint_loss(params, e, record)
            flat[i] = original
            numeric = (upper - lower) / (2.0 * epsilon)
            analytic = 0.0 if grad is None else float(grad.reshape(-1)[i])
            gap = abs(numeric - analytic)
            denom = max(abs(numeric), abs(analytic))
            worst = max(worst, gap if denom < _SMALL else gap / denom)
    return worst
