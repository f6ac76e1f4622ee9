"""Numpy implementation of the two-layer MLP kernels.

Shared contract with the compiled backend: float64 arrays, weight
matrices laid out (rows_out, cols_in), hidden activation tanh, output
activation sigmoid.  The backward kernel takes the gradient at the
pre-sigmoid output (dz2) so callers fold loss weighting in themselves.
"""

import numpy as np

BACKEND = "python"


def mlp2_forward(x, w1, b1, w2, b2):
    """Return (h, y) with h = tanh(w1 @ x + b1), y = sigmoid(w2 @ h + b2)."""
    h = np.tanh(w1 @ x + b1)
    z2 = w2 @ h + b2
    y = 1.0 / (1.0 + np.exp(-z2))
    return h, y


def mlp2_backward(x, h, w1, w2, dz2):
    """Backpropagate dz2 through the net; returns (dw1, db1, dw2, db2, dx)."""
    dw2 = np.outer(dz2, h)
    db2 = dz2.copy()
    dh = w2.T @ dz2
    dz1 = dh * (1.0 - h * h)
    dw1 = np.outer(dz1, x)
    db1 = dz1
    dx = w1.T @ dz1
    return dw1, db1, dw2, db2, dx
