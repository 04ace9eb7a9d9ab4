"""One-class network: map training points near a fixed center, score by
squared distance to it.

Bias-free feed-forward net (ReLU hidden, linear output) trained with Adam
to minimize mean ||phi(x) - c||^2 plus L2 weight decay. The center is the
mean of the initial forward pass and stays frozen; bias-free layers rule
out the trivial constant-map solution, and a collapse guard shifts a
center that lands on the origin.
"""

from __future__ import annotations

import numpy as np

from .. import ndtensor as nd
from ..rng import make_rng


def build_network(d_in: int, widths, rng) -> nd.LayerStack:
    layers: list[nd.Layer] = []
    dims = [d_in, *widths]
    for i in range(len(dims) - 1):
        layers.append(nd.Dense(dims[i], dims[i + 1], use_bias=False, rng=rng))
        if i < len(dims) - 2:
            layers.append(nd.ReLU())
    return nd.LayerStack(layers)


def fit_deep_svdd(x: np.ndarray, widths, epochs: int, batch: int, lr: float,
                  weight_decay: float, seed: int) -> dict:
    n, d = x.shape
    if n < 32:
        raise ValueError(f"need at least 32 training points, got {n}")
    if list(widths) != sorted(widths, reverse=True):
        raise ValueError(f"widths must be decreasing, got {list(widths)}")
    rng = make_rng(seed)
    net = build_network(d, widths, rng)

    center = net.forward(x).mean(axis=0)
    if float(np.linalg.norm(center)) < 1e-6:
        center = center + 0.1     # collapse guard: keep the target off the origin

    adam = nd.AdamState(lr=lr)
    order_rng = make_rng(seed + 1)
    for _ in range(epochs):
        order = order_rng.permutation(n)
        for start in range(0, n, batch):
            xb = x[order[start:start + batch]]
            y, tape = net.forward_tape(xb)
            dy = 2.0 * (y - center) / len(xb)
            _, layer_grads = net.backward(tape, dy)
            params, grads = nd.stack_param_dicts(net, layer_grads)
            for key, p in params.items():
                if key.endswith(".weight"):
                    grads[key] = grads[key] + 2.0 * weight_decay * p
            nd.adam_step(adam, params, grads)
    return {"net": net, "center": center, "widths": list(widths)}


def score_deep_svdd(state: dict, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    diff = state["net"].forward(x) - state["center"]
    return (diff * diff).sum(axis=1)
