"""Minimal dense numeric core for the window autoencoders.

Tensors are plain float64 numpy arrays (1-3 dims, row-major). The layer
vocabulary is fixed: t2v, conv1d, dense, relu, sin, flatten, reshape,
upsample. Each layer implements an explicit forward that returns a cache and
a backward that consumes it, so a :class:`LayerStack` can record a tape and
replay it in exact reverse order. Gradients are checked against central
finite differences by :func:`grad_check`.

Layers operate on batches: time-series layers take ``(B, N, C)``, dense
layers take ``(B, D)``. The module-level ``matmul`` / ``conv1d_forward``
helpers are the single-window entry points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

Tensor = np.ndarray

LAYER_KINDS = ("t2v", "conv1d", "dense", "relu", "sin", "flatten", "reshape", "upsample")


class NonFiniteError(FloatingPointError):
    """A tensor left the finite domain (NaN or Inf)."""


def as_tensor(data, shape: tuple[int, ...] | None = None) -> Tensor:
    """Coerce to a float64 array of 1-3 dims, optionally checking shape."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim > 3:
        raise ValueError(f"tensors are 1-3 dimensional, got ndim={arr.ndim}")
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"expected shape {tuple(shape)}, got {arr.shape}")
    return arr


def check_finite(arr: Tensor, context: str = "tensor") -> Tensor:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{context} contains NaN/Inf")
    return arr


@dataclass(frozen=True)
class LayerSpec:
    """Declarative description of one layer application."""

    kind: str
    in_shape: tuple[int, ...]
    out_shape: tuple[int, ...]
    hyperparams: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")


# ---------------------------------------------------------------------------
# free functions (single-window API)
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Standard matrix product with explicit inner-dimension check."""
    a = as_tensor(a)
    b = as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("matmul expects 2-D tensors")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions differ: {a.shape} x {b.shape}")
    return a @ b


def conv1d_forward(x: Tensor, kernels: Tensor, bias: Tensor, stride: int = 1) -> Tensor:
    """1-D convolution over the time axis with "same" zero padding.

    x: (N, C_in); kernels: (C_out, C_in, k) with k odd; bias: (C_out,).
    Output length is N // stride (N when stride is 1).
    """
    x = as_tensor(x)
    kernels = as_tensor(kernels)
    bias = as_tensor(bias)
    if x.ndim != 2 or kernels.ndim != 3:
        raise ValueError("conv1d_forward expects x (N,C_in) and kernels (C_out,C_in,k)")
    c_out, c_in, k = kernels.shape
    if x.shape[1] != c_in:
        raise ValueError(f"input has {x.shape[1]} channels, kernels expect {c_in}")
    if bias.shape != (c_out,):
        raise ValueError(f"bias must have shape ({c_out},)")
    y, _ = _conv1d_batch(x[None], kernels, bias, stride)
    return y[0]


def _im2col(x: Tensor, k: int, stride: int) -> Tensor:
    """(B, N, C) -> (B, N_out, k, C) sliding windows over zero-padded time axis."""
    b, n, c = x.shape
    pad = (k - 1) // 2
    xp = np.zeros((b, n + 2 * pad, c))
    xp[:, pad:pad + n, :] = x
    n_out = n // stride
    s0, s1, s2 = xp.strides
    cols = np.lib.stride_tricks.as_strided(
        xp, shape=(b, n_out, k, c), strides=(s0, s1 * stride, s1, s2), writeable=False
    )
    return np.ascontiguousarray(cols)


def _conv1d_batch(x: Tensor, kernels: Tensor, bias: Tensor, stride: int):
    c_out, c_in, k = kernels.shape
    if k % 2 == 0:
        raise ValueError(f"kernel size must be odd for same padding, got {k}")
    if stride < 1 or x.shape[1] % stride != 0:
        raise ValueError(f"time axis {x.shape[1]} not divisible by stride {stride}")
    cols = _im2col(x, k, stride)                      # (B, N_out, k, C_in)
    kmat = kernels.transpose(2, 1, 0).reshape(k * c_in, c_out)
    y = cols.reshape(cols.shape[0], cols.shape[1], k * c_in) @ kmat + bias
    return y, cols


def _conv1d_batch_backward(grad_y, cols, kernels, stride, in_len):
    """Gradients of the batched conv. Returns (grad_x, grad_kernels, grad_bias)."""
    c_out, c_in, k = kernels.shape
    b, n_out, _ = grad_y.shape
    kmat = kernels.transpose(2, 1, 0).reshape(k * c_in, c_out)
    flat_cols = cols.reshape(b * n_out, k * c_in)
    flat_gy = grad_y.reshape(b * n_out, c_out)
    grad_kmat = flat_cols.T @ flat_gy                  # (k*C_in, C_out)
    grad_kernels = grad_kmat.reshape(k, c_in, c_out).transpose(2, 1, 0)
    grad_bias = flat_gy.sum(axis=0)
    grad_cols = (flat_gy @ kmat.T).reshape(b, n_out, k, c_in)
    pad = (k - 1) // 2
    grad_xp = np.zeros((b, in_len + 2 * pad, c_in))
    for t in range(k):
        grad_xp[:, t:t + stride * n_out:stride, :] += grad_cols[:, :, t, :]
    return grad_xp[:, pad:pad + in_len, :], grad_kernels, grad_bias


# ---------------------------------------------------------------------------
# layers
# ---------------------------------------------------------------------------

class Layer:
    """Forward/backward contract shared by the fixed layer vocabulary."""

    kind: str = ""

    def params(self) -> dict[str, Tensor]:
        return {}

    def forward(self, x: Tensor):
        raise NotImplementedError

    def backward(self, cache, grad_out: Tensor):
        raise NotImplementedError

    def spec(self) -> LayerSpec:
        raise NotImplementedError

    def hyperparams(self) -> dict[str, Any]:
        return {}


class Conv1d(Layer):
    kind = "conv1d"

    def __init__(self, c_in: int, c_out: int, k: int, stride: int = 1,
                 rng: np.random.Generator | None = None):
        if k % 2 == 0:
            raise ValueError(f"kernel size must be odd for same padding, got {k}")
        self.c_in, self.c_out, self.k, self.stride = c_in, c_out, k, stride
        scale = 1.0 / np.sqrt(c_in * k)
        if rng is None:
            self.kernels = np.zeros((c_out, c_in, k))
        else:
            self.kernels = rng.uniform(-scale, scale, size=(c_out, c_in, k))
        self.bias = np.zeros(c_out)

    def params(self):
        return {"kernels": self.kernels, "bias": self.bias}

    def forward(self, x):
        if x.ndim != 3 or x.shape[2] != self.c_in:
            raise ValueError(f"conv1d expects (B,N,{self.c_in}), got {x.shape}")
        y, cols = _conv1d_batch(x, self.kernels, self.bias, self.stride)
        return y, (cols, x.shape[1])

    def backward(self, cache, grad_out):
        cols, in_len = cache
        gx, gk, gb = _conv1d_batch_backward(grad_out, cols, self.kernels, self.stride, in_len)
        return gx, {"kernels": gk, "bias": gb}

    def hyperparams(self):
        return {"c_in": self.c_in, "c_out": self.c_out, "k": self.k, "stride": self.stride}

    def spec(self):
        return LayerSpec("conv1d", ("B", -1, self.c_in), ("B", -1, self.c_out),
                         self.hyperparams())


class Dense(Layer):
    kind = "dense"

    def __init__(self, d_in: int, d_out: int, use_bias: bool = True,
                 rng: np.random.Generator | None = None):
        self.d_in, self.d_out, self.use_bias = d_in, d_out, use_bias
        scale = 1.0 / np.sqrt(d_in)
        if rng is None:
            self.weight = np.zeros((d_in, d_out))
        else:
            self.weight = rng.uniform(-scale, scale, size=(d_in, d_out))
        self.bias = np.zeros(d_out) if use_bias else None

    def params(self):
        p = {"weight": self.weight}
        if self.use_bias:
            p["bias"] = self.bias
        return p

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.d_in:
            raise ValueError(f"dense expects (B,{self.d_in}), got {x.shape}")
        y = x @ self.weight
        if self.use_bias:
            y = y + self.bias
        return y, x

    def backward(self, cache, grad_out):
        x = cache
        grads = {"weight": x.T @ grad_out}
        if self.use_bias:
            grads["bias"] = grad_out.sum(axis=0)
        return grad_out @ self.weight.T, grads

    def hyperparams(self):
        return {"d_in": self.d_in, "d_out": self.d_out, "use_bias": self.use_bias}

    def spec(self):
        return LayerSpec("dense", ("B", self.d_in), ("B", self.d_out), self.hyperparams())


class ReLU(Layer):
    kind = "relu"

    def forward(self, x):
        return np.maximum(x, 0.0), x

    def backward(self, cache, grad_out):
        return grad_out * (cache > 0), {}

    def spec(self):
        return LayerSpec("relu", ("any",), ("any",))


class Sin(Layer):
    kind = "sin"

    def forward(self, x):
        return np.sin(x), x

    def backward(self, cache, grad_out):
        # d sin(z)/dz = cos(z) at the cached pre-activation
        return grad_out * np.cos(cache), {}

    def spec(self):
        return LayerSpec("sin", ("any",), ("any",))


class Flatten(Layer):
    """(B, N, K) -> (B, N*K), row-major."""

    kind = "flatten"

    def forward(self, x):
        b, n, k = x.shape
        return x.reshape(b, n * k), (n, k)

    def backward(self, cache, grad_out):
        n, k = cache
        return grad_out.reshape(grad_out.shape[0], n, k), {}

    def spec(self):
        return LayerSpec("flatten", ("B", -1, -1), ("B", -1))


class Reshape(Layer):
    """(B, N*K) -> (B, N, K)."""

    kind = "reshape"

    def __init__(self, n: int, k: int):
        self.n, self.k = n, k

    def forward(self, x):
        if x.shape[1] != self.n * self.k:
            raise ValueError(f"cannot reshape {x.shape[1]} to ({self.n},{self.k})")
        return x.reshape(x.shape[0], self.n, self.k), None

    def backward(self, cache, grad_out):
        return grad_out.reshape(grad_out.shape[0], self.n * self.k), {}

    def hyperparams(self):
        return {"n": self.n, "k": self.k}

    def spec(self):
        return LayerSpec("reshape", ("B", self.n * self.k), ("B", self.n, self.k),
                         self.hyperparams())


class Upsample(Layer):
    """Nearest-neighbor repetition along the time axis by an integer factor."""

    kind = "upsample"

    def __init__(self, factor: int):
        if factor < 1:
            raise ValueError("upsample factor must be >= 1")
        self.factor = factor

    def forward(self, x):
        return np.repeat(x, self.factor, axis=1), None

    def backward(self, cache, grad_out):
        b, n_out, c = grad_out.shape
        return grad_out.reshape(b, n_out // self.factor, self.factor, c).sum(axis=2), {}

    def hyperparams(self):
        return {"factor": self.factor}

    def spec(self):
        return LayerSpec("upsample", ("B", -1, -1), ("B", -1, -1), self.hyperparams())


# ---------------------------------------------------------------------------
# stack, tape, optimizer
# ---------------------------------------------------------------------------

class LayerStack:
    """Ordered layer pipeline with explicit tape-based backprop."""

    def __init__(self, layers: list[Layer]):
        self.layers = list(layers)

    def forward(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x, _ = layer.forward(x)
        return x

    def forward_tape(self, x: Tensor):
        """Forward pass recording (layer, cache) in execution order."""
        tape = []
        for layer in self.layers:
            x, cache = layer.forward(x)
            tape.append(cache)
        return x, tape

    def forward_until(self, x: Tensor, stop_kind: str) -> Tensor:
        """Forward through layers up to and including the first `stop_kind` layer."""
        for layer in self.layers:
            x, _ = layer.forward(x)
            if layer.kind == stop_kind:
                return x
        raise ValueError(f"stack has no {stop_kind!r} layer")

    def backward(self, tape, grad_out: Tensor):
        """Reverse traversal of the tape; one gradient dict per layer."""
        if len(tape) != len(self.layers):
            raise ValueError("tape does not match layer stack")
        grads: list[dict[str, Tensor]] = [{} for _ in self.layers]
        g = grad_out
        for idx in range(len(self.layers) - 1, -1, -1):
            g, pgrads = self.layers[idx].backward(tape[idx], g)
            grads[idx] = pgrads
        return g, grads

    def named_params(self):
        for i, layer in enumerate(self.layers):
            for name, arr in layer.params().items():
                yield f"{i}.{layer.kind}.{name}", arr

    def n_params(self) -> int:
        return sum(arr.size for _, arr in self.named_params())


@dataclass
class AdamState:
    """Per-parameter Adam moments plus a shared step counter."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    moments: dict[str, tuple[Tensor, Tensor]] = field(default_factory=dict)


def adam_step(state: AdamState, params: dict[str, Tensor], grads: dict[str, Tensor]) -> None:
    """One Adam update with bias correction; mutates params in place."""
    state.step_count += 1
    t = state.step_count
    for key, p in params.items():
        g = grads[key]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != param shape {p.shape} for {key}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for {key}")
        if key not in state.moments:
            state.moments[key] = (np.zeros_like(p), np.zeros_like(p))
        m, v = state.moments[key]
        m *= state.beta1
        m += (1 - state.beta1) * g
        v *= state.beta2
        v += (1 - state.beta2) * g * g
        m_hat = m / (1 - state.beta1 ** t)
        v_hat = v / (1 - state.beta2 ** t)
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def stack_param_dicts(stack: LayerStack, layer_grads):
    """Align stack parameters with per-layer gradient dicts for adam_step."""
    params: dict[str, Tensor] = {}
    grads: dict[str, Tensor] = {}
    for i, layer in enumerate(stack.layers):
        for name, arr in layer.params().items():
            key = f"{i}.{layer.kind}.{name}"
            params[key] = arr
            grads[key] = layer_grads[i][name]
    return params, grads


def mse_loss_grad(y: Tensor, target: Tensor):
    """Mean squared error over all elements and its gradient w.r.t. y."""
    diff = y - target
    loss = float(np.mean(diff * diff))
    return loss, 2.0 * diff / diff.size


def grad_check(stack: LayerStack, x: Tensor, target: Tensor, h: float = 1e-5) -> float:
    """Max relative error between analytic and central finite-difference grads.

    Loss is the elementwise MSE against `target`. Intended for small stacks
    (< 1e4 parameters); returns the worst relative error over every
    parameter entry, |a - n| / (|a| + |n| + 1e-12).
    """
    y, tape = stack.forward_tape(x)
    _, dy = mse_loss_grad(y, target)
    _, layer_grads = stack.backward(tape, dy)

    worst = 0.0
    for i, layer in enumerate(stack.layers):
        for name, arr in layer.params().items():
            analytic = layer_grads[i][name]
            flat = arr.ravel()
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                lp, _ = mse_loss_grad(stack.forward(x), target)
                flat[j] = orig - h
                lm, _ = mse_loss_grad(stack.forward(x), target)
                flat[j] = orig
                numeric = (lp - lm) / (2 * h)
                a = analytic.ravel()[j]
                rel = abs(a - numeric) / (abs(a) + abs(numeric) + 1e-12)
                worst = max(worst, rel)
    return worst
