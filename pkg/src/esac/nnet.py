"""Small multilayer perceptrons stored as flat float64 parameter vectors.

Every network in the package (ES policy, SAC policy, twin Q, value and target
value) is a ``NetSpec`` plus a flat ``np.ndarray``.  Keeping parameters flat makes
perturbation, crossover and the ES update plain vector arithmetic.

Layout of a parameter vector: for each layer, the weight matrix of shape
``(out, in)`` in row-major order followed by the bias of length ``out``.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np

HIDDEN_ACTIVATIONS = ("relu",)
OUTPUT_ACTIVATIONS = ("tanh", "linear")


class DimensionError(ValueError):
    """Input, gradient or parameter vector has the wrong shape."""


class NumericalError(FloatingPointError):
    """A non-finite value reached an optimizer."""


@dataclass(frozen=True)
class NetSpec:
    input_dim: int
    hidden_dims: tuple[int, ...]
    output_dim: int
    hidden_activation: str = "relu"
    output_activation: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        if any(int(d) < 1 for d in dims):
            raise ValueError(f"all layer sizes must be positive, got {dims}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) for every layer."""
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        return list(zip(dims[:-1], dims[1:]))

    @cached_property
    def _slices(self) -> list[tuple[slice, slice, tuple[int, int]]]:
        out, offset = [], 0
        for fan_in, fan_out in self.layer_dims:
            w = slice(offset, offset + fan_in * fan_out)
            offset += fan_in * fan_out
            b = slice(offset, offset + fan_out)
            offset += fan_out
            out.append((w, b, (fan_out, fan_in)))
        return out

    @property
    def param_count(self) -> int:
        return sum(i * o + o for i, o in self.layer_dims)

    def digest(self) -> bytes:
        """Stable 8-byte identifier used in serialized parameter files."""
        text = (
            f"{self.input_dim}|{','.join(map(str, self.hidden_dims))}|{self.output_dim}"
            f"|{self.hidden_activation}|{self.output_activation}"
        )
        return hashlib.sha256(text.encode()).digest()[:8]


def _check_params(params: np.ndarray, spec: NetSpec) -> None:
    if params.ndim != 1 or params.shape[0] != spec.param_count:
        raise DimensionError(
            f"parameter vector has shape {params.shape}, spec expects ({spec.param_count},)"
        )


def unflatten(params: np.ndarray, spec: NetSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-layer ``(W, b)`` views into ``params`` (no copies)."""
    _check_params(params, spec)
    return [(params[w].reshape(shape), params[b]) for w, b, shape in spec._slices]


def flatten(layers: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    return np.concatenate([np.concatenate([w.ravel(), b.ravel()]) for w, b in layers])


def init_params(spec: NetSpec, rng: np.random.Generator) -> np.ndarray:
    """Weights uniform in +-1/sqrt(fan_in), biases zero."""
    params = np.zeros(spec.param_count)
    for (w, _, shape), (fan_in, _) in zip(spec._slices, spec.layer_dims):
        bound = 1.0 / np.sqrt(fan_in)
        params[w] = rng.uniform(-bound, bound, size=shape[0] * shape[1])
    return params


def forward(params: np.ndarray, spec: NetSpec, x) -> np.ndarray:
    """Evaluate the network on one input vector or a ``(batch, input_dim)`` array."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.input_dim or x.ndim > 2:
        raise DimensionError(f"input shape {x.shape} incompatible with input_dim {spec.input_dim}")
    return forward_layers(unflatten(params, spec), spec, x)


def forward_layers(layers, spec: NetSpec, x: np.ndarray) -> np.ndarray:
    """``forward`` on pre-split ``(W, b)`` layers; skips validation for hot loops."""
    h = x
    for w, b in layers[:-1]:
        h = np.maximum(h @ w.T + b, 0.0)
    w, b = layers[-1]
    y = h @ w.T + b
    if spec.output_activation == "tanh":
        y = np.tanh(y)
    return y


def backward(params: np.ndarray, spec: NetSpec, x, upstream_grad) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of ``sum(upstream_grad * forward(x))``.

    Returns ``(param_grads, input_grad)``.  For batched input the parameter
    gradient is summed over the batch and ``input_grad`` keeps the batch axis.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(upstream_grad, dtype=float)
    if x.shape[-1] != spec.input_dim or x.ndim > 2:
        raise DimensionError(f"input shape {x.shape} incompatible with input_dim {spec.input_dim}")
    if g.shape[-1] != spec.output_dim or g.shape[:-1] != x.shape[:-1]:
        raise DimensionError(f"upstream grad shape {g.shape} does not match output for input {x.shape}")
    single = x.ndim == 1
    if single:
        x, g = x[None, :], g[None, :]

    layers = unflatten(params, spec)
    acts = [x]
    for w, b in layers[:-1]:
        acts.append(np.maximum(acts[-1] @ w.T + b, 0.0))
    if spec.output_activation == "tanh":
        w, b = layers[-1]
        y = np.tanh(acts[-1] @ w.T + b)
        g = g * (1.0 - y * y)

    grads = np.empty_like(params)
    for (wsl, bsl, _), (w, _), a_in, k in zip(
        reversed(spec._slices), reversed(layers), reversed(acts), range(len(layers) - 1, -1, -1)
    ):
        grads[wsl] = (g.T @ a_in).ravel()
        grads[bsl] = g.sum(axis=0)
        g = g @ w
        if k > 0:
            g = g * (a_in > 0.0)
    return grads, (g[0] if single else g)


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, size: int, **kwargs) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), **kwargs)


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState, lr: float) -> np.ndarray:
    """Bias-corrected Adam descent step, applied to ``params`` in place."""
    grads = np.asarray(grads, dtype=float)
    if grads.shape != params.shape or state.first_moment.shape != params.shape:
        raise DimensionError(f"grad shape {grads.shape} != param shape {params.shape}")
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    if not np.all(np.isfinite(grads)):
        raise NumericalError("non-finite gradient passed to adam_step")
    state.step_count += 1
    m, v = state.first_moment, state.second_moment
    m *= state.beta1
    m += (1.0 - state.beta1) * grads
    v *= state.beta2
    v += (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1**state.step_count)
    v_hat = v / (1.0 - state.beta2**state.step_count)
    params -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params


_HEADER = struct.Struct("<8sQ")


def params_to_bytes(params: np.ndarray, spec: NetSpec) -> bytes:
    """Serialize as spec digest, uint64 length, then little-endian float64 values."""
    _check_params(params, spec)
    return _HEADER.pack(spec.digest(), params.shape[0]) + params.astype("<f8").tobytes()


def params_from_bytes(data: bytes, spec: NetSpec) -> np.ndarray:
    digest, length = _HEADER.unpack_from(data, 0)
    if digest != spec.digest():
        raise DimensionError("serialized parameters belong to a different network spec")
    if length != spec.param_count:
        raise DimensionError(f"serialized length {length} != spec param count {spec.param_count}")
    body = data[_HEADER.size : _HEADER.size + 8 * length]
    if len(body) != 8 * length:
        raise DimensionError("truncated parameter blob")
    return np.frombuffer(body, dtype="<f8").astype(float)


def serialized_size(spec: NetSpec) -> int:
    return _HEADER.size + 8 * spec.param_count
