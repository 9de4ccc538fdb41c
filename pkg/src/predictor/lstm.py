"""Single-layer LSTM with a fully connected read-out, in numpy.

Gates are stacked in the order [input, forget, output, candidate]:

    z_t = x_t * W + U h_{t-1} + b          (4H)
    i, f, o = sigmoid(z[gate]);  g = tanh(z[candidate])
    c_t = f * c_{t-1} + i * g
    h_t = o * tanh(c_t)
    y   = V h_M + c_out                    (N)

Initial hidden and cell states are zero. Everything here works on the
normalised scale; PredictorModel handles Hz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from src.config.constants import DRIFT
from src.exceptions import ModelError

Array = NDArray[np.float64]

GATES = ("i", "f", "o", "g")


@dataclass(frozen=True, eq=False)
class LstmWeights:
    """Weights for hidden width H and output length N.

    Attributes:
        w: (4H,) input map, one column per gate stacked
        u: (4H, H) recurrent map
        b: (4H,) gate biases
        v: (N, H) read-out map
        c: (N,) read-out bias
    """

    w: Array
    u: Array
    b: Array
    v: Array
    c: Array

    def __post_init__(self) -> None:
        h = self.hidden
        n = self.v.shape[0] if self.v.ndim == 2 else -1
        expected = {
            "w": (4 * h,),
            "u": (4 * h, h),
            "b": (4 * h,),
            "v": (n, h),
            "c": (n,),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ModelError(f"weight {name} has shape {actual}, expected {shape}")
        for name in expected:
            if not np.all(np.isfinite(getattr(self, name))):
                raise ModelError(f"weight {name} has non-finite entries")

    @property
    def hidden(self) -> int:
        return int(self.u.shape[1]) if self.u.ndim == 2 else 0

    @property
    def n_out(self) -> int:
        return int(self.c.shape[0])

    def flatten(self) -> Array:
        """All parameters as one vector (w, u, b, v, c order)."""
        return np.concatenate([self.w, self.u.ravel(), self.b, self.v.ravel(), self.c])

    @classmethod
    def unflatten(cls, vector: Array, hidden: int, n_out: int) -> LstmWeights:
        h4 = 4 * hidden
        sizes = [h4, h4 * hidden, h4, n_out * hidden, n_out]
        if vector.size != sum(sizes):
            raise ModelError(f"parameter vector has {vector.size} entries, expected {sum(sizes)}")
        parts = np.split(vector, np.cumsum(sizes)[:-1])
        return cls(
            w=parts[0].copy(),
            u=parts[1].reshape(h4, hidden).copy(),
            b=parts[2].copy(),
            v=parts[3].reshape(n_out, hidden).copy(),
            c=parts[4].copy(),
        )

    @classmethod
    def zeros(cls, hidden: int, n_out: int) -> LstmWeights:
        return cls(
            w=np.zeros(4 * hidden),
            u=np.zeros((4 * hidden, hidden)),
            b=np.zeros(4 * hidden),
            v=np.zeros((n_out, hidden)),
            c=np.zeros(n_out),
        )

    def gate(self, name: str) -> tuple[Array, Array, Array]:
        """(W, U, b) slices for one gate."""
        h = self.hidden
        k = GATES.index(name)
        rows = slice(k * h, (k + 1) * h)
        return self.w[rows], self.u[rows], self.b[rows]


def init_weights(hidden: int, n_out: int, rng: np.random.Generator) -> LstmWeights:
    """Uniform(-s/sqrt(H), s/sqrt(H)) weights, forget-gate bias +1, read-out bias 0."""
    if hidden < 1 or n_out < 1:
        raise ModelError(f"hidden and n_out must be >= 1, got {hidden}, {n_out}")
    bound = DRIFT.INIT_SCALE / np.sqrt(hidden)
    w = rng.uniform(-bound, bound, 4 * hidden)
    u = rng.uniform(-bound, bound, (4 * hidden, hidden))
    v = rng.uniform(-bound, bound, (n_out, hidden))
    b = np.zeros(4 * hidden)
    b[hidden : 2 * hidden] = DRIFT.FORGET_GATE_BIAS
    return LstmWeights(w=w, u=u, b=b, v=v, c=np.zeros(n_out))


@dataclass
class ForwardCache:
    """Per-step activations kept for backpropagation."""

    inputs: Array  # (B, M)
    gates: list[tuple[Array, Array, Array, Array]]  # (i, f, o, g) per step
    cells: list[Array]  # c_0 .. c_M
    hiddens: list[Array]  # h_0 .. h_M


def forward(weights: LstmWeights, inputs: Array) -> tuple[Array, ForwardCache]:
    """Run a batch of normalised windows.

    Args:
        weights: Network weights
        inputs: (B, M) or (M,) normalised inputs

    Returns:
        ((B, N) outputs, cache)
    """
    x = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    batch, steps = x.shape
    h_size = weights.hidden
    h = np.zeros((batch, h_size))
    c = np.zeros((batch, h_size))
    cache = ForwardCache(inputs=x, gates=[], cells=[c], hiddens=[h])
    for t in range(steps):
        z = x[:, t : t + 1] * weights.w + h @ weights.u.T + weights.b
        i = expit(z[:, :h_size])
        f = expit(z[:, h_size : 2 * h_size])
        o = expit(z[:, 2 * h_size : 3 * h_size])
        g = np.tanh(z[:, 3 * h_size :])
        c = f * c + i * g
        h = o * np.tanh(c)
        cache.gates.append((i, f, o, g))
        cache.cells.append(c)
        cache.hiddens.append(h)
    return h @ weights.v.T + weights.c, cache


def backward(weights: LstmWeights, cache: ForwardCache, d_out: Array) -> LstmWeights:
    """Backpropagation through time.

    Args:
        weights: Weights used for the forward pass
        cache: Activations from forward()
        d_out: (B, N) gradient of the loss w.r.t. the outputs

    Returns:
        Gradients packed as LstmWeights
    """
    h_size = weights.hidden
    h_last = cache.hiddens[-1]
    dv = d_out.T @ h_last
    dc_out = d_out.sum(axis=0)
    dw = np.zeros_like(weights.w)
    du = np.zeros_like(weights.u)
    db = np.zeros_like(weights.b)

    dh = d_out @ weights.v
    dc_next = np.zeros_like(dh)
    for t in range(len(cache.gates) - 1, -1, -1):
        i, f, o, g = cache.gates[t]
        c_prev, c_t = cache.cells[t], cache.cells[t + 1]
        h_prev = cache.hiddens[t]
        tanh_c = np.tanh(c_t)

        d_o = dh * tanh_c
        dc = dc_next + dh * o * (1.0 - tanh_c**2)
        d_f = dc * c_prev
        d_i = dc * g
        d_g = dc * i
        dc_next = dc * f

        dz = np.empty((dh.shape[0], 4 * h_size))
        dz[:, :h_size] = d_i * i * (1.0 - i)
        dz[:, h_size : 2 * h_size] = d_f * f * (1.0 - f)
        dz[:, 2 * h_size : 3 * h_size] = d_o * o * (1.0 - o)
        dz[:, 3 * h_size :] = d_g * (1.0 - g**2)

        dw += dz.T @ cache.inputs[:, t]
        du += dz.T @ h_prev
        db += dz.sum(axis=0)
        dh = dz @ weights.u

    return LstmWeights(w=dw, u=du, b=db, v=dv, c=dc_out)
