"""Two stacked LSTM blocks with a skip connection and a scalar read-out.

Block 1 reads the raw sequence. Block 2 reads, per step, block 1's hidden
state concatenated with the raw input. The last hidden state of block 2 goes
through an affine map to one value.

Gate layout along the last weight axis is (input, forget, output, candidate).
"""
from __future__ import annotations

import numpy as np
from numba import njit

from ..exceptions import ShapeMismatch
from .layers import glorot_uniform, orthogonal


@njit(cache=True)
def _forward_loop(proj, W_h, H, C, gates):
    batch, steps, _ = proj.shape
    n_h = W_h.shape[0]
    for s in range(batch):
        h = np.zeros(n_h)
        c = np.zeros(n_h)
        z = np.empty(4 * n_h)
        for t in range(steps):
            for k in range(4 * n_h):
                acc = proj[s, t, k]
                for a in range(n_h):
                    acc += h[a] * W_h[a, k]
                z[k] = acc
            for j in range(n_h):
                i_g = 0.5 * (1.0 + np.tanh(0.5 * z[j]))
                f_g = 0.5 * (1.0 + np.tanh(0.5 * z[n_h + j]))
                o_g = 0.5 * (1.0 + np.tanh(0.5 * z[2 * n_h + j]))
                c_hat = np.tanh(z[3 * n_h + j])
                c[j] = f_g * c[j] + i_g * c_hat
                h[j] = o_g * np.tanh(c[j])
                gates[s, t, j] = i_g
                gates[s, t, n_h + j] = f_g
                gates[s, t, 2 * n_h + j] = o_g
                gates[s, t, 3 * n_h + j] = c_hat
            C[s, t] = c
            H[s, t] = h


@njit(cache=True)
def _backward_loop(dH, H, C, gates, W_h, dZ, dW_h):
    batch, steps, n_h = dH.shape
    for s in range(batch):
        dh_next = np.zeros(n_h)
        dc_next = np.zeros(n_h)
        for t in range(steps - 1, -1, -1):
            for j in range(n_h):
                i_g = gates[s, t, j]
                f_g = gates[s, t, n_h + j]
                o_g = gates[s, t, 2 * n_h + j]
                c_hat = gates[s, t, 3 * n_h + j]
                c_prev = C[s, t - 1, j] if t > 0 else 0.0
                tanh_c = np.tanh(C[s, t, j])
                dh = dH[s, t, j] + dh_next[j]
                dc = dc_next[j] + dh * o_g * (1.0 - tanh_c * tanh_c)
                dZ[s, t, j] = dc * c_hat * i_g * (1.0 - i_g)
                dZ[s, t, n_h + j] = dc * c_prev * f_g * (1.0 - f_g)
                dZ[s, t, 2 * n_h + j] = dh * tanh_c * o_g * (1.0 - o_g)
                dZ[s, t, 3 * n_h + j] = dc * i_g * (1.0 - c_hat * c_hat)
                dc_next[j] = dc * f_g
            dz = dZ[s, t]
            if t > 0:
                h_prev = H[s, t - 1]
                for a in range(n_h):
                    for k in range(4 * n_h):
                        dW_h[a, k] += h_prev[a] * dz[k]
            for a in range(n_h):
                acc = 0.0
                for k in range(4 * n_h):
                    acc += dz[k] * W_h[a, k]
                dh_next[a] = acc


def lstm_layer_forward(X, W_x, W_h, b):
    """Run one LSTM layer over ``X`` of shape (batch, steps, features)."""
    batch, steps, _ = X.shape
    n_h = W_h.shape[0]
    proj = np.ascontiguousarray(X @ W_x + b)
    H = np.zeros((batch, steps, n_h))
    C = np.zeros((batch, steps, n_h))
    gates = np.zeros((batch, steps, 4 * n_h))
    _forward_loop(proj, np.ascontiguousarray(W_h), H, C, gates)
    return H, (X, H, C, gates)


def lstm_layer_backward(dH, cache, W_x, W_h):
    """Backpropagation through time; ``dH`` holds dL/dh for every step."""
    X, H, C, gates = cache
    batch, steps, _ = X.shape
    n_h = W_h.shape[0]
    dZ = np.zeros((batch, steps, 4 * n_h))
    dW_h = np.zeros_like(W_h)
    _backward_loop(np.ascontiguousarray(dH), H, C, gates, np.ascontiguousarray(W_h), dZ, dW_h)
    flat_dz = dZ.reshape(batch * steps, 4 * n_h)
    dW_x = X.reshape(batch * steps, -1).T @ flat_dz
    db = flat_dz.sum(axis=0)
    dX = dZ @ W_x.T
    return dX, dW_x, dW_h, db


class LSTMNetwork:
    def __init__(self, n_inputs: int = 1, cells_block1: int = 6, cells_block2: int = 4,
                 forget_bias: float = 1.0, seed=None):
        self.n_inputs = int(n_inputs)
        self.cells_block1 = int(cells_block1)
        self.cells_block2 = int(cells_block2)
        rng = np.random.default_rng(seed)
        n1, n2, d = self.cells_block1, self.cells_block2, self.n_inputs
        d2 = n1 + d
        self.params = {
            "Wx1": glorot_uniform(d, 4 * n1, (d, 4 * n1), rng),
            "Wh1": np.hstack([orthogonal((n1, n1), rng) for _ in range(4)]),
            "b1": np.zeros(4 * n1),
            "Wx2": glorot_uniform(d2, 4 * n2, (d2, 4 * n2), rng),
            "Wh2": np.hstack([orthogonal((n2, n2), rng) for _ in range(4)]),
            "b2": np.zeros(4 * n2),
            "Wo": glorot_uniform(n2, 1, (n2, 1), rng),
            "bo": np.zeros(1),
        }
        self.params["b1"][n1:2 * n1] = forget_bias
        self.params["b2"][n2:2 * n2] = forget_bias
        self._cache = None

    @property
    def n_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def _as_3d(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2 and self.n_inputs == 1:
            X = X[:, :, None]
        if X.ndim != 3 or X.shape[2] != self.n_inputs:
            raise ShapeMismatch(f"expected (n, steps, {self.n_inputs}) sequences, got {X.shape}")
        return X

    def forward(self, X, training: bool = False, rng=None) -> np.ndarray:
        X = self._as_3d(X)
        p = self.params
        H1, cache1 = lstm_layer_forward(X, p["Wx1"], p["Wh1"], p["b1"])
        Z = np.concatenate([H1, X], axis=2)
        H2, cache2 = lstm_layer_forward(Z, p["Wx2"], p["Wh2"], p["b2"])
        h_last = H2[:, -1]
        self._cache = (cache1, cache2, h_last, X.shape)
        return (h_last @ p["Wo"] + p["bo"])[:, 0]

    def hidden_states(self, X):
        X = self._as_3d(X)
        p = self.params
        H1, _ = lstm_layer_forward(X, p["Wx1"], p["Wh1"], p["b1"])
        H2, _ = lstm_layer_forward(np.concatenate([H1, X], axis=2), p["Wx2"], p["Wh2"], p["b2"])
        return H1, H2

    def backward(self, d_out) -> dict:
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        cache1, cache2, h_last, shape = self._cache
        p = self.params
        d_out = np.asarray(d_out, dtype=np.float64).reshape(-1, 1)
        grads = {"Wo": h_last.T @ d_out, "bo": d_out.sum(axis=0)}
        dH2 = np.zeros((shape[0], shape[1], self.cells_block2))
        dH2[:, -1] = d_out @ p["Wo"].T
        dZ, grads["Wx2"], grads["Wh2"], grads["b2"] = lstm_layer_backward(dH2, cache2, p["Wx2"], p["Wh2"])
        dH1 = dZ[:, :, :self.cells_block1]
        _, grads["Wx1"], grads["Wh1"], grads["b1"] = lstm_layer_backward(dH1, cache1, p["Wx1"], p["Wh1"])
        return grads
