"""Fully connected ReLU network with inverted dropout and a linear scalar head."""
from __future__ import annotations

import numpy as np

from ..exceptions import ShapeMismatch
from .layers import he_normal


class MLPNetwork:
    def __init__(self, n_inputs: int, hidden_layers: int = 2, neurons_per_layer: int = 200,
                 dropout_rate: float = 0.15, seed=None):
        if not 0.0 <= dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        self.n_inputs = int(n_inputs)
        self.hidden_layers = int(hidden_layers)
        self.neurons_per_layer = int(neurons_per_layer)
        self.dropout_rate = float(dropout_rate)
        rng = np.random.default_rng(seed)
        sizes = [self.n_inputs] + [self.neurons_per_layer] * self.hidden_layers + [1]
        self.params = {}
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            self.params[f"W{i}"] = he_normal(fan_in, (fan_in, fan_out), rng)
            self.params[f"b{i}"] = np.zeros(fan_out)
        self._cache = None

    @property
    def n_layers(self) -> int:
        return self.hidden_layers + 1

    @property
    def n_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def forward(self, X, training: bool = False, rng=None) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_inputs:
            raise ShapeMismatch(f"expected (n, {self.n_inputs}) features, got {X.shape}")
        if training and self.dropout_rate > 0:
            rng = np.random.default_rng(rng)
        acts, masks, pre = [X], [], []
        a = X
        for i in range(self.hidden_layers):
            z = a @ self.params[f"W{i}"] + self.params[f"b{i}"]
            a = np.maximum(z, 0.0)
            mask = None
            if training and self.dropout_rate > 0:
                keep = 1.0 - self.dropout_rate
                mask = (rng.random(a.shape) < keep) / keep
                a = a * mask
            pre.append(z)
            masks.append(mask)
            acts.append(a)
        last = self.hidden_layers
        out = a @ self.params[f"W{last}"] + self.params[f"b{last}"]
        self._cache = (acts, pre, masks)
        return out[:, 0]

    def backward(self, d_out) -> dict:
        """Gradients of a loss with respect to every parameter, given dL/d(prediction)."""
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        acts, pre, masks = self._cache
        grads = {}
        delta = np.asarray(d_out, dtype=np.float64).reshape(-1, 1)
        last = self.hidden_layers
        grads[f"W{last}"] = acts[-1].T @ delta
        grads[f"b{last}"] = delta.sum(axis=0)
        d_a = delta @ self.params[f"W{last}"].T
        for i in reversed(range(self.hidden_layers)):
            if masks[i] is not None:
                d_a = d_a * masks[i]
            d_z = d_a * (pre[i] > 0)
            grads[f"W{i}"] = acts[i].T @ d_z
            grads[f"b{i}"] = d_z.sum(axis=0)
            d_a = d_z @ self.params[f"W{i}"].T
        return grads
