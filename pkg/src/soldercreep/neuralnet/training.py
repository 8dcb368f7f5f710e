"""Minibatch Adam training with best-validation checkpointing."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import Diverged, InputValidationError
from .optim import Adam


@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: int = 2
    neurons_per_layer: int = 200
    dropout_rate: float = 0.15
    learning_rate: float = 0.001
    batch_size: int = 512
    max_epochs: int = 1000
    early_stop_patience: int = 100
    restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if min(self.hidden_layers, self.neurons_per_layer, self.batch_size, self.max_epochs,
               self.early_stop_patience, self.restarts) < 1:
            raise InputValidationError("MLP counts must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise InputValidationError("dropout_rate must lie in [0, 1)")
        if self.early_stop_patience > self.max_epochs:
            raise InputValidationError("early_stop_patience cannot exceed max_epochs")


@dataclass(frozen=True)
class LstmConfig:
    cells_block1: int = 6
    cells_block2: int = 4
    learning_rate: float = 0.01
    batch_size: int = 25
    epochs: int = 500
    sequence_length_min: float = 165.0
    overlap: float = 0.75
    restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if min(self.cells_block1, self.cells_block2, self.batch_size, self.epochs, self.restarts) < 1:
            raise InputValidationError("LSTM counts must be positive")
        if not 0.0 <= self.overlap < 1.0:
            raise InputValidationError("overlap must lie in [0, 1)")
        if not self.sequence_length_min > 0:
            raise InputValidationError("sequence_length_min must be positive")


class EarlyStopping:
    """Track the best validation loss; ``patience=None`` never stops early."""

    def __init__(self, patience=None):
        self.patience = patience
        self.best_loss = np.inf
        self.best_epoch = -1
        self.best_so_far: list[float] = []

    def update(self, epoch: int, val_loss: float) -> bool:
        """Record one epoch; returns True when training should stop."""
        improved = val_loss < self.best_loss
        if improved:
            self.best_loss = val_loss
            self.best_epoch = epoch
        self.best_so_far.append(self.best_loss)
        return self.patience is not None and epoch - self.best_epoch >= self.patience

    @property
    def improved_last(self) -> bool:
        return len(self.best_so_far) - 1 == self.best_epoch


@dataclass
class FitResult:
    params: dict
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = -1

    @property
    def best_val_loss(self) -> float:
        return float(self.val_loss[self.best_epoch])


def _check_finite(value, epoch):
    if not np.isfinite(value):
        raise Diverged(f"loss became non-finite at epoch {epoch}")


def fit_network(network, loss_fn, X, y, X_val, y_val, *, learning_rate, batch_size,
                max_epochs, patience=None, seed=None, eval_batch=4096) -> FitResult:
    """Train ``network`` in place and leave it holding its best-validation parameters."""
    rng = np.random.default_rng(seed)
    optimizer = Adam(learning_rate)
    stopper = EarlyStopping(patience)
    result = FitResult(params={})
    n = len(y)
    best_params = {k: v.copy() for k, v in network.params.items()}
    for epoch in range(max_epochs):
        order = rng.permutation(n)
        weighted = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            pred = network.forward(X[idx], training=True, rng=rng)
            loss, grad = loss_fn(y[idx], pred)
            _check_finite(loss, epoch)
            optimizer.step(network.params, network.backward(grad))
            weighted += loss * len(idx)
        val = _evaluate(network, loss_fn, X_val, y_val, eval_batch)
        _check_finite(val, epoch)
        result.train_loss.append(weighted / n)
        result.val_loss.append(val)
        stop = stopper.update(epoch, val)
        if stopper.improved_last:
            best_params = {k: v.copy() for k, v in network.params.items()}
        if stop:
            break
    network.params = best_params
    result.params = best_params
    result.best_epoch = stopper.best_epoch
    return result


def predict_batched(network, X, eval_batch=4096) -> np.ndarray:
    out = [network.forward(X[s:s + eval_batch]) for s in range(0, len(X), eval_batch)]
    return np.concatenate(out) if out else np.zeros(0)


def _evaluate(network, loss_fn, X, y, eval_batch):
    return loss_fn(y, predict_batched(network, X, eval_batch))[0]
