"""scikit-learn compatible regressors around the from-scratch networks."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import InputValidationError, ShapeMismatch
from .layers import relative_absolute_error, squared_error
from .lstm import LSTMNetwork
from .mlp import MLPNetwork
from .training import fit_network, predict_batched


def _holdout(X, y, X_val, y_val, fraction):
    """Use the given validation data, or split off the chronological tail."""
    if X_val is not None:
        return X, y, X_val, np.asarray(y_val, dtype=np.float64)
    n_val = max(1, int(round(fraction * len(y))))
    if n_val >= len(y):
        raise InputValidationError("not enough samples for a validation split")
    return X[:-n_val], y[:-n_val], X[-n_val:], y[-n_val:]


def _restart_seeds(random_state, restarts):
    seq = np.random.SeedSequence(0 if random_state is None else int(random_state))
    return [int(s.generate_state(1)[0]) for s in seq.spawn(restarts)]


class _NetworkRegressor(RegressorMixin, BaseEstimator):
    loss_name = ""

    def _loss(self):
        raise NotImplementedError

    def _make_network(self, X, y, seed):
        raise NotImplementedError

    def _check_X(self, X):
        raise NotImplementedError

    def _fit_kwargs(self):
        raise NotImplementedError

    def fit(self, X, y, X_val=None, y_val=None):
        X = self._check_X(X)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if len(y) != len(X):
            raise ShapeMismatch(f"{len(X)} samples but {len(y)} targets")
        if X_val is not None:
            X_val = self._check_X(X_val)
        X_tr, y_tr, X_va, y_va = _holdout(X, y, X_val, y_val, self.validation_fraction)
        best = None
        self.restart_val_losses_ = []
        for seed in _restart_seeds(self.random_state, self.restarts):
            net = self._make_network(X_tr, y_tr, seed)
            res = fit_network(net, self._loss(), X_tr, y_tr, X_va, y_va, seed=seed, **self._fit_kwargs())
            self.restart_val_losses_.append(res.best_val_loss)
            if best is None or res.best_val_loss < best[1].best_val_loss:
                best = (net, res)
        self.network_, result = best
        self.history_ = {"train_loss": list(result.train_loss), "val_loss": list(result.val_loss)}
        self.best_epoch_ = result.best_epoch
        self.n_epochs_ = len(result.train_loss)
        return self

    def predict(self, X):
        check_is_fitted(self, "network_")
        return predict_batched(self.network_, self._check_X(X))

    def loss(self, y_true, y_pred):
        return self._loss()(y_true, y_pred)[0]


class MLPCreepRegressor(_NetworkRegressor):
    """Dense ReLU network trained on the relative absolute error.

    Parameters follow the usual sklearn conventions; ``fit`` optionally takes
    explicit validation data, otherwise the last ``validation_fraction`` of the
    training rows is held out (rows are assumed chronological).
    """

    def __init__(self, hidden_layers=2, neurons_per_layer=200, dropout_rate=0.15, learning_rate=1e-3,
                 batch_size=512, max_epochs=1000, early_stop_patience=100, restarts=3,
                 validation_fraction=0.2, random_state=None):
        self.hidden_layers = hidden_layers
        self.neurons_per_layer = neurons_per_layer
        self.dropout_rate = dropout_rate
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.early_stop_patience = early_stop_patience
        self.restarts = restarts
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def _loss(self):
        return relative_absolute_error

    def _check_X(self, X):
        X = check_array(X, dtype=np.float64)
        if hasattr(self, "n_features_in_") and X.shape[1] != self.n_features_in_:
            raise ShapeMismatch(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def _make_network(self, X, y, seed):
        self.n_features_in_ = X.shape[1]
        net = MLPNetwork(X.shape[1], self.hidden_layers, self.neurons_per_layer, self.dropout_rate, seed)
        # start the head at the median target (the constant minimising the
        # relative absolute error up to weighting); -ln targets sit near 10,
        # far from a zero-initialised output
        net.params[f"b{net.hidden_layers}"][:] = np.median(y)
        return net

    def _fit_kwargs(self):
        return dict(learning_rate=self.learning_rate, batch_size=self.batch_size,
                    max_epochs=self.max_epochs, patience=self.early_stop_patience)


class LSTMCreepRegressor(_NetworkRegressor):
    """Sequence-to-value regressor: two skip-connected LSTM blocks, squared loss.

    ``X`` is (n_sequences, steps) or (n_sequences, steps, channels). Training
    runs the full number of epochs and keeps the best-validation parameters.
    """

    def __init__(self, cells_block1=6, cells_block2=4, learning_rate=0.01, batch_size=25, epochs=500,
                 restarts=3, validation_fraction=0.2, random_state=None):
        self.cells_block1 = cells_block1
        self.cells_block2 = cells_block2
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.restarts = restarts
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def _loss(self):
        return squared_error

    def _check_X(self, X):
        X = check_array(X, dtype=np.float64, allow_nd=True)
        if X.ndim == 2:
            X = X[:, :, None]
        if X.ndim != 3:
            raise ShapeMismatch(f"expected sequences of shape (n, steps[, channels]), got {X.shape}")
        if hasattr(self, "sequence_shape_") and X.shape[1:] != self.sequence_shape_:
            raise ShapeMismatch(f"expected sequences of shape {self.sequence_shape_}, got {X.shape[1:]}")
        return X

    def _make_network(self, X, y, seed):
        self.sequence_shape_ = X.shape[1:]
        return LSTMNetwork(X.shape[2], self.cells_block1, self.cells_block2, seed=seed)

    def _fit_kwargs(self):
        return dict(learning_rate=self.learning_rate, batch_size=self.batch_size,
                    max_epochs=self.epochs, patience=None)

    @property
    def n_parameters_(self):
        check_is_fitted(self, "network_")
        return self.network_.n_parameters
