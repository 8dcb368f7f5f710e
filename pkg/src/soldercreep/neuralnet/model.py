"""Trained-model container, the ``train`` entry point and JSON persistence."""
from __future__ import annotations

import dataclasses
import io
import json
from dataclasses import dataclass, field

import numpy as np

from ..datasets import DatasetBundle, Standardizer
from ..exceptions import InputValidationError
from .estimators import LSTMCreepRegressor, MLPCreepRegressor
from .lstm import LSTMNetwork
from .mlp import MLPNetwork
from .training import LstmConfig, MlpConfig

MODEL_FORMAT = "soldercreep-model"
MODEL_VERSION = 1


@dataclass
class TrainedModel:
    kind: str
    network: object
    standardizers: dict
    history: dict
    best_epoch: int
    config: object
    seed: int
    fraction: float = 1.0
    restart_val_losses: list = field(default_factory=list)

    def predict(self, X_standardized) -> np.ndarray:
        """Predictions in the model's (standardised, for LSTM) target space."""
        from .training import predict_batched
        return predict_batched(self.network, np.asarray(X_standardized, dtype=np.float64))

    def predict_bundle(self, bundle: DatasetBundle, part) -> np.ndarray:
        return self.predict(bundle.X(part))

    @property
    def target_standardizer(self) -> Standardizer | None:
        return self.standardizers.get("target")

    @property
    def best_val_loss(self) -> float:
        return float(self.history["val_loss"][self.best_epoch])

    def training_log_csv(self) -> str:
        buf = io.StringIO()
        buf.write("epoch,train_loss,val_loss\n")
        for i, (tr, va) in enumerate(zip(self.history["train_loss"], self.history["val_loss"])):
            buf.write(f"{i},{tr:.17g},{va:.17g}\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": self.kind,
            "seed": int(self.seed),
            "fraction": float(self.fraction),
            "config": dataclasses.asdict(self.config),
            "architecture": _architecture(self.network),
            "params": {k: {"shape": list(v.shape), "data": v.ravel().tolist()}
                       for k, v in self.network.params.items()},
            "standardizers": {k: s.to_dict() for k, s in self.standardizers.items()},
            "history": {k: [float(x) for x in v] for k, v in self.history.items()},
            "best_epoch": int(self.best_epoch),
            "restart_val_losses": [float(x) for x in self.restart_val_losses],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("format") != MODEL_FORMAT:
            raise InputValidationError("not a soldercreep model file")
        if d.get("version") != MODEL_VERSION:
            raise InputValidationError(f"unsupported model version {d.get('version')}")
        kind = d["kind"]
        arch = d["architecture"]
        if kind == "mlp":
            net = MLPNetwork(arch["n_inputs"], arch["hidden_layers"], arch["neurons_per_layer"],
                             arch["dropout_rate"], seed=0)
            config = MlpConfig(**d["config"])
        elif kind == "lstm":
            net = LSTMNetwork(arch["n_inputs"], arch["cells_block1"], arch["cells_block2"], seed=0)
            config = LstmConfig(**d["config"])
        else:
            raise InputValidationError(f"unknown model kind {kind!r}")
        net.params = {k: np.asarray(v["data"], dtype=np.float64).reshape(v["shape"])
                      for k, v in d["params"].items()}
        return cls(kind, net, {k: Standardizer.from_dict(v) for k, v in d["standardizers"].items()},
                   {k: list(v) for k, v in d["history"].items()}, int(d["best_epoch"]), config,
                   int(d["seed"]), float(d["fraction"]), list(d.get("restart_val_losses", [])))

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        return cls.from_dict(json.loads(text))


def _architecture(net) -> dict:
    if isinstance(net, MLPNetwork):
        return {"n_inputs": net.n_inputs, "hidden_layers": net.hidden_layers,
                "neurons_per_layer": net.neurons_per_layer, "dropout_rate": net.dropout_rate}
    return {"n_inputs": net.n_inputs, "cells_block1": net.cells_block1, "cells_block2": net.cells_block2}


def make_estimator(kind: str, config):
    if kind == "mlp":
        return MLPCreepRegressor(
            hidden_layers=config.hidden_layers, neurons_per_layer=config.neurons_per_layer,
            dropout_rate=config.dropout_rate, learning_rate=config.learning_rate,
            batch_size=config.batch_size, max_epochs=config.max_epochs,
            early_stop_patience=config.early_stop_patience, restarts=config.restarts,
            random_state=config.seed)
    if kind == "lstm":
        return LSTMCreepRegressor(
            cells_block1=config.cells_block1, cells_block2=config.cells_block2,
            learning_rate=config.learning_rate, batch_size=config.batch_size, epochs=config.epochs,
            restarts=config.restarts, random_state=config.seed)
    raise InputValidationError(f"unknown model kind {kind!r}")


def train(model_kind: str, bundle: DatasetBundle, config) -> TrainedModel:
    if bundle.kind != model_kind:
        raise InputValidationError(f"{model_kind} model cannot train on a {bundle.kind} dataset")
    est = make_estimator(model_kind, config)
    est.fit(bundle.X(bundle.train), bundle.y(bundle.train),
            bundle.X(bundle.validation), bundle.y(bundle.validation))
    scalers = {"features": bundle.feature_scaler}
    if bundle.target_scaler is not None:
        scalers["target"] = bundle.target_scaler
    return TrainedModel(model_kind, est.network_, scalers, est.history_, est.best_epoch_, config,
                        int(config.seed), bundle.fraction_tag, list(est.restart_val_losses_))
