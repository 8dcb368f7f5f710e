"""From-scratch MLP and LSTM regressors with Adam training."""
from .estimators import LSTMCreepRegressor, MLPCreepRegressor
from .lstm import LSTMNetwork
from .mlp import MLPNetwork
from .model import TrainedModel, make_estimator, train
from .optim import Adam
from .training import EarlyStopping, LstmConfig, MlpConfig, fit_network

__all__ = [
    "Adam", "EarlyStopping", "LSTMCreepRegressor", "LSTMNetwork", "LstmConfig", "MLPCreepRegressor",
    "MLPNetwork", "MlpConfig", "TrainedModel", "fit_network", "make_estimator", "train",
]
