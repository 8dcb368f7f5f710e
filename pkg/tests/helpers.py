"""Finite-difference gradient checking shared by unit and acceptance tests."""
import numpy as np


def numeric_gradient(loss_of_params, params, name, h=1e-5):
    p = params[name]
    grad = np.zeros_like(p)
    it = np.nditer(p, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = p[idx]
        p[idx] = orig + h
        up = loss_of_params()
        p[idx] = orig - h
        down = loss_of_params()
        p[idx] = orig
        grad[idx] = (up - down) / (2 * h)
    return grad


def max_relative_error(analytic, numeric, floor=1e-8):
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def check_network_gradients(net, loss_fn, X, y, h=1e-5):
    """Largest relative analytic-vs-central-difference error per parameter."""
    def loss():
        return loss_fn(y, net.forward(X))[0]

    _, d_pred = loss_fn(y, net.forward(X))
    analytic = net.backward(d_pred)
    return {name: max_relative_error(analytic[name], numeric_gradient(loss, net.params, name, h))
            for name in net.params}
