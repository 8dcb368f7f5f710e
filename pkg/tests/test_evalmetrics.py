import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from soldercreep.datasets import Standardizer, transform_target_ln, transform_target_log10
from soldercreep.evalmetrics import (
    evaluate_predictions,
    f_rel_ave,
    r2_score,
    reconstruct_accumulation,
    relative_errors,
)
from soldercreep.exceptions import ConstantTruth, LengthMismatch, MissingStandardizer, ZeroTrueAccumulation


def test_r2_identity_and_mean():
    y = np.array([1.0, 2.0, 5.0, 7.0])
    assert r2_score(y, y) == 1.0
    assert r2_score(y, np.full_like(y, y.mean())) == pytest.approx(0.0, abs=1e-15)


def test_r2_hand_value():
    assert r2_score([1, 2, 3], [1, 2, 4]) == pytest.approx(0.5)


def test_r2_constant_truth():
    with pytest.raises(ConstantTruth):
        r2_score([2.0, 2.0], [1.0, 3.0])


def test_r2_length_mismatch():
    with pytest.raises(LengthMismatch):
        r2_score([1.0, 2.0], [1.0])


def test_reconstruct_ln_zeros():
    assert np.array_equal(reconstruct_accumulation(np.zeros(4), "ln"), [1.0, 2.0, 3.0, 4.0])


def test_reconstruct_single():
    assert reconstruct_accumulation([transform_target_ln(0.25)], "ln") == pytest.approx([0.25])


def test_reconstruct_log10_needs_standardizer():
    with pytest.raises(MissingStandardizer):
        reconstruct_accumulation([0.0, 1.0], "log10")


def test_reconstruct_log10_roundtrip(rng):
    inc = 10.0 ** rng.uniform(-12, -3, 30)
    t = transform_target_log10(inc)
    sc = Standardizer().fit(t)
    acc = reconstruct_accumulation(sc.transform(t), "log10", sc)
    assert np.allclose(acc, np.cumsum(inc), rtol=1e-9, atol=0)


def test_f_rel_hand_values():
    assert f_rel_ave([1.0, 2.0], [2.0, 2.0]) == pytest.approx(0.25)
    true = np.array([1.0, 3.0, 4.0])
    assert f_rel_ave(true, true) == 0.0
    assert f_rel_ave(1.1 * true, true) == pytest.approx(0.1)


def test_f_rel_zero_truth():
    with pytest.raises(ZeroTrueAccumulation):
        relative_errors([1.0, 1.0], [0.0, 1.0])


def test_perfect_closure_ln(rng):
    inc = 10.0 ** rng.uniform(-14, -2.5, 500)
    y = transform_target_ln(inc)
    rep = evaluate_predictions(y, y, inc, "ln")
    assert rep.f_rel_ave < 1e-9
    assert rep.r2 == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(rep.pred_accum, np.cumsum(inc), rtol=1e-9)


positive_series = arrays(np.float64, st.integers(2, 40), elements=st.floats(1e-6, 1e3))


@given(positive_series, positive_series, st.floats(1e-3, 1e3))
def test_f_rel_scale_invariant(pred, true, k):
    n = min(len(pred), len(true))
    pred, true = pred[:n], true[:n]
    assert f_rel_ave(k * pred, k * true) == pytest.approx(f_rel_ave(pred, true), rel=1e-9, abs=1e-12)


@given(arrays(np.float64, st.integers(3, 40), elements=st.floats(-100, 100)),
       st.floats(0.1, 10), st.floats(-50, 50))
def test_r2_affine_invariant(y, scale, shift):
    if np.ptp(y) < 1e-3:
        return
    pred = y[::-1] * 0.5 + 1.0
    assert r2_score(scale * y + shift, scale * pred + shift) == pytest.approx(r2_score(y, pred), rel=1e-7, abs=1e-9)


@given(arrays(np.float64, st.integers(1, 50), elements=st.floats(0.0, 30.0)))
def test_reconstruction_strictly_increasing(values):
    acc = reconstruct_accumulation(values, "ln")
    assert np.all(np.diff(acc) > 0)


def test_report_exports():
    inc = np.array([1e-4, 2e-4, 3e-5])
    y = transform_target_ln(inc)
    rep = evaluate_predictions(y, y + 0.1, inc, "ln", time_min=[10.0, 20.0, 30.0])
    assert rep.r2 <= 1 and rep.f_rel_ave >= 0
    lines = rep.series_csv().splitlines()
    assert lines[0] == "index,true_accum,pred_accum,rel_err,time_min"
    assert len(lines) == 4
    s = rep.summary(kind="mlp")
    assert set(s) == {"r2", "f_rel_ave", "n_samples", "kind"}
