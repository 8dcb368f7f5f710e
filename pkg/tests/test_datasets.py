import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from soldercreep.creepsim import CreepRecord, simulate_profile
from soldercreep.datasets import (
    INCREMENT_FLOOR,
    Partition,
    SplitSpec,
    Standardizer,
    build_lstm_dataset,
    build_mlp_dataset,
    floor_increments,
    inverse_transform_ln,
    inverse_transform_log10,
    read_bundle,
    segment_training_fraction,
    transform_target_ln,
    transform_target_log10,
    window_stride,
    write_bundle,
)
from soldercreep.exceptions import (
    EmptyResult,
    InputValidationError,
    LengthMismatch,
    NonPositiveIncrement,
    WindowTooLong,
)
from soldercreep.profilegen import HalfCycle, ProfileSpec, generate_profile, profile_statistics, render_trace


@pytest.fixture(scope="module")
def pipeline():
    cycles, trace = generate_profile(ProfileSpec(n_half_cycles=400, seed=21))
    return cycles, trace, simulate_profile(trace, cycles)


def _records(values):
    out, total = [], 0.0
    for k, v in enumerate(values):
        total += v
        out.append(CreepRecord(k, v, total))
    return out


def test_ln_examples():
    assert transform_target_ln(1.0) == 0.0
    assert transform_target_ln(8e-14) == pytest.approx(30.157, abs=1e-3)


def test_log10_examples():
    assert transform_target_log10(1e-3) == pytest.approx(3.0, abs=1e-15)
    assert transform_target_log10(6e-3) == pytest.approx(2.2218, abs=1e-4)


def test_log_transforms_reject_non_positive():
    for fn in (transform_target_ln, transform_target_log10):
        with pytest.raises(NonPositiveIncrement):
            fn(0.0)
        with pytest.raises(NonPositiveIncrement):
            fn([1e-3, -1e-5])


def test_roundtrip_logspaced_grid():
    grid = np.logspace(-14, -2, 200)
    assert np.allclose(inverse_transform_ln(transform_target_ln(grid)), grid, rtol=1e-12, atol=0)
    assert np.allclose(inverse_transform_log10(transform_target_log10(grid)), grid, rtol=1e-12, atol=0)


@given(st.floats(1e-300, 1.0, exclude_max=True))
def test_roundtrip_property(x):
    assert inverse_transform_ln(transform_target_ln(x)) == pytest.approx(x, rel=1e-12)
    assert inverse_transform_log10(transform_target_log10(x)) == pytest.approx(x, rel=1e-12)


def test_floor_increments():
    assert np.array_equal(floor_increments([0.0, 1e-20, 1e-3]), [INCREMENT_FLOOR, INCREMENT_FLOOR, 1e-3])


@given(st.lists(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3), min_size=2, max_size=30))
def test_standardizer_roundtrip(rows):
    X = np.array(rows)
    sc = Standardizer().fit(X)
    assert np.all(sc.scale_ > 0)
    assert np.allclose(sc.inverse_transform(sc.transform(X)), X, rtol=1e-12, atol=1e-9)


def test_standardizer_sklearn_params():
    assert Standardizer().get_params() == {}
    sc = Standardizer.from_dict(Standardizer().fit([[1.0], [3.0]]).to_dict())
    assert sc.transform(np.array([3.0])) == pytest.approx([1.0])


def test_mlp_split_arithmetic():
    cycles, _ = generate_profile(ProfileSpec(n_half_cycles=10, seed=1))
    b = build_mlp_dataset(cycles, _records(np.full(10, 1e-5)))
    assert len(b.train) + len(b.validation) == 8
    assert len(b.test) == 2


def test_mlp_standardisation_uses_train_only(pipeline):
    cycles, _, records = pipeline
    b = build_mlp_dataset(cycles, records)
    X_train = b.X(b.train)
    assert np.all(np.abs(X_train.mean(axis=0)) < 1e-9)
    assert np.allclose(X_train.std(axis=0), 1.0, atol=1e-9)
    assert np.any(np.abs(b.X(b.test).mean(axis=0)) > 1e-3)
    # targets are -ln(increment), unscaled
    assert np.allclose(b.y(b.train), -np.log(b.train.increments))
    assert b.target_scaler is None


def test_length_mismatch(pipeline):
    cycles, _, records = pipeline
    with pytest.raises(LengthMismatch):
        build_mlp_dataset(cycles, records[:-1])


def test_no_leakage_from_test(pipeline):
    cycles, trace, records = pipeline
    a = build_mlp_dataset(cycles, records)
    perturbed = list(records)
    n_side = len(a.train) + len(a.validation)
    for k in range(n_side, len(records)):
        perturbed[k] = CreepRecord(k, records[k].increment * 7.0, records[k].running_total)
    b = build_mlp_dataset(cycles, perturbed)
    assert a.feature_scaler.to_dict() == b.feature_scaler.to_dict()
    la = build_lstm_dataset(trace, cycles, records)
    lb = build_lstm_dataset(trace, cycles, perturbed)
    assert la.standardizers() == lb.standardizers()


def test_chronological_integrity(pipeline):
    cycles, trace, records = pipeline
    for b in (build_mlp_dataset(cycles, records), build_lstm_dataset(trace, cycles, records)):
        assert b.train.end_min.max() <= b.validation.start_min.min() + 1e-9 or b.kind == "lstm"
        assert b.test.start_min.min() >= b.train.end_min.max() - 1e-9
        assert b.test.start_min.min() >= b.validation.end_min.max() - 1e-9


def test_lstm_stride_example():
    assert window_stride(165, 0.75) == 41
    assert window_stride(165, 0.0) == 165


def test_lstm_windows_shape(pipeline):
    cycles, trace, records = pipeline
    b = build_lstm_dataset(trace, cycles, records, 165, 0.75)
    assert b.train.X_raw.shape[1] == 165
    assert np.all(np.diff(b.train.position) == 41)
    assert np.all(np.diff(b.test.position) == 165)
    X = b.X(b.train)
    assert abs(X.mean()) < 1e-9 and abs(X.std() - 1.0) < 1e-9
    y = b.y(b.train)
    assert abs(y.mean()) < 1e-9


def test_lstm_overlap_zero_tiles(pipeline):
    cycles, trace, records = pipeline
    b = build_lstm_dataset(trace, cycles, records, 60, 0.0)
    side = Partition.concat(b.train, b.validation)
    assert np.all(np.diff(side.position) == 60)
    assert np.allclose(side.end_min[:-1], side.start_min[1:])


def test_lstm_single_cycle_window():
    hc = HalfCycle(20.0, 60.0, 4.0, 40.0, -0.1, 30.0)
    cycles = [hc] * 20
    trace = render_trace(cycles)
    inc = 10.0 ** -np.linspace(3, 15, 20)
    b = build_lstm_dataset(trace, cycles, _records(inc), 30, 0.0, SplitSpec(0.2, 0.25))
    side = Partition.concat(b.train, b.validation)
    assert np.allclose(side.y_raw, -np.log10(inc[:len(side)]))


def test_window_too_long(pipeline):
    cycles, trace, records = pipeline
    with pytest.raises(WindowTooLong):
        build_lstm_dataset(trace, cycles, records, 10_000, 0.5)


def test_bad_overlap(pipeline):
    cycles, trace, records = pipeline
    with pytest.raises(InputValidationError):
        build_lstm_dataset(trace, cycles, records, 165, 1.0)


def test_window_attribution_partitions_test_span(pipeline):
    cycles, trace, records = pipeline
    b = build_lstm_dataset(trace, cycles, records, 165, 0.75)
    mids = np.array([t + 0.5 * c.dwell_min for t, c in zip(trace.cycle_start_min, cycles)])
    inc = np.array([r.increment for r in records])
    covered = (mids >= b.test.start_min[0]) & (mids < b.test.end_min[-1])
    assert b.test.increments.sum() == pytest.approx(inc[covered].sum(), rel=1e-12)


def test_fraction_identity(pipeline):
    cycles, _, records = pipeline
    b = build_mlp_dataset(cycles, records)
    f = segment_training_fraction(b, 1.0)
    assert np.array_equal(f.train.X_raw, b.train.X_raw)
    assert f.feature_scaler.to_dict() == b.feature_scaler.to_dict()


def test_fraction_nesting_and_refit(pipeline):
    cycles, _, records = pipeline
    b = build_mlp_dataset(cycles, records)
    small = segment_training_fraction(b, 0.25)
    big = segment_training_fraction(b, 0.5)
    n_small = len(small.train) + len(small.validation)
    assert n_small == math.ceil(0.25 * (len(b.train) + len(b.validation)))
    side_big = np.concatenate([big.train.position, big.validation.position])
    side_small = np.concatenate([small.train.position, small.validation.position])
    assert set(side_small) <= set(side_big)
    assert np.array_equal(small.test.position, b.test.position)
    assert small.feature_scaler.to_dict() != b.feature_scaler.to_dict()
    assert small.fraction_tag == 0.25
    again = segment_training_fraction(small, 0.5)
    assert np.array_equal(again.train.position, big.train.position)


def test_fraction_too_small(pipeline):
    cycles, _, records = pipeline
    b = build_mlp_dataset(cycles, records)
    with pytest.raises(EmptyResult):
        segment_training_fraction(b, 0.01)
    with pytest.raises(InputValidationError):
        segment_training_fraction(b, 0.0)


def test_fraction_distribution_similarity():
    cycles, trace = generate_profile(ProfileSpec(n_half_cycles=2000, seed=4))
    records = _records(np.full(len(cycles), 1e-6))
    b = build_mlp_dataset(cycles, records)
    full = profile_statistics(cycles[:len(b.train) + len(b.validation)])
    for frac in (0.125, 0.5):
        part = segment_training_fraction(b, frac)
        kept = cycles[:len(part.train) + len(part.validation)]
        stats = profile_statistics(kept)
        for key, s in stats.items():
            lo, hi = full[key].min, full[key].max
            for q in (s.p25, s.median, s.p75):
                assert lo <= q <= hi


def test_bundle_export_roundtrip(tmp_path, pipeline):
    cycles, trace, records = pipeline
    for b in (build_mlp_dataset(cycles, records), build_lstm_dataset(trace, cycles, records)):
        write_bundle(b, tmp_path, b.kind, {"master_seed": 3})
        back = read_bundle(tmp_path, b.kind)
        assert back.kind == b.kind
        assert back.standardizers() == b.standardizers()
        for part in ("train", "validation", "test"):
            assert np.array_equal(getattr(back, part).X_raw, getattr(b, part).X_raw)
            assert np.array_equal(getattr(back, part).y_raw, getattr(b, part).y_raw)
            assert np.array_equal(getattr(back, part).increments, getattr(b, part).increments)
