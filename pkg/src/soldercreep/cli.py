"""Command-line driver: generate, simulate, dataset, train, evaluate, sweeps.

Every command reads one config file, works inside ``out_dir`` and writes its
artifacts atomically. Outputs depend only on the config and master seed, so
reruns are byte-identical.

Exit codes: 0 success, 2 usage or config error, 3 missing inputs, 4 numerical
failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .artifacts import atomic_write_json, atomic_write_text
from .creepsim import decade_span, increment_array, records_from_csv, records_to_csv, simulate_profile
from .datasets import (
    SplitSpec,
    build_lstm_dataset,
    build_mlp_dataset,
    read_bundle,
    segment_training_fraction,
    write_bundle,
)
from .evalmetrics import evaluate_predictions
from .exceptions import Diverged, InputValidationError, SolderCreepError, StepTooLarge
from .neuralnet.model import TrainedModel, train
from .profilegen import (
    generate_profile,
    half_cycles_from_csv,
    half_cycles_to_csv,
    profile_statistics,
    trace_from_csv,
    trace_to_csv,
)

EXIT_OK, EXIT_USAGE, EXIT_MISSING, EXIT_NUMERIC = 0, 2, 3, 4
MODEL_KINDS = ("mlp", "lstm")
TREND_BAND = 0.02


class MissingInput(SolderCreepError, FileNotFoundError):
    pass


class Layout:
    """Paths of every artifact under one output directory."""

    def __init__(self, root):
        self.root = Path(root)

    @property
    def half_cycles(self):
        return self.root / "profile" / "half_cycles.csv"

    @property
    def trace(self):
        return self.root / "profile" / "trace.csv"

    @property
    def profile_summary(self):
        return self.root / "profile" / "summary.json"

    @property
    def creep(self):
        return self.root / "creep" / "records.csv"

    @property
    def creep_summary(self):
        return self.root / "creep" / "summary.json"

    @property
    def datasets(self):
        return self.root / "datasets"

    @property
    def sweeps(self):
        return self.root / "sweeps"

    def model(self, kind, fraction):
        return self.root / "models" / f"{kind}_{_tag(fraction)}.json"

    def training_log(self, kind, fraction):
        return self.root / "models" / f"{kind}_{_tag(fraction)}_log.csv"

    def report(self, name):
        return self.root / "reports" / f"{name}.json"

    def series(self, name):
        return self.root / "reports" / f"{name}_series.csv"


def _tag(fraction) -> str:
    return f"f{float(fraction):.5f}".rstrip("0").rstrip(".")


def _read(path: Path) -> str:
    if not path.exists():
        raise MissingInput(f"missing input {path}; run the earlier pipeline stage first")
    return path.read_text(encoding="utf-8")


def _split(cfg):
    return SplitSpec(cfg.dataset.test_fraction, cfg.dataset.validation_fraction)


# ---------------------------------------------------------------- stages


def run_generate(cfg) -> dict:
    out = Layout(cfg.out_dir)
    spec = cfg.profile_spec()
    cycles, trace = generate_profile(spec)
    atomic_write_text(out.half_cycles, half_cycles_to_csv(cycles))
    atomic_write_text(out.trace, trace_to_csv(trace))
    summary = {
        "n_half_cycles": len(cycles),
        "n_samples": trace.n_samples,
        "total_duration_h": trace.total_duration_h,
        "profile_seed": spec.seed,
        "statistics": {k: v.as_dict() for k, v in profile_statistics(cycles).items()},
        "config_fingerprint": cfg.fingerprint(),
    }
    atomic_write_json(out.profile_summary, summary)
    return summary


def load_profile(cfg):
    out = Layout(cfg.out_dir)
    cycles = half_cycles_from_csv(_read(out.half_cycles))
    trace = trace_from_csv(_read(out.trace), cycles)
    return cycles, trace


def run_simulate(cfg) -> dict:
    out = Layout(cfg.out_dir)
    cycles, trace = load_profile(cfg)
    records = simulate_profile(trace, cycles, cfg.material, cfg.geometry, cfg.simulation.dt_s)
    atomic_write_text(out.creep, records_to_csv(records))
    inc = increment_array(records) if records else np.zeros(0)
    summary = {
        "n_records": len(records),
        "decade_span": decade_span(records) if records else 0.0,
        "increment_min": float(inc.min()) if len(inc) else 0.0,
        "increment_max": float(inc.max()) if len(inc) else 0.0,
        "total": float(records[-1].running_total) if records else 0.0,
        "config_fingerprint": cfg.fingerprint(),
    }
    atomic_write_json(out.creep_summary, summary)
    return summary


def load_creep(cfg):
    return records_from_csv(_read(Layout(cfg.out_dir).creep))


def _provenance(cfg):
    return {"master_seed": cfg.seed, "profile_seed": cfg.profile_spec().seed,
            "config_fingerprint": cfg.fingerprint()}


def build_bundle(cfg, kind, cycles=None, trace=None, records=None, sequence_length_min=None):
    if cycles is None:
        cycles, trace = load_profile(cfg)
    if records is None:
        records = load_creep(cfg)
    if kind == "mlp":
        return build_mlp_dataset(cycles, records, _split(cfg))
    seq = cfg.lstm.sequence_length_min if sequence_length_min is None else sequence_length_min
    return build_lstm_dataset(trace, cycles, records, seq, cfg.lstm.overlap, _split(cfg))


def run_dataset(cfg) -> dict:
    out = Layout(cfg.out_dir)
    cycles, trace = load_profile(cfg)
    records = load_creep(cfg)
    sizes = {}
    for kind in MODEL_KINDS:
        bundle = build_bundle(cfg, kind, cycles, trace, records)
        write_bundle(bundle, out.datasets, kind, _provenance(cfg))
        sizes[kind] = {p: len(getattr(bundle, p)) for p in ("train", "validation", "test")}
    return sizes


def load_bundle(cfg, kind, fraction=1.0):
    out = Layout(cfg.out_dir)
    if not (out.datasets / f"{kind}.json").exists():
        raise MissingInput(f"missing dataset {out.datasets / kind}.json; run 'dataset' first")
    bundle = read_bundle(out.datasets, kind)
    return bundle if fraction == 1.0 else segment_training_fraction(bundle, fraction)


def fit_model(cfg, kind, bundle, purpose) -> TrainedModel:
    return train(kind, bundle, cfg.model_config(kind, purpose))


def run_train(cfg, kind, fraction=1.0) -> dict:
    out = Layout(cfg.out_dir)
    bundle = load_bundle(cfg, kind, fraction)
    model = fit_model(cfg, kind, bundle, f"fraction:{_tag(fraction)}")
    atomic_write_text(out.model(kind, fraction), model.to_json())
    atomic_write_text(out.training_log(kind, fraction), model.training_log_csv())
    return {"kind": kind, "fraction": fraction, "epochs": len(model.history["train_loss"]),
            "best_epoch": model.best_epoch, "train_hours": bundle.train_hours}


def evaluate_model(model: TrainedModel | None, bundle, perfect=False):
    """Score a model (or the oracle targets themselves) on the test partition."""
    if model is not None:
        bundle = replace(bundle, feature_scaler=model.standardizers["features"],
                         target_scaler=model.target_standardizer)
    test = bundle.test
    y_true = bundle.y(test)
    y_pred = y_true.copy() if perfect else model.predict(bundle.X(test))
    kind = "ln" if bundle.kind == "mlp" else "log10"
    return evaluate_predictions(y_true, y_pred, test.increments, kind, bundle.target_scaler,
                                time_min=test.end_min)


def run_evaluate(cfg, kind, fraction=1.0, perfect=False) -> dict:
    out = Layout(cfg.out_dir)
    bundle = load_bundle(cfg, kind, fraction)
    if perfect:
        report, name = evaluate_model(None, bundle, perfect=True), f"{kind}_perfect"
    else:
        model = TrainedModel.from_json(_read(out.model(kind, fraction)))
        report, name = evaluate_model(model, bundle), f"{kind}_{_tag(fraction)}"
    summary = report.summary(kind=kind, fraction=fraction, perfect=perfect,
                             config_fingerprint=cfg.fingerprint())
    atomic_write_json(out.report(name), summary)
    atomic_write_text(out.series(name), report.series_csv())
    return summary


def trend_summary(rows) -> dict:
    """Per model: does more data help, within the noise band?"""
    result = {}
    for kind in sorted({r["model"] for r in rows}):
        sub = sorted((r for r in rows if r["model"] == kind), key=lambda r: r["fraction"])
        errs = [r["f_rel_ave"] for r in sub]
        first, last = errs[0], errs[-1]
        result[kind] = {
            "fractions": [r["fraction"] for r in sub],
            "f_rel_ave": errs,
            "full_not_worse_than_smallest": bool(last <= first + TREND_BAND),
            "monotone_within_band": bool(all(b <= a + TREND_BAND for a, b in zip(errs, errs[1:]))),
            "best_fraction": sub[int(np.argmin(errs))]["fraction"],
            "worst_fraction": sub[int(np.argmax(errs))]["fraction"],
        }
    return {"band": TREND_BAND, "models": result}


def _table(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([repr(r[h]) if isinstance(r[h], float) else r[h] for h in header])
    return buf.getvalue()


def sweep_fraction(cfg, fractions=None, kinds=MODEL_KINDS, bundles=None) -> list:
    fractions = list(cfg.dataset.fractions if fractions is None else fractions)
    rows = []
    for kind in kinds:
        full = bundles[kind] if bundles else load_bundle(cfg, kind)
        for f in fractions:
            bundle = full if f == 1.0 else segment_training_fraction(full, f)
            model = fit_model(cfg, kind, bundle, f"fraction:{_tag(f)}")
            rep = evaluate_model(model, bundle)
            rows.append({"fraction": float(f), "hours": bundle.train_hours, "model": kind,
                         "f_rel_ave": rep.f_rel_ave, "r2": rep.r2})
    return rows


def run_sweep_fraction(cfg, fractions=None) -> dict:
    out = Layout(cfg.out_dir)
    rows = sweep_fraction(cfg, fractions)
    atomic_write_text(out.sweeps / "fraction.csv",
                      _table(("fraction", "hours", "model", "f_rel_ave", "r2"), rows))
    summary = trend_summary(rows)
    atomic_write_json(out.sweeps / "fraction_summary.json", summary)
    return summary


def sweep_seqlen(cfg, lengths=None, cycles=None, trace=None, records=None) -> list:
    lengths = list(cfg.sweep.seq_lengths if lengths is None else lengths)
    if cycles is None:
        cycles, trace = load_profile(cfg)
    if records is None:
        records = load_creep(cfg)
    period = trace.sample_period_min
    rows = []
    for length in lengths:
        if length < period:
            raise InputValidationError(f"sequence length {length} min is below the sample period {period} min")
        bundle = build_bundle(cfg, "lstm", cycles, trace, records, sequence_length_min=length)
        model = fit_model(cfg, "lstm", bundle, f"seqlen:{float(length)!r}")
        rep = evaluate_model(model, bundle)
        rows.append({"seq_len": float(length), "f_rel_ave": rep.f_rel_ave, "r2": rep.r2})
    return rows


def run_sweep_seqlen(cfg, lengths=None) -> list:
    out = Layout(cfg.out_dir)
    rows = sweep_seqlen(cfg, lengths)
    atomic_write_text(out.sweeps / "seqlen.csv", _table(("seq_len", "f_rel_ave", "r2"), rows))
    return rows


# ---------------------------------------------------------------- argparse


def _fraction(text):
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError("fraction must lie in (0, 1]")
    return value


def _float_list(text):
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (key = value lines)", default=argparse.SUPPRESS)
    common.add_argument("--out", help="output directory, overrides out_dir", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="master seed, overrides the config",
                        default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="soldercreep", parents=[common],
                                     description="Solder creep surrogate experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="draw a temperature profile")
    sub.add_parser("simulate", parents=[common], help="run the creep oracle over the profile")
    sub.add_parser("dataset", parents=[common], help="build MLP and LSTM datasets")
    p = sub.add_parser("train", parents=[common], help="train one model")
    p.add_argument("--model", choices=MODEL_KINDS, required=True)
    p.add_argument("--fraction", type=_fraction, default=1.0)
    p = sub.add_parser("evaluate", parents=[common], help="score a trained model on the test set")
    p.add_argument("--model", choices=MODEL_KINDS, required=True)
    p.add_argument("--fraction", type=_fraction, default=1.0)
    p.add_argument("--perfect", action="store_true", help="score the oracle targets themselves")
    p = sub.add_parser("sweep-fraction", parents=[common], help="training-fraction study")
    p.add_argument("--fractions", type=_float_list, default=None)
    p = sub.add_parser("sweep-seqlen", parents=[common], help="LSTM sequence-length study")
    p.add_argument("--lengths", type=_float_list, default=None)
    return parser


def resolve_config(args):
    cfg = cfgmod.load(args.config) if getattr(args, "config", None) else cfgmod.ExperimentConfig()
    if getattr(args, "out", None):
        cfg = replace(cfg, out_dir=str(args.out))
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def dispatch(cfg, args):
    cmd = args.command
    if cmd == "generate":
        return run_generate(cfg)
    if cmd == "simulate":
        return run_simulate(cfg)
    if cmd == "dataset":
        return run_dataset(cfg)
    if cmd == "train":
        return run_train(cfg, args.model, args.fraction)
    if cmd == "evaluate":
        return run_evaluate(cfg, args.model, args.fraction, args.perfect)
    if cmd == "sweep-fraction":
        if args.fractions is not None:
            cfg = replace(cfg, dataset=replace(cfg.dataset, fractions=tuple(args.fractions)))
        return run_sweep_fraction(cfg)
    if cmd == "sweep-seqlen":
        return run_sweep_seqlen(cfg, args.lengths)
    raise AssertionError(cmd)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        atomic_write_text(Path(cfg.out_dir) / "config.txt", cfgmod.dumps(cfg))
        result = dispatch(cfg, args)
    except (MissingInput, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (Diverged, StepTooLarge, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InputValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(_brief(result))
    return EXIT_OK


def _brief(result) -> str:
    if isinstance(result, dict):
        flat = {k: v for k, v in result.items() if not isinstance(v, (dict, list))}
        return json.dumps(flat or result, sort_keys=True)
    return f"{len(result)} rows"


if __name__ == "__main__":
    sys.exit(main())
