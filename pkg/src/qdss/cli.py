"""Command-line entry point.

Subcommands: gen-data, train, eval, sweep, channel-probe, grad-check,
count-params. Machine-readable output (JSON / JSONL / CSV) goes to --out
or stdout; diagnostics go to stderr. Every randomized subcommand requires
--seed, so identical invocations produce byte-identical outputs.

Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .channel import (
    associativity_defect,
    build_channel_unitary,
    commutativity_defect,
)
from .datagen import gen_entropy_dataset, gen_sorted_dataset, read_jsonl, write_jsonl
from .deepsets import ClassicalDeepSets, QuantumDeepSets
from .errors import QdssError
from .paulis import enumerate_generators
from .sequences import LstmClassifier, QuantumDeepSequences
from .training import (
    TrainConfig,
    build_model,
    evaluate,
    rows_to_csv,
    sweep,
    train,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep exit-code policy in our hands
        raise UsageError(message)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    text = Path(path).read_text()
    if path.endswith(".toml"):
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _coerce_field(name: str, raw: str):
    hints = {f.name: f.type for f in dataclasses.fields(TrainConfig)}
    if name not in hints:
        raise UsageError(f"unknown config field {name!r}")
    hint = hints[name]
    if hint == "int":
        return int(raw)
    if hint == "float":
        return float(raw)
    if hint == "bool":
        return raw.lower() in ("1", "true", "yes")
    return raw  # str and optional-str fields


def _make_train_config(args) -> TrainConfig:
    base = _load_config(getattr(args, "config", None))
    allowed = {f.name for f in dataclasses.fields(TrainConfig)}
    unknown = set(base) - allowed
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    # named CLI flags override file values when given
    for name in ("kind", "n_qubits", "seed", "freeze_channel", "epochs", "lr",
                 "batch_size", "d_in"):
        v = getattr(args, name, None)
        if v is not None:
            base[name] = v
    # --set FIELD=VALUE covers every remaining config field
    for pair in getattr(args, "set", None) or []:
        if "=" not in pair:
            raise UsageError(f"--set expects FIELD=VALUE, got {pair!r}")
        name, raw = pair.split("=", 1)
        base[name] = _coerce_field(name, raw)
    return TrainConfig(**base)


def _write_out(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_dataset(path: str):
    manifest_path = Path(str(path) + ".manifest.json")
    if manifest_path.exists():
        kind = json.loads(manifest_path.read_text())["kind"]
    else:
        first = Path(path).open().readline()
        kind = "entropy" if "points" in json.loads(first) else "sorted"
    return read_jsonl(path, kind), kind


MODEL_LOADERS = {
    "qds": QuantumDeepSets.from_dict,
    "classical-ds": ClassicalDeepSets.from_dict,
    "qdseq": QuantumDeepSequences.from_dict,
    "lstm": LstmClassifier.from_dict,
}


def _load_checkpoint(path: str):
    d = json.loads(Path(path).read_text())
    return MODEL_LOADERS[d["kind"]](d)


def _cmd_gen_data(args) -> int:
    if args.kind == "entropy":
        samples = gen_entropy_dataset(args.count, args.seed)
    else:
        samples = gen_sorted_dataset(args.count, args.seed)
    write_jsonl(samples, args.out, kind=args.kind, seed=args.seed)
    print(f"wrote {len(samples)} samples to {args.out}", file=sys.stderr)
    return 0


def _cmd_train(args) -> int:
    config = _make_train_config(args)
    train_data, kind = _load_dataset(args.data)
    test_data, _ = _load_dataset(args.test_data)
    expected = "entropy" if config.kind in ("qds", "classical-ds") else "sorted"
    if kind != expected:
        raise UsageError(f"model {config.kind!r} expects {expected!r} data, got {kind!r}")
    if config.kind in ("qds", "classical-ds"):
        config = dataclasses.replace(config, d_in=2)
    else:
        config = dataclasses.replace(config, d_in=1)
    rows, model = train(config, train_data, test_data)
    print(f"trained in {rows[-1].seconds:.1f}s over {rows[-1].step} steps", file=sys.stderr)
    _write_out(rows_to_csv(rows, deterministic=True), args.out)
    if args.checkpoint:
        Path(args.checkpoint).write_text(json.dumps(model.to_dict()) + "\n")
    return 0


def _cmd_eval(args) -> int:
    model = _load_checkpoint(args.checkpoint)
    data, _ = _load_dataset(args.data)
    metrics = evaluate(model, data)
    metrics["count"] = len(data)
    metrics["param_count"] = model.param_count
    _write_out(json.dumps(metrics) + "\n", args.out)
    return 0


def _cmd_sweep(args) -> int:
    config = _make_train_config(args)
    sizes = [int(s) for s in args.sizes.split(",")]
    pool, kind = _load_dataset(args.data)
    test_data, _ = _load_dataset(args.test_data)
    if config.kind in ("qds", "classical-ds"):
        config = dataclasses.replace(config, d_in=2)
    else:
        config = dataclasses.replace(config, d_in=1)
    rows = sweep(config, sizes, pool, test_data)
    total = sum(r.seconds for r in rows)
    print(f"sweep over {len(rows)} sizes took {total:.1f}s", file=sys.stderr)
    _write_out(rows_to_csv(rows, deterministic=True), args.out)
    return 0


def _cmd_channel_probe(args) -> int:
    basis = enumerate_generators(args.qubits)
    model = QuantumDeepSequences.create(
        n_qubits=args.qubits, seed=args.seed, freeze_channel=args.freeze_channel
    )
    if not args.freeze_channel:
        # probe a generic channel: seeded random block angles
        rng = np.random.default_rng(args.seed)
        values = model.params.values.copy()
        sl = model.params.slices["b_angles"]
        values[sl] = rng.normal(0.0, 1.0, size=sl.stop - sl.start)
        model.params = ad.ParamVector(values, dict(model.params.slices))
    v = build_channel_unitary(model.channel_spec(), basis)
    out = {
        "qubits": args.qubits,
        "samples": args.samples,
        "seed": args.seed,
        "freeze_channel": args.freeze_channel,
        "commutativity_defect": commutativity_defect(v, args.samples, args.seed),
        "associativity_defect": associativity_defect(v, args.samples, args.seed + 1),
    }
    _write_out(json.dumps(out) + "\n", args.out)
    return 0


def _cmd_grad_check(args) -> int:
    from .training import _sample_io  # deliberate: same loss plumbing as training
    from .datagen import gen_entropy_dataset, gen_sorted_dataset

    config_kwargs = dict(
        kind=args.model, n_qubits=args.qubits, seed=args.seed,
        theta_hidden=4, w_hidden=4, h_hidden=6, g_hidden=4, lstm_hidden=5,
    )
    config = TrainConfig(**config_kwargs)
    if args.model in ("qds", "classical-ds"):
        config = dataclasses.replace(config, d_in=2)
        sample = gen_entropy_dataset(1, seed=args.seed)[0]
        sample.points = sample.points[:6]
    else:
        config = dataclasses.replace(config, d_in=1)
        sample = gen_sorted_dataset(1, seed=args.seed)[0]
        sample.values = sample.values[:6]
    model = build_model(config)
    rng = np.random.default_rng(args.seed)
    model.params = ad.ParamVector(
        rng.normal(0.0, 0.3, size=model.params.size), dict(model.params.slices)
    )
    xs, loss_node = _sample_io(model, sample)
    report = ad.grad_check(
        lambda p: loss_node(model.forward(p, xs)), model.params, rtol=1e-4
    )
    out = {
        "model": args.model,
        "qubits": args.qubits,
        "seed": args.seed,
        "n_params": model.params.size,
        "max_rel_error": report.max_rel_error,
        "rtol": report.rtol,
        "failing_coordinates": report.failing.tolist(),
        "passed": report.passed,
    }
    _write_out(json.dumps(out) + "\n", args.out)
    return 0 if report.passed else 2


def _cmd_count_params(args) -> int:
    from . import experiments

    # benchmark presets are the baseline; width flags override
    if args.model == "qdseq":
        config = experiments.sorted_qdseq_config(n_qubits=args.qubits)
    elif args.model == "lstm":
        config = experiments.sorted_lstm_config("small")
    else:
        config = experiments.entropy_config()
        config = dataclasses.replace(config, kind=args.model, n_qubits=args.qubits)
    overrides = {}
    for name in ("theta_hidden", "w_hidden", "h_hidden", "lstm_hidden"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    config = dataclasses.replace(
        config, d_in=2 if args.model in ("qds", "classical-ds") else 1, **overrides
    )
    model = build_model(config)
    _write_out(
        json.dumps({"model": args.model, "qubits": args.qubits,
                    "param_count": model.param_count}) + "\n",
        args.out,
    )
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="qdss", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="generate a dataset as JSON Lines")
    g.add_argument("kind", choices=("entropy", "sorted"))
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=_cmd_gen_data)

    def add_train_flags(sp, with_sizes=False):
        sp.add_argument("--config", default=None, help="JSON or TOML config file")
        sp.add_argument("--model", dest="kind", default=None, choices=MODEL_LOADERS)
        sp.add_argument("--qubits", dest="n_qubits", type=int, default=None)
        sp.add_argument("--seed", type=int, required=True)
        sp.add_argument("--epochs", type=int, default=None)
        sp.add_argument("--lr", type=float, default=None)
        sp.add_argument("--batch-size", dest="batch_size", type=int, default=None)
        sp.add_argument(
            "--freeze-channel", dest="freeze_channel",
            type=lambda s: s.lower() in ("1", "true", "yes"), default=None,
        )
        sp.add_argument(
            "--set", action="append", metavar="FIELD=VALUE", default=[],
            help="override any config field, e.g. --set h_hidden=50",
        )
        sp.add_argument("--data", required=True, help="training JSONL")
        sp.add_argument("--test-data", required=True, help="test JSONL")
        sp.add_argument("--out", default=None, help="metrics CSV path")
        if with_sizes:
            sp.add_argument("--sizes", required=True, help="comma-separated sizes")

    t = sub.add_parser("train", help="train one model, emit metrics CSV")
    add_train_flags(t)
    t.add_argument("--checkpoint", default=None, help="write model JSON here")
    t.set_defaults(fn=_cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--out", default=None)
    e.set_defaults(fn=_cmd_eval)

    s = sub.add_parser("sweep", help="retrain per training-set size, emit CSV")
    add_train_flags(s, with_sizes=True)
    s.set_defaults(fn=_cmd_sweep)

    c = sub.add_parser("channel-probe", help="commutativity/associativity defects")
    c.add_argument("--qubits", type=int, default=1)
    c.add_argument("--samples", type=int, default=100)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument(
        "--freeze-channel", dest="freeze_channel",
        type=lambda s: s.lower() in ("1", "true", "yes"), default=False,
    )
    c.add_argument("--out", default=None)
    c.set_defaults(fn=_cmd_channel_probe)

    gc = sub.add_parser("grad-check", help="finite-difference gradient check")
    gc.add_argument("--model", required=True, choices=MODEL_LOADERS)
    gc.add_argument("--qubits", type=int, default=1)
    gc.add_argument("--seed", type=int, required=True)
    gc.add_argument("--out", default=None)
    gc.set_defaults(fn=_cmd_grad_check)

    cp = sub.add_parser("count-params", help="trainable parameter count")
    cp.add_argument("--model", required=True, choices=MODEL_LOADERS)
    cp.add_argument("--qubits", type=int, default=1)
    cp.add_argument("--theta-hidden", dest="theta_hidden", type=int, default=None)
    cp.add_argument("--w-hidden", dest="w_hidden", type=int, default=None)
    cp.add_argument("--h-hidden", dest="h_hidden", type=int, default=None)
    cp.add_argument("--lstm-hidden", dest="lstm_hidden", type=int, default=None)
    cp.add_argument("--out", default=None)
    cp.set_defaults(fn=_cmd_count_params)

    return p


def main(argv=None) -> int:
    threads = os.environ.get("QDSS_THREADS")
    if threads is not None and (not threads.isdigit() or int(threads) < 1):
        print(f"QDSS_THREADS must be a positive integer, got {threads!r}", file=sys.stderr)
        return 1
    # All execution is sequential, so any positive cap is honored trivially.
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (QdssError, OSError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    raise SystemExit(main())
