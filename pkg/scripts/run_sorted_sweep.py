#!/usr/bin/env python3
"""Sorted-sequence benchmark: sweep the sequence model over training-set
sizes (16..1024) against a fixed balanced 1024-sequence test set, then
train the similarly-sized LSTM baseline at the largest size and compare.
"""
import argparse
import dataclasses
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from qdss.experiments import (
    SWEEP_SIZES,
    run_sorted_single,
    run_sorted_sweep,
    sorted_lstm_config,
    sorted_qdseq_config,
)
from qdss.training import evaluate, rows_to_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--qubits", type=int, default=1, choices=(1, 2))
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--skip-lstm", action="store_true")
    parser.add_argument("--out", default="sorted_sweep.csv")
    args = parser.parse_args()

    config = sorted_qdseq_config(n_qubits=args.qubits, seed=args.seed)
    if args.epochs is not None:
        config = dataclasses.replace(config, epochs=args.epochs, eval_every=args.epochs)
    rows, test = run_sorted_sweep(seed=args.seed, config=config)
    Path(args.out).write_text(rows_to_csv(rows, deterministic=True))
    for r in rows:
        print(f"size {r.size:5d}  test BCE {r.test_metric:.4f}  ({r.seconds:.0f}s)")
    print(f"wrote {args.out}  (model params: {rows[-1].param_count})")

    if not args.skip_lstm:
        lstm_cfg = sorted_lstm_config("small", seed=args.seed)
        if args.epochs is not None:
            lstm_cfg = dataclasses.replace(
                lstm_cfg, epochs=args.epochs, eval_every=args.epochs
            )
        lstm_rows, lstm_model, _ = run_sorted_single(
            lstm_cfg, max(SWEEP_SIZES), seed=args.seed
        )
        lstm_metrics = evaluate(lstm_model, test)
        print(
            f"LSTM baseline ({lstm_model.param_count} params) at size "
            f"{max(SWEEP_SIZES)}: BCE {lstm_metrics['bce']:.4f} "
            f"accuracy {lstm_metrics['accuracy']:.3f}"
        )
        print(f"model/LSTM BCE ratio: {rows[-1].test_metric / lstm_metrics['bce']:.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
