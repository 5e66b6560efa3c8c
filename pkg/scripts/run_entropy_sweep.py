#!/usr/bin/env python3
"""Entropy-regression benchmark: retrain the set model per pool size
(16..1024) and report test MSE against a fixed 1024-sample test set.

Writes a metrics CSV and prints a short summary, including the
constant-mean-predictor baseline the final model should beat.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from qdss.experiments import SWEEP_SIZES, entropy_config, run_entropy_sweep
from qdss.training import rows_to_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--out", default="entropy_sweep.csv")
    args = parser.parse_args()

    config = entropy_config(seed=args.seed)
    if args.epochs is not None:
        import dataclasses

        config = dataclasses.replace(config, epochs=args.epochs, eval_every=args.epochs)
    rows, test = run_entropy_sweep(seed=args.seed, config=config)
    Path(args.out).write_text(rows_to_csv(rows, deterministic=True))

    targets = np.array([s.target for s in test])
    const_mse = float(np.mean((targets - targets.mean()) ** 2))
    print(f"constant-mean predictor test MSE: {const_mse:.4f}")
    for r in rows:
        print(f"size {r.size:5d}  test MSE {r.test_metric:.4f}  ({r.seconds:.0f}s)")
    final = rows[-1].test_metric
    print(f"final/constant ratio: {final / const_mse:.3f}  (want < 0.5)")
    print(f"wrote {args.out}  sizes {list(SWEEP_SIZES)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
