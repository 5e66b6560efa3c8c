"""Synthetic datasets: marginal-entropy regression over rotated Gaussian
point sets, and sorted-or-not classification over number sequences.

Generation is deterministic in the seed, and every entropy sample stores
its generating covariance and angle so the target can be recomputed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NonPositiveVariance

GENERATOR_VERSION = "1"

COV_FLOOR = 0.1  # ridge added to the random covariance; keeps log finite


@dataclass
class EntropySample:
    points: np.ndarray  # (M, 2)
    alpha: float
    target: float
    sigma: np.ndarray  # (2, 2) generating covariance, before rotation


@dataclass
class SequenceSample:
    values: np.ndarray  # (S,)
    label: int  # 1 iff non-decreasing


def sample_covariance(rng: np.random.Generator) -> np.ndarray:
    """Random 2x2 SPD matrix A A^T + COV_FLOOR * I with A standard normal."""
    a = rng.standard_normal((2, 2))
    return a @ a.T + COV_FLOOR * np.eye(2)


def rotation_matrix(alpha: float) -> np.ndarray:
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, -s], [s, c]])


def entropy_target(sigma: np.ndarray, alpha: float) -> float:
    """Differential entropy (nats) of the first coordinate of
    N(0, R(alpha) Sigma R(alpha)^T); equals 0.5 * (1 + ln(2 pi r^T Sigma r))
    with r = (cos alpha, -sin alpha)."""
    r = np.array([np.cos(alpha), -np.sin(alpha)])
    var = float(r @ sigma @ r)
    if var <= 0.0:
        raise NonPositiveVariance(f"projected variance {var} must be positive")
    return 0.5 * (1.0 + np.log(2.0 * np.pi * var))


def gen_entropy_dataset(count: int, seed: int) -> list[EntropySample]:
    """Entropy-regression samples: per sample a fresh covariance, a rotation
    angle from U(0, pi), and M ~ U{300..500} points from the rotated
    Gaussian."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        sigma = sample_covariance(rng)
        alpha = float(rng.uniform(0.0, np.pi))
        m = int(rng.integers(300, 501))
        cov = rotation_matrix(alpha) @ sigma @ rotation_matrix(alpha).T
        chol = np.linalg.cholesky(cov)
        points = rng.standard_normal((m, 2)) @ chol.T
        samples.append(
            EntropySample(
                points=points,
                alpha=alpha,
                target=entropy_target(sigma, alpha),
                sigma=sigma,
            )
        )
    return samples


def gen_sorted_dataset(count: int, seed: int) -> list[SequenceSample]:
    """Sorted-sequence classification samples, roughly class balanced.

    The first ceil(count/2) draws are sorted ascending (label 1); the rest
    keep their draw order and get the label their actual order earns. The
    list is then shuffled, all with the same seeded generator.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    n_sorted = (count + 1) // 2
    samples = []
    for i in range(count):
        length = int(rng.integers(10, 51))
        values = rng.uniform(0.0, 1.0, size=length)
        if i < n_sorted:
            values = np.sort(values)
        label = int(np.all(np.diff(values) >= 0.0))
        samples.append(SequenceSample(values=values, label=label))
    order = rng.permutation(count)
    return [samples[i] for i in order]


# ---------------------------------------------------------------------------
# JSON Lines serialization
# ---------------------------------------------------------------------------

def _entropy_record(s: EntropySample) -> dict:
    return {
        "points": s.points.tolist(),
        "alpha": s.alpha,
        "target": s.target,
        "sigma": s.sigma.tolist(),
    }


def _sequence_record(s: SequenceSample) -> dict:
    return {"values": s.values.tolist(), "label": s.label}


def write_jsonl(samples, path, kind: str, seed: int | None = None) -> None:
    """One sample per line plus a sidecar `<path>.manifest.json`."""
    path = Path(path)
    to_record = _entropy_record if kind == "entropy" else _sequence_record
    with path.open("w") as f:
        for s in samples:
            f.write(json.dumps(to_record(s)) + "\n")
    manifest = {
        "kind": kind,
        "count": len(samples),
        "seed": seed,
        "generator_version": GENERATOR_VERSION,
    }
    Path(str(path) + ".manifest.json").write_text(json.dumps(manifest) + "\n")


def read_jsonl(path, kind: str):
    path = Path(path)
    samples = []
    with path.open() as f:
        for line in f:
            d = json.loads(line)
            if kind == "entropy":
                samples.append(
                    EntropySample(
                        points=np.asarray(d["points"], dtype=np.float64),
                        alpha=float(d["alpha"]),
                        target=float(d["target"]),
                        sigma=np.asarray(d["sigma"], dtype=np.float64),
                    )
                )
            elif kind == "sorted":
                samples.append(
                    SequenceSample(
                        values=np.asarray(d["values"], dtype=np.float64),
                        label=int(d["label"]),
                    )
                )
            else:
                raise ValueError(f"unknown dataset kind {kind!r}")
    return samples
