"""Losses, Adam, per-sample training over variable-size sets and sequences,
and the size-sweep runner that retrains from scratch per training-set size.

Batches never pad: the batch gradient is the mean of per-sample gradients,
accumulated in sample order so runs are bit-reproducible under a fixed seed.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import autodiff as ad
from .autodiff import ParamVector
from .datagen import EntropySample, SequenceSample
from .deepsets import ClassicalDeepSets, QuantumDeepSets
from .errors import ConfigMismatch
from .sequences import LstmClassifier, QuantumDeepSequences

BCE_EPS = 1e-7  # probability clamp before logs

MODEL_KINDS = ("qds", "classical-ds", "qdseq", "lstm")


def loss_mse(pred: float, target: float) -> float:
    return float((pred - target) ** 2)


def loss_bce(p_hat: float, y: int) -> float:
    p = min(max(float(p_hat), BCE_EPS), 1.0 - BCE_EPS)
    return float(-(y * np.log(p) + (1 - y) * np.log(1.0 - p)))


def _mse_node(pred, target: float):
    d = pred[0] - target
    return d * d


def _bce_node(p_hat, y: int):
    p = ad.clip(p_hat[0], BCE_EPS, 1.0 - BCE_EPS)
    return -(y * ad.log(p) + (1 - y) * ad.log(1.0 - p))


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(m=np.zeros(size), v=np.zeros(size), t=0)


def adam_step(
    state: AdamState,
    params: np.ndarray,
    grads: np.ndarray,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected Adam update; returns fresh state and parameters."""
    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * grads
    v = beta2 * state.v + (1.0 - beta2) * grads * grads
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    new_params = params - lr * m_hat / (np.sqrt(v_hat) + eps)
    return AdamState(m=m, v=v, t=t), new_params


@dataclass
class TrainConfig:
    kind: str = "qds"
    n_qubits: int = 1
    d_in: int = 2
    theta_hidden: int = 8
    w_hidden: int = 16
    h_hidden: int = 100
    g_hidden: int = 8
    d_emb: int = 4
    lstm_hidden: int = 12
    lr: float = 1e-3
    lr_schedule: str = "constant"  # constant | cosine (decay to 0 over the run)
    batch_size: int = 32
    epochs: int = 20
    seed: int = 0
    freeze_channel: bool = False
    eval_every: int = 10  # epochs between test-set evaluations
    train_path: str | None = None
    test_path: str | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigMismatch(f"unknown model kind {self.kind!r}")
        if min(self.lr, self.batch_size, self.epochs + 1, self.eval_every) <= 0:
            raise ConfigMismatch("hyperparameters must be positive")
        if self.lr_schedule not in ("constant", "cosine"):
            raise ConfigMismatch(f"unknown lr schedule {self.lr_schedule!r}")


@dataclass
class MetricsRow:
    size: int
    step: int
    train_loss: float
    test_metric: float
    seconds: float
    param_count: int


CSV_HEADER = "size,step,train_loss,test_metric,seconds,param_count"


def rows_to_csv(rows: list[MetricsRow], deterministic: bool = False) -> str:
    """Render metric rows as CSV. With `deterministic` the wall-clock column
    is zeroed so identical runs serialize byte-identically; callers that
    need the timing read it from the rows or from the diagnostic stream."""
    lines = [CSV_HEADER]
    for r in rows:
        seconds = 0.0 if deterministic else r.seconds
        lines.append(
            f"{r.size},{r.step},{r.train_loss!r},{r.test_metric!r},"
            f"{seconds!r},{r.param_count}"
        )
    return "\n".join(lines) + "\n"


def build_model(config: TrainConfig):
    if config.kind == "qds":
        return QuantumDeepSets.create(
            n_qubits=config.n_qubits,
            d_in=config.d_in,
            theta_hidden=config.theta_hidden,
            h_hidden=config.h_hidden,
            seed=config.seed,
        )
    if config.kind == "classical-ds":
        return ClassicalDeepSets.create(
            d_in=config.d_in,
            d_emb=config.d_emb,
            g_hidden=config.g_hidden,
            h_hidden=config.h_hidden,
            seed=config.seed,
        )
    if config.kind == "qdseq":
        return QuantumDeepSequences.create(
            n_qubits=config.n_qubits,
            d_in=config.d_in,
            theta_hidden=config.theta_hidden,
            w_hidden=config.w_hidden,
            h_hidden=config.h_hidden,
            seed=config.seed,
            freeze_channel=config.freeze_channel,
        )
    if config.kind == "lstm":
        return LstmClassifier.create(
            input_dim=config.d_in, hidden_dim=config.lstm_hidden, seed=config.seed
        )
    raise ConfigMismatch(f"unknown model kind {config.kind!r}")


def _sample_io(model, sample):
    """(input array, loss-node builder, plain metric fn) for one sample."""
    if isinstance(sample, EntropySample):
        if not isinstance(model, (QuantumDeepSets, ClassicalDeepSets)):
            raise ConfigMismatch("entropy data needs a set model")
        return sample.points, lambda out: _mse_node(out, sample.target)
    if isinstance(sample, SequenceSample):
        if not isinstance(model, (QuantumDeepSequences, LstmClassifier)):
            raise ConfigMismatch("sequence data needs a sequence model")
        xs = sample.values.reshape(-1, 1)
        return xs, lambda out: _bce_node(out, sample.label)
    raise ConfigMismatch(f"unknown sample type {type(sample).__name__}")


def sample_loss_value(model, sample) -> float:
    xs, loss_node = _sample_io(model, sample)
    tape = ad.Tape()
    out = model.forward(tape.leaf(model.params.values), xs)
    return float(ad.value_of(loss_node(out)))


def sample_grad(model, sample) -> tuple[float, np.ndarray]:
    xs, loss_node = _sample_io(model, sample)

    def loss_fn(p):
        return loss_node(model.forward(p, xs))

    tape = ad.Tape()
    root = tape.leaf(model.params.values)
    out = loss_fn(root)
    val = float(ad.value_of(out))
    ad.backward(out)
    g = root.grad
    if g is None:
        g = np.zeros_like(model.params.values)
    return val, np.asarray(g, dtype=np.float64)


def mean_loss(model, data) -> float:
    return float(np.mean([sample_loss_value(model, s) for s in data]))


def evaluate(model, data) -> dict:
    """Pure-inference metrics over a dataset; never touches parameters."""
    if len(data) == 0:
        raise ConfigMismatch("cannot evaluate on an empty dataset")
    if isinstance(data[0], EntropySample):
        losses = [
            loss_mse(float(model.predict(s.points)[0]), s.target) for s in data
        ]
        return {"metric": float(np.mean(losses)), "mse": float(np.mean(losses))}
    losses, hits = [], 0
    for s in data:
        p = float(model.predict(s.values.reshape(-1, 1))[0])
        losses.append(loss_bce(p, s.label))
        hits += int((p >= 0.5) == bool(s.label))
    return {
        "metric": float(np.mean(losses)),
        "bce": float(np.mean(losses)),
        "accuracy": hits / len(data),
    }


def train(config: TrainConfig, train_data, test_data, model=None):
    """Mini-batch Adam over per-sample gradients; returns (rows, model).

    Evaluation happens at step 0, every `eval_every` epochs, and after the
    final epoch, always on the full test set with training paused.
    """
    if len(train_data) == 0:
        raise ConfigMismatch("training data is empty")
    model = model if model is not None else build_model(config)
    xs0, _ = _sample_io(model, train_data[0])  # validates data/model pairing
    del xs0
    rng = np.random.default_rng(config.seed)
    state = AdamState.zeros(model.params.size)
    rows: list[MetricsRow] = []
    size = len(train_data)
    start = time.perf_counter()
    step = 0

    def record():
        rows.append(
            MetricsRow(
                size=size,
                step=step,
                train_loss=mean_loss(model, train_data),
                test_metric=evaluate(model, test_data)["metric"],
                seconds=time.perf_counter() - start,
                param_count=model.param_count,
            )
        )

    steps_per_epoch = -(-size // config.batch_size)
    total_steps = max(1, config.epochs * steps_per_epoch)

    def lr_at(t: int) -> float:
        if config.lr_schedule == "cosine":
            return config.lr * 0.5 * (1.0 + np.cos(np.pi * t / total_steps))
        return config.lr

    record()
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(size)
        for lo in range(0, size, config.batch_size):
            batch = [train_data[i] for i in order[lo : lo + config.batch_size]]
            acc = np.zeros(model.params.size)
            for s in batch:
                _, g = sample_grad(model, s)
                acc += g
            acc /= len(batch)
            state, new_values = adam_step(
                state, model.params.values, acc, lr_at(step)
            )
            model.params = ParamVector(new_values, dict(model.params.slices))
            step += 1
        if epoch % config.eval_every == 0 or epoch == config.epochs:
            record()
    return rows, model


def sweep(config: TrainConfig, sizes, train_pool, test_data):
    """Fresh model per training-set size; one summary row per size."""
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ConfigMismatch("sizes must be ascending")
    if sizes and sizes[-1] > len(train_pool):
        raise ConfigMismatch(
            f"pool has {len(train_pool)} samples, largest size is {sizes[-1]}"
        )
    rows = []
    for size in sizes:
        run_rows, _ = train(config, train_pool[:size], test_data)
        rows.append(replace(run_rows[-1], size=size))
    return rows
