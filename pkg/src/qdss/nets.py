"""Small fully connected networks and an LSTM-cell classifier baseline.

Forward passes are written against the tape ops so gradients come for free;
plain-array evaluation just runs on a throwaway tape.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import EmptySequence, ShapeMismatch

ACTIVATIONS = ("linear", "sigmoid", "unit-interval-vector")


@dataclass(frozen=True)
class MlpSpec:
    """Affine + activation stack: one entry in layer_widths per layer."""

    layer_widths: tuple[int, ...]
    hidden_activation: str = "tanh"
    output_activation: str = "linear"

    def __post_init__(self):
        if len(self.layer_widths) < 2:
            raise ShapeMismatch("an MLP needs at least input and output widths")
        if any(w < 1 for w in self.layer_widths):
            raise ShapeMismatch("layer widths must be >= 1")
        if self.output_activation not in ACTIVATIONS:
            raise ShapeMismatch(f"unknown output activation {self.output_activation!r}")


@dataclass(frozen=True)
class LstmSpec:
    input_dim: int
    hidden_dim: int
    output_dim: int

    def __post_init__(self):
        if min(self.input_dim, self.hidden_dim, self.output_dim) < 1:
            raise ShapeMismatch("LSTM dims must be >= 1")


def count_params(spec) -> int:
    """Trainable parameter count of a single network spec."""
    if isinstance(spec, MlpSpec):
        ws = spec.layer_widths
        return sum((ws[i] + 1) * ws[i + 1] for i in range(len(ws) - 1))
    if isinstance(spec, LstmSpec):
        d, h, o = spec.input_dim, spec.hidden_dim, spec.output_dim
        return 4 * (h * (d + h) + h) + o * h + o
    raise ShapeMismatch(f"unknown spec type {type(spec).__name__}")


def _glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


def init_params(spec, seed: int) -> np.ndarray:
    """Glorot-uniform weights, zero biases; deterministic in the seed."""
    rng = np.random.default_rng(seed)
    chunks = []
    if isinstance(spec, MlpSpec):
        ws = spec.layer_widths
        for i in range(len(ws) - 1):
            chunks.append(_glorot(rng, ws[i + 1], ws[i]).ravel())
            chunks.append(np.zeros(ws[i + 1]))
    elif isinstance(spec, LstmSpec):
        d, h, o = spec.input_dim, spec.hidden_dim, spec.output_dim
        chunks.append(_glorot(rng, 4 * h, d).ravel())
        chunks.append(_glorot(rng, 4 * h, h).ravel())
        chunks.append(np.zeros(4 * h))
        chunks.append(_glorot(rng, o, h).ravel())
        chunks.append(np.zeros(o))
    else:
        raise ShapeMismatch(f"unknown spec type {type(spec).__name__}")
    return np.concatenate(chunks)


def _apply_output_activation(spec: MlpSpec, y):
    if spec.output_activation == "linear":
        return y
    # "sigmoid" and "unit-interval-vector" are the same map; the tags record
    # whether the output is read as a probability or as stick-breaking input.
    return ad.sigmoid(y)


def mlp_forward(spec: MlpSpec, params, x):
    """Forward pass; x may be a vector (d_in,) or a batch (M, d_in).

    `params` is the flat node (or array) laid out per layer as the weight
    matrix in row-major order followed by the bias vector.
    """
    ws = spec.layer_widths
    xv = ad.value_of(x)
    if xv.shape[-1] != ws[0]:
        raise ShapeMismatch(f"input width {xv.shape[-1]}, spec expects {ws[0]}")
    if ad.value_of(params).size != count_params(spec):
        raise ShapeMismatch("parameter slice does not match the spec layout")
    if not isinstance(params, ad.Node):
        params = ad.Tape().leaf(params)
    h = x
    pos = 0
    for i in range(len(ws) - 1):
        d_in, d_out = ws[i], ws[i + 1]
        w = ad.reshape(params[pos : pos + d_out * d_in], (d_out, d_in))
        pos += d_out * d_in
        b = params[pos : pos + d_out]
        pos += d_out
        h = ad.affine(h, w, b)
        if i < len(ws) - 2:
            h = ad.tanh(h)
    return _apply_output_activation(spec, h)


def lstm_forward(spec: LstmSpec, params, sequence):
    """Run the gated recurrence over `sequence` and read out the last hidden
    state through an affine map. Gate order in the stacked weights is
    input, forget, cell candidate, output."""
    seq = ad.value_of(sequence)
    if seq.ndim == 1:
        seq = seq.reshape(-1, spec.input_dim)
    if seq.shape[0] == 0:
        raise EmptySequence("LSTM needs at least one step")
    if seq.shape[1] != spec.input_dim:
        raise ShapeMismatch(f"step width {seq.shape[1]}, spec expects {spec.input_dim}")
    if ad.value_of(params).size != count_params(spec):
        raise ShapeMismatch("parameter slice does not match the spec layout")
    if not isinstance(params, ad.Node):
        params = ad.Tape().leaf(params)
    d, h_dim, o = spec.input_dim, spec.hidden_dim, spec.output_dim

    pos = 0
    w_x = ad.reshape(params[pos : pos + 4 * h_dim * d], (4 * h_dim, d))
    pos += 4 * h_dim * d
    w_h = ad.reshape(params[pos : pos + 4 * h_dim * h_dim], (4 * h_dim, h_dim))
    pos += 4 * h_dim * h_dim
    b = params[pos : pos + 4 * h_dim]
    pos += 4 * h_dim
    w_out = ad.reshape(params[pos : pos + o * h_dim], (o, h_dim))
    pos += o * h_dim
    b_out = params[pos : pos + o]

    h = None
    c = None
    for t in range(seq.shape[0]):
        gates = ad.affine(seq[t], w_x, b)
        if h is not None:
            gates = gates + ad.affine(h, w_h)
        i_g = ad.sigmoid(gates[0:h_dim])
        f_g = ad.sigmoid(gates[h_dim : 2 * h_dim])
        g_g = ad.tanh(gates[2 * h_dim : 3 * h_dim])
        o_g = ad.sigmoid(gates[3 * h_dim : 4 * h_dim])
        c = i_g * g_g if c is None else f_g * c + i_g * g_g
        h = o_g * ad.tanh(c)
    return ad.affine(h, w_out, b_out)
