"""Set models: statevector-averaging quantum pooling and the classical
sum-pooling baseline.

Both models are variadic (any set size >= 1) and permutation invariant up
to floating-point summation order; elements are summed in the order given.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import ParamVector
from .errors import EmptySet, ZeroNorm
from .linalg import ZERO_EPS, l2_normalize
from .nets import MlpSpec, count_params, init_params, mlp_forward
from .paulis import ORDER_TAG, GeneratorBasis, enumerate_generators


def average_state(states) -> np.ndarray:
    """Normalized sum of statevectors; raises ZeroNorm on cancellation."""
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[0] == 0:
        raise EmptySet("need at least one statevector")
    return l2_normalize(states.sum(axis=0))


@dataclass
class QuantumDeepSets:
    """Per-element unitary embedding of |0...0> followed by statevector
    averaging and a classical projection head reading (re, im) features."""

    n_qubits: int
    theta_net: MlpSpec
    h_net: MlpSpec
    basis: GeneratorBasis
    params: ParamVector

    @classmethod
    def create(
        cls,
        n_qubits: int,
        d_in: int,
        d_out: int = 1,
        theta_hidden: int = 8,
        h_hidden: int = 100,
        seed: int = 0,
        h_output: str = "linear",
    ) -> "QuantumDeepSets":
        basis = enumerate_generators(n_qubits)
        theta_net = MlpSpec((d_in, theta_hidden, basis.size))
        h_net = MlpSpec((2 * basis.dim, h_hidden, d_out), output_activation=h_output)
        params = ParamVector.from_parts([
            ("theta_net", init_params(theta_net, seed)),
            ("h_net", init_params(h_net, seed + 1)),
        ])
        return cls(n_qubits, theta_net, h_net, basis, params)

    @property
    def d_in(self) -> int:
        return self.theta_net.layer_widths[0]

    @property
    def param_count(self) -> int:
        return count_params(self.theta_net) + count_params(self.h_net)

    def _slice(self, p, name):
        return p[self.params.slices[name]]

    def embed_states(self, p, xs):
        """Batched element embedding: (M, d_in) -> statevectors (M, 2^n)."""
        theta = mlp_forward(self.theta_net, self._slice(p, "theta_net"), xs)
        a = ad.pauli_combination(theta, self.basis.generators)
        u = ad.matexp_ah(a)
        return u[..., :, 0]

    def forward(self, p, xs):
        """Tape forward over one set; xs is (M, d_in) with M >= 1."""
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[0] == 0:
            raise EmptySet("a set needs at least one element")
        states = self.embed_states(p, xs)
        pooled = ad.sum_axis(states, axis=0)
        norm = ad.norm2(pooled)
        if norm.value <= ZERO_EPS:
            raise ZeroNorm("embedded states cancelled; pooled norm ~ 0")
        v = pooled / norm
        feats = ad.concat([ad.real(v), ad.imag(v)], axis=0)
        return mlp_forward(self.h_net, self._slice(p, "h_net"), feats)

    def predict(self, xs) -> np.ndarray:
        tape = ad.Tape()
        return np.asarray(self.forward(tape.leaf(self.params.values), xs).value)

    def to_dict(self) -> dict:
        return {
            "kind": "qds",
            "n_qubits": self.n_qubits,
            "theta_net": list(self.theta_net.layer_widths),
            "h_net": list(self.h_net.layer_widths),
            "h_output": self.h_net.output_activation,
            "basis_order": ORDER_TAG,
            "slices": {k: [s.start, s.stop] for k, s in self.params.slices.items()},
            "params": self.params.values.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuantumDeepSets":
        basis = enumerate_generators(d["n_qubits"])
        theta_net = MlpSpec(tuple(d["theta_net"]))
        h_net = MlpSpec(tuple(d["h_net"]), output_activation=d.get("h_output", "linear"))
        params = ParamVector(
            values=np.asarray(d["params"], dtype=np.float64),
            slices={k: slice(a, b) for k, (a, b) in d["slices"].items()},
        )
        return cls(d["n_qubits"], theta_net, h_net, basis, params)


def embed_state(model: QuantumDeepSets, x) -> np.ndarray:
    """Statevector for one element; plain-array convenience wrapper."""
    tape = ad.Tape()
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    out = model.embed_states(tape.leaf(model.params.values), x)
    return np.asarray(out.value)[0]


def qds_forward(model: QuantumDeepSets, xs) -> np.ndarray:
    """Plain-array forward over one set."""
    return model.predict(np.asarray(xs, dtype=np.float64))


@dataclass
class ClassicalDeepSets:
    """Sum-pooled embedding baseline: h(sum_x g(x)), no normalization."""

    g_net: MlpSpec
    h_net: MlpSpec
    params: ParamVector

    @classmethod
    def create(
        cls,
        d_in: int,
        d_emb: int = 4,
        d_out: int = 1,
        g_hidden: int = 8,
        h_hidden: int = 100,
        seed: int = 0,
        h_output: str = "linear",
    ) -> "ClassicalDeepSets":
        g_net = MlpSpec((d_in, g_hidden, d_emb))
        h_net = MlpSpec((d_emb, h_hidden, d_out), output_activation=h_output)
        params = ParamVector.from_parts([
            ("g_net", init_params(g_net, seed)),
            ("h_net", init_params(h_net, seed + 1)),
        ])
        return cls(g_net, h_net, params)

    @property
    def d_in(self) -> int:
        return self.g_net.layer_widths[0]

    @property
    def param_count(self) -> int:
        return count_params(self.g_net) + count_params(self.h_net)

    def forward(self, p, xs):
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[0] == 0:
            raise EmptySet("a set needs at least one element")
        emb = mlp_forward(self.g_net, p[self.params.slices["g_net"]], xs)
        pooled = ad.sum_axis(emb, axis=0)
        return mlp_forward(self.h_net, p[self.params.slices["h_net"]], pooled)

    def predict(self, xs) -> np.ndarray:
        tape = ad.Tape()
        return np.asarray(self.forward(tape.leaf(self.params.values), xs).value)

    def to_dict(self) -> dict:
        return {
            "kind": "classical-ds",
            "g_net": list(self.g_net.layer_widths),
            "h_net": list(self.h_net.layer_widths),
            "h_output": self.h_net.output_activation,
            "slices": {k: [s.start, s.stop] for k, s in self.params.slices.items()},
            "params": self.params.values.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassicalDeepSets":
        params = ParamVector(
            values=np.asarray(d["params"], dtype=np.float64),
            slices={k: slice(a, b) for k, (a, b) in d["slices"].items()},
        )
        return cls(
            MlpSpec(tuple(d["g_net"])),
            MlpSpec(tuple(d["h_net"]), output_activation=d.get("h_output", "linear")),
            params,
        )


def classical_ds_forward(model: ClassicalDeepSets, xs) -> np.ndarray:
    return model.predict(np.asarray(xs, dtype=np.float64))
