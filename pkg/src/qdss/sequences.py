"""Sequence models: density-matrix embedding folded through the binary
channel, and an LSTM classifier baseline of comparable size.

The fold is a left fold in reading order; the channel is generally neither
commutative nor associative, which is what makes this a sequence model
rather than a set model.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import ParamVector
from .channel import ChannelSpec, TristochasticTensor, default_tensor, ensure_tristochastic
from .errors import DomainError, EmptySequence
from .nets import LstmSpec, MlpSpec, count_params, init_params, lstm_forward, mlp_forward
from .paulis import ORDER_TAG, GeneratorBasis, enumerate_generators


def stick_breaking_eigenvalues(w: np.ndarray, n: int) -> np.ndarray:
    """Probability vector of length n from unit-interval variables.

    lambda_1 = 1 - w_1^(1/(n-1)); each later lambda_k takes the fraction
    1 - w_k^(1/(n-k)) of whatever probability mass remains; lambda_n is the
    exact remainder. Only the first n - 1 entries of w are consumed.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.shape[-1] < n - 1:
        raise DomainError(f"need at least {n - 1} stick variables, got {w.shape[-1]}")
    used = w[..., : n - 1]
    if n > 1 and (np.any(used <= 0.0) or np.any(used >= 1.0)):
        raise DomainError("stick variables must lie strictly inside (0, 1)")
    out = np.zeros(w.shape[:-1] + (n,), dtype=np.float64)
    rem = np.ones(w.shape[:-1], dtype=np.float64)
    for k in range(1, n):
        t = used[..., k - 1] ** (1.0 / (n - k))
        out[..., k - 1] = (1.0 - t) * rem
        rem = rem * t
    out[..., n - 1] = 1.0 - out[..., : n - 1].sum(axis=-1)
    return out


def _stick_breaking_node(w, n: int):
    """Tape version of the stick-breaking map; w has shape (..., >= n - 1)."""
    parts = []
    rem = None
    for k in range(1, n):
        t = ad.pow_const(w[..., k - 1], 1.0 / (n - k))
        one_minus = 1.0 - t
        parts.append(one_minus if rem is None else one_minus * rem)
        rem = t if rem is None else rem * t
    parts.append(rem if rem is not None else 1.0 + 0.0 * w[..., 0])
    return ad.stack_last(parts)


def make_density(u: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """rho = U diag(lam) U^dag, batched over leading axes."""
    return np.einsum("...ij,...j,...kj->...ik", u, lam.astype(np.complex128), np.conj(u))


@dataclass
class QuantumDeepSequences:
    """Per-element density embedding pooled by the channel fold, projected
    by a classical head reading the (re, im) entries of the final state."""

    n_qubits: int
    theta_net: MlpSpec
    w_net: MlpSpec
    h_net: MlpSpec
    tensor: TristochasticTensor
    basis: GeneratorBasis
    params: ParamVector
    freeze_channel: bool = False

    @classmethod
    def create(
        cls,
        n_qubits: int,
        d_in: int = 1,
        d_out: int = 1,
        theta_hidden: int = 16,
        w_hidden: int = 16,
        h_hidden: int = 50,
        seed: int = 0,
        freeze_channel: bool = False,
        tensor: TristochasticTensor | None = None,
    ) -> "QuantumDeepSequences":
        basis = enumerate_generators(n_qubits)
        dim = basis.dim
        tensor = tensor if tensor is not None else default_tensor(dim)
        ensure_tristochastic(tensor)
        theta_net = MlpSpec((d_in, theta_hidden, basis.size))
        w_net = MlpSpec(
            (d_in, w_hidden, dim), output_activation="unit-interval-vector"
        )
        h_net = MlpSpec((2 * dim * dim, h_hidden, d_out), output_activation="sigmoid")
        parts = [
            ("theta_net", init_params(theta_net, seed)),
            ("w_net", init_params(w_net, seed + 1)),
            ("h_net", init_params(h_net, seed + 2)),
        ]
        if not freeze_channel:
            # B^1 stays the identity; only the other N - 1 blocks train,
            # starting from the identity channel (zero angles).
            parts.append(("b_angles", np.zeros((dim - 1) * basis.size)))
        params = ParamVector.from_parts(parts)
        return cls(
            n_qubits, theta_net, w_net, h_net, tensor, basis, params, freeze_channel
        )

    @property
    def d_in(self) -> int:
        return self.theta_net.layer_widths[0]

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def param_count(self) -> int:
        n = count_params(self.theta_net) + count_params(self.w_net)
        n += count_params(self.h_net)
        if not self.freeze_channel:
            n += (self.dim - 1) * self.basis.size
        return n

    def channel_spec(self) -> ChannelSpec:
        dim = self.dim
        b = np.zeros((dim, self.basis.size))
        if not self.freeze_channel:
            b[1:] = self.params.part("b_angles").reshape(dim - 1, self.basis.size)
        return ChannelSpec(self.n_qubits, self.tensor, b)

    def _slice(self, p, name):
        return p[self.params.slices[name]]

    def embed_densities(self, p, xs):
        """Batched embedding: (S, d_in) -> density matrices (S, N, N)."""
        theta = mlp_forward(self.theta_net, self._slice(p, "theta_net"), xs)
        u = ad.matexp_ah(ad.pauli_combination(theta, self.basis.generators))
        w = mlp_forward(self.w_net, self._slice(p, "w_net"), xs)
        lam = _stick_breaking_node(w, self.dim)
        return ad.matmul(ad.matmul(u, ad.diag_embed(lam)), ad.adjoint(u))

    def channel_unitary_node(self, p):
        dim = self.dim
        t = self.tensor.entries.astype(np.float64)
        if self.freeze_channel:
            tape = p.tape
            eye = np.broadcast_to(np.eye(dim, dtype=np.complex128), (dim, dim, dim))
            v4 = np.einsum("klj,kil->kilj", t, eye)
            return ad.Node(tape, v4.reshape(dim * dim, dim * dim))
        angles = ad.reshape(self._slice(p, "b_angles"), (dim - 1, self.basis.size))
        blocks = ad.matexp_ah(ad.pauli_combination(angles, self.basis.generators))
        eye = np.eye(dim, dtype=np.complex128).reshape(1, dim, dim)
        b_stack = ad.concat([eye, blocks], axis=0, tape=p.tape)
        return ad.assemble_channel_v(b_stack, t)

    def forward(self, p, xs):
        """Tape forward over one ordered sequence; xs is (S, d_in), S >= 1."""
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim == 1:
            xs = xs.reshape(-1, self.d_in)
        if xs.shape[0] == 0:
            raise EmptySequence("a sequence needs at least one element")
        dim = self.dim
        rhos = self.embed_densities(p, xs)
        acc = rhos[0]
        if xs.shape[0] > 1:
            v = self.channel_unitary_node(p)
            v_adj = ad.adjoint(v)
            for t in range(1, xs.shape[0]):
                k = ad.kron(acc, rhos[t])
                acc = ad.ptrace2(ad.matmul(ad.matmul(v, k), v_adj), dim, dim)
        flat = ad.reshape(acc, (dim * dim,))
        feats = ad.concat([ad.real(flat), ad.imag(flat)], axis=0)
        return mlp_forward(self.h_net, self._slice(p, "h_net"), feats)

    def predict(self, xs) -> np.ndarray:
        tape = ad.Tape()
        return np.asarray(self.forward(tape.leaf(self.params.values), xs).value)

    def to_dict(self) -> dict:
        return {
            "kind": "qdseq",
            "n_qubits": self.n_qubits,
            "theta_net": list(self.theta_net.layer_widths),
            "w_net": list(self.w_net.layer_widths),
            "h_net": list(self.h_net.layer_widths),
            "freeze_channel": self.freeze_channel,
            "tensor_ones": [
                [int(k), int(l), int(j)]
                for k, l, j in np.argwhere(self.tensor.entries == 1)
            ],
            "basis_order": ORDER_TAG,
            "slices": {k: [s.start, s.stop] for k, s in self.params.slices.items()},
            "params": self.params.values.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuantumDeepSequences":
        basis = enumerate_generators(d["n_qubits"])
        dim = basis.dim
        entries = np.zeros((dim, dim, dim), dtype=np.uint8)
        for k, l, j in d["tensor_ones"]:
            entries[k, l, j] = 1
        params = ParamVector(
            values=np.asarray(d["params"], dtype=np.float64),
            slices={k: slice(a, b) for k, (a, b) in d["slices"].items()},
        )
        return cls(
            d["n_qubits"],
            MlpSpec(tuple(d["theta_net"])),
            MlpSpec(tuple(d["w_net"]), output_activation="unit-interval-vector"),
            MlpSpec(tuple(d["h_net"]), output_activation="sigmoid"),
            TristochasticTensor(entries),
            basis,
            params,
            d["freeze_channel"],
        )


def embed_density(model: QuantumDeepSequences, x) -> np.ndarray:
    """Density matrix for one element; plain-array convenience wrapper."""
    tape = ad.Tape()
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    out = model.embed_densities(tape.leaf(model.params.values), x)
    return np.asarray(out.value)[0]


def qdseq_forward(model: QuantumDeepSequences, xs) -> np.ndarray:
    """Plain-array forward over one ordered sequence."""
    return model.predict(xs)


@dataclass
class LstmClassifier:
    """LSTM readout squashed to a probability; the sequence-task baseline."""

    spec: LstmSpec
    params: ParamVector

    @classmethod
    def create(
        cls, input_dim: int = 1, hidden_dim: int = 12, output_dim: int = 1, seed: int = 0
    ) -> "LstmClassifier":
        spec = LstmSpec(input_dim, hidden_dim, output_dim)
        params = ParamVector.from_parts([("lstm", init_params(spec, seed))])
        return cls(spec, params)

    @property
    def d_in(self) -> int:
        return self.spec.input_dim

    @property
    def param_count(self) -> int:
        return count_params(self.spec)

    def forward(self, p, xs):
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim == 1:
            xs = xs.reshape(-1, self.spec.input_dim)
        logits = lstm_forward(self.spec, p[self.params.slices["lstm"]], xs)
        return ad.sigmoid(logits)

    def predict(self, xs) -> np.ndarray:
        tape = ad.Tape()
        return np.asarray(self.forward(tape.leaf(self.params.values), xs).value)

    def to_dict(self) -> dict:
        return {
            "kind": "lstm",
            "input_dim": self.spec.input_dim,
            "hidden_dim": self.spec.hidden_dim,
            "output_dim": self.spec.output_dim,
            "slices": {k: [s.start, s.stop] for k, s in self.params.slices.items()},
            "params": self.params.values.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LstmClassifier":
        spec = LstmSpec(d["input_dim"], d["hidden_dim"], d["output_dim"])
        params = ParamVector(
            values=np.asarray(d["params"], dtype=np.float64),
            slices={k: slice(a, b) for k, (a, b) in d["slices"].items()},
        )
        return cls(spec, params)
