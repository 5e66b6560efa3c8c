"""Binary density-matrix channel built from a tristochastic 0/1 tensor.

A Boolean tensor T with unit marginals along every single index is the
multiplication table of a quasigroup (a Latin square); together with one
unitary B^k per output index it defines the block unitary
V[k*N + i, l*N + j] = T[k, l, j] * B^k[i, l], and the channel
(rho, sigma) -> Tr_2[V (rho (x) sigma) V^dag], which is trace preserving
and completely positive. The first block B^1 is always the identity.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidTensor
from .linalg import STRUCT_TOL, dagger, kron, partial_trace_second
from .paulis import GeneratorBasis, su_unitary


@dataclass(frozen=True)
class TristochasticTensor:
    """Boolean N x N x N tensor; entry [k, l, j] routes inputs (l, j) to k."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.uint8)
        if e.ndim != 3 or len(set(e.shape)) != 1:
            raise InvalidTensor(f"tensor must be cubic, got shape {e.shape}")
        if not np.isin(e, (0, 1)).all():
            raise InvalidTensor("tensor entries must be 0 or 1")
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class TensorReport:
    ok: bool
    message: str = "ok"


def default_tensor(n: int) -> TristochasticTensor:
    """Cyclic-group table: T[k, l, j] = 1 iff k = (l + j) mod n."""
    if n < 1:
        raise InvalidTensor(f"dimension must be >= 1, got {n}")
    k, l, j = np.indices((n, n, n))
    return TristochasticTensor(((l + j) % n == k).astype(np.uint8))


def validate_tensor(t: TristochasticTensor) -> TensorReport:
    """Check all three unit-marginal conditions; report the first violation."""
    e = t.entries
    for axis, name in ((0, "k"), (1, "l"), (2, "j")):
        sums = e.sum(axis=axis)
        bad = np.argwhere(sums != 1)
        if bad.size:
            fixed = tuple(int(v) for v in bad[0])
            return TensorReport(
                ok=False,
                message=(
                    f"marginal over {name} is {int(sums[tuple(bad[0])])} "
                    f"at slice {fixed}, expected 1"
                ),
            )
    return TensorReport(ok=True)


def ensure_tristochastic(t: TristochasticTensor) -> None:
    report = validate_tensor(t)
    if not report.ok:
        raise InvalidTensor(report.message)


def tensor_to_json(t: TristochasticTensor) -> str:
    """Serialize as the list of unit triples {k, l, j}."""
    triples = [
        {"k": int(k), "l": int(l), "j": int(j)}
        for k, l, j in np.argwhere(t.entries == 1)
    ]
    return json.dumps({"n": t.n, "ones": triples})


def tensor_from_json(text: str) -> TristochasticTensor:
    d = json.loads(text)
    e = np.zeros((d["n"],) * 3, dtype=np.uint8)
    for triple in d["ones"]:
        e[triple["k"], triple["l"], triple["j"]] = 1
    return TristochasticTensor(e)


@dataclass(frozen=True)
class ChannelSpec:
    """Tensor plus the per-block unitary angles; b_angles[0] is frozen (the
    identity block) and is kept at zero."""

    n_qubits: int
    tensor: TristochasticTensor
    b_angles: np.ndarray  # (N, 4^n - 1), row 0 all zeros

    def __post_init__(self):
        n = 2**self.n_qubits
        b = np.asarray(self.b_angles, dtype=np.float64)
        if b.shape != (n, 4**self.n_qubits - 1):
            raise DimensionMismatch(
                f"b_angles must be {(n, 4 ** self.n_qubits - 1)}, got {b.shape}"
            )
        if np.any(b[0] != 0.0):
            raise DimensionMismatch("b_angles[0] parameterizes B^1 and must stay 0")
        if self.tensor.n != n:
            raise DimensionMismatch("tensor dimension must be 2^n_qubits")
        object.__setattr__(self, "b_angles", b)


def block_unitaries(spec: ChannelSpec, basis: GeneratorBasis | None = None) -> np.ndarray:
    """Stack of the N block unitaries B^k; B^1 is exactly the identity."""
    from .paulis import enumerate_generators

    basis = basis if basis is not None else enumerate_generators(spec.n_qubits)
    return su_unitary(basis, spec.b_angles)


def build_channel_unitary(
    spec: ChannelSpec, basis: GeneratorBasis | None = None
) -> np.ndarray:
    """Assemble V from a validated tensor and the block unitaries."""
    ensure_tristochastic(spec.tensor)
    b = block_unitaries(spec, basis)
    return assemble_unitary(spec.tensor, b)


def assemble_unitary(t: TristochasticTensor, b_stack: np.ndarray) -> np.ndarray:
    n = t.n
    if b_stack.shape != (n, n, n):
        raise DimensionMismatch(f"need {n} unitaries of size {n}, got {b_stack.shape}")
    v4 = np.einsum("klj,kil->kilj", t.entries.astype(np.float64), b_stack)
    return v4.reshape(n * n, n * n)


def channel_product(v: np.ndarray, rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """rho o sigma = Tr_2[V (rho (x) sigma) V^dag]."""
    n = rho.shape[-1]
    if sigma.shape[-1] != n or v.shape != (n * n, n * n):
        raise DimensionMismatch(
            f"incompatible dims: v {v.shape}, rho {rho.shape}, sigma {sigma.shape}"
        )
    return partial_trace_second(v @ kron(rho, sigma) @ dagger(v), n, n)


def fold_sequence(v: np.ndarray, densities) -> np.ndarray:
    """Left fold of the channel product over an ordered list of densities."""
    from .errors import EmptySequence

    if len(densities) == 0:
        raise EmptySequence("fold needs at least one density matrix")
    acc = densities[0]
    for rho in densities[1:]:
        acc = channel_product(v, acc, rho)
    return acc


def random_density(rng: np.random.Generator, n: int) -> np.ndarray:
    """Hilbert-Schmidt-uniform mixed state from a complex Ginibre matrix."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = g @ dagger(g)
    return m / np.trace(m).real


def commutativity_defect(v: np.ndarray, samples: int, seed: int) -> float:
    """Mean Frobenius distance between rho o sigma and sigma o rho over
    seeded random density pairs."""
    if samples < 1:
        raise DimensionMismatch("samples must be >= 1")
    n = int(round(np.sqrt(v.shape[0])))
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(samples):
        rho = random_density(rng, n)
        sigma = random_density(rng, n)
        diff = channel_product(v, rho, sigma) - channel_product(v, sigma, rho)
        total += float(np.linalg.norm(diff))
    return total / samples


def associativity_defect(v: np.ndarray, samples: int, seed: int) -> float:
    """Mean Frobenius distance between (rho o sigma) o tau and
    rho o (sigma o tau) over seeded random density triples."""
    if samples < 1:
        raise DimensionMismatch("samples must be >= 1")
    n = int(round(np.sqrt(v.shape[0])))
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(samples):
        rho = random_density(rng, n)
        sigma = random_density(rng, n)
        tau = random_density(rng, n)
        left = channel_product(v, channel_product(v, rho, sigma), tau)
        right = channel_product(v, rho, channel_product(v, sigma, tau))
        total += float(np.linalg.norm(left - right))
    return total / samples


def is_channel_unitary(v: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    return bool(np.max(np.abs(dagger(v) @ v - np.eye(v.shape[0]))) <= tol)
