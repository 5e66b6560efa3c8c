"""Pauli-string generator basis of su(2^n) and the unitaries it generates.

The basis is frozen in lexicographic order of the Pauli words over the
alphabet I < X < Y < Z with the all-identity word removed, so parameter
vectors are portable across runs. Generators are G_m = i * P_m, which are
anti-Hermitian, so real coefficient vectors always produce a unitary.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import LengthMismatch
from .linalg import matexp_antihermitian

# Frozen ordering tag stored in checkpoints; bump if the ordering ever changes.
ORDER_TAG = "pauli-lex-v1"

PAULI_1Q = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

_LETTERS = "IXYZ"

SOFT_QUBIT_CAP = 3


def pauli_string_matrix(word: str) -> np.ndarray:
    """Kronecker product of single-qubit Paulis, first letter acting leftmost."""
    m = PAULI_1Q[word[0]]
    for letter in word[1:]:
        m = np.kron(m, PAULI_1Q[letter])
    return m


@dataclass(frozen=True)
class GeneratorBasis:
    """Ordered su(2^n) generator basis; `generators` stacks G_m = i*P_m."""

    n_qubits: int
    words: tuple[str, ...]
    generators: np.ndarray = field(repr=False)  # (4^n - 1, 2^n, 2^n) complex

    @property
    def size(self) -> int:
        return len(self.words)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


def enumerate_generators(n_qubits: int) -> GeneratorBasis:
    """All 4^n - 1 generators i*P for non-identity Pauli words P, lex order."""
    if n_qubits < 1:
        raise ValueError(f"need at least one qubit, got {n_qubits}")
    if n_qubits > SOFT_QUBIT_CAP:
        warnings.warn(
            f"{n_qubits} qubits exceeds the tested cap of {SOFT_QUBIT_CAP}; "
            f"dense 4^n storage grows fast",
            stacklevel=2,
        )
    words = tuple(
        "".join(w) for w in product(_LETTERS, repeat=n_qubits)
    )[1:]  # drop the all-I word
    stack = np.stack([1j * pauli_string_matrix(w) for w in words])
    return GeneratorBasis(n_qubits=n_qubits, words=words, generators=stack)


def su_unitary(basis: GeneratorBasis, theta: np.ndarray) -> np.ndarray:
    """exp(sum_m theta[m] * G_m); unitary for any real theta.

    Accepts batched theta with shape (..., 4^n - 1); returns (..., 2^n, 2^n).
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape[-1] != basis.size:
        raise LengthMismatch(
            f"theta has length {theta.shape[-1]}, basis needs {basis.size}"
        )
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta entries must be finite")
    a = np.tensordot(theta, basis.generators, axes=([-1], [0]))
    return matexp_antihermitian(a)
