"""Dense complex linear algebra sized for few-qubit registers (dim <= 64).

All functions accept plain ndarrays and are pure. Matrix arguments may carry
leading batch axes unless noted; the last two axes are the matrix axes.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotAntiHermitian, ZeroNorm

# Tolerance policy: structural checks (unitarity, hermiticity, trace) at
# STRUCT_TOL, comparisons against independent oracles at ORACLE_TOL, hard
# zero guards (norms) at ZERO_EPS.
STRUCT_TOL = 1e-10
ORACLE_TOL = 1e-9
ZERO_EPS = 1e-12


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose of the last two axes."""
    return np.conj(np.swapaxes(m, -1, -2))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; out[i*rb + k, j*cb + l] = a[i, j] * b[k, l]."""
    return np.kron(a, b)


def matexp_antihermitian(a: np.ndarray, tol: float = STRUCT_TOL) -> np.ndarray:
    """exp(a) for anti-Hermitian a, via eigendecomposition of H = i*a.

    H is Hermitian, so exp(a) = exp(-iH) = V exp(-i diag(w)) V^dag with
    (w, V) = eigh(H). The result is unitary to roundoff. Supports batched
    input on leading axes.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"matrix must be square, got {a.shape}")
    defect = np.max(np.abs(a + dagger(a)))
    if defect > tol:
        raise NotAntiHermitian(f"a + a^dag has max entry {defect:.3e} > {tol:.1e}")
    h = 1j * a
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * w)
    return np.einsum("...ij,...j,...kj->...ik", v, phases, np.conj(v))


def partial_trace_second(m: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Trace out the second factor: out[k, k'] = sum_i m[k*db + i, k'*db + i]."""
    m = np.asarray(m)
    if m.shape[-1] != dim_a * dim_b or m.shape[-2] != dim_a * dim_b:
        raise DimensionMismatch(
            f"expected {dim_a * dim_b}-square matrix, got {m.shape}"
        )
    m4 = m.reshape(m.shape[:-2] + (dim_a, dim_b, dim_a, dim_b))
    return np.einsum("...aibi->...ab", m4)


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """v / ||v||_2; raises ZeroNorm if the norm is at or below ZERO_EPS."""
    v = np.asarray(v)
    n = np.linalg.norm(v)
    if n <= ZERO_EPS:
        raise ZeroNorm(f"vector norm {n:.3e} <= {ZERO_EPS:.1e}")
    return v / n


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def basis_state(dim: int, k: int = 0) -> np.ndarray:
    e = np.zeros(dim, dtype=np.complex128)
    e[k] = 1.0
    return e


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(m).ravel()))


def is_unitary(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    m = np.asarray(m)
    eye = np.eye(m.shape[-1])
    return bool(np.max(np.abs(dagger(m) @ m - eye)) <= tol)


def is_hermitian(m: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - dagger(m))) <= tol)


def is_statevector(v: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    return bool(abs(np.linalg.norm(np.asarray(v)) - 1.0) <= tol)


def is_density_matrix(
    rho: np.ndarray, tol: float = STRUCT_TOL, eig_floor: float = -1e-9
) -> bool:
    """Hermitian within tol, trace 1 within tol, eigenvalues >= eig_floor."""
    rho = np.asarray(rho)
    if not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho).real - 1.0) > tol or abs(np.trace(rho).imag) > tol:
        return False
    eigs = np.linalg.eigvalsh((rho + dagger(rho)) / 2.0)
    return bool(eigs.min() >= eig_floor)
