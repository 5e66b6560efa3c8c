import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdss.errors import DimensionMismatch, NotAntiHermitian, ZeroNorm
from qdss.linalg import (
    dagger,
    is_hermitian,
    kron,
    l2_normalize,
    matexp_antihermitian,
    partial_trace_second,
)


def taylor_expm(a: np.ndarray, scale_pow: int = 8, terms: int = 30) -> np.ndarray:
    """Independent scaling-and-squaring truncated-series exponential."""
    x = a / (2.0**scale_pow)
    out = np.eye(a.shape[0], dtype=np.complex128)
    term = out.copy()
    for k in range(1, terms + 1):
        term = term @ x / k
        out = out + term
    for _ in range(scale_pow):
        out = out @ out
    return out


def random_antihermitian(rng, n):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return m - dagger(m)


def random_hermitian(rng, n):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return m + dagger(m)


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_projectors(self):
        a = np.diag([1.0, 0.0])
        b = np.diag([0.0, 1.0])
        assert np.array_equal(kron(a, b), np.diag([0.0, 1.0, 0.0, 0.0]))

    def test_matches_index_formula_real_exact(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            a = rng.standard_normal((2, 2))
            b = rng.standard_normal((2, 2))
            out = kron(a, b)
            for i in range(2):
                for j in range(2):
                    for k in range(2):
                        for l in range(2):
                            assert out[i * 2 + k, j * 2 + l] == a[i, j] * b[k, l]

    def test_matches_index_formula_complex(self):
        # complex multiplies may differ from the scalar formula by one ulp
        rng = np.random.default_rng(11)
        for _ in range(5):
            a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            out = kron(a, b)
            expected = np.array(
                [
                    [a[i, j] * b[k, l] for j in range(2) for l in range(2)]
                    for i in range(2)
                    for k in range(2)
                ]
            )
            assert np.allclose(out, expected, rtol=0, atol=1e-14)

    def test_associative_element_exact(self):
        # exact-representable entries make every product exact, so the
        # index-reordering identity holds bit for bit
        rng = np.random.default_rng(12)
        a, b, c = (
            rng.integers(-2, 3, size=(2, 2)) + 1j * rng.integers(-2, 3, size=(2, 2))
            for _ in range(3)
        )
        assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))

    def test_associative_up_to_roundoff(self):
        rng = np.random.default_rng(13)
        a, b, c = (
            rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            for _ in range(3)
        )
        assert np.allclose(
            kron(kron(a, b), c), kron(a, kron(b, c)), rtol=0, atol=1e-14
        )


class TestMatexp:
    def test_zero_gives_identity(self):
        out = matexp_antihermitian(np.zeros((4, 4)))
        assert np.allclose(out, np.eye(4), atol=1e-12)

    def test_euler_identity_pauli_x(self):
        sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
        out = matexp_antihermitian(1j * (np.pi / 2) * sx)
        assert np.allclose(out, 1j * sx, atol=1e-12)

    def test_matches_taylor_oracle_8x8(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            a = random_antihermitian(rng, 8)
            expected = taylor_expm(a)
            got = matexp_antihermitian(a)
            assert np.linalg.norm(got - expected) <= 1e-9

    def test_unitarity(self):
        rng = np.random.default_rng(22)
        for n in (2, 4, 8):
            a = random_antihermitian(rng, n)
            u = matexp_antihermitian(a)
            assert np.linalg.norm(dagger(u) @ u - np.eye(n)) <= 1e-10

    def test_rejects_non_antihermitian(self):
        with pytest.raises(NotAntiHermitian):
            matexp_antihermitian(np.array([[1.0, 0.0], [0.0, 1.0]]))

    def test_batched_matches_loop(self):
        rng = np.random.default_rng(23)
        batch = np.stack([random_antihermitian(rng, 4) for _ in range(6)])
        got = matexp_antihermitian(batch)
        for i in range(6):
            assert np.allclose(got[i], matexp_antihermitian(batch[i]), atol=1e-12)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_unitarity_property(self, seed):
        rng = np.random.default_rng(seed)
        a = random_antihermitian(rng, 4)
        u = matexp_antihermitian(a)
        assert np.linalg.norm(dagger(u) @ u - np.eye(4)) <= 1e-10


class TestPartialTrace:
    def test_product_state_factorizes(self):
        rng = np.random.default_rng(31)
        rho = random_hermitian(rng, 2)
        sigma = random_hermitian(rng, 3)
        out = partial_trace_second(np.kron(rho, sigma), 2, 3)
        assert np.allclose(out, rho * np.trace(sigma), atol=1e-12)

    def test_bell_state(self):
        phi = np.zeros(4, dtype=np.complex128)
        phi[0] = phi[3] = 1 / np.sqrt(2)
        out = partial_trace_second(np.outer(phi, phi.conj()), 2, 2)
        assert np.allclose(out, np.eye(2) / 2, atol=1e-12)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(32)
        m = random_hermitian(rng, 4)
        out = partial_trace_second(m, 2, 2)
        expected = np.zeros((2, 2), dtype=np.complex128)
        for k in range(2):
            for kp in range(2):
                for i in range(2):
                    expected[k, kp] += m[k * 2 + i, kp * 2 + i]
        assert np.array_equal(out, expected)

    def test_preserves_hermiticity_and_trace(self):
        rng = np.random.default_rng(33)
        m = random_hermitian(rng, 8)
        out = partial_trace_second(m, 4, 2)
        assert is_hermitian(out, tol=1e-12)
        assert abs(np.trace(out) - np.trace(m)) <= 1e-12 * max(1, abs(np.trace(m)))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            partial_trace_second(np.eye(6), 2, 2)


class TestNormalize:
    def test_scaling(self):
        assert np.allclose(l2_normalize(np.array([2.0, 0.0])), [1.0, 0.0])

    def test_phase_preserved(self):
        v = np.array([1 + 1j, 0.0])
        out = l2_normalize(3.7 * v)
        assert abs(np.linalg.norm(out) - 1.0) <= 1e-12
        # the ratio between components is untouched (second is 0, first keeps phase)
        assert np.allclose(out[0] / abs(out[0]), v[0] / abs(v[0]), atol=1e-12)

    def test_phase_ratio_two_components(self):
        v = np.array([1 + 1j, 2 - 0.5j])
        out = l2_normalize(v)
        assert np.allclose(out[0] / out[1], v[0] / v[1], atol=1e-12)

    def test_zero_norm(self):
        e = np.array([1.0, 0.0])
        with pytest.raises(ZeroNorm):
            l2_normalize(e + (-e))
