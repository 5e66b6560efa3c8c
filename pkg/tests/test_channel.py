import json

import numpy as np
import pytest

from qdss.channel import (
    ChannelSpec,
    TristochasticTensor,
    assemble_unitary,
    associativity_defect,
    build_channel_unitary,
    channel_product,
    commutativity_defect,
    default_tensor,
    ensure_tristochastic,
    fold_sequence,
    random_density,
    tensor_from_json,
    tensor_to_json,
    validate_tensor,
)
from qdss.errors import EmptySequence, InvalidTensor
from qdss.linalg import dagger
from qdss.paulis import enumerate_generators


def brute_force_v(t: np.ndarray, b_stack: np.ndarray) -> np.ndarray:
    """Triple-loop construction of V[k*N + i, l*N + j] = T[k,l,j] B^k[i,l]."""
    n = t.shape[0]
    v = np.zeros((n * n, n * n), dtype=np.complex128)
    for k in range(n):
        for i in range(n):
            for l in range(n):
                for j in range(n):
                    v[k * n + i, l * n + j] = t[k, l, j] * b_stack[k, i, l]
    return v


def brute_force_product(v, rho, sigma):
    """Direct loop evaluation of Tr_2[V (rho x sigma) V^dag]."""
    n = rho.shape[0]
    big = np.kron(rho, sigma)
    mid = v @ big @ v.conj().T
    out = np.zeros((n, n), dtype=np.complex128)
    for k in range(n):
        for kp in range(n):
            for i in range(n):
                out[k, kp] += mid[k * n + i, kp * n + i]
    return out


def classical_tristochastic_product(t, p, q):
    """out_k = sum_{l,j} T[k,l,j] p_l q_j (probability-vector product)."""
    n = t.shape[0]
    out = np.zeros(n)
    for k in range(n):
        for l in range(n):
            for j in range(n):
                out[k] += t[k, l, j] * p[l] * q[j]
    return out


def random_channel(n_qubits, seed, freeze=False):
    basis = enumerate_generators(n_qubits)
    dim = 2**n_qubits
    rng = np.random.default_rng(seed)
    b = np.zeros((dim, basis.size))
    if not freeze:
        b[1:] = rng.normal(0.0, 1.0, size=(dim - 1, basis.size))
    spec = ChannelSpec(n_qubits, default_tensor(dim), b)
    return build_channel_unitary(spec, basis), spec, basis


def random_prob_vector(rng, n):
    p = rng.uniform(0.01, 1.0, size=n)
    return p / p.sum()


class TestDefaultTensor:
    def test_n2_is_xor_table(self):
        t = default_tensor(2).entries
        ones = {(0, 0, 0), (1, 0, 1), (1, 1, 0), (0, 1, 1)}
        assert {tuple(idx) for idx in np.argwhere(t == 1)} == ones

    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_marginals_all_one(self, n):
        t = default_tensor(n).entries
        for axis in range(3):
            assert np.array_equal(t.sum(axis=axis), np.ones((n, n), dtype=np.uint8))

    @pytest.mark.parametrize("n", [2, 4])
    def test_classical_product_is_cyclic_convolution(self, n):
        t = default_tensor(n).entries
        rng = np.random.default_rng(n)
        for _ in range(5):
            p = random_prob_vector(rng, n)
            q = random_prob_vector(rng, n)
            got = classical_tristochastic_product(t, p, q)
            conv = np.array(
                [sum(p[l] * q[(k - l) % n] for l in range(n)) for k in range(n)]
            )
            assert np.allclose(got, conv, atol=1e-14)


class TestValidateTensor:
    def test_default_ok(self):
        assert validate_tensor(default_tensor(4)).ok

    def test_all_zero_fails_on_first_marginal(self):
        report = validate_tensor(TristochasticTensor(np.zeros((3, 3, 3), dtype=np.uint8)))
        assert not report.ok
        assert "marginal over k" in report.message

    def test_duplicated_latin_row_identified(self):
        t = default_tensor(3).entries.copy()
        t[:, 1, :] = t[:, 0, :]  # duplicate a row of the Latin square
        report = validate_tensor(TristochasticTensor(t))
        assert not report.ok

    def test_ensure_raises(self):
        with pytest.raises(InvalidTensor):
            ensure_tristochastic(TristochasticTensor(np.zeros((2, 2, 2), dtype=np.uint8)))

    def test_json_round_trip(self):
        t = default_tensor(4)
        clone = tensor_from_json(tensor_to_json(t))
        assert np.array_equal(t.entries, clone.entries)
        parsed = json.loads(tensor_to_json(t))
        assert parsed["n"] == 4 and len(parsed["ones"]) == 16


class TestChannelUnitary:
    def test_identity_blocks_give_permutation(self):
        v, _, _ = random_channel(1, seed=0, freeze=True)
        assert set(np.unique(v.real)) <= {0.0, 1.0}
        assert np.max(np.abs(v.imag)) == 0.0
        assert np.array_equal(dagger(v) @ v, np.eye(4))

    def test_matches_brute_force(self):
        basis = enumerate_generators(1)
        rng = np.random.default_rng(5)
        b = np.zeros((2, 3))
        b[1:] = rng.normal(0.0, 1.0, size=(1, 3))
        spec = ChannelSpec(1, default_tensor(2), b)
        from qdss.channel import block_unitaries

        stack = block_unitaries(spec, basis)
        assert np.allclose(stack[0], np.eye(2), atol=1e-14)  # frozen identity
        got = build_channel_unitary(spec, basis)
        expected = brute_force_v(spec.tensor.entries.astype(float), stack)
        assert np.allclose(got, expected, atol=1e-14)

    @pytest.mark.parametrize("n_qubits", [1, 2])
    def test_unitarity_sweep(self, n_qubits):
        for seed in range(20):
            v, _, _ = random_channel(n_qubits, seed=seed)
            eye = np.eye(v.shape[0])
            assert np.max(np.abs(dagger(v) @ v - eye)) <= 1e-10

    def test_invalid_tensor_rejected(self):
        basis = enumerate_generators(1)
        bad = TristochasticTensor(np.ones((2, 2, 2), dtype=np.uint8))
        spec = ChannelSpec(1, bad, np.zeros((2, 3)))
        with pytest.raises(InvalidTensor):
            build_channel_unitary(spec, basis)
        # and a non-Latin-square tensor breaks unitarity when forced through
        v = assemble_unitary(bad, np.stack([np.eye(2)] * 2).astype(complex))
        assert np.max(np.abs(dagger(v) @ v - np.eye(4))) > 1e-10


class TestChannelProduct:
    def test_maximally_mixed_fixed_point(self):
        v, _, _ = random_channel(1, seed=1, freeze=True)
        eye = np.eye(2, dtype=np.complex128) / 2
        got = channel_product(v, eye, eye)
        expected = brute_force_product(v, eye, eye)
        assert np.allclose(got, expected, atol=1e-14)
        assert np.allclose(got, eye, atol=1e-12)

    @pytest.mark.parametrize("n_qubits", [1, 2])
    def test_diagonal_reduction_to_classical(self, n_qubits):
        n = 2**n_qubits
        v, spec, _ = random_channel(n_qubits, seed=2, freeze=True)
        rng = np.random.default_rng(3)
        for _ in range(20):
            p = random_prob_vector(rng, n)
            q = random_prob_vector(rng, n)
            out = channel_product(v, np.diag(p).astype(complex), np.diag(q).astype(complex))
            expected = classical_tristochastic_product(
                spec.tensor.entries.astype(float), p, q
            )
            assert np.allclose(np.diag(out).real, expected, atol=1e-12)
            off = out - np.diag(np.diag(out))
            assert np.max(np.abs(off)) <= 1e-14

    def test_matches_brute_force_random(self):
        v, _, _ = random_channel(1, seed=4)
        rng = np.random.default_rng(6)
        for _ in range(10):
            rho = random_density(rng, 2)
            sigma = random_density(rng, 2)
            assert np.allclose(
                channel_product(v, rho, sigma),
                brute_force_product(v, rho, sigma),
                atol=1e-13,
            )

    @pytest.mark.parametrize("n_qubits", [1, 2])
    def test_cptp_sweep(self, n_qubits):
        n = 2**n_qubits
        rng = np.random.default_rng(7)
        draws = 500 if n_qubits == 1 else 100
        for i in range(draws):
            v, _, _ = random_channel(n_qubits, seed=1000 + i)
            rho = random_density(rng, n)
            sigma = random_density(rng, n)
            out = channel_product(v, rho, sigma)
            assert abs(np.trace(out) - 1.0) <= 1e-12
            assert np.max(np.abs(out - dagger(out))) <= 1e-12
            assert np.linalg.eigvalsh((out + dagger(out)) / 2).min() >= -1e-9


class TestFold:
    def test_singleton(self):
        v, _, _ = random_channel(1, seed=8)
        rho = random_density(np.random.default_rng(0), 2)
        assert np.array_equal(fold_sequence(v, [rho]), rho)

    def test_pair_is_definition(self):
        v, _, _ = random_channel(1, seed=9)
        rng = np.random.default_rng(1)
        rho, sigma = random_density(rng, 2), random_density(rng, 2)
        assert np.array_equal(
            fold_sequence(v, [rho, sigma]), channel_product(v, rho, sigma)
        )

    def test_empty_raises(self):
        v, _, _ = random_channel(1, seed=10)
        with pytest.raises(EmptySequence):
            fold_sequence(v, [])

    def test_order_sensitivity_exists(self):
        v, _, _ = random_channel(1, seed=11)
        rng = np.random.default_rng(2)
        best = 0.0
        for _ in range(50):
            rho, sigma = random_density(rng, 2), random_density(rng, 2)
            diff = channel_product(v, rho, sigma) - channel_product(v, sigma, rho)
            best = max(best, float(np.linalg.norm(diff)))
        assert best > 1e-6


class TestDefects:
    def test_identity_blocks_brute_force_value(self):
        v, _, _ = random_channel(1, seed=0, freeze=True)
        rng = np.random.default_rng(12)
        total = 0.0
        for _ in range(16):
            rho = random_density(rng, 2)
            sigma = random_density(rng, 2)
            diff = brute_force_product(v, rho, sigma) - brute_force_product(v, sigma, rho)
            total += np.linalg.norm(diff)
        expected = total / 16
        got = commutativity_defect(v, samples=16, seed=12)
        assert np.isclose(got, expected, atol=1e-12)
        assert got > 0.0  # identity blocks do not make the map symmetric

    def test_identity_blocks_channel_is_associative(self):
        # with all blocks identity the output depends on the first argument
        # only through its diagonal, which makes the fold reparenthesizable
        v, _, _ = random_channel(1, seed=0, freeze=True)
        defect = associativity_defect(v, samples=32, seed=13)
        assert defect <= 1e-12
        # implication: fold result independent of parenthesization
        rng = np.random.default_rng(14)
        rho, sigma, tau = (random_density(rng, 2) for _ in range(3))
        left = channel_product(v, channel_product(v, rho, sigma), tau)
        right = channel_product(v, rho, channel_product(v, sigma, tau))
        assert np.allclose(left, right, atol=1e-12)

    def test_generic_channel_not_associative(self):
        v, _, _ = random_channel(1, seed=20)
        assert associativity_defect(v, samples=32, seed=15) > 1e-6

    def test_swapped_wrapper_symmetry(self):
        v, _, _ = random_channel(1, seed=16)
        a = commutativity_defect(v, samples=25, seed=3)

        # a channel that applies the swapped arguments has the same defect
        def swapped_defect(v, samples, seed):
            n = 2
            rng = np.random.default_rng(seed)
            total = 0.0
            for _ in range(samples):
                rho = random_density(rng, n)
                sigma = random_density(rng, n)
                diff = channel_product(v, sigma, rho) - channel_product(v, rho, sigma)
                total += np.linalg.norm(diff)
            return total / samples

        assert np.isclose(a, swapped_defect(v, 25, 3), atol=1e-15)

    def test_seed_determinism(self):
        v, _, _ = random_channel(1, seed=17)
        assert commutativity_defect(v, 10, 5) == commutativity_defect(v, 10, 5)
        assert associativity_defect(v, 10, 5) == associativity_defect(v, 10, 5)
        assert commutativity_defect(v, 10, 5) != commutativity_defect(v, 10, 6)

    def test_three_mixed_states_direct_value(self):
        v, _, _ = random_channel(1, seed=0, freeze=True)
        eye = np.eye(2, dtype=np.complex128) / 2
        left = channel_product(v, channel_product(v, eye, eye), eye)
        right = channel_product(v, eye, channel_product(v, eye, eye))
        assert np.allclose(left, right, atol=1e-14)
        assert np.allclose(left, eye, atol=1e-12)
