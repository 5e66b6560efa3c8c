import numpy as np
import pytest

from qdss import autodiff as ad
from qdss.errors import DimensionMismatch, NonFiniteLoss
from qdss.linalg import dagger


def fd_gradient(f, x, step=1e-6):
    """Central differences of a scalar function of a flat real vector."""
    g = np.zeros_like(x)
    for i in range(x.size):
        up = x.copy()
        up[i] += step
        down = x.copy()
        down[i] -= step
        g[i] = (f(up) - f(down)) / (2 * step)
    return g


def check_primitive(build, n_in, points=5, rtol=1e-5, seed=0):
    """Compare tape gradients of `build` (flat vector node -> scalar node)
    against central differences at `points` random points."""
    rng = np.random.default_rng(seed)

    def f(x):
        tape = ad.Tape()
        return float(ad.value_of(build(tape.leaf(x))))

    for _ in range(points):
        x = rng.uniform(0.2, 0.9, size=n_in)  # safe for log/pow domains
        params = ad.ParamVector(x)
        analytic = ad.grad(build, params)
        numeric = fd_gradient(f, x)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
        assert np.max(np.abs(analytic - numeric) / denom) <= rtol


def complexify(p, n):
    """Flat 2n real node -> length-n complex node."""
    re = p[0:n]
    im = p[n : 2 * n]
    return re + ad.mul(im, 1j * np.ones(n))


def real_reduce(z, seed=0):
    """Fixed random real functional of a complex array node."""
    rng = np.random.default_rng(seed)
    c1 = rng.standard_normal(np.shape(ad.value_of(z)))
    c2 = rng.standard_normal(np.shape(ad.value_of(z)))
    return ad.sum_axis(ad.real(z) * c1) + ad.sum_axis(ad.imag(z) * c2)


class TestBasics:
    def test_quadratic_gradient(self):
        params = ad.ParamVector(np.array([1.0, 2.0]))
        g = ad.grad(lambda p: ad.sum_axis(p * p), params)
        assert np.allclose(g, [2.0, 4.0])

    def test_gradient_at_minimum_is_zero(self):
        # loss = sum((p - c)^2) has its analytic minimum at p = c
        c = np.array([0.3, -1.2, 4.0])
        params = ad.ParamVector(c.copy())
        g = ad.grad(lambda p: ad.sum_axis((p - c) * (p - c)), params)
        assert np.max(np.abs(g)) <= 1e-8

    def test_nonfinite_loss_raises(self):
        params = ad.ParamVector(np.array([0.0]))
        with np.errstate(divide="ignore"), pytest.raises(NonFiniteLoss):
            ad.grad(lambda p: ad.log(p[0]), params)

    def test_loss_must_be_scalar(self):
        params = ad.ParamVector(np.array([1.0, 2.0]))
        with pytest.raises(DimensionMismatch):
            ad.grad(lambda p: p * p, params)

    def test_same_node_used_twice(self):
        params = ad.ParamVector(np.array([3.0]))
        g = ad.grad(lambda p: p[0] * p[0], params)
        assert np.allclose(g, [6.0])


class TestPrimitiveGradients:
    """Every adjoint rule against central differences at 5 random points."""

    def test_add_sub_mul_div(self):
        check_primitive(
            lambda p: ad.sum_axis((p[0:3] + p[3:6]) * p[0:3] - p[3:6] / p[0:3]), 6
        )

    def test_elementwise_nonlinear(self):
        check_primitive(
            lambda p: ad.sum_axis(
                ad.tanh(p[0:3]) * ad.sigmoid(p[3:6]) + ad.exp(p[0:3]) * ad.log(p[3:6])
            ),
            6,
        )

    def test_pow_const(self):
        check_primitive(lambda p: ad.sum_axis(ad.pow_const(p, 1.0 / 3.0)), 4)

    def test_clip_inside_range(self):
        check_primitive(lambda p: ad.sum_axis(ad.clip(p, 0.05, 0.95) * p), 4)

    def test_affine(self):
        def build(p):
            w = ad.reshape(p[0:6], (2, 3))
            b = p[6:8]
            x = ad.reshape(p[8:14], (2, 3))
            return ad.sum_axis(ad.tanh(ad.affine(x, w, b)))

        check_primitive(build, 14)

    def test_matmul_complex(self):
        def build(p):
            a = ad.reshape(complexify(p[0:8], 4), (2, 2))
            b = ad.reshape(complexify(p[8:16], 4), (2, 2))
            return real_reduce(ad.matmul(a, b))

        check_primitive(build, 16)

    def test_kron_complex(self):
        def build(p):
            a = ad.reshape(complexify(p[0:8], 4), (2, 2))
            b = ad.reshape(complexify(p[8:16], 4), (2, 2))
            return real_reduce(ad.kron(a, b))

        check_primitive(build, 16)

    def test_ptrace2(self):
        def build(p):
            m = ad.reshape(complexify(p[0:32], 16), (4, 4))
            return real_reduce(ad.ptrace2(m, 2, 2))

        check_primitive(build, 32)

    def test_adjoint_conj(self):
        def build(p):
            m = ad.reshape(complexify(p[0:8], 4), (2, 2))
            return real_reduce(ad.matmul(m, ad.adjoint(m))) + real_reduce(
                ad.conj(m), seed=1
            )

        check_primitive(build, 8)

    def test_norm_and_normalize(self):
        def build(p):
            v = complexify(p[0:6], 3)
            return real_reduce(ad.normalize(v)) + ad.norm2(v)

        check_primitive(build, 6)

    def test_getitem_concat_stack(self):
        def build(p):
            a = p[0:3]
            b = p[3:5]
            c = ad.concat([a, b], axis=0)
            s = ad.stack_last([c[0], c[4]])
            return ad.sum_axis(s * s) + c[1] * c[2]

        check_primitive(build, 5)

    def test_diag_embed(self):
        def build(p):
            d = ad.diag_embed(p[0:3])
            u = np.linalg.qr(
                np.random.default_rng(5).standard_normal((3, 3))
                + 1j * np.random.default_rng(6).standard_normal((3, 3))
            )[0]
            rho = ad.matmul(ad.matmul(u, d), dagger(u))
            return real_reduce(rho)

        check_primitive(build, 3)

    def test_pauli_combination_and_matexp(self):
        from qdss.paulis import enumerate_generators

        basis = enumerate_generators(1)

        def build(p):
            a = ad.pauli_combination(p[0:3], basis.generators)
            return real_reduce(ad.matexp_ah(a))

        check_primitive(build, 3)

    def test_matexp_two_qubits(self):
        from qdss.paulis import enumerate_generators

        basis = enumerate_generators(2)

        def build(p):
            a = ad.pauli_combination(p[0:15], basis.generators)
            return real_reduce(ad.matexp_ah(a))

        check_primitive(build, 15, points=3)

    def test_assemble_channel_v(self):
        from qdss.channel import default_tensor
        from qdss.paulis import enumerate_generators

        basis = enumerate_generators(1)
        t = default_tensor(2).entries.astype(np.float64)

        def build(p):
            angles = ad.reshape(p[0:6], (2, 3))
            blocks = ad.matexp_ah(ad.pauli_combination(angles, basis.generators))
            v = ad.assemble_channel_v(blocks, t)
            return real_reduce(v)

        check_primitive(build, 6)

    def test_sum_axis_batched(self):
        def build(p):
            m = ad.reshape(p, (3, 2))
            return ad.sum_axis(ad.tanh(ad.sum_axis(m, axis=0)))

        check_primitive(build, 6)


class TestMatexpDirectional:
    def test_directional_derivative_matches_fd(self):
        """Directional derivative of exp(A(theta)) via the augmented-block
        backward agrees with a central difference of the forward map."""
        from qdss.paulis import enumerate_generators

        basis = enumerate_generators(1)
        rng = np.random.default_rng(9)
        theta = rng.normal(0.0, 1.0, size=3)
        direction = rng.normal(0.0, 1.0, size=3)
        h = 1e-6

        def u_of(t):
            from qdss.paulis import su_unitary

            return su_unitary(basis, t)

        fd = (u_of(theta + h * direction) - u_of(theta - h * direction)) / (2 * h)

        # assemble the same directional derivative from per-coordinate grads
        # of the real functional <C, U> for a full basis of C matrices
        got = np.zeros((2, 2), dtype=np.complex128)
        for i in range(2):
            for j in range(2):
                for part, mult in ((ad.real, 1.0), (ad.imag, 1j)):

                    def loss(p, i=i, j=j, part=part):
                        u = ad.matexp_ah(
                            ad.pauli_combination(p, basis.generators)
                        )
                        return part(u[i, j])

                    g = ad.grad(loss, ad.ParamVector(theta.copy()))
                    got[i, j] += mult * float(g @ direction)
        assert np.max(np.abs(got - fd)) / max(np.max(np.abs(fd)), 1e-8) <= 1e-4


class TestComplexChain:
    def test_matches_real_imag_split(self):
        """A gradient through complex intermediates equals the gradient of
        the equivalent computation written on split (re, im) arrays."""
        rng = np.random.default_rng(3)
        x = rng.uniform(0.2, 0.9, size=4)

        def complex_loss(p):
            z = p[0:2] + ad.mul(p[2:4], 1j * np.ones(2))
            w = ad.mul(z, ad.conj(z))  # |z|^2, elementwise
            return ad.sum_axis(ad.real(w)) + ad.sum_axis(ad.imag(z) * 0.5)

        def split_loss(p):
            re = p[0:2]
            im = p[2:4]
            w = re * re + im * im
            return ad.sum_axis(w) + ad.sum_axis(im * 0.5)

        g_complex = ad.grad(complex_loss, ad.ParamVector(x.copy()))
        g_split = ad.grad(split_loss, ad.ParamVector(x.copy()))
        assert np.allclose(g_complex, g_split, atol=1e-12)


class TestGradCheck:
    def test_linear_loss_exact(self):
        c = np.array([1.0, -2.0, 3.0])
        report = ad.grad_check(
            lambda p: ad.sum_axis(p * c), ad.ParamVector(np.array([0.4, 0.2, 0.1]))
        )
        assert report.passed
        assert report.max_rel_error <= 1e-9

    def test_channel_loss_passes(self):
        from qdss.sequences import QuantumDeepSequences

        model = QuantumDeepSequences.create(
            1, theta_hidden=3, w_hidden=3, h_hidden=4, seed=0
        )
        rng = np.random.default_rng(4)
        model.params = ad.ParamVector(
            rng.normal(0.0, 0.3, model.params.size), dict(model.params.slices)
        )
        xs = rng.uniform(0.0, 1.0, size=(4, 1))
        report = ad.grad_check(
            lambda p: ad.sum_axis(model.forward(p, xs)), model.params, rtol=1e-4
        )
        assert report.passed, f"max rel error {report.max_rel_error}"

    def test_corrupted_rule_is_caught(self):
        def wrong_square(a):
            av = ad.value_of(a)
            # deliberately wrong adjoint: forgets the factor of 2
            return ad.Node(a.tape, av * av, (a,), (lambda g: g * av,))

        def loss(p):
            return ad.sum_axis(wrong_square(p))

        report = ad.grad_check(loss, ad.ParamVector(np.array([0.7, 0.4])))
        assert not report.passed
        assert set(report.failing.tolist()) == {0, 1}
