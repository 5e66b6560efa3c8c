"""Reverse-mode differentiation on a per-evaluation tape.

Gradients are taken only with respect to real parameter vectors; complex
values may appear anywhere in between. The adjoint stored for a complex
node z = x + iy is dL/dx + i*dL/dy, and contributions flowing into a node
with a real-valued array keep only their real part. With that convention
every local rule below is an ordinary vector-Jacobian product and no
Wirtinger bookkeeping leaks into calling code.

A Tape owns the nodes of one forward evaluation; creation order is a valid
topological order, so the backward sweep is a single reverse pass. Ops
accept plain ndarrays or scalars in place of nodes; non-node operands are
treated as constants and are not recorded.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DomainError, NonFiniteLoss, ZeroNorm
from .linalg import ZERO_EPS, dagger, matexp_antihermitian


class Tape:
    """Recording of one forward evaluation."""

    __slots__ = ("nodes",)

    def __init__(self) -> None:
        self.nodes: list[Node] = []

    def leaf(self, value: np.ndarray) -> "Node":
        return Node(self, np.array(value, dtype=np.float64, copy=True))


class Node:
    """One recorded value; `vjps[k](g)` maps the output adjoint g to the
    adjoint contribution for `parents[k]`."""

    __slots__ = ("tape", "value", "parents", "vjps", "grad")

    def __init__(self, tape, value, parents=(), vjps=()):
        self.tape = tape
        self.value = value
        self.parents = parents
        self.vjps = vjps
        self.grad = None
        tape.nodes.append(self)

    # Arithmetic sugar used throughout the model code.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self, tape=self.tape)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)

    def __truediv__(self, other):
        return div(self, other, tape=self.tape)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    @property
    def shape(self):
        return np.shape(self.value)


def value_of(x) -> np.ndarray:
    return x.value if isinstance(x, Node) else np.asarray(x)


def _tape_of(*args) -> Tape:
    for a in args:
        if isinstance(a, Node):
            return a.tape
    raise TypeError("at least one operand must be a Node")


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum g down to `shape` (inverse of numpy broadcasting)."""
    g = np.asarray(g)
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _record(tape, value, pairs) -> Node:
    """pairs: iterable of (operand, vjp); only Node operands are recorded."""
    parents, vjps = [], []
    for op, vjp in pairs:
        if isinstance(op, Node):
            parents.append(op)
            vjps.append(vjp)
    return Node(tape, value, tuple(parents), tuple(vjps))


# ---------------------------------------------------------------------------
# elementwise arithmetic
# ---------------------------------------------------------------------------

def add(a, b):
    tape = _tape_of(a, b)
    av, bv = value_of(a), value_of(b)
    out = av + bv
    return _record(tape, out, [
        (a, lambda g: _unbroadcast(g, np.shape(av))),
        (b, lambda g: _unbroadcast(g, np.shape(bv))),
    ])


def sub(a, b, tape=None):
    tape = tape or _tape_of(a, b)
    av, bv = value_of(a), value_of(b)
    return _record(tape, av - bv, [
        (a, lambda g: _unbroadcast(g, np.shape(av))),
        (b, lambda g: _unbroadcast(-g, np.shape(bv))),
    ])


def mul(a, b):
    tape = _tape_of(a, b)
    av, bv = value_of(a), value_of(b)
    return _record(tape, av * bv, [
        (a, lambda g: _unbroadcast(g * np.conj(bv), np.shape(av))),
        (b, lambda g: _unbroadcast(g * np.conj(av), np.shape(bv))),
    ])


def div(a, b, tape=None):
    tape = tape or _tape_of(a, b)
    av, bv = value_of(a), value_of(b)
    cb = np.conj(bv)
    return _record(tape, av / bv, [
        (a, lambda g: _unbroadcast(g / cb, np.shape(av))),
        (b, lambda g: _unbroadcast(-g * np.conj(av) / (cb * cb), np.shape(bv))),
    ])


def neg(a):
    return _record(a.tape, -a.value, [(a, lambda g: -g)])


def pow_const(a, p: float):
    """a ** p for real positive a and a fixed real exponent."""
    av = value_of(a)
    out = av**p
    return _record(a.tape, out, [(a, lambda g: g * p * av ** (p - 1.0))])


def log(a):
    av = value_of(a)
    return _record(a.tape, np.log(av), [(a, lambda g: g / av)])


def exp(a):
    out = np.exp(value_of(a))
    return _record(a.tape, out, [(a, lambda g: g * out)])


def tanh(a):
    out = np.tanh(value_of(a))
    return _record(a.tape, out, [(a, lambda g: g * (1.0 - out * out))])


def sigmoid(a):
    av = value_of(a)
    out = 1.0 / (1.0 + np.exp(-av))
    return _record(a.tape, out, [(a, lambda g: g * out * (1.0 - out))])


def clip(a, lo: float, hi: float):
    """Clamp with pass-through gradient strictly inside [lo, hi]."""
    av = value_of(a)
    out = np.clip(av, lo, hi)
    mask = (av >= lo) & (av <= hi)
    return _record(a.tape, out, [(a, lambda g: g * mask)])


def sum_axis(a, axis=None):
    av = value_of(a)
    out = np.sum(av, axis=axis)

    def back(g):
        if axis is None:
            return np.broadcast_to(g, np.shape(av)).copy()
        return np.broadcast_to(np.expand_dims(g, axis), np.shape(av)).copy()

    return _record(a.tape, out, [(a, back)])


# ---------------------------------------------------------------------------
# structural ops
# ---------------------------------------------------------------------------

def getitem(a, idx):
    av = value_of(a)
    out = av[idx]

    def back(g):
        buf = np.zeros_like(av, dtype=np.result_type(av, g))
        buf[idx] = g
        return buf

    return _record(a.tape, out, [(a, back)])


def reshape(a, shape):
    av = value_of(a)
    return _record(a.tape, av.reshape(shape), [(a, lambda g: g.reshape(np.shape(av)))])


def concat(parts, axis=0, tape=None):
    tape = tape or _tape_of(*parts)
    vals = [value_of(p) for p in parts]
    out = np.concatenate(vals, axis=axis)
    pairs = []
    offset = 0
    for p, v in zip(parts, vals):
        n = v.shape[axis]
        sl = [slice(None)] * out.ndim
        sl[axis] = slice(offset, offset + n)
        sl = tuple(sl)
        pairs.append((p, lambda g, sl=sl: g[sl]))
        offset += n
    return _record(tape, out, pairs)


def stack_last(parts, tape=None):
    tape = tape or _tape_of(*parts)
    vals = [value_of(p) for p in parts]
    out = np.stack(vals, axis=-1)
    pairs = [(p, lambda g, k=k: g[..., k]) for k, p in enumerate(parts)]
    return _record(tape, out, pairs)


# ---------------------------------------------------------------------------
# complex structure
# ---------------------------------------------------------------------------

def real(a):
    return _record(a.tape, np.real(value_of(a)), [(a, lambda g: g)])


def imag(a):
    return _record(a.tape, np.imag(value_of(a)), [(a, lambda g: 1j * g)])


def conj(a):
    return _record(a.tape, np.conj(value_of(a)), [(a, lambda g: np.conj(g))])


def adjoint(a):
    av = value_of(a)
    return _record(a.tape, dagger(av), [(a, lambda g: dagger(g))])


def diag_embed(a):
    """Vector (..., N) to diagonal matrix (..., N, N)."""
    av = value_of(a)
    n = av.shape[-1]
    out = np.zeros(av.shape + (n,), dtype=np.result_type(av, np.complex128))
    idx = np.arange(n)
    out[..., idx, idx] = av
    return _record(a.tape, out, [(a, lambda g: g[..., idx, idx])])


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------

def matmul(a, b):
    """Matrix product on the last two axes; batch axes must match exactly."""
    tape = _tape_of(a, b)
    av, bv = value_of(a), value_of(b)
    out = av @ bv
    return _record(tape, out, [
        (a, lambda g: g @ dagger(bv)),
        (b, lambda g: dagger(av) @ g),
    ])


def affine(x, w, b=None):
    """y[..., o] = sum_i w[o, i] x[..., i] (+ b[o]); works batched over x."""
    tape = _tape_of(x, w) if b is None else _tape_of(x, w, b)
    xv, wv = value_of(x), value_of(w)
    out = np.einsum("oi,...i->...o", wv, xv)
    if b is not None:
        out = out + value_of(b)
    o, i = wv.shape

    def back_w(g):
        gf = np.reshape(g, (-1, o))
        xf = np.reshape(xv, (-1, i))
        return gf.T @ np.conj(xf)

    pairs = [
        (x, lambda g: np.einsum("oi,...o->...i", np.conj(wv), g)),
        (w, back_w),
    ]
    if b is not None:
        pairs.append((b, lambda g: np.reshape(g, (-1, o)).sum(axis=0)))
    return _record(tape, out, pairs)


def norm2(a):
    """Euclidean norm of the whole array, as a real scalar."""
    av = value_of(a)
    n = np.linalg.norm(av)
    return _record(a.tape, np.float64(n), [(a, lambda g: g * (av / n))])


def kron(a, b):
    """Kronecker product of two 2-D operands."""
    tape = _tape_of(a, b)
    av, bv = value_of(a), value_of(b)
    out = np.kron(av, bv)
    p, q = av.shape
    r, s = bv.shape

    def back_a(g):
        g4 = g.reshape(p, r, q, s)
        return np.einsum("ikjl,kl->ij", g4, np.conj(bv))

    def back_b(g):
        g4 = g.reshape(p, r, q, s)
        return np.einsum("ikjl,ij->kl", g4, np.conj(av))

    return _record(tape, out, [(a, back_a), (b, back_b)])


def ptrace2(m, dim_a: int, dim_b: int):
    """Partial trace over the second factor of a (dim_a*dim_b)-square matrix."""
    mv = value_of(m)
    if mv.shape[-1] != dim_a * dim_b:
        raise DimensionMismatch(f"expected {dim_a * dim_b}-square, got {mv.shape}")
    m4 = mv.reshape(mv.shape[:-2] + (dim_a, dim_b, dim_a, dim_b))
    out = np.einsum("...aibi->...ab", m4)
    eye = np.eye(dim_b)

    def back(g):
        g4 = np.einsum("...ab,ij->...aibj", g, eye)
        return g4.reshape(mv.shape)

    return _record(m.tape, out, [(m, back)])


def pauli_combination(theta, gens: np.ndarray):
    """A = sum_m theta[..., m] * gens[m]; gens is a constant (d, N, N) stack."""
    tv = value_of(theta)
    out = np.tensordot(tv, gens, axes=([-1], [0]))
    cg = np.conj(gens)

    def back(g):
        return np.real(np.einsum("...ij,mij->...m", g, cg))

    return _record(theta.tape, out, [(theta, back)])


def _expm_general(m: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring Taylor exponential for general (batched) matrices.

    Used only in the matexp backward rule, where the augmented block matrix
    is not anti-Hermitian. Truncation after 24 terms at scaled norm <= 0.5
    leaves an error far below the gradient tolerances in use.
    """
    m = np.asarray(m, dtype=np.complex128)
    d = m.shape[-1]
    norm = np.max(np.abs(m).sum(axis=-1)) if m.size else 0.0
    s = max(0, int(np.ceil(np.log2(max(norm, 1e-300)))) + 1) if norm > 0.5 else 0
    x = m / (2.0**s)
    eye = np.broadcast_to(np.eye(d, dtype=np.complex128), m.shape).copy()
    out = eye.copy()
    term = eye
    for k in range(1, 25):
        term = (term @ x) / k
        out += term
    for _ in range(s):
        out = out @ out
    return out


def matexp_ah(a):
    """exp(a) for anti-Hermitian a (optionally batched).

    Forward uses the Hermitian eigendecomposition of i*a. Backward applies
    the adjoint Frechet derivative via the augmented block
    exp([[a^dag, g], [0, a^dag]]).
    """
    av = value_of(a)
    out = matexp_antihermitian(av)
    n = av.shape[-1]
    ah = dagger(av)

    def back(g):
        blk = np.zeros(av.shape[:-2] + (2 * n, 2 * n), dtype=np.complex128)
        blk[..., :n, :n] = ah
        blk[..., n:, n:] = ah
        blk[..., :n, n:] = g
        return _expm_general(blk)[..., :n, n:]

    return _record(a.tape, out, [(a, back)])


def assemble_channel_v(b_stack, t: np.ndarray):
    """Block unitary with V[k*N + i, l*N + j] = t[k, l, j] * B^k[i, l].

    `b_stack` holds the N unitaries as a (N, N, N) array indexed [k, i, l];
    `t` is the constant 0/1 tristochastic tensor.
    """
    bv = value_of(b_stack)
    n = t.shape[0]
    v4 = np.einsum("klj,kil->kilj", t, bv)
    out = v4.reshape(n * n, n * n)

    def back(g):
        g4 = g.reshape(n, n, n, n)
        return np.einsum("klj,kilj->kil", t, g4)

    return _record(b_stack.tape, out, [(b_stack, back)])


def normalize(a):
    """a / ||a||_2 with the ZeroNorm guard of the plain routine."""
    n = norm2(a)
    if n.value <= ZERO_EPS:
        raise ZeroNorm(f"vector norm {n.value:.3e} <= {ZERO_EPS:.1e}")
    return div(a, n)


# ---------------------------------------------------------------------------
# parameter vectors and gradients
# ---------------------------------------------------------------------------

@dataclass
class ParamVector:
    """Flat real parameter vector with named, disjoint covering slices."""

    values: np.ndarray
    slices: dict[str, slice] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise DimensionMismatch("parameter vector must be 1-D")
        covered = []
        for name, sl in self.slices.items():
            if sl.start is None or sl.stop is None or sl.step not in (None, 1):
                raise DimensionMismatch(f"slice {name!r} must be contiguous")
            covered.append((sl.start, sl.stop))
        covered.sort()
        pos = 0
        for start, stop in covered:
            if start != pos:
                raise DimensionMismatch("slices must be disjoint and cover the vector")
            pos = stop
        if self.slices and pos != self.values.size:
            raise DimensionMismatch("slices must cover the full vector")

    @classmethod
    def from_parts(cls, parts: list[tuple[str, np.ndarray]]) -> "ParamVector":
        slices = {}
        chunks = []
        pos = 0
        for name, arr in parts:
            arr = np.asarray(arr, dtype=np.float64).ravel()
            slices[name] = slice(pos, pos + arr.size)
            chunks.append(arr)
            pos += arr.size
        values = np.concatenate(chunks) if chunks else np.zeros(0)
        return cls(values=values, slices=slices)

    def part(self, name: str) -> np.ndarray:
        return self.values[self.slices[name]]

    @property
    def size(self) -> int:
        return int(self.values.size)

    def copy(self) -> "ParamVector":
        return ParamVector(values=self.values.copy(), slices=dict(self.slices))


def backward(out: Node, seed: float = 1.0) -> None:
    """Accumulate adjoints over the tape, starting from scalar node `out`."""
    for n in out.tape.nodes:
        n.grad = None
    out.grad = np.asarray(seed, dtype=np.float64)
    for n in reversed(out.tape.nodes):
        g = n.grad
        if g is None:
            continue
        for p, vjp in zip(n.parents, n.vjps):
            c = vjp(g)
            if np.iscomplexobj(c) and not np.iscomplexobj(p.value):
                c = np.ascontiguousarray(c.real)
            p.grad = c if p.grad is None else p.grad + c


def grad(loss_fn, params: ParamVector) -> np.ndarray:
    """Gradient of a scalar loss with respect to the flat parameter vector.

    `loss_fn` receives the tape node of the parameter vector and must return
    a scalar node.
    """
    tape = Tape()
    root = tape.leaf(params.values)
    out = loss_fn(root)
    val = np.asarray(out.value)
    if val.size != 1 or np.iscomplexobj(val):
        raise DimensionMismatch("loss must be a real scalar")
    if not np.isfinite(val).all():
        raise NonFiniteLoss(f"forward pass produced {val}")
    backward(out)
    if root.grad is None:
        return np.zeros_like(params.values)
    return np.asarray(root.grad, dtype=np.float64).reshape(params.values.shape)


def loss_value(loss_fn, params: ParamVector) -> float:
    """Forward-only evaluation of a tape loss closure."""
    tape = Tape()
    out = loss_fn(tape.leaf(params.values))
    return float(np.asarray(out.value))


@dataclass
class GradCheckReport:
    """Per-coordinate comparison of analytic and central-difference gradients."""

    analytic: np.ndarray
    numeric: np.ndarray
    rel_errors: np.ndarray
    rtol: float
    step: float

    @property
    def max_rel_error(self) -> float:
        return float(self.rel_errors.max()) if self.rel_errors.size else 0.0

    @property
    def failing(self) -> np.ndarray:
        return np.nonzero(self.rel_errors > self.rtol)[0]

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.rtol


GRAD_CHECK_ATOL = 1e-8  # absolute floor: near-zero coordinates pass on it


def grad_check(
    loss_fn, params: ParamVector, step: float = 1e-5, rtol: float = 1e-4
) -> GradCheckReport:
    """Compare `grad` against central finite differences, coordinate by
    coordinate. A coordinate's relative error is zero when the absolute
    difference sits under the 1e-8 floor (finite differences cannot resolve
    near-zero gradients more finely than that)."""
    if step <= 0:
        raise DomainError("finite-difference step must be positive")
    analytic = grad(loss_fn, params)
    numeric = np.zeros_like(analytic)
    base = params.values
    for i in range(base.size):
        shifted = base.copy()
        shifted[i] = base[i] + step
        up = loss_value(loss_fn, ParamVector(shifted, dict(params.slices)))
        shifted[i] = base[i] - step
        down = loss_value(loss_fn, ParamVector(shifted, dict(params.slices)))
        numeric[i] = (up - down) / (2.0 * step)
    diff = np.abs(analytic - numeric)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-300)
    rel = np.where(diff <= GRAD_CHECK_ATOL, 0.0, diff / denom)
    return GradCheckReport(
        analytic=analytic, numeric=numeric, rel_errors=rel, rtol=rtol, step=step
    )
