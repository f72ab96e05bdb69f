"""Minimal reverse-mode automatic differentiation over dense numpy arrays.

The engine provides exactly the operations the view-prediction networks
need: elementwise arithmetic, matrix products, valid-padding convolution
and transposed convolution, 2x2 max pooling, the usual activations, and a
summed squared-distance loss. Graphs are built implicitly through parent
links; ``backward`` walks the graph once in reverse topological order.

Training code uses float32 tensors; gradient checks build float64 tensors
and every operation preserves the dtype of its inputs.
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Operand shapes violate an operation's contract."""


class GraphError(RuntimeError):
    """Backward invoked on an invalid target (e.g. a non-scalar)."""


def _as_array(data, dtype):
    if dtype is not None:
        return np.asarray(data, dtype=dtype)
    arr = np.asarray(data)
    if arr.dtype in (np.float32, np.float64):
        return arr
    return arr.astype(np.float32)


class Tensor:
    """A dense array plus an optional position in an autodiff graph.

    Leaves are created directly; interior nodes are created by the ops in
    this module and carry a backward rule. ``grad`` is populated only on
    leaves with ``requires_grad`` and accumulates across backward calls
    until reset.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, dtype=None):
        self.data = _as_array(data, dtype)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def detach(self) -> "Tensor":
        """A new leaf sharing this tensor's data, cut out of the graph."""
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self):
        self.grad = None

    def backward(self):
        backward(self)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # Scalar-aware arithmetic; second operands may be Tensors or numbers.
    def __add__(self, other):
        return add(self, _lift(other, self.dtype))

    def __radd__(self, other):
        return add(_lift(other, self.dtype), self)

    def __sub__(self, other):
        return sub(self, _lift(other, self.dtype))

    def __rsub__(self, other):
        return sub(_lift(other, self.dtype), self)

    def __mul__(self, other):
        return mul(self, _lift(other, self.dtype))

    def __rmul__(self, other):
        return mul(_lift(other, self.dtype), self)

    def __neg__(self):
        return neg(self)


def _lift(value, dtype) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=dtype))


def _node(data, parents, backward_fn) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward_fn
    return out


def backward(loss: Tensor):
    """Reverse-topological gradient accumulation from a scalar loss.

    Leaf gradients add onto any existing ``grad``; interior gradients live
    only for the duration of the call, so repeated backward passes over
    the same graph accumulate leaf gradients linearly.
    """
    if loss.data.shape != ():
        raise GraphError(f"backward target must be scalar, got shape {loss.data.shape}")
    if not loss.requires_grad:
        return

    topo = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))

    flowing = {id(loss): np.ones((), dtype=loss.dtype)}
    for node in reversed(topo):
        g = flowing.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            node.grad = np.array(g) if node.grad is None else node.grad + g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            acc = flowing.get(id(parent))
            flowing[id(parent)] = pg if acc is None else acc + pg


def zero_grads(tensors):
    for t in tensors:
        t.grad = None


# ---------------------------------------------------------------------------
# elementwise arithmetic


def _require_same_shape(a: Tensor, b: Tensor, op: str):
    if a.data.shape != b.data.shape and a.data.shape != () and b.data.shape != ():
        raise ShapeError(f"{op}: shapes {a.data.shape} and {b.data.shape} differ")


def _reduce_to(grad, shape):
    # Collapse a full-shape gradient onto a scalar operand.
    if grad.shape == shape:
        return grad
    return grad.sum()


def add(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "add")

    def back(g):
        return _reduce_to(g, a.data.shape), _reduce_to(g, b.data.shape)

    return _node(a.data + b.data, (a, b), back)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "sub")

    def back(g):
        return _reduce_to(g, a.data.shape), _reduce_to(-g, b.data.shape)

    return _node(a.data - b.data, (a, b), back)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "mul")

    def back(g):
        return _reduce_to(g * b.data, a.data.shape), _reduce_to(g * a.data, b.data.shape)

    return _node(a.data * b.data, (a, b), back)


def neg(a: Tensor) -> Tensor:
    def back(g):
        return (-g,)

    return _node(-a.data, (a,), back)


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)

    def back(g):
        return (g.reshape(a.data.shape),)

    return _node(a.data.reshape(shape), (a,), back)


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product; supports (m,k)@(k,n) and the matvec (m,k)@(k,)."""
    if a.data.ndim != 2:
        raise ShapeError(f"matmul: left operand must be 2-d, got {a.data.shape}")
    if b.data.ndim not in (1, 2):
        raise ShapeError(f"matmul: right operand must be 1-d or 2-d, got {b.data.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul: inner dimensions {a.data.shape} x {b.data.shape} disagree")

    if b.data.ndim == 1:

        def back(g):
            return np.outer(g, b.data), a.data.T @ g

    else:

        def back(g):
            return g @ b.data.T, a.data.T @ g

    return _node(a.data @ b.data, (a, b), back)


# ---------------------------------------------------------------------------
# convolution family (valid padding throughout; output sizes are derived)


def _conv_out_size(n: int, k: int, stride: int) -> int:
    return (n - k) // stride + 1


def conv2d(x: Tensor, w: Tensor, stride: int = 1) -> Tensor:
    """Cross-correlation of (C_in,H,W) with kernels (C_out,C_in,k,k)."""
    if x.data.ndim != 3 or w.data.ndim != 4:
        raise ShapeError(f"conv2d: need (C,H,W) input and (O,C,k,k) kernels, got {x.data.shape}, {w.data.shape}")
    c_in, h, wd = x.data.shape
    c_out, c_in_w, kh, kw = w.data.shape
    if c_in_w != c_in:
        raise ShapeError(f"conv2d: input channels {c_in} != kernel channels {c_in_w}")
    if kh != kw:
        raise ShapeError("conv2d: kernels must be square")
    if h < kh or wd < kw:
        raise ShapeError(f"conv2d: kernel {kh} larger than input {h}x{wd}")
    h2 = _conv_out_size(h, kh, stride)
    w2 = _conv_out_size(wd, kw, stride)

    xd, wdta = x.data, w.data
    out = np.zeros((c_out, h2, w2), dtype=xd.dtype)
    for u in range(kh):
        for v in range(kw):
            win = xd[:, u : u + stride * h2 : stride, v : v + stride * w2 : stride]
            out += np.einsum("ihw,oi->ohw", win, wdta[:, :, u, v])

    def back(g):
        dx = np.zeros_like(xd)
        dw = np.zeros_like(wdta)
        for u in range(kh):
            for v in range(kw):
                win = xd[:, u : u + stride * h2 : stride, v : v + stride * w2 : stride]
                dw[:, :, u, v] = np.einsum("ohw,ihw->oi", g, win)
                dx[:, u : u + stride * h2 : stride, v : v + stride * w2 : stride] += np.einsum(
                    "ohw,oi->ihw", g, wdta[:, :, u, v]
                )
        return dx, dw

    return _node(out, (x, w), back)


def deconv2d(x: Tensor, w: Tensor, stride: int) -> Tensor:
    """Transposed convolution: (C_in,H,W) with kernels (C_in,C_out,k,k).

    Each input scalar scatters a kernel-shaped contribution at stride
    offsets; overlapping contributions sum. Output side is (H-1)*stride+k.
    """
    if x.data.ndim != 3 or w.data.ndim != 4:
        raise ShapeError(f"deconv2d: need (C,H,W) input and (C,O,k,k) kernels, got {x.data.shape}, {w.data.shape}")
    c_in, h, wd = x.data.shape
    c_in_w, c_out, kh, kw = w.data.shape
    if c_in_w != c_in:
        raise ShapeError(f"deconv2d: input channels {c_in} != kernel channels {c_in_w}")
    if kh != kw:
        raise ShapeError("deconv2d: kernels must be square")
    h2 = (h - 1) * stride + kh
    w2 = (wd - 1) * stride + kw

    xd, wdta = x.data, w.data
    out = np.zeros((c_out, h2, w2), dtype=xd.dtype)
    for u in range(kh):
        for v in range(kw):
            out[:, u : u + (h - 1) * stride + 1 : stride, v : v + (wd - 1) * stride + 1 : stride] += np.einsum(
                "ihw,io->ohw", xd, wdta[:, :, u, v]
            )

    def back(g):
        dx = np.zeros_like(xd)
        dw = np.zeros_like(wdta)
        for u in range(kh):
            for v in range(kw):
                gwin = g[:, u : u + (h - 1) * stride + 1 : stride, v : v + (wd - 1) * stride + 1 : stride]
                dx += np.einsum("ohw,io->ihw", gwin, wdta[:, :, u, v])
                dw[:, :, u, v] = np.einsum("ihw,ohw->io", xd, gwin)
        return dx, dw

    return _node(out, (x, w), back)


def maxpool2d(x: Tensor, size: int = 2) -> Tensor:
    """Valid max pooling with stride == window size; ties pick the first cell."""
    if x.data.ndim != 3:
        raise ShapeError(f"maxpool2d: need (C,H,W) input, got {x.data.shape}")
    c, h, w = x.data.shape
    if h < size or w < size:
        raise ShapeError(f"maxpool2d: window {size} larger than input {h}x{w}")
    h2 = (h - size) // size + 1
    w2 = (w - size) // size + 1

    win = x.data[:, : h2 * size, : w2 * size]
    win = win.reshape(c, h2, size, w2, size).transpose(0, 1, 3, 2, 4).reshape(c, h2, w2, size * size)
    idx = win.argmax(axis=-1)
    out = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]

    def back(g):
        dx = np.zeros_like(x.data)
        ci = np.arange(c)[:, None, None]
        ri = np.arange(h2)[None, :, None] * size + idx // size
        co = np.arange(w2)[None, None, :] * size + idx % size
        dx[ci, ri, co] = g
        return (dx,)

    return _node(out, (x,), back)


# ---------------------------------------------------------------------------
# activations


def relu(x: Tensor) -> Tensor:
    # Subgradient at 0 is 0.
    mask = x.data > 0

    def back(g):
        return (g * mask,)

    return _node(np.where(mask, x.data, 0), (x,), back)


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)

    def back(g):
        return (g * (1 - y * y),)

    return _node(y, (x,), back)


def sigmoid(x: Tensor) -> Tensor:
    y = 1.0 / (1.0 + np.exp(-x.data))

    def back(g):
        return (g * y * (1 - y),)

    return _node(y, (x,), back)


_ACTIVATIONS = {"relu": relu, "tanh": tanh, "sigmoid": sigmoid}


def activation(x: Tensor, kind: str) -> Tensor:
    try:
        fn = _ACTIVATIONS[kind]
    except KeyError:
        raise ValueError(f"unknown activation {kind!r}") from None
    return fn(x)


# ---------------------------------------------------------------------------
# losses


def sq_l2(a: Tensor, b: Tensor) -> Tensor:
    """Sum of squared elementwise differences, as a scalar tensor."""
    if a.data.shape != b.data.shape:
        raise ShapeError(f"sq_l2: shapes {a.data.shape} and {b.data.shape} differ")
    diff = a.data - b.data

    def back(g):
        d = 2.0 * g * diff
        return d, -d

    return _node((diff * diff).sum(), (a, b), back)
