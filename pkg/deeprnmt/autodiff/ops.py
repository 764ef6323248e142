'''
Forward operations on `Tensor`s and their backward rules.

Every op computes its result with numpy, records itself through `Tensor.from_op`
and registers a rule in `BACKWARD_RULES` that maps the upstream gradient to one
gradient per parent (or `None` for parents that are not differentiable).
Reductions sum left to right so results never depend on the batch layout.
'''
from collections.abc import Sequence

import numpy as np
from scipy.special import expit

from ..errors import DimensionError
from .tensor import BACKWARD_RULES, Tensor, get_dtype


def backward_rule(op: str):
    def register(fn):
        BACKWARD_RULES[op] = fn
        return fn
    return register


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def sequential_sum(array: np.ndarray, axis: int | None = None, keepdims: bool = False) -> np.ndarray:
    '''
    Sums along `axis` strictly left to right (a prefix scan), unlike `np.sum`
    whose pairwise order depends on the array layout.
    '''
    if axis is None:
        array = array.reshape(-1)
        axis = 0
    axis = axis % array.ndim
    if array.shape[axis] == 0:
        out = np.zeros(array.shape[:axis] + array.shape[axis + 1:], dtype=array.dtype)
    else:
        out = np.take(np.cumsum(array, axis=axis), -1, axis=axis)
    if keepdims:
        out = np.expand_dims(out, axis)
    return out


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    '''
    Reduces a broadcast gradient back to `shape`.
    '''
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = sequential_sum(grad, axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = sequential_sum(grad, axis=axis, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f'Cannot {op} tensors of shapes {a.shape} and {b.shape}') from None


def _normalize_axis(axis: int, ndim: int, op: str) -> int:
    if not -ndim <= axis < ndim:
        raise DimensionError(f'Axis {axis} out of range for {op} of a {ndim}-d tensor')
    return axis % ndim


# Elementwise arithmetic

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, 'add')
    return Tensor.from_op(a.data + b.data, 'add', (a, b))


@backward_rule('add')
def _add_backward(node, grad):
    a, b = node._parents
    return unbroadcast(grad, a.shape), unbroadcast(grad, b.shape)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, 'subtract')
    return Tensor.from_op(a.data - b.data, 'sub', (a, b))


@backward_rule('sub')
def _sub_backward(node, grad):
    a, b = node._parents
    return unbroadcast(grad, a.shape), unbroadcast(-grad, b.shape)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, 'multiply')
    return Tensor.from_op(a.data * b.data, 'mul', (a, b))


@backward_rule('mul')
def _mul_backward(node, grad):
    a, b = node._parents
    return (unbroadcast(grad * b.data, a.shape) if a.requires_grad else None,
            unbroadcast(grad * a.data, b.shape) if b.requires_grad else None)


def neg(a) -> Tensor:
    a = as_tensor(a)
    return Tensor.from_op(-a.data, 'neg', (a,))


@backward_rule('neg')
def _neg_backward(node, grad):
    return (-grad,)


# Nonlinearities

def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    return Tensor.from_op(expit(a.data), 'sigmoid', (a,))


@backward_rule('sigmoid')
def _sigmoid_backward(node, grad):
    out = node.data
    return (grad * out * (1.0 - out),)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    return Tensor.from_op(np.tanh(a.data), 'tanh', (a,))


@backward_rule('tanh')
def _tanh_backward(node, grad):
    out = node.data
    return (grad * (1.0 - out * out),)


# Linear algebra

def matmul(a, b) -> Tensor:
    '''
    Matrix product of `a` (`[m, k]` or a `[k]` vector) and `b` (`[k, n]`).
    '''
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim not in (1, 2) or b.ndim != 2 or a.shape[-1] != b.shape[0]:
        raise DimensionError(f'Cannot multiply matrices of shapes {a.shape} and {b.shape}')
    return Tensor.from_op(a.data @ b.data, 'matmul', (a, b))


@backward_rule('matmul')
def _matmul_backward(node, grad):
    a, b = node._parents
    grad_a = grad @ b.data.T if a.requires_grad else None
    grad_b = None
    if b.requires_grad:
        grad_b = np.outer(a.data, grad) if a.ndim == 1 else a.data.T @ grad
    return grad_a, grad_b


# Shape manipulation

def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    if not tensors:
        raise DimensionError('Cannot concatenate an empty list of tensors')
    ndim = tensors[0].ndim
    axis = _normalize_axis(axis, ndim, 'concat')
    for t in tensors[1:]:
        if t.ndim != ndim or t.shape[:axis] + t.shape[axis + 1:] != tensors[0].shape[:axis] + tensors[0].shape[axis + 1:]:
            raise DimensionError(f'Cannot concatenate shapes {[t.shape for t in tensors]} along axis {axis}')
    data = np.concatenate([t.data for t in tensors], axis=axis)
    return Tensor.from_op(data, 'concat', tensors, ctx=axis)


@backward_rule('concat')
def _concat_backward(node, grad):
    axis = node._ctx
    split_points = np.cumsum([p.shape[axis] for p in node._parents])[:-1]
    return tuple(np.split(grad, split_points, axis=axis))


def slice_(a, start: int, stop: int, axis: int = -1) -> Tensor:
    '''
    Elements `start:stop` of `a` along `axis`. Negative bounds are not accepted.
    '''
    a = as_tensor(a)
    axis = _normalize_axis(axis, a.ndim, 'slice')
    extent = a.shape[axis]
    if not 0 <= start < stop <= extent:
        raise DimensionError(f'Slice [{start}:{stop}] out of range for extent {extent} along axis {axis}')
    index = (slice(None),) * axis + (slice(start, stop),)
    return Tensor.from_op(np.ascontiguousarray(a.data[index]), 'slice', (a,), ctx=(index, a.shape))


@backward_rule('slice')
def _slice_backward(node, grad):
    index, shape = node._ctx
    out = np.zeros(shape, dtype=grad.dtype)
    out[index] = grad
    return (out,)


def reshape(a, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    try:
        data = a.data.reshape(tuple(shape))
    except ValueError:
        raise DimensionError(f'Cannot reshape {a.shape} into {tuple(shape)}') from None
    return Tensor.from_op(data, 'reshape', (a,))


@backward_rule('reshape')
def _reshape_backward(node, grad):
    return (grad.reshape(node._parents[0].shape),)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    if not tensors:
        raise DimensionError('Cannot stack an empty list of tensors')
    if any(t.shape != tensors[0].shape for t in tensors):
        raise DimensionError(f'Cannot stack shapes {[t.shape for t in tensors]}')
    axis = _normalize_axis(axis, tensors[0].ndim + 1, 'stack')
    return Tensor.from_op(np.stack([t.data for t in tensors], axis=axis), 'stack', tensors, ctx=axis)


@backward_rule('stack')
def _stack_backward(node, grad):
    axis = node._ctx
    return tuple(np.take(grad, i, axis=axis) for i in range(len(node._parents)))


# Reductions

def sum_(a, axis: int | None = None) -> Tensor:
    a = as_tensor(a)
    if axis is not None:
        axis = _normalize_axis(axis, a.ndim, 'sum')
    return Tensor.from_op(sequential_sum(a.data, axis), 'sum', (a,), ctx=axis)


@backward_rule('sum')
def _sum_backward(node, grad):
    (a,) = node._parents
    axis = node._ctx
    if axis is not None:
        grad = np.expand_dims(grad, axis)
    return (np.broadcast_to(grad, a.shape).copy(),)


def mean(a, axis: int | None = None) -> Tensor:
    a = as_tensor(a)
    if axis is not None:
        axis = _normalize_axis(axis, a.ndim, 'mean')
    count = a.size if axis is None else a.shape[axis]
    if count == 0:
        raise DimensionError(f'Cannot take the mean over an empty axis of shape {a.shape}')
    return Tensor.from_op(sequential_sum(a.data, axis) / count, 'mean', (a,), ctx=(axis, count))


@backward_rule('mean')
def _mean_backward(node, grad):
    (a,) = node._parents
    axis, count = node._ctx
    if axis is not None:
        grad = np.expand_dims(grad, axis)
    return (np.broadcast_to(grad / count, a.shape).copy(),)


# Selection

def where(condition: np.ndarray, a, b) -> Tensor:
    '''
    Picks `a` where `condition` holds and `b` elsewhere. `condition` is a plain
    boolean array and is not differentiated.
    '''
    a, b = as_tensor(a), as_tensor(b)
    condition = np.asarray(condition, dtype=bool)
    try:
        data = np.where(condition, a.data, b.data)
    except ValueError:
        raise DimensionError(f'Cannot select between shapes {a.shape} and {b.shape} '
                             f'with a condition of shape {condition.shape}') from None
    return Tensor.from_op(data, 'where', (a, b), ctx=condition)


@backward_rule('where')
def _where_backward(node, grad):
    a, b = node._parents
    condition = node._ctx
    zero = np.zeros((), dtype=grad.dtype)
    return (unbroadcast(np.where(condition, grad, zero), a.shape) if a.requires_grad else None,
            unbroadcast(np.where(condition, zero, grad), b.shape) if b.requires_grad else None)


def embedding(table: Tensor, ids) -> Tensor:
    '''
    Rows of `table` (`[V, E]`) selected by integer `ids` of any shape; the
    result has shape `ids.shape + (E,)`.
    '''
    ids = np.asarray(ids, dtype=np.int64)
    if table.ndim != 2:
        raise DimensionError(f'Embedding table must be a matrix, got shape {table.shape}')
    vocab_size = table.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= vocab_size):
        bad = ids[(ids < 0) | (ids >= vocab_size)].reshape(-1)[0]
        raise DimensionError(f'Token id {bad} out of range for a vocabulary of {vocab_size}')
    return Tensor.from_op(table.data[ids], 'embedding', (table,), ctx=ids)


@backward_rule('embedding')
def _embedding_backward(node, grad):
    (table,) = node._parents
    out = np.zeros(table.shape, dtype=grad.dtype)
    np.add.at(out, node._ctx, grad)
    return (out,)


def pick(a, ids) -> Tensor:
    '''
    For `a` of shape `[B, V]` and integer `ids` of shape `[B]`, returns
    `a[b, ids[b]]` for every row.
    '''
    a = as_tensor(a)
    ids = np.asarray(ids, dtype=np.int64)
    if a.ndim != 2 or ids.shape != a.shape[:1]:
        raise DimensionError(f'Cannot pick ids of shape {ids.shape} from a tensor of shape {a.shape}')
    if ids.size and (ids.min() < 0 or ids.max() >= a.shape[1]):
        raise DimensionError(f'Pick index out of range for extent {a.shape[1]}')
    rows = np.arange(a.shape[0])
    return Tensor.from_op(a.data[rows, ids], 'pick', (a,), ctx=(rows, ids))


@backward_rule('pick')
def _pick_backward(node, grad):
    (a,) = node._parents
    rows, ids = node._ctx
    out = np.zeros(a.shape, dtype=grad.dtype)
    out[rows, ids] = grad
    return (out,)


# Normalization

def softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    axis = _normalize_axis(axis, a.ndim, 'softmax')
    shifted = np.exp(a.data - np.max(a.data, axis=axis, keepdims=True))
    out = shifted / sequential_sum(shifted, axis, keepdims=True)
    return Tensor.from_op(out, 'softmax', (a,), ctx=axis)


@backward_rule('softmax')
def _softmax_backward(node, grad):
    out = node.data
    axis = node._ctx
    return (out * (grad - sequential_sum(grad * out, axis, keepdims=True)),)


def log_softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    axis = _normalize_axis(axis, a.ndim, 'log_softmax')
    shifted = a.data - np.max(a.data, axis=axis, keepdims=True)
    out = shifted - np.log(sequential_sum(np.exp(shifted), axis, keepdims=True))
    return Tensor.from_op(out, 'log_softmax', (a,), ctx=axis)


@backward_rule('log_softmax')
def _log_softmax_backward(node, grad):
    axis = node._ctx
    return (grad - np.exp(node.data) * sequential_sum(grad, axis, keepdims=True),)


def layer_norm(x, gain, bias, epsilon: float = 1e-5) -> Tensor:
    '''
    Normalizes `x` over its last axis with population statistics, then scales by
    `gain` and shifts by `bias`. Fused into one node.
    '''
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    width = x.shape[-1]
    if gain.shape != (width,) or bias.shape != (width,):
        raise DimensionError(f'Layer norm of width {width} got gain {gain.shape} and bias {bias.shape}')
    mu = sequential_sum(x.data, -1, keepdims=True) / width
    centered = x.data - mu
    var = sequential_sum(centered * centered, -1, keepdims=True) / width
    rstd = 1.0 / np.sqrt(var + epsilon)
    normalized = centered * rstd
    out = normalized * gain.data + bias.data
    return Tensor.from_op(out, 'layer_norm', (x, gain, bias), ctx=(normalized, rstd))


@backward_rule('layer_norm')
def _layer_norm_backward(node, grad):
    x, gain, bias = node._parents
    normalized, rstd = node._ctx
    width = x.shape[-1]
    grad_x = None
    if x.requires_grad:
        d_normalized = grad * gain.data
        grad_x = rstd / width * (width * d_normalized
                                 - sequential_sum(d_normalized, -1, keepdims=True)
                                 - normalized * sequential_sum(d_normalized * normalized, -1, keepdims=True))
    return (grad_x,
            unbroadcast(grad * normalized, gain.shape) if gain.requires_grad else None,
            unbroadcast(grad, bias.shape) if bias.requires_grad else None)


def zeros(*shape: int) -> Tensor:
    return Tensor(np.zeros(shape, dtype=get_dtype()))


Tensor.__add__ = lambda self, other: add(self, other)
Tensor.__radd__ = lambda self, other: add(other, self)
Tensor.__sub__ = lambda self, other: sub(self, other)
Tensor.__rsub__ = lambda self, other: sub(other, self)
Tensor.__mul__ = lambda self, other: mul(self, other)
Tensor.__rmul__ = lambda self, other: mul(other, self)
Tensor.__neg__ = lambda self: neg(self)
Tensor.__matmul__ = lambda self, other: matmul(self, other)
Tensor.sigmoid = sigmoid
Tensor.tanh = tanh
Tensor.sum = sum_
Tensor.mean = mean
Tensor.reshape = lambda self, *shape: reshape(self, shape[0] if len(shape) == 1 and not isinstance(shape[0], int) else shape)
Tensor.slice = slice_
