from collections.abc import Callable
from contextlib import contextmanager
import itertools

import numpy as np

from ..errors import GraphError


_PRECISIONS = {64: np.float64, 32: np.float32}

_state = {
    'dtype': np.float64,
    'grad_enabled': True,
    }

# Creation order doubles as a topological order: an op node is always created
# after every tensor it consumes.
_sequence = itertools.count()

BackwardRule = Callable[['Tensor', np.ndarray], tuple[np.ndarray | None, ...]]

BACKWARD_RULES: dict[str, BackwardRule] = {}


def set_precision(bits: int) -> None:
    '''
    Selects the floating point width of newly created tensors.

    :param bits: `64` (default) or `32`.
    '''
    if bits not in _PRECISIONS:
        raise ValueError(f'Precision must be one of {sorted(_PRECISIONS)}, got {bits}')
    _state['dtype'] = _PRECISIONS[bits]


def get_dtype() -> type:
    return _state['dtype']


def is_grad_enabled() -> bool:
    return _state['grad_enabled']


@contextmanager
def no_grad():
    '''
    Context manager that disables graph recording. Used for decoding,
    scoring and finite differences.
    '''
    previous = _state['grad_enabled']
    _state['grad_enabled'] = False
    try:
        yield
    finally:
        _state['grad_enabled'] = previous


class Tensor:
    r'''
    Dense n-dimensional array of reals and a node of the reverse-mode
    differentiation graph.

    Leaves are created directly; every other tensor is produced by an operation in
    `deeprnmt.autodiff.ops` and remembers its parents and the op name, so that
    `backward` can look up the rule in `BACKWARD_RULES`:

    ```python
    w = Tensor([1.0, 2.0], requires_grad=True)
    loss = (w * w).sum()
    loss.backward()
    # w.grad == [2.0, 4.0]
    ```
    '''

    __slots__ = ('data', 'grad', 'requires_grad', 'name', '_op', '_parents', '_ctx', '_seq')

    # numpy defers `array + tensor` to `Tensor.__radd__`
    __array_ufunc__ = None

    def __init__(self,
                 data,
                 requires_grad: bool = False,
                 name: str | None = None,
                 ) -> None:
        '''
        :param data: Array-like values. Always copied into an array of the current precision.
        :param requires_grad: Whether gradients are accumulated into this leaf.
        :param name: Optional name, used in diagnostics.
        '''
        self.data = np.array(data, dtype=get_dtype())
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._op = None
        self._parents = ()
        self._ctx = None
        self._seq = next(_sequence)

    @classmethod
    def from_op(cls,
                data: np.ndarray,
                op: str,
                parents: tuple['Tensor', ...],
                ctx=None,
                ) -> 'Tensor':
        '''
        Builds the output of an operation. Parents and context are only kept when
        graph recording is on and some parent requires gradients.
        '''
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        out.name = None
        out._seq = next(_sequence)
        out.requires_grad = is_grad_enabled() and any(p.requires_grad for p in parents)
        if out.requires_grad:
            out._op = op
            out._parents = parents
            out._ctx = ctx
        else:
            out._op = None
            out._parents = ()
            out._ctx = None
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._op is None

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def detach(self) -> 'Tensor':
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        '''
        Accumulates d(self)/d(leaf) into `grad` of every leaf that requires
        gradients. Gradients add up across calls until `zero_grad`.
        '''
        if not self.requires_grad:
            raise GraphError('Called backward on a tensor that does not require gradients '
                             '(detached or built under no_grad)')
        if self.data.size != 1:
            raise GraphError(f'Backward needs a scalar loss, got shape {self.shape}')
        Graph(self).backward(np.ones_like(self.data))

    def __repr__(self) -> str:
        label = f', name={self.name!r}' if self.name else ''
        return f'Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})'


class Graph:
    '''
    The operations recorded in one forward pass that lead to `root`, in
    topological order. Only tensors that require gradients take part.
    '''

    def __init__(self, root: Tensor) -> None:
        self.root = root
        self.nodes = self._collect(root)

    @staticmethod
    def _collect(root: Tensor) -> list[Tensor]:
        seen = {}
        stack = [root]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen[id(node)] = node
            stack.extend(p for p in node._parents if p.requires_grad)
        return sorted(seen.values(), key=lambda t: t._seq)

    @property
    def leaves(self) -> list[Tensor]:
        return [node for node in self.nodes if node.is_leaf]

    def parents_of(self, node: Tensor) -> tuple[Tensor, ...]:
        return node._parents

    def backward(self, seed_grad: np.ndarray) -> None:
        grads = {id(self.root): seed_grad}
        for node in reversed(self.nodes):
            grad = grads.pop(id(node), None)
            if grad is None:
                continue

            if node.is_leaf:
                if node.grad is None:
                    node.grad = np.array(grad, dtype=node.data.dtype).reshape(node.shape)
                else:
                    node.grad = node.grad + grad
                continue

            parent_grads = BACKWARD_RULES[node._op](node, grad)
            for parent, parent_grad in zip(node._parents, parent_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + parent_grad
                else:
                    grads[key] = parent_grad
