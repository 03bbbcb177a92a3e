"""Dense tensor value type and the tape that records differentiable
operations for the reverse pass.

Operations only record while a :class:`Tape` is active on the current
thread; outside a tape every result is a constant, which is how
inference runs. Each worker thread gets its own tape.
"""

import threading
from contextlib import contextmanager
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from hgat_forecast.exceptions import DimensionError, NonFiniteError

_DEFAULT_DTYPE = {"dtype": np.dtype(np.float64)}
_local = threading.local()


def get_default_dtype() -> np.dtype:
    return _DEFAULT_DTYPE["dtype"]


def set_default_dtype(dtype) -> None:
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ValueError(f"unsupported dtype {dtype}, use float32 or float64")
    _DEFAULT_DTYPE["dtype"] = dtype


@contextmanager
def default_dtype(dtype):
    previous = get_default_dtype()
    set_default_dtype(dtype)
    try:
        yield
    finally:
        set_default_dtype(previous)


class Tensor:
    """A real array with an optional gradient slot.

    ``grad`` exists iff ``requires_grad``; it is allocated lazily and
    always has the shape of ``data``.
    """

    __slots__ = ("data", "requires_grad", "_grad", "name")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        name: Optional[str] = None,
        dtype=None,
        op: str = "tensor",
    ):
        array = np.asarray(data, dtype=dtype or get_default_dtype())
        if not np.all(np.isfinite(array)):
            raise NonFiniteError(op)
        self.data = array
        self.requires_grad = bool(requires_grad)
        self._grad = None
        self.name = name

    @classmethod
    def _wrap(cls, array: np.ndarray, requires_grad: bool, op: str) -> "Tensor":
        if not np.all(np.isfinite(array)):
            raise NonFiniteError(op)
        out = cls.__new__(cls)
        out.data = array
        out.requires_grad = requires_grad
        out._grad = None
        out.name = None
        return out

    # -- gradient slot --
    @property
    def grad(self) -> Optional[np.ndarray]:
        if not self.requires_grad:
            return None
        if self._grad is None:
            self._grad = np.zeros_like(self.data)
        return self._grad

    def zero_grad(self):
        self._grad = None

    def _accumulate(self, grad: np.ndarray):
        if grad.shape != self.data.shape:
            raise DimensionError("backward", self.data.shape, grad.shape)
        if self._grad is None:
            self._grad = np.array(grad, dtype=self.data.dtype)
        else:
            self._grad += grad

    # -- array-like surface --
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError("item", self.data.shape, (1,))
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor._wrap(self.data, False, "detach")

    def backward(self, grad: Optional[np.ndarray] = None):
        tape = current_tape()
        if tape is None:
            raise RuntimeError("backward() needs the tape that recorded this tensor")
        tape.backward(self, grad)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    # operators delegate to ops; imported lazily to keep this module leaf-level
    def __add__(self, other):
        from hgat_forecast.numerics import ops

        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from hgat_forecast.numerics import ops

        return ops.sub(self, other)

    def __rsub__(self, other):
        from hgat_forecast.numerics import ops

        return ops.sub(other, self)

    def __mul__(self, other):
        from hgat_forecast.numerics import ops

        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from hgat_forecast.numerics import ops

        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from hgat_forecast.numerics import ops

        return ops.matmul(self, other)


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class TapeEntry:
    __slots__ = ("op", "inputs", "output", "backward")

    def __init__(self, op: str, inputs: List[Tensor], output: Tensor, backward):
        self.op = op
        self.inputs = inputs
        self.output = output
        self.backward = backward


class Tape:
    """Ordered record of the operations of one forward pass.

    Usage:
        with Tape() as tape:
            loss = ops.sum(ops.linear(x, w, b))
            tape.backward(loss)
    """

    def __init__(self):
        self.entries: List[TapeEntry] = []
        self._previous: Optional["Tape"] = None

    def __enter__(self) -> "Tape":
        self._previous = current_tape()
        _local.tape = self
        return self

    def __exit__(self, exc_type, exc, tb):
        _local.tape = self._previous
        self._previous = None

    def __len__(self) -> int:
        return len(self.entries)

    def record(self, op: str, inputs: List[Tensor], output: Tensor, backward):
        self.entries.append(TapeEntry(op, inputs, output, backward))

    def backward(self, loss: Tensor, grad: Optional[np.ndarray] = None):
        if not loss.requires_grad:
            raise RuntimeError("loss does not depend on any tensor requiring grad")
        if grad is None:
            if loss.size != 1:
                raise DimensionError("backward", loss.shape, (1,))
            grad = np.ones_like(loss.data)
        loss._accumulate(np.asarray(grad, dtype=loss.dtype))
        for entry in reversed(self.entries):
            out_grad = entry.output._grad
            if out_grad is None:
                continue
            input_grads = entry.backward(out_grad)
            for tensor, g in zip(entry.inputs, input_grads):
                if g is None or not tensor.requires_grad:
                    continue
                tensor._accumulate(np.asarray(g, dtype=tensor.dtype))


def current_tape() -> Optional[Tape]:
    return getattr(_local, "tape", None)


def as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def tensor(data, requires_grad: bool = False, name: Optional[str] = None) -> Tensor:
    return Tensor(data, requires_grad=requires_grad, name=name)
