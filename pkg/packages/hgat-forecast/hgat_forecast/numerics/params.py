from collections import OrderedDict
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from hgat_forecast.numerics.tensor import Tensor, get_default_dtype


def xavier_uniform(
    rng: np.random.Generator, shape: Sequence[int], fan: Optional[Tuple[int, int]] = None
) -> np.ndarray:
    if fan is None:
        fan_in, fan_out = (shape[-2], shape[-1]) if len(shape) >= 2 else (shape[0], 1)
    else:
        fan_in, fan_out = fan
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=tuple(shape))


class ParameterStore:
    """Named learned weights plus non-trainable buffers (batch norm
    running statistics).

    Model blocks only keep parameter *names*; every forward pass reads
    the tensors from a store, usually a per-scene :meth:`snapshot` of the
    master store so that workers never share gradient slots or buffers.
    """

    def __init__(self, training: bool = True):
        self._params: Dict[str, Tensor] = OrderedDict()
        self._buffers: Dict[str, np.ndarray] = OrderedDict()
        self._frozen_prefixes: Tuple[str, ...] = ()
        self.training = training

    # -- creation --
    def create(
        self,
        name: str,
        shape: Sequence[int],
        rng: Optional[np.random.Generator] = None,
        init: str = "xavier",
        fan: Optional[Tuple[int, int]] = None,
    ) -> Tensor:
        if name in self._params:
            raise KeyError(f"parameter '{name}' already exists")
        shape = tuple(int(s) for s in shape)
        if init == "xavier":
            if rng is None:
                raise ValueError(f"parameter '{name}' needs an rng for xavier init")
            data = xavier_uniform(rng, shape, fan)
        elif init == "zeros":
            data = np.zeros(shape)
        elif init == "ones":
            data = np.ones(shape)
        else:
            raise ValueError(f"unknown init '{init}'")
        param = Tensor(data, requires_grad=not self.is_frozen(name), name=name)
        self._params[name] = param
        return param

    def create_buffer(self, name: str, shape: Sequence[int], fill: float) -> np.ndarray:
        if name in self._buffers:
            raise KeyError(f"buffer '{name}' already exists")
        buffer = np.full(tuple(shape), fill, dtype=get_default_dtype())
        self._buffers[name] = buffer
        return buffer

    # -- access --
    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def names(self) -> List[str]:
        return list(self._params)

    def items(self):
        return self._params.items()

    def buffer(self, name: str) -> np.ndarray:
        return self._buffers[name]

    def buffer_names(self) -> List[str]:
        return list(self._buffers)

    def buffers(self) -> Dict[str, np.ndarray]:
        return dict(self._buffers)

    # -- freezing and modes --
    def freeze(self, prefixes: Iterable[str]):
        """Stop training every parameter (and buffer) whose name starts
        with one of ``prefixes``; frozen parts also run in eval mode."""
        self._frozen_prefixes = tuple(sorted(set(self._frozen_prefixes) | set(prefixes)))
        for name, param in self._params.items():
            if self.is_frozen(name):
                param.requires_grad = False
                param.zero_grad()

    def is_frozen(self, name: str) -> bool:
        return any(name.startswith(p) for p in self._frozen_prefixes)

    def is_training(self, name: str) -> bool:
        return self.training and not self.is_frozen(name)

    def trainable(self) -> List[str]:
        return [name for name in self._params if not self.is_frozen(name)]

    # -- snapshots and gradients --
    def snapshot(self, training: Optional[bool] = None) -> "ParameterStore":
        """Store sharing parameter data (read only) with fresh gradient
        slots and private copies of the buffers."""
        snap = ParameterStore(training=self.training if training is None else training)
        snap._frozen_prefixes = self._frozen_prefixes
        for name, param in self._params.items():
            snap._params[name] = Tensor._wrap(param.data, param.requires_grad, "snapshot")
            snap._params[name].name = name
        for name, buffer in self._buffers.items():
            snap._buffers[name] = buffer.copy()
        return snap

    def grads(self) -> Dict[str, np.ndarray]:
        return {
            name: (param.grad if param.requires_grad else np.zeros_like(param.data))
            for name, param in self._params.items()
        }

    def zero_grad(self):
        for param in self._params.values():
            param.zero_grad()

    # -- state --
    def state(self) -> Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray]]:
        params = {name: p.data for name, p in self._params.items()}
        return params, dict(self._buffers)

    def load_state(
        self,
        params: Dict[str, np.ndarray],
        buffers: Optional[Dict[str, np.ndarray]] = None,
        strict: bool = True,
        skip_prefixes: Sequence[str] = (),
    ) -> List[str]:
        """Copy arrays into existing parameters/buffers in place.

        Returns the names that were loaded. With ``strict`` every
        non-skipped parameter must be present with a matching shape.
        """
        loaded = []
        targets = [(n, p.data) for n, p in self._params.items()]
        targets += [(n, b) for n, b in self._buffers.items()]
        sources = dict(params)
        sources.update(buffers or {})
        for name, target in targets:
            if any(name.startswith(p) for p in skip_prefixes):
                continue
            if name not in sources:
                if strict:
                    raise KeyError(f"'{name}' missing from the loaded state")
                continue
            source = np.asarray(sources[name])
            if source.shape != target.shape:
                raise ValueError(
                    f"'{name}' has shape {source.shape}, expected {target.shape}"
                )
            target[...] = source
            loaded.append(name)
        return loaded
