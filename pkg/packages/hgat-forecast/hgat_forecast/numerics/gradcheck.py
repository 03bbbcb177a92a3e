"""Central finite-difference oracle for reverse-mode gradients."""

from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np
from hgat_forecast.numerics.tensor import Tape, Tensor

ScalarFn = Callable[[], Tensor]


@dataclass
class GradcheckResult:
    max_relative_error: float
    per_tensor: Dict[str, float]

    def ok(self, tolerance: float) -> bool:
        return self.max_relative_error <= tolerance


def numerical_gradient(fn: ScalarFn, target: Tensor, step: float = 1e-5) -> np.ndarray:
    """d fn() / d target by central differences, perturbing ``target.data``
    in place (restored afterwards)."""
    grad = np.zeros_like(target.data)
    flat = target.data.reshape(-1)
    flat_grad = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + step
        plus = fn().item()
        flat[i] = original - step
        minus = fn().item()
        flat[i] = original
        flat_grad[i] = (plus - minus) / (2.0 * step)
    return grad


def analytic_gradients(fn: ScalarFn, targets: Sequence[Tensor]) -> Dict[int, np.ndarray]:
    for t in targets:
        t.zero_grad()
        t.requires_grad = True
    with Tape() as tape:
        loss = fn()
        tape.backward(loss)
    return {i: t.grad.copy() for i, t in enumerate(targets)}


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    scale = max(np.abs(numeric).max(initial=0.0), np.abs(analytic).max(initial=0.0), floor)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)


def check_gradients(
    fn: ScalarFn, targets: Sequence[Tensor], step: float = 1e-5
) -> GradcheckResult:
    """Compare tape gradients of the scalar ``fn()`` with central
    differences for every tensor in ``targets``.

    ``fn`` must be deterministic; anything it mutates between calls
    (e.g. batch norm running buffers) must not influence its output.
    """
    analytic = analytic_gradients(fn, targets)
    per_tensor = {}
    for i, target in enumerate(targets):
        numeric = numerical_gradient(fn, target, step)
        per_tensor[target.name or f"input{i}"] = relative_error(analytic[i], numeric)
    return GradcheckResult(max(per_tensor.values(), default=0.0), per_tensor)
