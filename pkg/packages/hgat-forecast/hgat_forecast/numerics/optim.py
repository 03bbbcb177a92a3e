import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

import numpy as np
from hgat_forecast.exceptions import NonFiniteGradientError
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.schemas.options import LrSchedule


@dataclass
class AdamState:
    step: int = 0
    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: ParameterStore,
    grads: Dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    names: Optional[Iterable[str]] = None,
) -> AdamState:
    """One bias-corrected Adam update, in place on ``params``.

    Every gradient is checked before anything is touched, so a
    non-finite gradient leaves parameters and moments unchanged.
    """
    names = list(params.trainable() if names is None else names)
    for name in names:
        if not np.all(np.isfinite(grads[name])):
            raise NonFiniteGradientError(name)

    state.step += 1
    t = state.step
    correction1 = 1.0 - beta1**t
    correction2 = 1.0 - beta2**t
    for name in names:
        param = params[name].data
        g = grads[name].astype(param.dtype, copy=False)
        m = state.first_moment.setdefault(name, np.zeros_like(param))
        v = state.second_moment.setdefault(name, np.zeros_like(param))
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        param -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return state


def learning_rate(base_lr: float, step: int, total_steps: int, schedule: LrSchedule) -> float:
    """Learning rate for the 1-based ``step``; cosine decays to zero at
    ``total_steps``."""
    if schedule == LrSchedule.constant or total_steps <= 1:
        return base_lr
    progress = min(max(step - 1, 0) / (total_steps - 1), 1.0)
    return 0.5 * base_lr * (1.0 + math.cos(math.pi * progress))
