"""Per agent-type trajectory and confidence heads.

Every agent type owns K trajectory heads (stacked into one [K, ...]
weight per layer so all modes run in one matmul) and one confidence
head. Agents are routed to their type's heads and the results are put
back in agent order.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from hgat_forecast.exceptions import UnknownAgentTypeError
from hgat_forecast.numerics import ops
from hgat_forecast.numerics.blocks import MLP, Linear
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.numerics.tensor import Tensor
from hgat_forecast.scenario.types import AGENT_TYPES, AgentType
from hgat_forecast.schemas.options import ModelOptions

HIDDEN_LAYERS = 6
CONFIDENCE_LAYERS = 4


@dataclass
class PredictionSet:
    trajectories: Tensor  # [A, K, T_fut, 2] frame-relative
    aux: Tensor  # [A, K, D]
    logits: Optional[Tensor] = None  # [A, K]
    confidences: Optional[Tensor] = None  # [A, K]

    @property
    def num_agents(self) -> int:
        return self.trajectories.shape[0]

    @property
    def num_modes(self) -> int:
        return self.trajectories.shape[1]

    def with_confidence(self, logits: Tensor, confidences: Tensor) -> "PredictionSet":
        return PredictionSet(self.trajectories, self.aux, logits, confidences)

    def detach(self) -> "PredictionSet":
        return PredictionSet(
            self.trajectories.detach(),
            self.aux.detach(),
            self.logits.detach() if self.logits is not None else None,
            self.confidences.detach() if self.confidences is not None else None,
        )


class TypeRouting:
    """Agents grouped by type (in AGENT_TYPES order) and the inverse
    permutation back to agent order."""

    def __init__(self, agent_types: Sequence[AgentType], known: Sequence[AgentType]):
        for agent_type in agent_types:
            if agent_type not in known:
                raise UnknownAgentTypeError(agent_type)
        self.groups: List[Tuple[AgentType, np.ndarray]] = []
        for agent_type in known:
            rows = np.array([i for i, t in enumerate(agent_types) if t == agent_type], dtype=np.int64)
            if len(rows):
                self.groups.append((agent_type, rows))
        order = np.concatenate([rows for _, rows in self.groups]) if self.groups else np.zeros(0, np.int64)
        self.inverse = np.argsort(order, kind="stable")


class Forecaster:
    def __init__(
        self,
        store: ParameterStore,
        options: ModelOptions,
        rng: np.random.Generator,
        agent_types: Sequence[AgentType] = AGENT_TYPES,
    ):
        dim, modes = options.dim, options.modes
        norm = options.norm_args
        self.modes = modes
        self.t_fut = options.t_fut
        self.dim = dim
        self.agent_types = list(agent_types)
        self.hidden: Dict[AgentType, MLP] = {}
        self.trajectory: Dict[AgentType, Linear] = {}
        self.aux: Dict[AgentType, Linear] = {}
        self.confidence: Dict[AgentType, MLP] = {}
        self.confidence_out: Dict[AgentType, Linear] = {}
        for agent_type in self.agent_types:
            prefix = f"forecaster.{agent_type.value}"
            self.hidden[agent_type] = MLP(
                store, f"{prefix}.hidden", dim, dim, HIDDEN_LAYERS, rng, stack=modes, **norm
            )
            self.trajectory[agent_type] = Linear(
                store, f"{prefix}.trajectory", dim, 2 * options.t_fut, rng, zero_init=True, stack=modes
            )
            self.aux[agent_type] = Linear(store, f"{prefix}.aux", dim, dim, rng, stack=modes)
            self.confidence[agent_type] = MLP(
                store, f"{prefix}.confidence", 2 * dim, dim, CONFIDENCE_LAYERS, rng, **norm
            )
            self.confidence_out[agent_type] = Linear(store, f"{prefix}.confidence.out", dim, 1, rng)

    def predict_trajectories(
        self,
        ps: ParameterStore,
        final: Tensor,
        agent_types: Sequence[AgentType],
        last_positions: np.ndarray,
    ) -> PredictionSet:
        """K trajectories per agent as cumulative per-step displacements
        from its last observed position, plus the mode aux features."""
        routing = TypeRouting(agent_types, self.agent_types)
        deltas, auxes = [], []
        for agent_type, rows in routing.groups:
            h = self.hidden[agent_type](ps, ops.gather(final, rows, axis=0))  # [K, A_t, D]
            deltas.append(self.trajectory[agent_type](ps, h))
            auxes.append(self.aux[agent_type](ps, h))
        n_agents = len(agent_types)
        delta = ops.gather(ops.concat(deltas, axis=1), routing.inverse, axis=1)
        delta = ops.transpose(
            ops.reshape(delta, (self.modes, n_agents, self.t_fut, 2)), (1, 0, 2, 3)
        )
        origin = np.asarray(last_positions, dtype=float).reshape(n_agents, 1, 1, 2)
        trajectories = ops.add(ops.cumsum(delta, axis=2), origin)
        aux = ops.transpose(ops.gather(ops.concat(auxes, axis=1), routing.inverse, axis=1), (1, 0, 2))
        return PredictionSet(trajectories, aux)

    def rate_confidence(
        self,
        ps: ParameterStore,
        final: Tensor,
        aux: Tensor,
        agent_types: Sequence[AgentType],
    ) -> Tuple[Tensor, Tensor]:
        """(logits, softmax confidences), both [A, K]."""
        routing = TypeRouting(agent_types, self.agent_types)
        logits = []
        for agent_type, rows in routing.groups:
            n = len(rows)
            f = ops.reshape(ops.gather(final, rows, axis=0), (n, 1, self.dim))
            f = ops.gather(f, np.zeros(self.modes, dtype=np.int64), axis=1)
            x = ops.concat([f, ops.gather(aux, rows, axis=0)], axis=2)
            h = self.confidence[agent_type](ps, ops.reshape(x, (n * self.modes, 2 * self.dim)))
            logits.append(ops.reshape(self.confidence_out[agent_type](ps, h), (n, self.modes)))
        logits = ops.gather(ops.concat(logits, axis=0), routing.inverse, axis=0)
        return logits, ops.softmax(logits, axis=1)

    def __call__(
        self,
        ps: ParameterStore,
        final: Tensor,
        agent_types: Sequence[AgentType],
        last_positions: np.ndarray,
    ) -> PredictionSet:
        proposals = self.predict_trajectories(ps, final, agent_types, last_positions)
        logits, confidences = self.rate_confidence(ps, final, proposals.aux, agent_types)
        return proposals.with_confidence(logits, confidences)
