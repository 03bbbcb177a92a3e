from dataclasses import dataclass
from typing import Optional

import numpy as np
from hgat_forecast.encoders.encoder import EncodedScene, SceneEncoder
from hgat_forecast.forecaster.heads import Forecaster, PredictionSet
from hgat_forecast.graph.tables import HeteroGraph
from hgat_forecast.hgat.attention import AttentionTrace
from hgat_forecast.numerics.params import ParameterStore
from hgat_forecast.refinement.refiner import Refiner
from hgat_forecast.schemas.options import ModelOptions, Regime

BASE_PREFIXES = ("encoder.", "forecaster.")
REFINEMENT_PREFIX = "refinement."


@dataclass
class ModelOutput:
    encoded: EncodedScene
    proposals: PredictionSet
    refined: Optional[PredictionSet] = None

    @property
    def final(self) -> PredictionSet:
        return self.refined if self.refined is not None else self.proposals


class HgatForecaster:
    """Scene encoder, per-type prediction heads and map refinement sharing
    one parameter store."""

    def __init__(
        self,
        options: ModelOptions,
        seed: int = 0,
        store: Optional[ParameterStore] = None,
    ):
        self.options = options
        self.store = store if store is not None else ParameterStore()
        rng = np.random.default_rng(seed)
        self.encoder = SceneEncoder(self.store, options, rng)
        self.forecaster = Forecaster(self.store, options, rng)
        self.refiner = Refiner(self.store, options, rng)

    def forward(
        self,
        ps: ParameterStore,
        graph: HeteroGraph,
        refine: bool = True,
        trace: Optional[AttentionTrace] = None,
        iterations: Optional[int] = None,
    ) -> ModelOutput:
        encoded = self.encoder(ps, graph, trace)
        proposals = self.forecaster(
            ps, encoded.final, graph.agents.types, graph.agents.last_positions
        )
        refined = None
        if refine:
            refined = self.refiner(ps, proposals, encoded, graph, iterations).prediction
        return ModelOutput(encoded, proposals, refined)

    def predict(
        self,
        graph: HeteroGraph,
        refine: bool = True,
        trace: Optional[AttentionTrace] = None,
    ) -> ModelOutput:
        """Eval-mode forward pass (running statistics under batch
        normalization, no buffer updates)."""
        return self.forward(self.store.snapshot(training=False), graph, refine, trace)


def uses_refinement(regime: Regime) -> bool:
    return regime != Regime.none
