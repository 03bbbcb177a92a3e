from hgat_forecast.refinement.contract import (
    RefinementGraph,
    RefinementInputs,
    build_refinement_graph,
)
from hgat_forecast.refinement.conv import TransformerConv
from hgat_forecast.refinement.geometry import dynamic_edges, lateral_lane_distance, step_headings
from hgat_forecast.refinement.refiner import RefinementResult, Refiner
