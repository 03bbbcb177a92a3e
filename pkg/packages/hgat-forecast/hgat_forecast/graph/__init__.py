from hgat_forecast.graph.builder import assemble_scene_graph, dump_graph, graph_to_document
from hgat_forecast.graph.frame import Frame
from hgat_forecast.graph.relations import (
    ALL_RELATIONS,
    LANE_RELATIONS,
    RELATIONS,
    REMOVABLE_RELATIONS,
    NodeType,
)
from hgat_forecast.graph.tables import AgentTable, EdgeTable, HeteroGraph, NodeTable
