"""
hgat-forecast - multi-agent motion forecasting with heterogeneous graph attention

Agents and lanes of a traffic scene are encoded as a heterogeneous graph,
attention layers aggregate over its relations, and type-specific heads
predict several future trajectories per agent, optionally refined by a
lane-aware graph refinement stage.
"""

VERSION = (0, 1, 0)
VERSION_STRING = ".".join(map(str, VERSION))

__version__ = VERSION_STRING
__author__ = "hgat-forecast contributors"
__license__ = "Apache 2.0"
