from hgat_forecast.scenario.generator import generate_dataset, generate_synthetic
from hgat_forecast.scenario.io import (
    load_dataset,
    load_scenario,
    save_dataset,
    save_scenario,
    validate_scenario,
)
from hgat_forecast.scenario.layout import TimestepLayout, make_layout, timestep_layout
from hgat_forecast.scenario.types import (
    AgentTrack,
    AgentType,
    LanePolyline,
    MarkType,
    Scenario,
    TrackCategory,
)
