from typing import Iterable, Sequence


class HgatForecastError(Exception):
    """Base class for every error raised on purpose by hgat_forecast."""


# numerics
class DimensionError(HgatForecastError):
    def __init__(self, op: str, *shapes: Sequence[int]):
        self.op = op
        self.shapes = [tuple(s) for s in shapes]
        shapes_str = " vs ".join(str(s) for s in self.shapes)
        super().__init__(f"{op}: incompatible shapes {shapes_str}")


class NonFiniteError(HgatForecastError):
    def __init__(self, op: str):
        self.op = op
        super().__init__(f"{op}: produced a NaN or Inf value")


class EmptyInputError(HgatForecastError):
    pass


class NonFiniteGradientError(HgatForecastError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"non-finite gradient for parameter '{name}', step aborted")


# scenarios
class ScenarioError(HgatForecastError):
    pass


class ScenarioParseError(ScenarioError):
    pass


class SchemaVersionError(ScenarioError):
    def __init__(self, found, expected: str, what: str = "scenario"):
        self.found = found
        self.expected = expected
        super().__init__(
            f"{what} schema_version {found!r} is not supported (expected {expected!r})"
        )


class ScenarioInvariantError(ScenarioError):
    pass


class LayoutError(HgatForecastError):
    pass


# scene graph
class GraphConstructionError(HgatForecastError):
    pass


class DegenerateLaneError(GraphConstructionError):
    def __init__(self, lane_id: str):
        self.lane_id = lane_id
        super().__init__(f"lane '{lane_id}' has fewer than 2 distinct points")


# model
class MissingRelationError(HgatForecastError):
    def __init__(self, relation: str):
        self.relation = relation
        super().__init__(f"no attention parameters for relation '{relation}'")


class UnknownAgentTypeError(HgatForecastError):
    def __init__(self, agent_type):
        self.agent_type = agent_type
        super().__init__(f"no prediction heads for agent type {agent_type!r}")


class RefinementContractError(HgatForecastError):
    def __init__(self, requirement: str):
        self.requirement = requirement
        super().__init__(f"refinement input contract violated: {requirement}")


class RefinementError(HgatForecastError):
    pass


# training / evaluation
class TrainingConfigError(HgatForecastError):
    pass


class CheckpointError(HgatForecastError):
    pass


class MetricsError(HgatForecastError):
    pass


class AblationError(HgatForecastError):
    def __init__(self, relations: Iterable[str]):
        self.relations = sorted(relations)
        super().__init__(
            f"edge types {self.relations} cannot be ablated"
            " (allowed: lane_to_step, step_to_lane, step_to_step, traj_to_step)"
        )
