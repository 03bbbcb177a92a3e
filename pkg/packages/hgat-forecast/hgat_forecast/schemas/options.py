from enum import Enum
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel, Field, validator


class Regime(str, Enum):
    """Training regimes: proposals only, refinement on a frozen pretrained
    base, or everything trained jointly."""

    none = "none"
    frozen = "frozen"
    e2e = "e2e"


class LrSchedule(str, Enum):
    constant = "constant"
    cosine = "cosine"


class NumericDtype(str, Enum):
    float32 = "float32"
    float64 = "float64"


class Normalization(str, Enum):
    """Norm inside the MLP and convolution blocks: batch statistics of the
    scene, or a single group per row."""

    batch = "batch"
    group = "group"


class ImportanceWeights(BaseModel):
    """Per track-category weight of an agent's loss term."""

    focal: float = Field(1.0, ge=0)
    scored: float = Field(0.5, ge=0)
    unscored: float = Field(0.2, ge=0)
    fragment: float = Field(0.0, ge=0)


class GraphOptions(BaseModel):
    lane_spacing_m: float = Field(2.0, gt=0)
    step_lane_radius_m: float = Field(7.0, gt=0)
    step_lane_neighbors: int = Field(5, ge=1)
    step_step_radius_m: float = Field(100.0, gt=0)
    step_step_neighbors: int = Field(5, ge=1)
    orientation_gate_deg: float = Field(60.0, ge=0, le=180)


class ModelOptions(BaseModel):
    """Everything needed to rebuild a network; stored in checkpoints."""

    t_obs: int = Field(50, ge=1)
    t_fut: int = Field(60, ge=1)
    rate_hz: float = Field(10.0, gt=0)
    dim: int = Field(64, ge=1)
    heads: int = Field(2, ge=1)
    map_layers: int = Field(4, ge=0)
    scene_layers: int = Field(4, ge=0)
    modes: int = Field(6, ge=1)
    leaky_slope: float = Field(0.2, gt=0, lt=1)
    normalization: Normalization = Normalization.group
    bn_eps: float = Field(1e-5, gt=0)
    bn_momentum: float = Field(0.1, gt=0, le=1)
    conv_kernel: int = Field(3, ge=1)
    refine_iterations: int = Field(3, ge=1)
    refine_neighbors: int = Field(5, ge=1)
    refine_heads: int = Field(2, ge=1)
    refine_coord_scale_m: float = Field(10.0, gt=0)
    graph: GraphOptions = GraphOptions()

    @validator("heads")
    def heads_divide_dim(cls, heads, values):
        dim = values.get("dim")
        if dim is not None and dim % heads != 0:
            raise ValueError(f"{heads} attention heads do not divide model dim {dim}")
        return heads

    @validator("conv_kernel")
    def odd_kernel(cls, kernel):
        if kernel % 2 == 0:
            raise ValueError("conv kernel size must be odd for same padding")
        return kernel

    @property
    def norm_args(self) -> Dict[str, Any]:
        return dict(kind=self.normalization.value, momentum=self.bn_momentum, eps=self.bn_eps)

    @property
    def layout(self) -> Tuple[int, int, float]:
        return self.t_obs, self.t_fut, self.rate_hz


class TrainingOptions(BaseModel):
    regime: Regime = Regime.none
    steps: int = Field(500, ge=1)
    batch_scenes: int = Field(4, ge=1)
    learning_rate: float = Field(1e-3, gt=0)
    lr_schedule: LrSchedule = LrSchedule.cosine
    adam_beta1: float = Field(0.9, ge=0, lt=1)
    adam_beta2: float = Field(0.999, ge=0, lt=1)
    adam_eps: float = Field(1e-8, gt=0)
    checkpoint_every: int = Field(100, ge=1)
    log_every: int = Field(10, ge=1)
    seed: int = 0
    threads: int = Field(1, ge=1)
    traj_weight: float = Field(1.0, ge=0, description="alpha of the trajectory loss")
    margin: float = Field(0.2, ge=0)
    importance: ImportanceWeights = ImportanceWeights()
    proposal_loss: bool = Field(True, description="Auxiliary proposal loss in the e2e regime")
    proposal_loss_weight: float = Field(0.5, ge=0)
    removed_relations: List[str] = []
