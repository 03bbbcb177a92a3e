from pathlib import Path
from typing import Optional, Union

from hgat_common.confi import Confi, confi
from hgat_forecast.scenario.layout import timestep_layout
from hgat_forecast.schemas.options import (
    GraphOptions,
    ImportanceWeights,
    LrSchedule,
    ModelOptions,
    Normalization,
    NumericDtype,
    TrainingOptions,
)


class HgatForecastConfig(Confi):
    # timestep layout
    SCENARIO_RATE_HZ = confi.float(
        "SCENARIO_RATE_HZ",
        10.0,
        description="Scenario sampling rate in Hz (2 gives a fast 10/12 step layout)",
    )
    OBSERVED_SECONDS = confi.float(
        "OBSERVED_SECONDS", 5.0, description="Length of the observed history in seconds"
    )
    FUTURE_SECONDS = confi.float(
        "FUTURE_SECONDS", 6.0, description="Length of the predicted future in seconds"
    )
    NUMERIC_DTYPE = confi.enum(
        "NUMERIC_DTYPE",
        NumericDtype,
        NumericDtype.float32,
        description="Floating point precision used for training and inference",
    )

    # network shape
    MODEL_DIM = confi.int("MODEL_DIM", 64, description="Hidden feature width D")
    ATTENTION_HEADS = confi.int(
        "ATTENTION_HEADS", 2, description="Attention heads per HGAT layer (must divide D)"
    )
    MAP_LAYERS = confi.int(
        "MAP_LAYERS", 4, description="HGAT layers in the map encoder (lane edges only)"
    )
    SCENE_LAYERS = confi.int(
        "SCENE_LAYERS", 4, description="HGAT layers in the scene encoder (all edges)"
    )
    NUM_MODES = confi.int(
        "NUM_MODES", 6, description="Trajectory proposals (modes) per agent"
    )
    LEAKY_SLOPE = confi.float(
        "LEAKY_SLOPE", 0.2, description="Negative slope of the attention LeakyReLU"
    )
    NORMALIZATION = confi.enum(
        "NORMALIZATION",
        Normalization,
        Normalization.group,
        description="Norm of the MLP and convolution blocks: batch (scene statistics) or group (per row)",
    )
    BN_EPS = confi.float("BN_EPS", 1e-5, description="Batch norm variance floor")
    BN_MOMENTUM = confi.float(
        "BN_MOMENTUM", 0.1, description="Batch norm running statistics momentum"
    )
    CONV_KERNEL = confi.int(
        "CONV_KERNEL", 3, description="Temporal kernel size of the trajectory encoder"
    )

    # scene graph
    LANE_SPACING_M = confi.float(
        "LANE_SPACING_M", 2.0, description="Maximum arc-length gap between lane nodes"
    )
    STEP_LANE_RADIUS_M = confi.float(
        "STEP_LANE_RADIUS_M", 7.0, description="Radius of step/lane edges in meters"
    )
    STEP_LANE_NEIGHBORS = confi.int(
        "STEP_LANE_NEIGHBORS", 5, description="Nearest neighbors kept per step/lane target"
    )
    STEP_STEP_RADIUS_M = confi.float(
        "STEP_STEP_RADIUS_M", 100.0, description="Radius of step/step edges in meters"
    )
    STEP_STEP_NEIGHBORS = confi.int(
        "STEP_STEP_NEIGHBORS", 5, description="Nearest other agents per step node"
    )
    ORIENTATION_GATE_DEG = confi.float(
        "ORIENTATION_GATE_DEG",
        60.0,
        description="Max heading difference for step/lane edges (pedestrians exempt)",
    )

    # refinement
    REFINE_ITERATIONS = confi.int(
        "REFINE_ITERATIONS", 3, description="Refinement iterations per forward pass"
    )
    REFINE_NEIGHBORS = confi.int(
        "REFINE_NEIGHBORS", 5, description="Lane nodes linked to each predicted step"
    )
    REFINE_HEADS = confi.int(
        "REFINE_HEADS", 2, description="Heads of the refinement transformer convolutions"
    )
    REFINE_COORD_SCALE_M = confi.float(
        "REFINE_COORD_SCALE_M",
        10.0,
        description="Coordinates are divided by this before entering step features",
    )

    # losses
    LOSS_TRAJ_WEIGHT = confi.float(
        "LOSS_TRAJ_WEIGHT", 1.0, description="Weight alpha of the trajectory loss"
    )
    LOSS_MARGIN = confi.float(
        "LOSS_MARGIN", 0.2, description="Margin of the confidence max-margin loss"
    )
    LOSS_IMPORTANCE = confi.model(
        "LOSS_IMPORTANCE",
        ImportanceWeights,
        {},  # defaults are set by ImportanceWeights
        description="Loss weight per track category, as JSON",
    )
    E2E_PROPOSAL_LOSS = confi.bool(
        "E2E_PROPOSAL_LOSS",
        True,
        description="Add the proposal loss as an auxiliary term in the e2e regime",
    )
    E2E_PROPOSAL_LOSS_WEIGHT = confi.float(
        "E2E_PROPOSAL_LOSS_WEIGHT",
        0.5,
        description="Weight of the auxiliary proposal loss in the e2e regime",
    )

    # optimizer / loop
    LEARNING_RATE = confi.float("LEARNING_RATE", 1e-3, description="Adam learning rate")
    LR_SCHEDULE = confi.enum(
        "LR_SCHEDULE",
        LrSchedule,
        LrSchedule.cosine,
        description="Learning rate schedule over the training steps",
    )
    ADAM_BETA1 = confi.float("ADAM_BETA1", 0.9, description="Adam first moment decay")
    ADAM_BETA2 = confi.float(
        "ADAM_BETA2", 0.999, description="Adam second moment decay"
    )
    ADAM_EPS = confi.float("ADAM_EPS", 1e-8, description="Adam denominator epsilon")
    TRAIN_STEPS = confi.int("TRAIN_STEPS", 500, description="Optimizer steps to run")
    BATCH_SCENES = confi.int(
        "BATCH_SCENES", 4, description="Scenes whose gradients are averaged per step"
    )
    CHECKPOINT_EVERY = confi.int(
        "CHECKPOINT_EVERY", 100, description="Write a checkpoint every N steps"
    )
    LOG_EVERY = confi.int("LOG_EVERY", 10, description="Log the losses every N steps")
    SEED = confi.int("SEED", 0, description="Seed of initialization and batching")
    THREADS = confi.int(
        "THREADS",
        1,
        description="Worker threads for per-scene passes (1 gives bitwise determinism)",
    )

    # evaluation / ablation
    MISS_THRESHOLD_M = confi.float(
        "MISS_THRESHOLD_M", 2.0, description="Final displacement above which is a miss"
    )
    REMOVED_EDGE_TYPES = confi.list(
        "REMOVED_EDGE_TYPES",
        [],
        description="Scene graph edge types left out of the graph (ablation)",
    )

    def graph_options(self) -> GraphOptions:
        return GraphOptions(
            lane_spacing_m=self.LANE_SPACING_M,
            step_lane_radius_m=self.STEP_LANE_RADIUS_M,
            step_lane_neighbors=self.STEP_LANE_NEIGHBORS,
            step_step_radius_m=self.STEP_STEP_RADIUS_M,
            step_step_neighbors=self.STEP_STEP_NEIGHBORS,
            orientation_gate_deg=self.ORIENTATION_GATE_DEG,
        )

    def model_options(self) -> ModelOptions:
        layout = timestep_layout(self)
        return ModelOptions(
            t_obs=layout.t_obs,
            t_fut=layout.t_fut,
            rate_hz=layout.rate_hz,
            dim=self.MODEL_DIM,
            heads=self.ATTENTION_HEADS,
            map_layers=self.MAP_LAYERS,
            scene_layers=self.SCENE_LAYERS,
            modes=self.NUM_MODES,
            leaky_slope=self.LEAKY_SLOPE,
            normalization=self.NORMALIZATION,
            bn_eps=self.BN_EPS,
            bn_momentum=self.BN_MOMENTUM,
            conv_kernel=self.CONV_KERNEL,
            refine_iterations=self.REFINE_ITERATIONS,
            refine_neighbors=self.REFINE_NEIGHBORS,
            refine_heads=self.REFINE_HEADS,
            refine_coord_scale_m=self.REFINE_COORD_SCALE_M,
            graph=self.graph_options(),
        )

    def training_options(self, **overrides) -> TrainingOptions:
        values = dict(
            steps=self.TRAIN_STEPS,
            batch_scenes=self.BATCH_SCENES,
            learning_rate=self.LEARNING_RATE,
            lr_schedule=self.LR_SCHEDULE,
            adam_beta1=self.ADAM_BETA1,
            adam_beta2=self.ADAM_BETA2,
            adam_eps=self.ADAM_EPS,
            checkpoint_every=self.CHECKPOINT_EVERY,
            log_every=self.LOG_EVERY,
            seed=self.SEED,
            threads=self.THREADS,
            traj_weight=self.LOSS_TRAJ_WEIGHT,
            margin=self.LOSS_MARGIN,
            importance=self.LOSS_IMPORTANCE,
            proposal_loss=self.E2E_PROPOSAL_LOSS,
            proposal_loss_weight=self.E2E_PROPOSAL_LOSS_WEIGHT,
            removed_relations=list(self.REMOVED_EDGE_TYPES),
        )
        values.update(overrides)
        return TrainingOptions(**values)


hgat_forecast_config = HgatForecastConfig(prefix="HGAT_")


def load_config(
    env_file: Optional[Union[str, Path]] = None, **overrides
) -> HgatForecastConfig:
    """Config read from the environment and an optional KEY=value file;
    keyword overrides win over both."""
    config = (
        HgatForecastConfig(prefix="HGAT_", env_file=env_file)
        if env_file is not None
        else HgatForecastConfig(prefix="HGAT_")
    )
    for key, value in overrides.items():
        if key not in config.entries:
            raise KeyError(f"unknown config key {key}")
        setattr(config, key, value)
    return config
