from hgat_forecast.training.checkpoint import (
    Checkpoint,
    load_base,
    load_checkpoint,
    load_model,
    save_checkpoint,
)
from hgat_forecast.training.losses import (
    LossBreakdown,
    confidence_loss,
    select_best_modes,
    total_loss,
    trajectory_loss,
)
from hgat_forecast.training.trainer import (
    Trainer,
    TrainingResult,
    build_scene_graphs,
    loss_log_path,
    run_log_path,
    train,
)
