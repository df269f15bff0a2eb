from .evaluate import EvalResult, LanePredictor, evaluate_on_dataset
from .losses import adv_fea_losses, total_generative_loss
from .schedule import LrSchedule, lr_at
from .train import (
    EpochRecord,
    RunResult,
    SeedRunRecord,
    StrategyConfig,
    normalize_strategy,
    select_best_checkpoint,
    train,
    train_translation_only,
)
from .trainers import AdaTrainer, GenerativeTrainer, SupervisedTrainer

__all__ = [
    "AdaTrainer",
    "EpochRecord",
    "EvalResult",
    "GenerativeTrainer",
    "LanePredictor",
    "LrSchedule",
    "RunResult",
    "SeedRunRecord",
    "StrategyConfig",
    "SupervisedTrainer",
    "adv_fea_losses",
    "evaluate_on_dataset",
    "lr_at",
    "normalize_strategy",
    "select_best_checkpoint",
    "total_generative_loss",
    "train",
    "train_translation_only",
]
