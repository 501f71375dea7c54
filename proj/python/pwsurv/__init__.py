"""Neural survival models with piecewise constant and linear output heads."""

from ._pwsurv import (
    DomainError,
    ParseError,
    TrainingDiverged,
    HEADS,
    Dataset,
    TimeGrid,
    TrainedModel,
    evaluate_head,
    generate_dataset,
    load_model,
    log_sum_exp,
    lr_sweep,
    replication_study,
    train,
    uniform_grid,
    weibull_survival,
)

__all__ = [
    "DomainError",
    "ParseError",
    "TrainingDiverged",
    "HEADS",
    "Dataset",
    "TimeGrid",
    "TrainedModel",
    "evaluate_head",
    "generate_dataset",
    "load_model",
    "log_sum_exp",
    "lr_sweep",
    "replication_study",
    "train",
    "uniform_grid",
    "weibull_survival",
]
