"""Counterfactual training of sequence policies from logged bandit feedback."""

from ._core import (
    ConfigError,
    DataError,
    EnumerationLimitError,
    FeedbackChannel,
    InteractionLog,
    LoggedInteraction,
    NumericError,
    Rater,
    SequencePolicy,
    TaskSpec,
    TraceRow,
    TrainConfig,
    TrainResult,
    baseline_center,
    derive_seed,
    desk_task,
    generate_log,
    krippendorff_alpha,
    likert_quantize,
    load_policy,
    objective_loss,
    output_space_size,
    read_log_jsonl,
    save_policy,
    train,
    value_brute_force,
    value_monte_carlo,
    value_self_normalized,
    write_log_jsonl,
)

__all__ = [
    "ConfigError",
    "DataError",
    "EnumerationLimitError",
    "FeedbackChannel",
    "InteractionLog",
    "LoggedInteraction",
    "NumericError",
    "Rater",
    "SequencePolicy",
    "TaskSpec",
    "TraceRow",
    "TrainConfig",
    "TrainResult",
    "baseline_center",
    "derive_seed",
    "desk_task",
    "generate_log",
    "krippendorff_alpha",
    "likert_quantize",
    "load_policy",
    "objective_loss",
    "output_space_size",
    "read_log_jsonl",
    "save_policy",
    "train",
    "value_brute_force",
    "value_monte_carlo",
    "value_self_normalized",
    "write_log_jsonl",
]
