"""Budgeted active labeling with uncertainty-weighted training.

Builds a training set under a fixed labeling budget by repeatedly querying
the labels of the most uncertain pool samples and fine-tuning a probabilistic
classifier whose per-sample losses are weighted by batch-normalized
uncertainty. Includes the evaluation harness that measures how representative
the constructed set is, and an HTTP service for human-in-the-loop labeling.
"""

from .core import (
    Dataset,
    DatasetError,
    LabelRecord,
    RoundPlan,
    Sample,
    gen_synthetic,
    load_dataset,
    plan_rounds,
    split_holdout,
)
from .evaluation import (
    accuracy,
    baseline_select,
    representativeness_divergence,
    sign_test,
)
from .experiment import ExperimentGrid, run_experiment
from .loop import (
    Oracle,
    SessionConfig,
    SessionError,
    SessionState,
    SimulatedOracle,
    run_session,
    start_session,
    submit_labels,
    warmup_random_labels,
)
from .model import (
    ClassifierParams,
    DivergedError,
    OptimizerState,
    TrainSchedule,
    cosine_lr,
    cross_entropy,
    grad_weighted_ce,
    init_params,
    predict_proba,
    step,
    train,
    weighted_batch_loss,
)
from .strategy import (
    PoolExhaustedError,
    UncertaintyScore,
    WeightingConfig,
    batch_weights,
    select_top,
    uncertainty,
)

__version__ = "0.1.0"
