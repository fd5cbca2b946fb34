# Copyright 2026 the ilda authors
# SPDX-License-Identifier: Apache-2.0
"""Topic model inference: batch, incremental and distributed variational
training for latent Dirichlet allocation."""

from ._core import (
    Checkpoint,
    Corpus,
    DelayModel,
    DiviOptions,
    DiviResult,
    DiviStats,
    DocEntry,
    DocScore,
    Document,
    EStepConfig,
    GlobalState,
    LocalStore,
    PredictiveResult,
    RunMode,
    Schedule,
    SynthResult,
    TraceRecord,
    TrainConfig,
    TrainResult,
    Transport,
    bars_topics,
    elbo,
    learning_rate,
    load_checkpoint,
    load_uci_bow,
    make_corpus,
    per_word_predictive_ll,
    posterior_topics,
    run_divi,
    save_checkpoint,
    synth_lda_corpus,
    top_words,
    train,
    write_uci_bow,
)

__version__ = "0.1.0"

__all__ = [
    "Checkpoint",
    "Corpus",
    "DelayModel",
    "DiviOptions",
    "DiviResult",
    "DiviStats",
    "DocEntry",
    "DocScore",
    "Document",
    "EStepConfig",
    "GlobalState",
    "LocalStore",
    "PredictiveResult",
    "RunMode",
    "Schedule",
    "SynthResult",
    "TraceRecord",
    "TrainConfig",
    "TrainResult",
    "Transport",
    "bars_topics",
    "elbo",
    "learning_rate",
    "load_checkpoint",
    "load_uci_bow",
    "make_corpus",
    "per_word_predictive_ll",
    "posterior_topics",
    "run_divi",
    "save_checkpoint",
    "synth_lda_corpus",
    "top_words",
    "train",
    "write_uci_bow",
]
