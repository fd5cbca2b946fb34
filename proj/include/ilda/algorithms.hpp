// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "ilda/corpus.hpp"
#include "ilda/trace.hpp"
#include "ilda/types.hpp"
#include "ilda/vi.hpp"

namespace ilda {

/// Robbins-Monro step size schedule rho_t = (t + tau)^(-kappa).
/// kappa must lie in (0.5, 1] for the usual convergence conditions to
/// hold; tau >= 0 downweights early steps.
struct Schedule {
  double kappa = 0.9;
  double tau = 1.0;

  void validate() const;
};

double learning_rate(std::int64_t t, const Schedule& schedule);

enum class Algorithm { MVI, SVI, IVI, SIVI };

Algorithm algorithm_from_string(const std::string& name);
std::string to_string(Algorithm algo);

struct TrainConfig {
  int n_topics = 100;
  double beta0 = 0.05;
  EStepConfig estep;  // carries alpha0 (default 0.5)
  Schedule schedule;
  int minibatch_size = 1;
  int epochs = 1;
  /// Stop after this many document visits; 0 derives the budget from
  /// epochs * n_docs.
  std::int64_t doc_budget = 0;
  std::uint64_t seed = 0;

  double alpha0() const { return estep.alpha0; }
  void validate() const;
};

/// Optional metric callback. Every cadence_docs processed documents (and
/// once at the end of the run) the trainer appends a TraceRecord and
/// hands it to fn for metrics to be filled in. cadence_docs == 0
/// disables tracing.
struct EvalProbe {
  std::int64_t cadence_docs = 0;
  std::function<void(TraceRecord&, const GlobalState&, const LocalStore&)> fn;
};

struct TrainResult {
  GlobalState state;
  LocalStore locals;
  RunTrace trace;
};

/// One full batch iteration: E-step over every document with fresh
/// initialization, then M = sum of count-weighted responsibilities and a
/// beta refresh.
void mvi_iteration(const Corpus& corpus, GlobalState& state,
                   const TrainConfig& cfg, LocalStore& locals);

/// One stochastic step at time t: fresh E-step on the minibatch, a
/// rescaled beta estimate beta0 + (D / |B|) * stats, and a blend with
/// step size rho_t.
void svi_step(GlobalState& state, const Corpus& corpus,
              std::span<const int> minibatch, std::int64_t t,
              const TrainConfig& cfg);

/// One incremental step: warm-started E-step on a single document,
/// replace its stored responsibilities, apply the exact delta.
void ivi_step(GlobalState& state, const Corpus& corpus, int doc_index,
              LocalStore& locals, const EStepConfig& estep);

/// One stochastic-incremental step at time t: exact deltas for the
/// minibatch are committed into M, then beta is blended toward the
/// implied target with step size rho_t.
void sivi_step(GlobalState& state, const Corpus& corpus,
               std::span<const int> minibatch, std::int64_t t,
               LocalStore& locals, const TrainConfig& cfg);

/// Runs the selected algorithm to its document budget. Deterministic
/// given cfg.seed. MVI and IVI sweep the corpus (IVI in a fresh random
/// order per epoch); SVI and S-IVI sample minibatches with replacement.
TrainResult train(const Corpus& corpus, Algorithm algo, const TrainConfig& cfg,
                  const EvalProbe& probe = {});

}  // namespace ilda
