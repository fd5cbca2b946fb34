// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ilda/corpus.hpp"
#include "ilda/types.hpp"
#include "ilda/vi.hpp"

namespace ilda {

/// Column-normalized beta: phi_hat(v, k) = beta(v, k) / sum_v beta(v, k).
Matrix posterior_topics(const GlobalState& state);

/// Mean of the document's topic Dirichlet: alpha / sum(alpha).
Vector posterior_mixture(const DocLocalState& local);

/// Both point estimates at once: (theta_hat, phi_hat).
std::pair<Vector, Matrix> posterior_means(const GlobalState& state,
                                          const DocLocalState& local);

struct DocScore {
  std::int64_t doc_id = 0;
  double log_likelihood = 0.0;  // summed over the document's held-out tokens
  std::int64_t n_heldout = 0;
};

struct PredictiveResult {
  double per_word_lpp = 0.0;
  std::int64_t n_heldout_tokens = 0;
  std::vector<DocScore> documents;
};

/// Held-out per-word predictive log likelihood. Each test document is
/// split at the token level (seeded per document id from split_seed), the
/// observed half is fitted with a fresh E-step against the trained beta,
/// and the held-out half is scored under
///   p(w) = sum_k theta_hat_k * phi_hat_{w,k}.
/// Documents with fewer than 2 tokens are skipped. The aggregate is
/// independent of document order.
PredictiveResult per_word_predictive_ll(const GlobalState& state,
                                        const Corpus& test,
                                        const EStepConfig& estep,
                                        std::uint64_t split_seed);

/// The n highest-probability tokens of one topic; ties broken by
/// ascending word index.
std::vector<std::pair<std::string, double>> top_words(const GlobalState& state,
                                                      const Vocabulary& vocab,
                                                      int topic, int n);

}  // namespace ilda
