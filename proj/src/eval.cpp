// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include "ilda/eval.hpp"

#include <algorithm>
#include <cmath>

#include "ilda/errors.hpp"

namespace ilda {

Matrix posterior_topics(const GlobalState& state) {
  Matrix phi = state.beta();
  for (Eigen::Index k = 0; k < phi.cols(); ++k) {
    const double colsum = state.beta_colsum()[k];
    if (!(colsum > 0.0))
      throw NumericError("posterior_topics: nonpositive beta column sum");
    phi.col(k) /= colsum;
  }
  return phi;
}

Vector posterior_mixture(const DocLocalState& local) {
  const double total = local.alpha.sum();
  if (!(total > 0.0))
    throw NumericError("posterior_mixture: nonpositive alpha sum");
  return local.alpha / total;
}

std::pair<Vector, Matrix> posterior_means(const GlobalState& state,
                                          const DocLocalState& local) {
  return {posterior_mixture(local), posterior_topics(state)};
}

PredictiveResult per_word_predictive_ll(const GlobalState& state,
                                        const Corpus& test,
                                        const EStepConfig& estep,
                                        std::uint64_t split_seed) {
  estep.validate();
  const Matrix phi = posterior_topics(state);
  const Eigen::Index K = phi.cols();

  PredictiveResult result;
  result.documents.reserve(test.documents.size());
  for (const Document& doc : test.documents) {
    if (doc.n_tokens < 2) continue;
    const HeldOutSplit split = split_heldout(doc, split_seed);

    const DocLocalState fit = local_estep(split.observed, state, estep);
    const Vector theta = posterior_mixture(fit);

    DocScore score;
    score.doc_id = doc.id;
    for (const auto& e : split.heldout.entries) {
      double p = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) p += theta[k] * phi(e.word, k);
      if (!(p > 0.0))
        throw NumericError("per_word_predictive_ll: zero predictive mass");
      score.log_likelihood += static_cast<double>(e.count) * std::log(p);
      score.n_heldout += e.count;
    }
    result.documents.push_back(score);
  }
  if (result.documents.empty())
    throw ContractError(
        "per_word_predictive_ll: no test document has the two or more "
        "tokens needed for a split");

  // Aggregate in document-id order so the result does not depend on the
  // order documents arrived in.
  std::vector<const DocScore*> by_id;
  by_id.reserve(result.documents.size());
  for (const auto& s : result.documents) by_id.push_back(&s);
  std::sort(by_id.begin(), by_id.end(),
            [](const DocScore* a, const DocScore* b) { return a->doc_id < b->doc_id; });
  double total_ll = 0.0;
  std::int64_t total_tokens = 0;
  for (const DocScore* s : by_id) {
    total_ll += s->log_likelihood;
    total_tokens += s->n_heldout;
  }
  result.n_heldout_tokens = total_tokens;
  result.per_word_lpp =
      total_tokens > 0 ? total_ll / static_cast<double>(total_tokens) : 0.0;
  return result;
}

std::vector<std::pair<std::string, double>> top_words(const GlobalState& state,
                                                      const Vocabulary& vocab,
                                                      int topic, int n) {
  if (topic < 0 || topic >= state.n_topics())
    throw ContractError("top_words: topic index out of range");
  if (n < 0) throw ContractError("top_words: n must be >= 0");
  if (vocab.size() != state.vocab_size())
    throw ContractError("top_words: vocabulary size does not match state");

  const Matrix phi = posterior_topics(state);
  std::vector<int> order(static_cast<std::size_t>(state.vocab_size()));
  for (std::size_t v = 0; v < order.size(); ++v) order[v] = static_cast<int>(v);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return phi(a, topic) > phi(b, topic);
  });
  const int count = std::min<int>(n, state.vocab_size());
  std::vector<std::pair<std::string, double>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int v = order[static_cast<std::size_t>(i)];
    out.emplace_back(vocab.tokens[static_cast<std::size_t>(v)], phi(v, topic));
  }
  return out;
}

}  // namespace ilda
