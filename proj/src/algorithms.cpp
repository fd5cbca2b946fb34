// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include "ilda/algorithms.hpp"

#include <chrono>
#include <cmath>

#include "ilda/errors.hpp"
#include "ilda/rng.hpp"

namespace ilda {

void Schedule::validate() const {
  if (!(kappa > 0.5) || !(kappa <= 1.0))
    throw ConfigError("schedule: kappa must lie in (0.5, 1]");
  if (!(tau >= 0.0)) throw ConfigError("schedule: tau must be >= 0");
}

double learning_rate(std::int64_t t, const Schedule& schedule) {
  schedule.validate();
  const double base = static_cast<double>(t) + schedule.tau;
  if (!(base > 0.0))
    throw ConfigError("learning_rate: t + tau must be > 0");
  return std::pow(base, -schedule.kappa);
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "mvi") return Algorithm::MVI;
  if (name == "svi") return Algorithm::SVI;
  if (name == "ivi") return Algorithm::IVI;
  if (name == "sivi") return Algorithm::SIVI;
  throw ConfigError("unknown algorithm '" + name +
                    "', expected mvi, svi, ivi or sivi");
}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::MVI: return "mvi";
    case Algorithm::SVI: return "svi";
    case Algorithm::IVI: return "ivi";
    case Algorithm::SIVI: return "sivi";
  }
  throw ContractError("to_string: bad algorithm value");
}

void TrainConfig::validate() const {
  if (n_topics < 1) throw ConfigError("train: n_topics must be >= 1");
  if (!(beta0 > 0.0)) throw ConfigError("train: beta0 must be > 0");
  estep.validate();
  schedule.validate();
  if (minibatch_size < 1) throw ConfigError("train: minibatch_size must be >= 1");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (doc_budget < 0) throw ConfigError("train: doc_budget must be >= 0");
}

void mvi_iteration(const Corpus& corpus, GlobalState& state,
                   const TrainConfig& cfg, LocalStore& locals) {
  if (locals.size() != corpus.documents.size())
    throw ContractError("mvi_iteration: local store size mismatch");
  Matrix counts = Matrix::Zero(state.vocab_size(), state.n_topics());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const Document& doc = corpus.documents[d];
    DocLocalState fit = local_estep(doc, state, cfg.estep);
    for (Eigen::Index i = 0; i < fit.pi.rows(); ++i) {
      const auto& e = doc.entries[static_cast<std::size_t>(i)];
      counts.row(e.word) += static_cast<double>(e.count) * fit.pi.row(i);
    }
    locals.put(d, std::move(fit));
  }
  state.set_expected_counts(std::move(counts));
  state.note_processed(corpus.n_docs());
  state.refresh_beta();
  state.increment_step();
}

void svi_step(GlobalState& state, const Corpus& corpus,
              std::span<const int> minibatch, std::int64_t t,
              const TrainConfig& cfg) {
  if (minibatch.empty()) throw ContractError("svi_step: empty minibatch");
  const double rho = learning_rate(t, cfg.schedule);
  Matrix stats = Matrix::Zero(state.vocab_size(), state.n_topics());
  for (const int idx : minibatch) {
    if (idx < 0 || idx >= corpus.n_docs())
      throw ContractError("svi_step: document index out of range");
    const Document& doc = corpus.documents[static_cast<std::size_t>(idx)];
    const DocLocalState fit = local_estep(doc, state, cfg.estep);
    for (Eigen::Index i = 0; i < fit.pi.rows(); ++i) {
      const auto& e = doc.entries[static_cast<std::size_t>(i)];
      stats.row(e.word) += static_cast<double>(e.count) * fit.pi.row(i);
    }
  }
  const double scale = static_cast<double>(corpus.n_docs()) /
                       static_cast<double>(minibatch.size());
  const Matrix beta_hat = (scale * stats.array() + state.beta0()).matrix();
  state.note_processed(static_cast<std::int64_t>(minibatch.size()));
  state.blend_beta(beta_hat, rho);
  state.increment_step();
}

void ivi_step(GlobalState& state, const Corpus& corpus, int doc_index,
              LocalStore& locals, const EStepConfig& estep) {
  if (doc_index < 0 || doc_index >= corpus.n_docs())
    throw ContractError("ivi_step: document index out of range");
  const Document& doc = corpus.documents[static_cast<std::size_t>(doc_index)];
  const std::size_t idx = static_cast<std::size_t>(doc_index);
  const DocLocalState* old_state = locals.find(idx);
  DocLocalState fit = local_estep(doc, state, estep, old_state);
  DeltaStats delta = doc_delta(old_state, fit, doc);
  delta.basis_step = state.step_count();
  locals.put(idx, std::move(fit));
  state.note_processed(1);
  state.commit_delta(delta);
  state.refresh_beta();
  state.increment_step();
}

void sivi_step(GlobalState& state, const Corpus& corpus,
               std::span<const int> minibatch, std::int64_t t,
               LocalStore& locals, const TrainConfig& cfg) {
  if (minibatch.empty()) throw ContractError("sivi_step: empty minibatch");
  const double rho = learning_rate(t, cfg.schedule);
  DeltaStats agg;
  agg.basis_step = state.step_count();
  for (const int idx : minibatch) {
    if (idx < 0 || idx >= corpus.n_docs())
      throw ContractError("sivi_step: document index out of range");
    const Document& doc = corpus.documents[static_cast<std::size_t>(idx)];
    const std::size_t slot = static_cast<std::size_t>(idx);
    const DocLocalState* old_state = locals.find(slot);
    DocLocalState fit = local_estep(doc, state, cfg.estep, old_state);
    agg.merge(doc_delta(old_state, fit, doc));
    locals.put(slot, std::move(fit));
  }
  state.note_processed(static_cast<std::int64_t>(minibatch.size()));
  state.commit_delta(agg);
  state.blend_beta(state.target_beta(), rho);
  state.increment_step();
}

namespace {

class TraceTicker {
 public:
  TraceTicker(RunTrace& trace, const EvalProbe& probe)
      : trace_(trace),
        probe_(probe),
        start_(std::chrono::steady_clock::now()),
        next_(probe.cadence_docs) {}

  void tick(std::int64_t docs_processed, const GlobalState& state,
            const LocalStore& locals, bool force = false) {
    if (probe_.cadence_docs <= 0) return;
    if (!force && docs_processed < next_) return;
    if (force && (docs_processed <= last_emitted_ || docs_processed == 0))
      return;
    TraceRecord r;
    r.docs_processed = docs_processed;
    r.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start_)
                    .count();
    if (probe_.fn) probe_.fn(r, state, locals);
    trace_.append(std::move(r));
    last_emitted_ = docs_processed;
    while (next_ <= docs_processed) next_ += probe_.cadence_docs;
  }

 private:
  RunTrace& trace_;
  const EvalProbe& probe_;
  std::chrono::steady_clock::time_point start_;
  std::int64_t next_;
  std::int64_t last_emitted_ = -1;
};

}  // namespace

TrainResult train(const Corpus& corpus, Algorithm algo, const TrainConfig& cfg,
                  const EvalProbe& probe) {
  cfg.validate();
  const int n_docs = corpus.n_docs();
  if (n_docs < 1) throw ConfigError("train: corpus has no documents");

  TrainResult result;
  result.state = GlobalState::initialize(
      corpus.vocab_size(), cfg.n_topics, cfg.beta0,
      static_cast<double>(corpus.total_tokens()), cfg.seed, n_docs);
  result.locals = LocalStore(static_cast<std::size_t>(n_docs));

  const std::int64_t budget =
      cfg.doc_budget > 0
          ? cfg.doc_budget
          : static_cast<std::int64_t>(cfg.epochs) * static_cast<std::int64_t>(n_docs);

  TraceTicker ticker(result.trace, probe);
  std::int64_t docs = 0;

  switch (algo) {
    case Algorithm::MVI: {
      while (docs < budget) {
        mvi_iteration(corpus, result.state, cfg, result.locals);
        docs += n_docs;
        ticker.tick(docs, result.state, result.locals);
      }
      break;
    }
    case Algorithm::IVI: {
      int epoch = 0;
      while (docs < budget) {
        const std::vector<int> order = visit_order(n_docs, epoch, cfg.seed);
        for (const int d : order) {
          if (docs >= budget) break;
          ivi_step(result.state, corpus, d, result.locals, cfg.estep);
          ++docs;
          ticker.tick(docs, result.state, result.locals);
        }
        ++epoch;
      }
      break;
    }
    case Algorithm::SVI:
    case Algorithm::SIVI: {
      Rng sampler(mix_seed(cfg.seed, streams::kSampler, 0));
      std::vector<int> batch(static_cast<std::size_t>(cfg.minibatch_size));
      while (docs < budget) {
        for (auto& idx : batch)
          idx = static_cast<int>(
              sampler.uniform_below(static_cast<std::uint64_t>(n_docs)));
        // Step index is 1-based: the first update uses rho_1.
        const std::int64_t t = result.state.step_count() + 1;
        if (algo == Algorithm::SVI)
          svi_step(result.state, corpus, batch, t, cfg);
        else
          sivi_step(result.state, corpus, batch, t, result.locals, cfg);
        docs += cfg.minibatch_size;
        ticker.tick(docs, result.state, result.locals);
      }
      break;
    }
  }

  ticker.tick(docs, result.state, result.locals, /*force=*/true);
  return result;
}

}  // namespace ilda
