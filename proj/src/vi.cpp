// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include "ilda/vi.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "ilda/errors.hpp"
#include "ilda/math.hpp"
#include "ilda/rng.hpp"

namespace ilda {

void EStepConfig::validate() const {
  if (!(alpha0 > 0.0)) throw ConfigError("estep: alpha0 must be > 0");
  if (max_iters < 1) throw ConfigError("estep: max_iters must be >= 1");
}

double EStepConfig::resolved_tol(int n_topics) const {
  return tol > 0.0 ? tol : 1e-3 * static_cast<double>(n_topics);
}

double DeltaStats::total_mass() const {
  return values.size() == 0 ? 0.0 : values.sum();
}

void DeltaStats::merge(const DeltaStats& other) {
  if (other.words.empty()) return;
  if (words.empty()) {
    words = other.words;
    values = other.values;
    return;
  }
  if (values.cols() != other.values.cols())
    throw ContractError("DeltaStats::merge: topic dimension mismatch");

  std::vector<std::int32_t> merged;
  merged.reserve(words.size() + other.words.size());
  Matrix out(static_cast<Eigen::Index>(words.size() + other.words.size()),
             values.cols());
  std::size_t i = 0, j = 0;
  Eigen::Index r = 0;
  while (i < words.size() || j < other.words.size()) {
    const bool take_left =
        j >= other.words.size() ||
        (i < words.size() && words[i] < other.words[j]);
    const bool take_both =
        i < words.size() && j < other.words.size() && words[i] == other.words[j];
    if (take_both) {
      merged.push_back(words[i]);
      out.row(r) = values.row(static_cast<Eigen::Index>(i)) +
                   other.values.row(static_cast<Eigen::Index>(j));
      ++i;
      ++j;
    } else if (take_left) {
      merged.push_back(words[i]);
      out.row(r) = values.row(static_cast<Eigen::Index>(i));
      ++i;
    } else {
      merged.push_back(other.words[j]);
      out.row(r) = other.values.row(static_cast<Eigen::Index>(j));
      ++j;
    }
    ++r;
  }
  words = std::move(merged);
  values = out.topRows(r).eval();
}

std::size_t LocalStore::stored_count() const {
  std::size_t n = 0;
  for (const auto& s : slots_)
    if (s.has_value()) ++n;
  return n;
}

bool LocalStore::has(std::size_t idx) const {
  return idx < slots_.size() && slots_[idx].has_value();
}

const DocLocalState* LocalStore::find(std::size_t idx) const {
  if (idx >= slots_.size())
    throw ContractError("LocalStore: index " + std::to_string(idx) +
                        " out of range");
  return slots_[idx].has_value() ? &*slots_[idx] : nullptr;
}

const DocLocalState& LocalStore::at(std::size_t idx) const {
  const DocLocalState* p = find(idx);
  if (p == nullptr)
    throw ContractError("LocalStore: no state stored for document index " +
                        std::to_string(idx));
  return *p;
}

void LocalStore::put(std::size_t idx, DocLocalState state) {
  if (idx >= slots_.size())
    throw ContractError("LocalStore: index " + std::to_string(idx) +
                        " out of range");
  slots_[idx] = std::move(state);
}

double GlobalState::visited_fraction() const {
  if (anneal_total_ <= 0) return 1.0;
  const double f =
      static_cast<double>(visits_) / static_cast<double>(anneal_total_);
  return f < 1.0 ? f : 1.0;
}

double GlobalState::anneal_weight() const {
  const double w = 1.0 - visited_fraction();
  return w > 0.0 ? w : 0.0;
}

void GlobalState::note_processed(std::int64_t n_docs) {
  if (n_docs < 0) throw ContractError("note_processed: negative count");
  visits_ += n_docs;
}

void GlobalState::recompute_colsum() {
  colsum_ = beta_.colwise().sum().transpose();
}

GlobalState GlobalState::initialize(int vocab_size, int n_topics, double beta0,
                                    double token_mass, std::uint64_t seed,
                                    std::int64_t anneal_docs) {
  if (vocab_size < 1 || n_topics < 1)
    throw ConfigError("GlobalState: V and K must be >= 1");
  if (!(beta0 > 0.0)) throw ConfigError("GlobalState: beta0 must be > 0");
  if (token_mass < 0.0) throw ConfigError("GlobalState: token_mass must be >= 0");
  if (anneal_docs < 0) throw ConfigError("GlobalState: anneal_docs must be >= 0");

  GlobalState g;
  g.beta0_ = beta0;
  g.M_ = Matrix::Zero(vocab_size, n_topics);
  g.S_ = Matrix::Zero(vocab_size, n_topics);
  g.anneal_total_ = anneal_docs;
  if (anneal_docs > 0 && token_mass > 0.0) {
    Rng rng(mix_seed(seed, streams::kInitNoise));
    const double scale =
        token_mass / (static_cast<double>(vocab_size) * static_cast<double>(n_topics));
    for (int v = 0; v < vocab_size; ++v)
      for (int k = 0; k < n_topics; ++k)
        g.S_(v, k) = rng.gamma(100.0, 0.01) * scale;
  }
  g.refresh_beta();
  return g;
}

GlobalState GlobalState::restore(double beta0, Matrix beta,
                                 Matrix expected_counts, Matrix noise,
                                 std::int64_t anneal_docs, std::int64_t visits,
                                 std::int64_t step) {
  if (!(beta0 > 0.0)) throw ConfigError("GlobalState: beta0 must be > 0");
  if (beta.rows() < 1 || beta.cols() < 1)
    throw ConfigError("GlobalState: beta must be nonempty");
  if (expected_counts.rows() != beta.rows() ||
      expected_counts.cols() != beta.cols() || noise.rows() != beta.rows() ||
      noise.cols() != beta.cols())
    throw ConfigError("GlobalState: field shapes disagree");
  GlobalState g;
  g.beta0_ = beta0;
  g.beta_ = std::move(beta);
  g.M_ = std::move(expected_counts);
  g.S_ = std::move(noise);
  g.anneal_total_ = anneal_docs;
  g.visits_ = visits;
  g.step_ = step;
  g.recompute_colsum();
  return g;
}

Matrix GlobalState::target_beta() const {
  const double w = anneal_weight();
  return ((M_.array() + beta0_) + w * S_.array()).matrix();
}

void GlobalState::commit_delta(const DeltaStats& delta) {
  const Eigen::Index n = static_cast<Eigen::Index>(delta.words.size());
  if (delta.values.rows() != n ||
      (n > 0 && delta.values.cols() != M_.cols()))
    throw ContractError("commit_delta: delta shape mismatch");
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::int32_t v = delta.words[static_cast<std::size_t>(r)];
    if (v < 0 || v >= M_.rows())
      throw ContractError("commit_delta: word id out of range");
    for (Eigen::Index k = 0; k < M_.cols(); ++k) {
      double m = M_(v, k) + delta.values(r, k);
      if (m < 0.0) {
        if (m < -1e-9)
          throw StatisticsCorruptionError(
              "expected count went negative (word " + std::to_string(v) +
              ", topic " + std::to_string(k) + "): " + std::to_string(m));
        m = 0.0;
      }
      M_(v, k) = m;
    }
  }
}

void GlobalState::refresh_beta() {
  beta_ = target_beta();
  recompute_colsum();
}

void GlobalState::blend_beta(const Matrix& target, double rho) {
  if (target.rows() != beta_.rows() || target.cols() != beta_.cols())
    throw ContractError("blend_beta: target shape mismatch");
  if (!(rho >= 0.0) || rho > 1.0)
    throw ConfigError("blend_beta: rho must be in [0, 1]");
  beta_ = (1.0 - rho) * beta_ + rho * target;
  if (!beta_.allFinite() || beta_.minCoeff() <= 0.0)
    throw NumericError(
        "beta left the positive orthant after a blend step; inference diverged");
  recompute_colsum();
}

void GlobalState::set_expected_counts(Matrix counts) {
  if (counts.rows() != M_.rows() || counts.cols() != M_.cols())
    throw ContractError("set_expected_counts: shape mismatch");
  if ((counts.array() < 0.0).any())
    throw StatisticsCorruptionError("set_expected_counts: negative entry");
  M_ = std::move(counts);
}

namespace detail {

DocLocalState local_estep_view(const Document& doc, const BetaView& view,
                               const EStepConfig& cfg,
                               const DocLocalState* init) {
  cfg.validate();
  const Eigen::Index K = view.beta.cols();
  const Eigen::Index nnz = static_cast<Eigen::Index>(doc.entries.size());
  if (init != nullptr) {
    if (init->doc_id != doc.id)
      throw ContractError("local_estep: warm start belongs to document " +
                          std::to_string(init->doc_id) + ", not " +
                          std::to_string(doc.id));
    if (init->alpha.size() != K)
      throw ContractError("local_estep: warm start has wrong topic count");
  }
  const double tol = cfg.resolved_tol(static_cast<int>(K));

  Vector dig_colsum(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double s = view.colsum[k];
    if (!std::isfinite(s) || !(s > 0.0))
      throw NumericError("local_estep: invalid beta column sum");
    dig_colsum[k] = digamma(s);
  }
  Matrix elog_phi(nnz, K);
  for (Eigen::Index i = 0; i < nnz; ++i) {
    const std::int32_t v = doc.entries[static_cast<std::size_t>(i)].word;
    if (v < 0 || v >= view.beta.rows())
      throw ContractError("local_estep: word id out of range");
    for (Eigen::Index k = 0; k < K; ++k) {
      const double b = view.beta(v, k);
      if (!std::isfinite(b) || !(b > 0.0))
        throw NumericError("local_estep: non-finite or non-positive beta entry");
      elog_phi(i, k) = digamma(b) - dig_colsum[k];
    }
  }

  DocLocalState out;
  out.doc_id = doc.id;
  out.alpha = init ? init->alpha : Vector::Constant(K, cfg.alpha0);
  out.pi.resize(nnz, K);

  Vector logits(K);
  Vector row(K);
  Vector alpha_new(K);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const Vector elog_theta = dirichlet_expected_log(out.alpha);
    alpha_new.setConstant(cfg.alpha0);
    for (Eigen::Index i = 0; i < nnz; ++i) {
      logits = elog_theta + elog_phi.row(i).transpose();
      normalize_exp_into(logits, row);
      out.pi.row(i) = row.transpose();
      alpha_new +=
          static_cast<double>(doc.entries[static_cast<std::size_t>(i)].count) * row;
    }
    const double change = (alpha_new - out.alpha).cwiseAbs().mean();
    out.alpha = alpha_new;
    if (change < tol) break;
  }
  return out;
}

}  // namespace detail

DocLocalState local_estep(const Document& doc, const GlobalState& state,
                          const EStepConfig& cfg, const DocLocalState* init) {
  detail::BetaView view{state.beta(), state.beta_colsum()};
  return detail::local_estep_view(doc, view, cfg, init);
}

DeltaStats doc_delta(const DocLocalState* old_state,
                     const DocLocalState& new_state, const Document& doc) {
  const Eigen::Index nnz = static_cast<Eigen::Index>(doc.entries.size());
  if (new_state.doc_id != doc.id)
    throw ContractError("doc_delta: state does not belong to this document");
  if (new_state.pi.rows() != nnz)
    throw ContractError("doc_delta: responsibility rows do not match entries");
  if (old_state != nullptr) {
    if (old_state->doc_id != doc.id)
      throw ContractError("doc_delta: old state does not belong to this document");
    if (old_state->pi.rows() != nnz ||
        old_state->pi.cols() != new_state.pi.cols())
      throw ContractError("doc_delta: old state shape mismatch");
  }

  DeltaStats delta;
  delta.words.reserve(static_cast<std::size_t>(nnz));
  delta.values.resize(nnz, new_state.pi.cols());
  for (Eigen::Index i = 0; i < nnz; ++i) {
    const auto& e = doc.entries[static_cast<std::size_t>(i)];
    delta.words.push_back(e.word);
    const double c = static_cast<double>(e.count);
    if (old_state != nullptr)
      delta.values.row(i) = c * (new_state.pi.row(i) - old_state->pi.row(i));
    else
      delta.values.row(i) = c * new_state.pi.row(i);
  }
  return delta;
}

void apply_delta_exact(GlobalState& state, const DeltaStats& delta) {
  state.commit_delta(delta);
  state.refresh_beta();
}

double elbo_document_term(const Document& doc, const DocLocalState& local,
                          const GlobalState& state, double alpha0) {
  if (local.doc_id != doc.id)
    throw ContractError("elbo_document_term: state does not belong to document");
  const Eigen::Index K = state.beta().cols();
  const Eigen::Index nnz = static_cast<Eigen::Index>(doc.entries.size());
  if (local.alpha.size() != K || local.pi.rows() != nnz)
    throw ContractError("elbo_document_term: local state shape mismatch");
  if (!(alpha0 > 0.0)) throw ConfigError("elbo: alpha0 must be > 0");

  const Vector elog_theta = dirichlet_expected_log(local.alpha);
  Vector dig_colsum(K);
  for (Eigen::Index k = 0; k < K; ++k)
    dig_colsum[k] = digamma(state.beta_colsum()[k]);

  double total = std::lgamma(static_cast<double>(K) * alpha0) -
                 static_cast<double>(K) * std::lgamma(alpha0) -
                 std::lgamma(local.alpha.sum());
  for (Eigen::Index k = 0; k < K; ++k)
    total += std::lgamma(local.alpha[k]) +
             (alpha0 - local.alpha[k]) * elog_theta[k];

  for (Eigen::Index i = 0; i < nnz; ++i) {
    const auto& e = doc.entries[static_cast<std::size_t>(i)];
    const double c = static_cast<double>(e.count);
    for (Eigen::Index k = 0; k < K; ++k) {
      const double p = local.pi(i, k);
      if (p > 0.0) {
        const double elog_phi = digamma(state.beta()(e.word, k)) - dig_colsum[k];
        total += c * p * (elog_theta[k] + elog_phi - std::log(p));
      }
    }
  }
  return total;
}

double elbo(const Corpus& corpus, const GlobalState& state,
            const LocalStore& locals, double alpha0) {
  const Eigen::Index V = state.beta().rows();
  const Eigen::Index K = state.beta().cols();
  const double beta0 = state.beta0();

  Vector dig_colsum(K);
  for (Eigen::Index k = 0; k < K; ++k)
    dig_colsum[k] = digamma(state.beta_colsum()[k]);

  const double lg_vbeta0 = std::lgamma(static_cast<double>(V) * beta0);
  const double lg_beta0 = std::lgamma(beta0);
  double total = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    total += lg_vbeta0 - static_cast<double>(V) * lg_beta0 -
             std::lgamma(state.beta_colsum()[k]);
    for (Eigen::Index v = 0; v < V; ++v) {
      const double b = state.beta()(v, k);
      total += std::lgamma(b) + (beta0 - b) * (digamma(b) - dig_colsum[k]);
    }
  }

  for (std::size_t d = 0; d < corpus.documents.size(); ++d)
    total += elbo_document_term(corpus.documents[d], locals.at(d), state, alpha0);
  return total;
}

}  // namespace ilda
