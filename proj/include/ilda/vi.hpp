// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ilda/corpus.hpp"
#include "ilda/types.hpp"

namespace ilda {

/// Settings for the per-document fit.
struct EStepConfig {
  double alpha0 = 0.5;
  /// Convergence threshold on the mean absolute change of the document's
  /// Dirichlet parameter across topics. A value <= 0 selects the default
  /// 1e-3 * K at fit time.
  double tol = 0.0;
  int max_iters = 100;

  void validate() const;
  double resolved_tol(int n_topics) const;
};

/// Sparse update to the expected word-topic counts. Rows of values align
/// with the word ids in words; basis_step records the global step the
/// sender's beta copy reflected when the update was computed.
struct DeltaStats {
  std::vector<std::int32_t> words;
  Matrix values;  // words.size() x K
  std::int64_t basis_step = 0;

  double total_mass() const;
  /// Accumulates another delta; the result keeps word ids ascending.
  void merge(const DeltaStats& other);
};

/// Variational parameters of one document: the Dirichlet parameter over
/// topics and one responsibility row per distinct word, aligned with the
/// document's entries. Token identity beyond the word type never enters
/// the updates, so responsibilities are stored per type.
struct DocLocalState {
  std::int64_t doc_id = -1;
  Vector alpha;  // K
  Matrix pi;     // entries x K, rows sum to 1
};

/// Slot per corpus document, filled as documents are visited.
class LocalStore {
 public:
  LocalStore() = default;
  explicit LocalStore(std::size_t n_docs) : slots_(n_docs) {}

  std::size_t size() const { return slots_.size(); }
  std::size_t stored_count() const;
  bool has(std::size_t idx) const;
  /// nullptr when the document has not been visited yet.
  const DocLocalState* find(std::size_t idx) const;
  /// ContractError when the slot is empty.
  const DocLocalState& at(std::size_t idx) const;
  void put(std::size_t idx, DocLocalState state);

 private:
  std::vector<std::optional<DocLocalState>> slots_;
};

/// Word-topic side of the model: the variational Dirichlet parameters
/// beta (V x K), the expected count statistics M they are built from, and
/// a symmetry-breaking noise matrix S that is annealed away over the
/// first pass through the data.
///
/// Invariant outside of mutating calls:
///   beta = beta0 + M + max(0, 1 - visited_fraction) * S
/// except after blend_beta, where beta is a convex combination of its
/// previous value and a caller-supplied target. beta_colsum is always the
/// column sum of beta.
class GlobalState {
 public:
  GlobalState() = default;

  /// Fresh state: M = 0, S sampled from unit-mean Gamma(100, 0.01) noise
  /// scaled by token_mass / (V * K), beta refreshed. anneal_docs is the
  /// number of document visits over which the noise fades (one epoch);
  /// zero disables the noise entirely.
  static GlobalState initialize(int vocab_size, int n_topics, double beta0,
                                double token_mass, std::uint64_t seed,
                                std::int64_t anneal_docs);

  /// Rebuilds a state from raw fields, e.g. from a checkpoint. beta is
  /// taken verbatim; only the column sums are recomputed.
  static GlobalState restore(double beta0, Matrix beta, Matrix expected_counts,
                             Matrix noise, std::int64_t anneal_docs,
                             std::int64_t visits, std::int64_t step);

  int vocab_size() const { return static_cast<int>(beta_.rows()); }
  int n_topics() const { return static_cast<int>(beta_.cols()); }
  double beta0() const { return beta0_; }
  const Matrix& beta() const { return beta_; }
  const Vector& beta_colsum() const { return colsum_; }
  const Matrix& expected_counts() const { return M_; }
  const Matrix& noise() const { return S_; }
  std::int64_t step_count() const { return step_; }
  std::int64_t visits() const { return visits_; }
  std::int64_t anneal_docs() const { return anneal_total_; }
  double visited_fraction() const;
  double anneal_weight() const;

  /// Records document visits; drives the annealing schedule.
  void note_processed(std::int64_t n_docs);

  /// beta0 + M + anneal_weight() * S, the target beta implied by the
  /// current statistics.
  Matrix target_beta() const;

  /// Adds a delta into M. Entries pushed slightly negative by rounding
  /// (>= -1e-9) are clamped to zero; anything lower raises
  /// StatisticsCorruptionError. beta is not touched.
  void commit_delta(const DeltaStats& delta);

  /// beta := target_beta(), column sums refreshed.
  void refresh_beta();

  /// beta := (1 - rho) * beta + rho * target. Raises NumericError when
  /// the result is not strictly positive and finite (divergence).
  void blend_beta(const Matrix& target, double rho);

  /// Replaces M wholesale (batch M-step).
  void set_expected_counts(Matrix counts);

  void increment_step() { ++step_; }

 private:
  double beta0_ = 0.0;
  Matrix beta_;
  Matrix M_;
  Matrix S_;
  Vector colsum_;
  std::int64_t anneal_total_ = 0;
  std::int64_t visits_ = 0;
  std::int64_t step_ = 0;

  void recompute_colsum();
};

namespace detail {
/// Read-only view of the word-topic parameters an E-step consumes. Lets
/// distributed workers run the exact same fit against a snapshot copy.
struct BetaView {
  const Matrix& beta;
  const Vector& colsum;
};
DocLocalState local_estep_view(const Document& doc, const BetaView& view,
                               const EStepConfig& cfg,
                               const DocLocalState* init);
}  // namespace detail

/// Fits the document's variational parameters against the current beta.
/// Alternates the responsibility update and the alpha update, starting
/// from init when given (warm start) and from alpha0 otherwise, until the
/// mean absolute alpha change drops below tol or max_iters is reached.
DocLocalState local_estep(const Document& doc, const GlobalState& state,
                          const EStepConfig& cfg,
                          const DocLocalState* init = nullptr);

/// Count-weighted difference between a document's new and old
/// responsibilities. old_state may be null (first visit); then the delta
/// is simply the new statistics.
DeltaStats doc_delta(const DocLocalState* old_state,
                     const DocLocalState& new_state, const Document& doc);

/// Incremental application: commit the delta into M and refresh beta.
void apply_delta_exact(GlobalState& state, const DeltaStats& delta);

/// Full mean-field evidence lower bound for the given corpus and fitted
/// local states. Every document must be present in locals.
double elbo(const Corpus& corpus, const GlobalState& state,
            const LocalStore& locals, double alpha0);

/// The per-document part of the bound (theta prior and entropy, token
/// terms); topic terms live in elbo().
double elbo_document_term(const Document& doc, const DocLocalState& local,
                          const GlobalState& state, double alpha0);

}  // namespace ilda
