// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ilda/algorithms.hpp"
#include "ilda/corpus.hpp"
#include "ilda/rng.hpp"
#include "ilda/trace.hpp"
#include "ilda/vi.hpp"
#include "ilda/wire.hpp"

namespace ilda {

using wire::BetaSnapshot;

struct ShardAssignment {
  int n_workers = 0;
  std::vector<std::vector<int>> shards;  // document indices, each ascending
};

/// Seeded balanced partition of the corpus documents into P disjoint
/// shards whose sizes differ by at most one. P must not exceed the
/// document count.
ShardAssignment split_shards(const Corpus& corpus, int n_workers,
                             std::uint64_t seed);

/// Injected straggler behavior: with probability sleep_prob a worker
/// sleeps for a normal(mu, sigma) duration, clamped at zero.
struct DelayModel {
  double sleep_prob = 0.0;
  double mu = 0.0;     // seconds
  double sigma = 0.0;  // seconds
  std::uint64_t seed = 0;

  /// Applies the sigma = mu / 5 convention.
  static DelayModel make(double sleep_prob, double mu, std::uint64_t seed);

  void validate() const;
  /// Sampled sleep duration in seconds; 0 when the coin says no sleep.
  double sample(Rng& rng) const;
};

/// One worker: its shard, its documents' variational parameters, and a
/// possibly stale copy of beta. Workers never touch documents outside
/// their shard.
struct WorkerState {
  int worker_id = 0;
  std::vector<int> shard;
  LocalStore locals;
  Matrix beta_snapshot;
  Vector snapshot_colsum;
  std::int64_t snapshot_step = 0;
  Rng sampler{0};
  Rng delay_rng{0};
};

/// Installs a new snapshot; the column sums are recomputed locally.
void worker_receive(WorkerState& worker, const BetaSnapshot& snapshot);

struct WorkerStepResult {
  DeltaStats delta;
  double slept_seconds = 0.0;
  std::int64_t batch_tokens = 0;
};

/// Samples minibatch_size documents (with replacement) from the worker's
/// shard, runs warm-started E-steps against the snapshot, and returns the
/// merged exact delta stamped with snapshot_step. The sampled sleep is
/// executed only when apply_sleep is set; simulation advances a virtual
/// clock with the returned duration instead.
WorkerStepResult worker_step(WorkerState& worker, const Corpus& corpus,
                             int minibatch_size, const EStepConfig& estep,
                             const DelayModel& delay, bool apply_sleep);

/// The master's side of the protocol: the global state plus the step
/// schedule. Applications are serialized by the caller.
struct MasterState {
  GlobalState global;
  Schedule schedule;
  int minibatch_size = 1;
  std::int64_t applied = 0;
};

/// Applies one delta: t advances by one, M absorbs the delta, beta is
/// blended toward beta0 + M (+ annealed S) with rho_t. Staleness of the
/// sender's snapshot is unbounded by design. Returns the fresh beta
/// snapshot to send back.
BetaSnapshot master_apply(MasterState& master, const DeltaStats& delta);

enum class RunMode { kSimulated, kLive };
enum class Transport { kInProcess, kSocket };

struct DiviOptions {
  RunMode mode = RunMode::kSimulated;
  Transport transport = Transport::kInProcess;
  /// Live mode: how long the master waits without any worker message
  /// before treating a crashed worker as fatal.
  double grace_period_seconds = 10.0;
  /// Simulated mode: virtual E-step cost per token, jittered +-10%.
  double per_token_cost_seconds = 2e-6;
  /// Test hook: worker that throws after its nth send (-1 disables).
  int inject_crash_worker = -1;
  std::int64_t inject_crash_after_sends = 1;
};

/// Metric callback at a document cadence, evaluated at the master.
struct DiviProbe {
  std::int64_t cadence_docs = 0;
  std::function<void(TraceRecord&, const GlobalState&)> fn;
};

struct DiviStats {
  std::int64_t deltas_applied = 0;
  std::int64_t docs_processed = 0;
  double seconds = 0.0;  // virtual in simulated mode, wall clock in live
  std::vector<std::int64_t> sent_per_worker;
  std::vector<std::int64_t> replies_per_worker;
};

struct DiviResult {
  GlobalState state;
  RunTrace trace;
  DiviStats stats;
};

/// Runs asynchronous distributed inference: P workers compute deltas
/// against stale snapshots, one master serializes applications, each
/// applied delta is answered with a fresh snapshot. Live mode runs real
/// threads (in-process queues or a localhost socket transport); simulated
/// mode replays the protocol under a seeded virtual clock and is fully
/// deterministic.
DiviResult run_divi(const Corpus& corpus, int n_workers, const TrainConfig& cfg,
                    const DelayModel& delay, std::int64_t doc_budget,
                    const DiviOptions& options = {},
                    const DiviProbe& probe = {});

}  // namespace ilda
