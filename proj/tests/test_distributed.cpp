// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ilda/distributed.hpp"
#include "ilda/errors.hpp"

using namespace ilda;

namespace {

Corpus six_doc_corpus() {
  return synth_lda_corpus(2, 8, 6, 6, 0.5, std::nullopt, 3).corpus;
}

TrainConfig divi_config() {
  TrainConfig cfg;
  cfg.n_topics = 2;
  cfg.beta0 = 0.05;
  cfg.estep.alpha0 = 0.5;
  cfg.schedule.kappa = 0.9;
  cfg.schedule.tau = 1.0;
  cfg.minibatch_size = 2;
  cfg.doc_budget = 12;
  cfg.seed = 11;
  return cfg;
}

DeltaStats dyadic_delta(std::int64_t basis,
                        std::vector<std::pair<int, std::pair<double, double>>> rows) {
  DeltaStats d;
  d.basis_step = basis;
  d.values.resize(static_cast<Eigen::Index>(rows.size()), 2);
  Eigen::Index r = 0;
  for (const auto& [word, vals] : rows) {
    d.words.push_back(word);
    d.values(r, 0) = vals.first;
    d.values(r, 1) = vals.second;
    ++r;
  }
  return d;
}

}  // namespace

TEST_SUITE_BEGIN("distributed");

TEST_CASE("shards are balanced, disjoint and sorted") {
  const Corpus corpus = synth_lda_corpus(2, 6, 10, 4, 0.5, std::nullopt, 1).corpus;

  const ShardAssignment a = split_shards(corpus, 3, 42);
  REQUIRE(a.shards.size() == 3);
  CHECK(a.shards[0].size() == 4);
  CHECK(a.shards[1].size() == 3);
  CHECK(a.shards[2].size() == 3);

  std::set<int> seen;
  for (const auto& shard : a.shards) {
    CHECK(std::is_sorted(shard.begin(), shard.end()));
    for (const int d : shard) {
      CHECK(seen.insert(d).second);
      CHECK(d >= 0);
      CHECK(d < 10);
    }
  }
  CHECK(seen.size() == 10);

  const ShardAssignment b = split_shards(corpus, 3, 42);
  CHECK(a.shards == b.shards);
  const ShardAssignment c = split_shards(corpus, 3, 43);
  CHECK(a.shards != c.shards);

  const ShardAssignment singles = split_shards(corpus, 10, 7);
  for (const auto& shard : singles.shards) CHECK(shard.size() == 1);

  CHECK_THROWS_AS(split_shards(corpus, 0, 1), ConfigError);
  CHECK_THROWS_AS(split_shards(corpus, 11, 1), ConfigError);
}

TEST_CASE("the delay model clamps, short-circuits and applies sigma = mu/5") {
  const DelayModel made = DelayModel::make(0.25, 10.0, 9);
  CHECK(made.sigma == 2.0);
  CHECK(made.sleep_prob == 0.25);

  DelayModel bad;
  bad.sleep_prob = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.sleep_prob = 1.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.sleep_prob = 0.5;
  bad.mu = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.mu = 1.0;
  bad.sigma = -0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  // sleep_prob == 0 must not consume randomness: the next draw from the
  // generator is the same as from an untouched twin.
  DelayModel off;
  Rng used(5);
  Rng twin(5);
  CHECK(off.sample(used) == 0.0);
  CHECK(used.uniform() == twin.uniform());

  DelayModel noisy;
  noisy.sleep_prob = 1.0;
  noisy.mu = 0.0;
  noisy.sigma = 1.0;
  Rng rng(17);
  int zeros = 0;
  int positives = 0;
  for (int i = 0; i < 64; ++i) {
    const double s = noisy.sample(rng);
    CHECK(s >= 0.0);
    if (s == 0.0)
      ++zeros;
    else
      ++positives;
  }
  CHECK(zeros > 0);
  CHECK(positives > 0);

  DelayModel fixed;
  fixed.sleep_prob = 1.0;
  fixed.mu = 5.0;
  fixed.sigma = 0.0;
  Rng frng(3);
  for (int i = 0; i < 8; ++i) CHECK(fixed.sample(frng) == 5.0);
}

TEST_CASE("worker_step replays the per-document delta pipeline") {
  const Corpus corpus = testutil::toy_corpus();
  Matrix beta(5, 2);
  beta << 0.8, 0.3, 0.4, 1.1, 0.9, 0.2, 0.5, 0.7, 0.6, 1.0;
  EStepConfig estep;
  estep.alpha0 = 0.5;

  WorkerState worker;
  worker.worker_id = 0;
  worker.shard = {0, 1, 2, 3};
  worker.locals = LocalStore(corpus.documents.size());
  worker_receive(worker, BetaSnapshot{beta, 7});
  worker.sampler = Rng(mix_seed(42, streams::kSampler, 0));
  worker.delay_rng = Rng(mix_seed(0, streams::kDelay, 0));

  const DelayModel off;
  const WorkerStepResult got = worker_step(worker, corpus, 3, estep, off, false);

  // Twin generator replays the same picks through the documented path:
  // warm-started E-step against the snapshot, exact delta, merge.
  const Vector colsum = beta.colwise().sum().transpose();
  const detail::BetaView view{beta, colsum};
  Rng twin(mix_seed(42, streams::kSampler, 0));
  LocalStore mirror(corpus.documents.size());
  DeltaStats expected;
  expected.basis_step = 7;
  std::int64_t tokens = 0;
  for (int j = 0; j < 3; ++j) {
    const int pick = static_cast<int>(twin.uniform_below(4));
    const Document& doc = corpus.documents[static_cast<std::size_t>(pick)];
    const std::size_t slot = static_cast<std::size_t>(pick);
    const DocLocalState* old_state = mirror.find(slot);
    DocLocalState fit = detail::local_estep_view(doc, view, estep, old_state);
    expected.merge(doc_delta(old_state, fit, doc));
    mirror.put(slot, std::move(fit));
    tokens += doc.n_tokens;
  }

  CHECK(got.delta.basis_step == 7);
  CHECK(got.batch_tokens == tokens);
  CHECK(got.slept_seconds == 0.0);
  CHECK(got.delta.words == expected.words);
  CHECK(testutil::bitwise_equal(got.delta.values, expected.values));

  WorkerState empty;
  empty.beta_snapshot = beta;
  empty.snapshot_colsum = colsum;
  empty.locals = LocalStore(corpus.documents.size());
  CHECK_THROWS_AS(worker_step(empty, corpus, 1, estep, off, false),
                  ContractError);
  CHECK_THROWS_AS(worker_step(worker, corpus, 0, estep, off, false),
                  ContractError);
}

TEST_CASE("master_apply blends toward the committed statistics") {
  Matrix m(3, 2);
  m << 1.0, 0.5, 0.25, 2.0, 0.75, 0.0;
  const double beta0 = 0.25;
  const Matrix beta = m.array() + beta0;

  MasterState master;
  master.global = GlobalState::restore(beta0, beta, m,
                                       Matrix::Zero(3, 2), 0, 0, 0);
  master.schedule.kappa = 1.0;
  master.schedule.tau = 0.0;
  master.minibatch_size = 2;

  // rho_1 = 1, so the first application lands exactly on beta0 + M.
  const DeltaStats d1 = dyadic_delta(0, {{0, {0.5, 0.25}}, {2, {0.0, 1.5}}});
  const Matrix m_before = master.global.expected_counts();
  const BetaSnapshot snap = master_apply(master, d1);

  Matrix m_expected = m_before;
  m_expected(0, 0) += 0.5;
  m_expected(0, 1) += 0.25;
  m_expected(2, 1) += 1.5;
  CHECK(testutil::bitwise_equal(master.global.expected_counts(), m_expected));
  CHECK(testutil::bitwise_equal(master.global.beta(),
                                Matrix(m_expected.array() + beta0)));
  CHECK(testutil::bitwise_equal(snap.beta, master.global.beta()));
  CHECK(snap.step == 1);
  CHECK(master.applied == 1);
  CHECK(master.global.step_count() == 1);
  CHECK(master.global.visits() == 2);

  // Zero deltas leave the state at its fixed point up to blend rounding.
  const Matrix fixed = master.global.beta();
  DeltaStats zero;
  for (int i = 0; i < 5; ++i) master_apply(master, zero);
  CHECK(testutil::max_rel_diff(master.global.beta(), fixed) <= 1e-14);
  CHECK(testutil::bitwise_equal(master.global.expected_counts(), m_expected));
  CHECK(master.applied == 6);
}

TEST_CASE("exact deltas commute in the expected counts") {
  Matrix m(3, 2);
  m << 1.0, 0.5, 0.25, 2.0, 0.75, 0.5;
  const double beta0 = 0.25;
  const Matrix beta = m.array() + beta0;
  const DeltaStats d1 = dyadic_delta(3, {{0, {0.5, -0.25}}, {1, {0.75, 0.0}}});
  const DeltaStats d2 = dyadic_delta(5, {{1, {-0.25, 1.5}}, {2, {0.5, 0.25}}});

  MasterState ab;
  ab.global = GlobalState::restore(beta0, beta, m, Matrix::Zero(3, 2), 0, 0, 0);
  ab.schedule.kappa = 1.0;
  ab.schedule.tau = 0.0;
  master_apply(ab, d1);
  master_apply(ab, d2);

  MasterState ba;
  ba.global = GlobalState::restore(beta0, beta, m, Matrix::Zero(3, 2), 0, 0, 0);
  ba.schedule = ab.schedule;
  master_apply(ba, d2);
  master_apply(ba, d1);

  // Dyadic values keep the accumulation exact, so M is identical in both
  // orders; beta differs only through the blend weights (rho_1 = 1,
  // rho_2 = 1/2), and with exact arithmetic the end states are
  // base + first + second/2 for each order.
  CHECK(testutil::bitwise_equal(ab.global.expected_counts(),
                                ba.global.expected_counts()));
  Matrix dense1 = Matrix::Zero(3, 2);
  dense1(0, 0) = 0.5;
  dense1(0, 1) = -0.25;
  dense1(1, 0) = 0.75;
  Matrix dense2 = Matrix::Zero(3, 2);
  dense2(1, 0) = -0.25;
  dense2(1, 1) = 1.5;
  dense2(2, 0) = 0.5;
  dense2(2, 1) = 0.25;
  CHECK(testutil::bitwise_equal(ab.global.beta(),
                                Matrix(beta + dense1 + 0.5 * dense2)));
  CHECK(testutil::bitwise_equal(ba.global.beta(),
                                Matrix(beta + dense2 + 0.5 * dense1)));
}

TEST_CASE("one worker reproduces single-host stochastic-incremental training") {
  const Corpus corpus = six_doc_corpus();
  const TrainConfig cfg = divi_config();

  const TrainResult host = train(corpus, Algorithm::SIVI, cfg);

  DiviOptions options;
  options.mode = RunMode::kSimulated;
  const DiviResult sim = run_divi(corpus, 1, cfg, DelayModel{}, cfg.doc_budget,
                                  options);

  CHECK(testutil::bitwise_equal(sim.state.beta(), host.state.beta()));
  CHECK(testutil::bitwise_equal(sim.state.expected_counts(),
                                host.state.expected_counts()));
  CHECK(sim.state.step_count() == host.state.step_count());
  CHECK(sim.stats.deltas_applied == 6);
  CHECK(sim.stats.docs_processed == 12);
}

TEST_CASE("live transports reproduce the simulated run") {
  const Corpus corpus = six_doc_corpus();
  const TrainConfig cfg = divi_config();

  DiviOptions sim_options;
  sim_options.mode = RunMode::kSimulated;
  const DiviResult sim = run_divi(corpus, 1, cfg, DelayModel{}, cfg.doc_budget,
                                  sim_options);

  DiviOptions live;
  live.mode = RunMode::kLive;
  live.transport = Transport::kInProcess;
  const DiviResult inproc = run_divi(corpus, 1, cfg, DelayModel{},
                                     cfg.doc_budget, live);
  CHECK(testutil::bitwise_equal(inproc.state.beta(), sim.state.beta()));
  CHECK(testutil::bitwise_equal(inproc.state.expected_counts(),
                                sim.state.expected_counts()));
  CHECK(inproc.stats.deltas_applied == sim.stats.deltas_applied);

  live.transport = Transport::kSocket;
  const DiviResult socket = run_divi(corpus, 1, cfg, DelayModel{},
                                     cfg.doc_budget, live);
  CHECK(testutil::bitwise_equal(socket.state.beta(), sim.state.beta()));
  CHECK(testutil::bitwise_equal(socket.state.expected_counts(),
                                sim.state.expected_counts()));
  CHECK(socket.stats.deltas_applied == sim.stats.deltas_applied);
}

TEST_CASE("simulated runs are deterministic and sensitive to delays") {
  const Corpus corpus = six_doc_corpus();
  TrainConfig cfg = divi_config();
  cfg.minibatch_size = 1;
  cfg.doc_budget = 24;

  DelayModel delay = DelayModel::make(0.5, 0.01, 77);
  DiviOptions options;
  options.mode = RunMode::kSimulated;

  DiviProbe probe;
  probe.cadence_docs = 8;
  probe.fn = [](TraceRecord& r, const GlobalState& state) {
    r.elbo = state.beta().sum();
  };

  const DiviResult a = run_divi(corpus, 4, cfg, delay, cfg.doc_budget,
                                options, probe);
  const DiviResult b = run_divi(corpus, 4, cfg, delay, cfg.doc_budget,
                                options, probe);

  CHECK(testutil::bitwise_equal(a.state.beta(), b.state.beta()));
  CHECK(a.stats.seconds == b.stats.seconds);
  CHECK(a.stats.sent_per_worker == b.stats.sent_per_worker);
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  CHECK(a.trace.records.size() >= 3);
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
    CHECK(a.trace.records[i].docs_processed == b.trace.records[i].docs_processed);
    CHECK(a.trace.records[i].seconds == b.trace.records[i].seconds);
    CHECK(*a.trace.records[i].elbo == *b.trace.records[i].elbo);
  }
  CHECK(a.stats.seconds > 0.0);

  DelayModel other = DelayModel::make(0.5, 0.01, 78);
  const DiviResult c = run_divi(corpus, 4, cfg, other, cfg.doc_budget, options);
  CHECK_FALSE(testutil::bitwise_equal(a.state.beta(), c.state.beta()));
}

TEST_CASE("every sent delta is answered and the budget is honored") {
  const Corpus corpus = six_doc_corpus();
  TrainConfig cfg = divi_config();
  cfg.minibatch_size = 1;
  cfg.doc_budget = 10;

  DiviOptions options;
  options.mode = RunMode::kSimulated;
  const DiviResult sim = run_divi(corpus, 3, cfg, DelayModel{}, cfg.doc_budget,
                                  options);
  CHECK(sim.stats.docs_processed == 10);
  CHECK(sim.stats.deltas_applied == 10);
  CHECK(sim.state.step_count() == 10);
  REQUIRE(sim.stats.sent_per_worker.size() == 3);
  for (std::size_t p = 0; p < 3; ++p)
    CHECK(sim.stats.sent_per_worker[p] == sim.stats.replies_per_worker[p]);

  DiviOptions live;
  live.mode = RunMode::kLive;
  live.transport = Transport::kInProcess;
  const DiviResult run = run_divi(corpus, 3, cfg, DelayModel{}, cfg.doc_budget,
                                  live);
  CHECK(run.stats.docs_processed == 10);
  CHECK(run.stats.deltas_applied == 10);
  for (std::size_t p = 0; p < 3; ++p)
    CHECK(run.stats.sent_per_worker[p] == run.stats.replies_per_worker[p]);

  // A zero budget is a no-op in every mode.
  const DiviResult idle = run_divi(corpus, 3, cfg, DelayModel{}, 0, options);
  CHECK(idle.stats.deltas_applied == 0);
  CHECK(idle.stats.docs_processed == 0);
  CHECK(idle.trace.records.empty());
  CHECK(idle.state.step_count() == 0);
}

TEST_CASE("a crashing worker aborts the run") {
  const Corpus corpus = six_doc_corpus();
  TrainConfig cfg = divi_config();
  cfg.minibatch_size = 1;
  cfg.doc_budget = 200;

  DiviOptions options;
  options.mode = RunMode::kLive;
  options.transport = Transport::kInProcess;
  options.inject_crash_worker = 0;
  options.inject_crash_after_sends = 1;
  CHECK_THROWS_AS(
      run_divi(corpus, 2, cfg, DelayModel{}, cfg.doc_budget, options),
      RunError);

  options.transport = Transport::kSocket;
  CHECK_THROWS_AS(
      run_divi(corpus, 2, cfg, DelayModel{}, cfg.doc_budget, options),
      RunError);
}

TEST_CASE("wire messages have the documented byte layout") {
  const DeltaStats delta = dyadic_delta(3, {{5, {1.5, -0.25}}});
  const std::vector<std::uint8_t> payload = wire::encode_delta(delta, 7);
  const std::vector<std::uint8_t> expected = {
      0x01, 0x01,                                       // version, delta
      0x00, 0x00, 0x00, 0x07,                           // worker id
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x03,  // basis step
      0x00, 0x00, 0x00, 0x01,                           // n entries
      0x00, 0x00, 0x00, 0x02,                           // n topics
      0x00, 0x00, 0x00, 0x05,                           // word id
      0x3F, 0xF8, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,  // 1.5
      0xBF, 0xD0, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,  // -0.25
  };
  CHECK(payload == expected);

  const std::vector<std::uint8_t> framed = wire::frame(payload);
  REQUIRE(framed.size() == payload.size() + 4);
  CHECK(framed[0] == 0x00);
  CHECK(framed[1] == 0x00);
  CHECK(framed[2] == 0x00);
  CHECK(framed[3] == 0x2A);
  CHECK(std::equal(payload.begin(), payload.end(), framed.begin() + 4));

  const std::vector<std::uint8_t> stop = wire::encode_stop(9);
  const std::vector<std::uint8_t> stop_expected = {
      0x01, 0x03, 0x00, 0x00, 0x00, 0x09,
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
  };
  CHECK(stop == stop_expected);
}

TEST_CASE("wire round trips preserve every bit") {
  DeltaStats delta = dyadic_delta(41, {{0, {0.1, 2.7}}, {4, {-3.3e-7, 1e12}}});
  const wire::Message back = wire::decode(wire::encode_delta(delta, 12));
  CHECK(back.type == wire::MsgType::kDelta);
  CHECK(back.worker_id == 12);
  CHECK(back.delta.basis_step == 41);
  CHECK(back.delta.words == delta.words);
  CHECK(testutil::bitwise_equal(back.delta.values, delta.values));

  BetaSnapshot snap;
  snap.step = 999;
  snap.beta = Matrix(2, 3);
  snap.beta << 0.3, 1e-300, 4.5e17, 1.0, -0.0, 2.5;
  const wire::Message echo = wire::decode(wire::encode_snapshot(snap, 2));
  CHECK(echo.type == wire::MsgType::kSnapshot);
  CHECK(echo.snapshot.step == 999);
  CHECK(testutil::bitwise_equal(echo.snapshot.beta, snap.beta));

  const wire::Message halt = wire::decode(wire::encode_stop(5));
  CHECK(halt.type == wire::MsgType::kStop);
  CHECK(halt.worker_id == 5);
}

TEST_CASE("malformed wire payloads are rejected") {
  const DeltaStats delta = dyadic_delta(1, {{2, {0.5, 0.5}}});
  const std::vector<std::uint8_t> good = wire::encode_delta(delta, 0);

  std::vector<std::uint8_t> bad_version = good;
  bad_version[0] = 2;
  CHECK_THROWS_AS(wire::decode(bad_version), ParseError);

  std::vector<std::uint8_t> bad_type = good;
  bad_type[1] = 9;
  CHECK_THROWS_AS(wire::decode(bad_type), ParseError);

  std::vector<std::uint8_t> truncated = good;
  truncated.pop_back();
  CHECK_THROWS_AS(wire::decode(truncated), ParseError);

  std::vector<std::uint8_t> padded = good;
  padded.push_back(0);
  CHECK_THROWS_AS(wire::decode(padded), ParseError);

  std::vector<std::uint8_t> stop = wire::encode_stop(1);
  stop.push_back(0);
  CHECK_THROWS_AS(wire::decode(stop), ParseError);

  CHECK_THROWS_AS(wire::decode(std::vector<std::uint8_t>{}), ParseError);
  CHECK_THROWS_AS(wire::decode(std::vector<std::uint8_t>{0x01}), ParseError);
}

TEST_SUITE_END();
