// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include "ilda/distributed.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <thread>
#include <utility>

#include "ilda/errors.hpp"

namespace ilda {

ShardAssignment split_shards(const Corpus& corpus, int n_workers,
                             std::uint64_t seed) {
  const int n_docs = corpus.n_docs();
  if (n_workers < 1) throw ConfigError("split_shards: need at least 1 worker");
  if (n_workers > n_docs)
    throw ConfigError("split_shards: more workers (" +
                      std::to_string(n_workers) + ") than documents (" +
                      std::to_string(n_docs) + ")");

  std::vector<int> ids(static_cast<std::size_t>(n_docs));
  for (int i = 0; i < n_docs; ++i) ids[static_cast<std::size_t>(i)] = i;
  Rng rng(mix_seed(seed, streams::kShards));
  rng.shuffle(ids);

  ShardAssignment assignment;
  assignment.n_workers = n_workers;
  assignment.shards.resize(static_cast<std::size_t>(n_workers));
  for (int i = 0; i < n_docs; ++i)
    assignment.shards[static_cast<std::size_t>(i % n_workers)].push_back(
        ids[static_cast<std::size_t>(i)]);
  for (auto& shard : assignment.shards)
    std::sort(shard.begin(), shard.end());
  return assignment;
}

DelayModel DelayModel::make(double sleep_prob, double mu, std::uint64_t seed) {
  DelayModel d;
  d.sleep_prob = sleep_prob;
  d.mu = mu;
  d.sigma = mu / 5.0;
  d.seed = seed;
  d.validate();
  return d;
}

void DelayModel::validate() const {
  if (!(sleep_prob >= 0.0) || !(sleep_prob <= 1.0))
    throw ConfigError("delay: sleep_prob must lie in [0, 1]");
  if (!(mu >= 0.0)) throw ConfigError("delay: mu must be >= 0");
  if (!(sigma >= 0.0)) throw ConfigError("delay: sigma must be >= 0");
}

double DelayModel::sample(Rng& rng) const {
  if (sleep_prob <= 0.0) return 0.0;
  if (rng.uniform() >= sleep_prob) return 0.0;
  const double d = rng.normal(mu, sigma);
  return d > 0.0 ? d : 0.0;
}

void worker_receive(WorkerState& worker, const BetaSnapshot& snapshot) {
  worker.beta_snapshot = snapshot.beta;
  worker.snapshot_colsum = worker.beta_snapshot.colwise().sum().transpose();
  worker.snapshot_step = snapshot.step;
}

WorkerStepResult worker_step(WorkerState& worker, const Corpus& corpus,
                             int minibatch_size, const EStepConfig& estep,
                             const DelayModel& delay, bool apply_sleep) {
  if (worker.shard.empty())
    throw ContractError("worker_step: worker shard is empty");
  if (minibatch_size < 1)
    throw ContractError("worker_step: minibatch_size must be >= 1");

  const detail::BetaView view{worker.beta_snapshot, worker.snapshot_colsum};
  WorkerStepResult result;
  result.delta.basis_step = worker.snapshot_step;
  for (int j = 0; j < minibatch_size; ++j) {
    const std::size_t pick = static_cast<std::size_t>(
        worker.sampler.uniform_below(worker.shard.size()));
    const int doc_index = worker.shard[pick];
    const Document& doc = corpus.documents[static_cast<std::size_t>(doc_index)];
    const std::size_t slot = static_cast<std::size_t>(doc_index);
    const DocLocalState* old_state = worker.locals.find(slot);
    DocLocalState fit = detail::local_estep_view(doc, view, estep, old_state);
    result.delta.merge(doc_delta(old_state, fit, doc));
    worker.locals.put(slot, std::move(fit));
    result.batch_tokens += doc.n_tokens;
  }

  result.slept_seconds = delay.sample(worker.delay_rng);
  if (apply_sleep && result.slept_seconds > 0.0)
    std::this_thread::sleep_for(
        std::chrono::duration<double>(result.slept_seconds));
  return result;
}

BetaSnapshot master_apply(MasterState& master, const DeltaStats& delta) {
  // Step index is 1-based, matching the single-host loops.
  const double rho =
      learning_rate(master.global.step_count() + 1, master.schedule);
  master.global.note_processed(master.minibatch_size);
  master.global.commit_delta(delta);
  master.global.blend_beta(master.global.target_beta(), rho);
  master.global.increment_step();
  ++master.applied;
  return BetaSnapshot{master.global.beta(), master.global.step_count()};
}

namespace {

struct RunContext {
  const Corpus& corpus;
  const TrainConfig& cfg;
  const DelayModel& delay;
  std::int64_t budget = 0;
  const DiviOptions& options;
  const DiviProbe& probe;

  MasterState master;
  std::vector<WorkerState> workers;
  DiviStats stats;
  RunTrace trace;
  std::int64_t docs = 0;
  std::int64_t next_tick = 0;
  std::int64_t last_emitted = -1;

  void tick(double seconds, bool force = false) {
    if (probe.cadence_docs <= 0) return;
    if (!force && docs < next_tick) return;
    if (force && (docs <= last_emitted || docs == 0)) return;
    TraceRecord r;
    r.docs_processed = docs;
    r.seconds = seconds;
    if (probe.fn) probe.fn(r, master.global);
    trace.append(std::move(r));
    last_emitted = docs;
    while (next_tick <= docs) next_tick += probe.cadence_docs;
  }
};

RunContext make_context(const Corpus& corpus, int n_workers,
                        const TrainConfig& cfg, const DelayModel& delay,
                        std::int64_t doc_budget, const DiviOptions& options,
                        const DiviProbe& probe) {
  cfg.validate();
  delay.validate();
  if (doc_budget < 0) throw ConfigError("run_divi: doc_budget must be >= 0");

  RunContext ctx{corpus, cfg, delay, doc_budget, options, probe, {}, {}, {}, {}};
  ctx.next_tick = probe.cadence_docs;
  ctx.master.global = GlobalState::initialize(
      corpus.vocab_size(), cfg.n_topics, cfg.beta0,
      static_cast<double>(corpus.total_tokens()), cfg.seed, corpus.n_docs());
  ctx.master.schedule = cfg.schedule;
  ctx.master.minibatch_size = cfg.minibatch_size;

  const ShardAssignment shards = split_shards(corpus, n_workers, cfg.seed);
  ctx.workers.reserve(static_cast<std::size_t>(n_workers));
  for (int p = 0; p < n_workers; ++p) {
    WorkerState w;
    w.worker_id = p;
    w.shard = shards.shards[static_cast<std::size_t>(p)];
    w.locals = LocalStore(corpus.documents.size());
    w.beta_snapshot = ctx.master.global.beta();
    w.snapshot_colsum = ctx.master.global.beta_colsum();
    w.snapshot_step = ctx.master.global.step_count();
    w.sampler = Rng(mix_seed(cfg.seed, streams::kSampler,
                             static_cast<std::uint64_t>(p)));
    w.delay_rng = Rng(mix_seed(delay.seed, streams::kDelay,
                               static_cast<std::uint64_t>(p)));
    ctx.workers.push_back(std::move(w));
  }
  ctx.stats.sent_per_worker.assign(static_cast<std::size_t>(n_workers), 0);
  ctx.stats.replies_per_worker.assign(static_cast<std::size_t>(n_workers), 0);
  return ctx;
}

DiviResult finish(RunContext&& ctx) {
  ctx.stats.deltas_applied = ctx.master.applied;
  ctx.stats.docs_processed = ctx.docs;
  DiviResult result;
  result.state = std::move(ctx.master.global);
  result.trace = std::move(ctx.trace);
  result.stats = std::move(ctx.stats);
  return result;
}

// ---------------------------------------------------------------------------
// Simulated mode: a discrete-event loop under a virtual clock. Each event is
// the arrival of one worker's delta at the master. On arrival the delta is
// applied, the worker receives the fresh snapshot and immediately computes
// its next delta; its arrival is scheduled after a sampled compute time plus
// the sampled sleep.

struct SimEvent {
  double time = 0.0;
  std::int64_t seq = 0;
  int worker = 0;
};

bool operator>(const SimEvent& a, const SimEvent& b) {
  if (a.time != b.time) return a.time > b.time;
  return a.seq > b.seq;
}

DiviResult run_simulated(RunContext&& ctx) {
  const int n_workers = static_cast<int>(ctx.workers.size());
  std::vector<Rng> compute_rng;
  compute_rng.reserve(static_cast<std::size_t>(n_workers));
  for (int p = 0; p < n_workers; ++p)
    compute_rng.emplace_back(mix_seed(ctx.cfg.seed, streams::kSimCompute,
                                      static_cast<std::uint64_t>(p)));

  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> queue;
  std::vector<DeltaStats> pending(static_cast<std::size_t>(n_workers));
  std::int64_t seq = 0;

  auto schedule_work = [&](int p, double now) {
    WorkerStepResult r =
        worker_step(ctx.workers[static_cast<std::size_t>(p)], ctx.corpus,
                    ctx.cfg.minibatch_size, ctx.cfg.estep, ctx.delay,
                    /*apply_sleep=*/false);
    const double compute =
        static_cast<double>(r.batch_tokens) *
        ctx.options.per_token_cost_seconds *
        compute_rng[static_cast<std::size_t>(p)].uniform(0.9, 1.1);
    pending[static_cast<std::size_t>(p)] = std::move(r.delta);
    ++ctx.stats.sent_per_worker[static_cast<std::size_t>(p)];
    queue.push(SimEvent{now + compute + r.slept_seconds, seq++, p});
  };

  double now = 0.0;
  if (ctx.budget > 0)
    for (int p = 0; p < n_workers; ++p) schedule_work(p, 0.0);

  while (!queue.empty()) {
    const SimEvent ev = queue.top();
    queue.pop();
    now = ev.time;
    const auto p = static_cast<std::size_t>(ev.worker);
    if (ctx.docs >= ctx.budget) {
      // Budget exhausted while this delta was in flight; it is answered
      // with a stop and never applied.
      ++ctx.stats.replies_per_worker[p];
      continue;
    }
    const BetaSnapshot snapshot = master_apply(ctx.master, pending[p]);
    ctx.docs += ctx.cfg.minibatch_size;
    ++ctx.stats.replies_per_worker[p];
    ctx.tick(now);
    if (ctx.docs < ctx.budget) {
      worker_receive(ctx.workers[p], snapshot);
      schedule_work(ev.worker, now);
    }
  }
  ctx.tick(now, /*force=*/true);
  ctx.stats.seconds = now;
  return finish(std::move(ctx));
}

// ---------------------------------------------------------------------------
// Live mode, in-process transport: worker threads exchange values with the
// master through a condition-variable queue and one reply mailbox each.

struct Envelope {
  int worker = 0;
  DeltaStats delta;
  bool poison = false;
  std::string error;
};

class EnvelopeQueue {
 public:
  void push(Envelope env) {
    {
      std::lock_guard lock(mutex_);
      items_.push_back(std::move(env));
    }
    cv_.notify_one();
  }

  std::optional<Envelope> pop_for(double seconds) {
    std::unique_lock lock(mutex_);
    if (!cv_.wait_for(lock, std::chrono::duration<double>(seconds),
                      [&] { return !items_.empty(); }))
      return std::nullopt;
    Envelope env = std::move(items_.front());
    items_.pop_front();
    return env;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Envelope> items_;
};

struct Reply {
  bool stop = true;
  BetaSnapshot snapshot;
};

class Mailbox {
 public:
  void put(Reply reply) {
    {
      std::lock_guard lock(mutex_);
      box_ = std::move(reply);
    }
    cv_.notify_all();
  }

  Reply take(const std::atomic<bool>& abort) {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return box_.has_value() || abort.load(); });
    if (box_.has_value()) {
      Reply r = std::move(*box_);
      box_.reset();
      return r;
    }
    return Reply{};
  }

  void wake() { cv_.notify_all(); }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<Reply> box_;
};

DiviResult run_live_inprocess(RunContext&& ctx) {
  const int n_workers = static_cast<int>(ctx.workers.size());
  EnvelopeQueue queue;
  std::vector<Mailbox> boxes(static_cast<std::size_t>(n_workers));
  std::atomic<bool> abort{false};
  std::vector<char> done(static_cast<std::size_t>(n_workers), 0);

  std::string error;
  std::exception_ptr numeric_failure;

  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int p = 0; p < n_workers; ++p) {
      threads.emplace_back([&, p] {
        auto& me = ctx.workers[static_cast<std::size_t>(p)];
        auto& sent = ctx.stats.sent_per_worker[static_cast<std::size_t>(p)];
        auto& replies = ctx.stats.replies_per_worker[static_cast<std::size_t>(p)];
        try {
          for (;;) {
            WorkerStepResult r =
                worker_step(me, ctx.corpus, ctx.cfg.minibatch_size,
                            ctx.cfg.estep, ctx.delay, /*apply_sleep=*/true);
            if (p == ctx.options.inject_crash_worker &&
                sent >= ctx.options.inject_crash_after_sends)
              throw RunError("injected worker fault");
            queue.push(Envelope{p, std::move(r.delta), false, {}});
            ++sent;
            const Reply reply = boxes[static_cast<std::size_t>(p)].take(abort);
            if (reply.stop) return;
            ++replies;
            worker_receive(me, reply.snapshot);
          }
        } catch (const std::exception& e) {
          queue.push(Envelope{p, {}, true, e.what()});
        }
      });
    }

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           start)
          .count();
    };

    try {
      while (ctx.docs < ctx.budget && error.empty()) {
        auto env = queue.pop_for(ctx.options.grace_period_seconds);
        if (!env) {
          error = "no worker delivered a delta within the grace period";
          break;
        }
        if (env->poison) {
          error = "worker " + std::to_string(env->worker) +
                  " crashed: " + env->error;
          break;
        }
        const BetaSnapshot snapshot = master_apply(ctx.master, env->delta);
        ctx.docs += ctx.cfg.minibatch_size;
        ctx.tick(elapsed());
        const auto p = static_cast<std::size_t>(env->worker);
        if (ctx.docs >= ctx.budget) {
          boxes[p].put(Reply{});
          ++ctx.stats.replies_per_worker[p];
          done[p] = 1;
        } else {
          boxes[p].put(Reply{false, snapshot});
        }
      }

      // Clean drain: answer each still-running worker's outstanding delta
      // with a stop so that every send gets exactly one reply.
      while (error.empty()) {
        bool all_done = true;
        for (const char d : done)
          if (!d) all_done = false;
        if (all_done) break;
        auto env = queue.pop_for(ctx.options.grace_period_seconds);
        if (!env) {
          error = "shutdown drain timed out";
          break;
        }
        if (env->poison) {
          error = "worker " + std::to_string(env->worker) +
                  " crashed: " + env->error;
          break;
        }
        const auto p = static_cast<std::size_t>(env->worker);
        boxes[p].put(Reply{});
        ++ctx.stats.replies_per_worker[p];
        done[p] = 1;
      }
    } catch (...) {
      numeric_failure = std::current_exception();
    }

    abort.store(true);
    for (auto& box : boxes) box.wake();
    ctx.tick(elapsed(), /*force=*/true);
    ctx.stats.seconds = elapsed();
  }  // workers join here

  if (numeric_failure) std::rethrow_exception(numeric_failure);
  if (!error.empty()) throw RunError("run_divi: " + error);
  return finish(std::move(ctx));
}

// ---------------------------------------------------------------------------
// Live mode, socket transport: identical protocol over length-prefixed
// frames on a localhost TCP socket. Workers still run as threads but all
// delta and snapshot traffic passes through the wire format.

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Fd& operator=(Fd&& o) noexcept {
    reset();
    std::swap(fd_, o.fd_);
    return *this;
  }
  ~Fd() { reset(); }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

DiviResult run_live_socket(RunContext&& ctx) {
  const int n_workers = static_cast<int>(ctx.workers.size());

  Fd listener(::socket(AF_INET, SOCK_STREAM, 0));
  if (!listener.valid()) throw RunError("run_divi: cannot create socket");
  const int one = 1;
  ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    throw RunError("run_divi: bind failed");
  if (::listen(listener.get(), n_workers) != 0)
    throw RunError("run_divi: listen failed");
  socklen_t addr_len = sizeof(addr);
  ::getsockname(listener.get(), reinterpret_cast<sockaddr*>(&addr), &addr_len);
  const std::uint16_t port = ntohs(addr.sin_port);

  std::mutex worker_error_mutex;
  std::string worker_error;

  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int p = 0; p < n_workers; ++p) {
      threads.emplace_back([&, p] {
        auto& me = ctx.workers[static_cast<std::size_t>(p)];
        auto& sent = ctx.stats.sent_per_worker[static_cast<std::size_t>(p)];
        auto& replies = ctx.stats.replies_per_worker[static_cast<std::size_t>(p)];
        try {
          Fd sock(::socket(AF_INET, SOCK_STREAM, 0));
          if (!sock.valid()) throw RunError("worker: cannot create socket");
          sockaddr_in peer{};
          peer.sin_family = AF_INET;
          peer.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
          peer.sin_port = htons(port);
          if (::connect(sock.get(), reinterpret_cast<sockaddr*>(&peer),
                        sizeof(peer)) != 0)
            throw RunError("worker: connect failed");
          std::vector<std::uint8_t> payload;
          for (;;) {
            WorkerStepResult r =
                worker_step(me, ctx.corpus, ctx.cfg.minibatch_size,
                            ctx.cfg.estep, ctx.delay, /*apply_sleep=*/true);
            if (p == ctx.options.inject_crash_worker &&
                sent >= ctx.options.inject_crash_after_sends)
              throw RunError("injected worker fault");
            wire::send_frame(sock.get(),
                             wire::encode_delta(r.delta,
                                                static_cast<std::uint32_t>(p)));
            ++sent;
            if (!wire::recv_frame(sock.get(), payload)) return;
            const wire::Message msg = wire::decode(payload);
            if (msg.type == wire::MsgType::kStop) {
              ++replies;
              return;
            }
            if (msg.type != wire::MsgType::kSnapshot)
              throw ParseError("worker: unexpected message type");
            ++replies;
            worker_receive(me, msg.snapshot);
          }
        } catch (const std::exception& e) {
          std::lock_guard lock(worker_error_mutex);
          if (worker_error.empty())
            worker_error = "worker " + std::to_string(p) + ": " + e.what();
          // The socket closes on scope exit; the master sees EOF.
        }
      });
    }

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           start)
          .count();
    };

    struct Conn {
      Fd fd;
      bool stopped = false;
    };
    std::vector<Conn> conns;
    std::string error;
    std::exception_ptr numeric_failure;
    std::vector<std::uint8_t> payload;

    auto poll_once = [&](bool& progressed) {
      std::vector<pollfd> fds;
      fds.push_back({listener.get(), POLLIN, 0});
      for (const auto& c : conns)
        if (c.fd.valid()) fds.push_back({c.fd.get(), POLLIN, 0});
      const int millis =
          static_cast<int>(ctx.options.grace_period_seconds * 1000.0);
      const int rc = ::poll(fds.data(), fds.size(), millis > 0 ? millis : 1);
      progressed = rc > 0;
      if (rc <= 0) return;
      if (fds[0].revents & POLLIN) {
        const int accepted = ::accept(listener.get(), nullptr, nullptr);
        if (accepted >= 0) conns.push_back(Conn{Fd(accepted), false});
      }
      std::size_t fd_idx = 1;
      for (auto& c : conns) {
        if (!c.fd.valid()) continue;
        // Connections accepted above are not in this poll set yet.
        if (fd_idx >= fds.size()) break;
        const pollfd& pf = fds[fd_idx++];
        if (!(pf.revents & (POLLIN | POLLHUP | POLLERR))) continue;
        if (!wire::recv_frame(c.fd.get(), payload)) {
          // EOF: normal after a stop reply, fatal otherwise.
          if (!c.stopped && error.empty())
            error = "worker connection closed unexpectedly";
          c.fd.reset();
          continue;
        }
        const wire::Message msg = wire::decode(payload);
        if (msg.type != wire::MsgType::kDelta)
          throw ParseError("master: unexpected message type");
        if (ctx.docs < ctx.budget) {
          const BetaSnapshot snapshot = master_apply(ctx.master, msg.delta);
          ctx.docs += ctx.cfg.minibatch_size;
          ctx.tick(elapsed());
          if (ctx.docs >= ctx.budget) {
            wire::send_frame(c.fd.get(), wire::encode_stop(msg.worker_id));
            c.stopped = true;
          } else {
            wire::send_frame(c.fd.get(),
                             wire::encode_snapshot(snapshot, msg.worker_id));
          }
        } else {
          wire::send_frame(c.fd.get(), wire::encode_stop(msg.worker_id));
          c.stopped = true;
        }
      }
    };

    try {
      auto unstopped = [&] {
        int live = n_workers;
        for (const auto& c : conns)
          if (c.stopped || !c.fd.valid()) --live;
        return live;
      };
      while (error.empty() && (ctx.docs < ctx.budget || unstopped() > 0)) {
        bool progressed = false;
        poll_once(progressed);
        if (!progressed) {
          error = ctx.docs < ctx.budget
                      ? "no worker delivered a delta within the grace period"
                      : "shutdown drain timed out";
        }
        if (error.empty()) {
          std::lock_guard lock(worker_error_mutex);
          if (!worker_error.empty()) error = worker_error;
        }
      }
    } catch (...) {
      numeric_failure = std::current_exception();
    }

    // Closing the connections unblocks any worker still waiting on a
    // reply; crashed-run shutdown does not preserve reply accounting.
    conns.clear();
    listener.reset();
    ctx.tick(elapsed(), /*force=*/true);
    ctx.stats.seconds = elapsed();

    if (numeric_failure) {
      threads.clear();
      std::rethrow_exception(numeric_failure);
    }
    if (!error.empty()) {
      threads.clear();
      throw RunError("run_divi: " + error);
    }
  }

  return finish(std::move(ctx));
}

}  // namespace

DiviResult run_divi(const Corpus& corpus, int n_workers, const TrainConfig& cfg,
                    const DelayModel& delay, std::int64_t doc_budget,
                    const DiviOptions& options, const DiviProbe& probe) {
  RunContext ctx =
      make_context(corpus, n_workers, cfg, delay, doc_budget, options, probe);
  if (ctx.budget <= 0) return finish(std::move(ctx));
  if (options.mode == RunMode::kSimulated) return run_simulated(std::move(ctx));
  if (options.transport == Transport::kSocket)
    return run_live_socket(std::move(ctx));
  return run_live_inprocess(std::move(ctx));
}

}  // namespace ilda
