// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0
//
// Command line front end. Subcommands:
//   synth  generate a corpus in the UCI bag-of-words format
//   train  fit a model and write checkpoint, trace and config echo
//   eval   score a test corpus against a checkpoint
//   bench  sweep worker counts and mini-batch sizes, tabulate the results
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime or
// numeric failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ilda/algorithms.hpp"
#include "ilda/checkpoint.hpp"
#include "ilda/corpus.hpp"
#include "ilda/distributed.hpp"
#include "ilda/errors.hpp"
#include "ilda/eval.hpp"
#include "ilda/trace.hpp"
#include "ilda/vi.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string default_output_dir() {
  const char* env = std::getenv("ILDA_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? env : ".";
}

// Accepts either a docword file or a directory holding exactly one
// docword*.txt; the vocabulary path is derived by name unless given.
std::pair<std::string, std::string> resolve_corpus(const std::string& corpus,
                                                   const std::string& vocab) {
  std::string docword = corpus;
  if (fs::is_directory(corpus)) {
    std::vector<fs::path> candidates;
    for (const auto& entry : fs::directory_iterator(corpus)) {
      const std::string stem = entry.path().filename().string();
      if (stem.rfind("docword", 0) == 0) candidates.push_back(entry.path());
    }
    if (candidates.size() != 1)
      throw ilda::ConfigError("expected exactly one docword* file in '" +
                              corpus + "', found " +
                              std::to_string(candidates.size()));
    docword = candidates.front().string();
  }
  if (!vocab.empty()) return {docword, vocab};
  fs::path path(docword);
  std::string name = path.filename().string();
  const std::size_t pos = name.find("docword");
  if (pos == std::string::npos)
    throw ilda::ConfigError("cannot derive the vocabulary path from '" +
                            docword + "'; pass --vocab");
  name.replace(pos, 7, "vocab");
  return {docword, (path.parent_path() / name).string()};
}

ilda::Corpus load_corpus(const std::string& corpus, const std::string& vocab) {
  const auto [docword_path, vocab_path] = resolve_corpus(corpus, vocab);
  return ilda::load_uci_bow(docword_path, vocab_path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ilda::RunError(path + ": cannot open file for writing");
  out << text;
  if (!out) throw ilda::RunError(path + ": write failed");
}

fs::path prepare_output_dir(const std::string& dir) {
  fs::path path(dir);
  fs::create_directories(path);
  return path;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  int vocab = 25;
  int topics = 5;
  int docs = 50;
  int tokens = 100;
  double alpha0 = 0.5;
  std::uint64_t seed = 0;
  int bars_grid = 0;
  std::string output_dir = default_output_dir();
  std::string name = "synth";
};

int cmd_synth(const SynthArgs& a) {
  std::optional<ilda::Matrix> topics;
  int n_topics = a.topics;
  int vocab_size = a.vocab;
  if (a.bars_grid > 0) {
    topics = ilda::bars_topics(a.bars_grid);
    vocab_size = a.bars_grid * a.bars_grid;
    n_topics = 2 * a.bars_grid;
  }
  const ilda::SynthResult synth = ilda::synth_lda_corpus(
      n_topics, vocab_size, a.docs, a.tokens, a.alpha0, topics, a.seed);

  const fs::path dir = prepare_output_dir(a.output_dir);
  const std::string docword = (dir / ("docword." + a.name + ".txt")).string();
  const std::string vocab = (dir / ("vocab." + a.name + ".txt")).string();
  ilda::write_uci_bow(synth.corpus, docword, vocab);

  json echo;
  echo["command"] = "synth";
  echo["vocab_size"] = vocab_size;
  echo["n_topics"] = n_topics;
  echo["docs"] = a.docs;
  echo["tokens_per_doc"] = a.tokens;
  echo["alpha0"] = a.alpha0;
  echo["seed"] = a.seed;
  echo["bars_grid"] = a.bars_grid;
  echo["docword"] = docword;
  echo["vocab"] = vocab;
  write_text((dir / (a.name + ".config.json")).string(), echo.dump(2) + "\n");

  std::cout << "wrote " << synth.corpus.n_docs() << " documents, "
            << synth.corpus.total_tokens() << " tokens over " << vocab_size
            << " words to " << docword << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string corpus;
  std::string vocab;
  std::string algo = "ivi";
  int k = 100;
  double alpha0 = 0.5;
  double beta0 = 0.05;
  double kappa = 0.9;
  double tau = 1.0;
  int minibatch = 1;
  int epochs = 1;
  std::int64_t doc_budget = 0;
  std::uint64_t seed = 0;
  double estep_tol = 0.0;
  int estep_iters = 0;
  int p = 1;
  double delay_prob = 0.0;
  double delay_mu = 0.0;
  std::uint64_t delay_seed = 0;
  bool live = false;
  std::string transport = "inprocess";
  double grace = 10.0;
  double token_cost = 2e-6;
  std::int64_t eval_cadence = 0;
  std::string heldout;
  std::string heldout_vocab;
  std::uint64_t split_seed = 0;
  std::string output_dir = default_output_dir();
  std::string name = "run";
};

ilda::TrainConfig make_train_config(const TrainArgs& a) {
  ilda::TrainConfig cfg;
  cfg.n_topics = a.k;
  cfg.beta0 = a.beta0;
  cfg.estep.alpha0 = a.alpha0;
  if (a.estep_tol > 0.0) cfg.estep.tol = a.estep_tol;
  if (a.estep_iters > 0) cfg.estep.max_iters = a.estep_iters;
  cfg.schedule.kappa = a.kappa;
  cfg.schedule.tau = a.tau;
  cfg.minibatch_size = a.minibatch;
  cfg.epochs = a.epochs;
  cfg.doc_budget = a.doc_budget;
  cfg.seed = a.seed;
  return cfg;
}

json train_echo(const TrainArgs& a, const std::string& docword,
                const std::string& vocab) {
  json echo;
  echo["command"] = "train";
  echo["corpus"] = docword;
  echo["vocab"] = vocab;
  echo["algo"] = a.algo;
  echo["k"] = a.k;
  echo["alpha0"] = a.alpha0;
  echo["beta0"] = a.beta0;
  echo["kappa"] = a.kappa;
  echo["tau"] = a.tau;
  echo["minibatch"] = a.minibatch;
  echo["epochs"] = a.epochs;
  echo["doc_budget"] = a.doc_budget;
  echo["seed"] = a.seed;
  echo["estep_tol"] = a.estep_tol;
  echo["estep_iters"] = a.estep_iters;
  echo["workers"] = a.p;
  echo["delay"] = {{"sleep_prob", a.delay_prob},
                   {"mu_seconds", a.delay_mu},
                   {"sigma_seconds", a.delay_mu / 5.0},
                   {"seed", a.delay_seed}};
  echo["mode"] = a.live ? "live" : "simulated";
  echo["transport"] = a.transport;
  echo["grace_seconds"] = a.grace;
  echo["token_cost_seconds"] = a.token_cost;
  echo["eval_cadence_docs"] = a.eval_cadence;
  echo["heldout"] = a.heldout;
  echo["split_seed"] = a.split_seed;
  echo["output_dir"] = a.output_dir;
  echo["name"] = a.name;
  return echo;
}

int cmd_train(const TrainArgs& a) {
  const auto [docword_path, vocab_path] = resolve_corpus(a.corpus, a.vocab);
  const ilda::Corpus corpus = ilda::load_uci_bow(docword_path, vocab_path);
  std::optional<ilda::Corpus> heldout;
  if (!a.heldout.empty()) heldout = load_corpus(a.heldout, a.heldout_vocab);

  const ilda::TrainConfig cfg = make_train_config(a);
  cfg.validate();
  if (a.transport != "inprocess" && a.transport != "socket")
    throw ilda::ConfigError("unknown transport '" + a.transport +
                            "', expected inprocess or socket");

  const json echo = train_echo(a, docword_path, vocab_path);
  const fs::path dir = prepare_output_dir(a.output_dir);

  auto fill_heldout = [&](ilda::TraceRecord& rec, const ilda::GlobalState& s) {
    if (!heldout) return;
    rec.heldout_lpp =
        ilda::per_word_predictive_ll(s, *heldout, cfg.estep, a.split_seed)
            .per_word_lpp;
  };

  ilda::GlobalState state = ilda::GlobalState::initialize(1, 1, 1.0, 0.0, 0, 0);
  ilda::RunTrace trace;
  std::int64_t docs = 0;
  double seconds = 0.0;
  const auto start = std::chrono::steady_clock::now();

  if (a.algo == "divi") {
    ilda::DelayModel delay = ilda::DelayModel::make(a.delay_prob, a.delay_mu,
                                                    a.delay_seed);
    ilda::DiviOptions options;
    options.mode = a.live ? ilda::RunMode::kLive : ilda::RunMode::kSimulated;
    options.transport = a.transport == "socket" ? ilda::Transport::kSocket
                                                : ilda::Transport::kInProcess;
    options.grace_period_seconds = a.grace;
    options.per_token_cost_seconds = a.token_cost;
    const std::int64_t budget =
        cfg.doc_budget > 0 ? cfg.doc_budget
                           : static_cast<std::int64_t>(cfg.epochs) *
                                 static_cast<std::int64_t>(corpus.n_docs());
    ilda::DiviProbe probe;
    probe.cadence_docs = a.eval_cadence;
    probe.fn = fill_heldout;
    ilda::DiviResult result =
        ilda::run_divi(corpus, a.p, cfg, delay, budget, options, probe);
    state = std::move(result.state);
    trace = std::move(result.trace);
    docs = result.stats.docs_processed;
    seconds = result.stats.seconds;
  } else {
    const ilda::Algorithm algo = ilda::algorithm_from_string(a.algo);
    ilda::EvalProbe probe;
    probe.cadence_docs = a.eval_cadence;
    probe.fn = [&](ilda::TraceRecord& rec, const ilda::GlobalState& s,
                   const ilda::LocalStore& locals) {
      fill_heldout(rec, s);
      // The full bound needs every document's fitted parameters; batch
      // and incremental passes have them, stochastic runs may not.
      bool complete = corpus.n_docs() > 0;
      for (int d = 0; complete && d < corpus.n_docs(); ++d)
        if (locals.find(static_cast<std::size_t>(d)) == nullptr)
          complete = false;
      if (complete) rec.elbo = ilda::elbo(corpus, s, locals, cfg.alpha0());
    };
    ilda::TrainResult result = ilda::train(corpus, algo, cfg, probe);
    state = std::move(result.state);
    trace = std::move(result.trace);
    docs = cfg.doc_budget > 0 ? cfg.doc_budget
                              : static_cast<std::int64_t>(cfg.epochs) *
                                    static_cast<std::int64_t>(corpus.n_docs());
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();
  }

  const std::string ckpt = (dir / (a.name + ".ckpt")).string();
  ilda::save_checkpoint(ckpt, state, echo.dump());
  trace.save_csv((dir / (a.name + ".trace.csv")).string());
  trace.save_jsonl((dir / (a.name + ".trace.jsonl")).string());
  write_text((dir / (a.name + ".config.json")).string(), echo.dump(2) + "\n");

  std::cout << "trained " << a.algo << " on " << docs << " document visits in "
            << seconds << " s\n";
  if (!trace.records.empty()) {
    const ilda::TraceRecord& last = trace.records.back();
    if (last.elbo) std::cout << "final elbo " << *last.elbo << "\n";
    if (last.heldout_lpp)
      std::cout << "final heldout lpp " << *last.heldout_lpp << "\n";
  }
  std::cout << "checkpoint " << ckpt << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string checkpoint;
  std::string corpus;
  std::string vocab;
  double alpha0 = 0.0;  // 0 = take it from the checkpoint config echo
  double estep_tol = 0.0;
  int estep_iters = 0;
  std::uint64_t split_seed = 0;
  std::string output_dir = default_output_dir();
  std::string name = "eval";
};

int cmd_eval(const EvalArgs& a) {
  const ilda::Checkpoint cp = ilda::load_checkpoint(a.checkpoint);
  const ilda::Corpus test = load_corpus(a.corpus, a.vocab);

  ilda::EStepConfig estep;
  if (a.alpha0 > 0.0) {
    estep.alpha0 = a.alpha0;
  } else if (!cp.config_json.empty()) {
    const json cfg = json::parse(cp.config_json, nullptr, false);
    if (!cfg.is_discarded() && cfg.contains("alpha0"))
      estep.alpha0 = cfg["alpha0"].get<double>();
  }
  if (a.estep_tol > 0.0) estep.tol = a.estep_tol;
  if (a.estep_iters > 0) estep.max_iters = a.estep_iters;

  const ilda::PredictiveResult result =
      ilda::per_word_predictive_ll(cp.state, test, estep, a.split_seed);

  json out;
  out["checkpoint"] = a.checkpoint;
  out["alpha0"] = estep.alpha0;
  out["split_seed"] = a.split_seed;
  out["per_word_lpp"] = result.per_word_lpp;
  out["n_heldout_tokens"] = result.n_heldout_tokens;
  out["documents"] = json::array();
  for (const ilda::DocScore& doc : result.documents)
    out["documents"].push_back({{"doc_id", doc.doc_id},
                                {"log_likelihood", doc.log_likelihood},
                                {"n_heldout", doc.n_heldout}});

  const std::string text = out.dump(2) + "\n";
  const fs::path dir = prepare_output_dir(a.output_dir);
  write_text((dir / (a.name + ".eval.json")).string(), text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string corpus;
  std::string vocab;
  int bars_grid = 0;
  int docs = 200;
  int tokens = 50;
  std::uint64_t synth_seed = 1;
  std::vector<int> p_list;
  std::vector<int> minibatch_list;
  std::int64_t doc_budget = 400;
  int k = 10;
  double alpha0 = 0.5;
  double beta0 = 0.05;
  double kappa = 0.9;
  double tau = 1.0;
  std::uint64_t seed = 0;
  double delay_prob = 0.0;
  double delay_mu = 0.0;
  std::uint64_t delay_seed = 0;
  double token_cost = 2e-6;
  std::string heldout;
  std::string heldout_vocab;
  std::uint64_t split_seed = 0;
  std::string output_dir = default_output_dir();
  std::string name = "bench";
};

int cmd_bench(const BenchArgs& a) {
  if (a.p_list.empty() || a.minibatch_list.empty())
    throw ilda::ConfigError("bench: the sweep needs at least one worker count "
                            "and one mini-batch size");
  for (const int p : a.p_list)
    if (p < 1) throw ilda::ConfigError("bench: worker counts must be >= 1");
  for (const int m : a.minibatch_list)
    if (m < 1) throw ilda::ConfigError("bench: mini-batch sizes must be >= 1");

  ilda::Corpus corpus;
  if (a.bars_grid > 0) {
    corpus = ilda::synth_lda_corpus(2 * a.bars_grid, a.bars_grid * a.bars_grid,
                                    a.docs, a.tokens, a.alpha0,
                                    ilda::bars_topics(a.bars_grid),
                                    a.synth_seed)
                 .corpus;
  } else if (!a.corpus.empty()) {
    corpus = load_corpus(a.corpus, a.vocab);
  } else {
    throw ilda::ConfigError("bench: pass --corpus or --bars-grid");
  }
  std::optional<ilda::Corpus> heldout;
  if (!a.heldout.empty()) heldout = load_corpus(a.heldout, a.heldout_vocab);

  ilda::TrainConfig cfg;
  cfg.n_topics = a.k;
  cfg.beta0 = a.beta0;
  cfg.estep.alpha0 = a.alpha0;
  cfg.schedule.kappa = a.kappa;
  cfg.schedule.tau = a.tau;
  cfg.seed = a.seed;
  cfg.doc_budget = a.doc_budget;

  const ilda::DelayModel delay =
      ilda::DelayModel::make(a.delay_prob, a.delay_mu, a.delay_seed);
  ilda::DiviOptions options;
  options.mode = ilda::RunMode::kSimulated;
  options.per_token_cost_seconds = a.token_cost;

  struct Cell {
    int p = 0;
    int minibatch = 0;
    std::optional<double> lpp;
    double seconds = 0.0;
    std::optional<double> speedup;
    std::int64_t deltas = 0;
    std::int64_t messages = 0;
  };
  std::vector<Cell> cells;
  for (const int minibatch : a.minibatch_list) {
    std::optional<double> base_seconds;
    for (const int p : a.p_list) {
      ilda::TrainConfig run_cfg = cfg;
      run_cfg.minibatch_size = minibatch;
      const ilda::DiviResult result =
          ilda::run_divi(corpus, p, run_cfg, delay, a.doc_budget, options);
      Cell cell;
      cell.p = p;
      cell.minibatch = minibatch;
      cell.seconds = result.stats.seconds;
      cell.deltas = result.stats.deltas_applied;
      for (std::size_t w = 0; w < result.stats.sent_per_worker.size(); ++w)
        cell.messages += result.stats.sent_per_worker[w] +
                         result.stats.replies_per_worker[w];
      if (heldout)
        cell.lpp = ilda::per_word_predictive_ll(result.state, *heldout,
                                                run_cfg.estep, a.split_seed)
                       .per_word_lpp;
      if (p == 1) base_seconds = result.stats.seconds;
      if (base_seconds && cell.seconds > 0.0)
        cell.speedup = *base_seconds / cell.seconds;
      cells.push_back(cell);
    }
  }

  std::ostringstream table;
  table.precision(17);
  table << "p,minibatch,lpp,seconds,speedup,deltas_applied,messages\n";
  for (const Cell& cell : cells) {
    table << cell.p << "," << cell.minibatch << ",";
    if (cell.lpp) table << *cell.lpp;
    table << "," << cell.seconds << ",";
    if (cell.speedup) table << *cell.speedup;
    table << "," << cell.deltas << "," << cell.messages << "\n";
  }

  const fs::path dir = prepare_output_dir(a.output_dir);
  write_text((dir / (a.name + ".bench.csv")).string(), table.str());
  std::cout << table.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ilda: variational inference for topic models.\n"
      "Exit codes: 0 success, 1 usage/config error, 2 runtime/numeric "
      "failure."};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic UCI bag-of-words corpus");
  synth_cmd->add_option("--vocab-size", synth.vocab, "vocabulary size");
  synth_cmd->add_option("--k", synth.topics, "number of topics");
  synth_cmd->add_option("--docs", synth.docs, "number of documents");
  synth_cmd->add_option("--tokens", synth.tokens, "tokens per document");
  synth_cmd->add_option("--alpha0", synth.alpha0, "document Dirichlet prior");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--bars-grid", synth.bars_grid,
                        "use planted bar topics on a grid x grid vocabulary");
  synth_cmd->add_option("--output-dir", synth.output_dir,
                        "artifact directory (env ILDA_OUTPUT_DIR)");
  synth_cmd->add_option("--name", synth.name, "artifact name prefix");

  TrainArgs train;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Fit a model and write the artifacts");
  train_cmd->add_option("--corpus", train.corpus,
                        "docword file or directory holding one")
      ->required();
  train_cmd->add_option("--vocab", train.vocab, "vocabulary file");
  train_cmd->add_option("--algo", train.algo, "mvi, svi, ivi, sivi or divi");
  train_cmd->add_option("--k", train.k, "number of topics");
  train_cmd->add_option("--alpha0", train.alpha0, "document Dirichlet prior");
  train_cmd->add_option("--beta0", train.beta0, "topic Dirichlet prior");
  train_cmd->add_option("--kappa", train.kappa, "learning rate decay in (0.5, 1]");
  train_cmd->add_option("--tau", train.tau, "learning rate offset >= 0");
  train_cmd->add_option("--minibatch", train.minibatch, "documents per update");
  train_cmd->add_option("--epochs", train.epochs, "corpus passes");
  train_cmd->add_option("--doc-budget", train.doc_budget,
                        "stop after this many document visits (0 = epochs)");
  train_cmd->add_option("--seed", train.seed, "run seed");
  train_cmd->add_option("--estep-tol", train.estep_tol,
                        "E-step convergence tolerance (0 = auto)");
  train_cmd->add_option("--estep-iters", train.estep_iters,
                        "E-step iteration cap (0 = default)");
  train_cmd->add_option("--p", train.p, "worker count (divi)");
  train_cmd->add_option("--delay-prob", train.delay_prob,
                        "per-step worker sleep probability");
  train_cmd->add_option("--delay-mu", train.delay_mu,
                        "mean injected sleep in seconds (sigma = mu/5)");
  train_cmd->add_option("--delay-seed", train.delay_seed, "delay seed");
  bool simulated_flag = false;
  train_cmd->add_flag("--simulated", simulated_flag,
                      "run divi under the virtual clock (default)");
  train_cmd->add_flag("--live", train.live, "run divi with real threads");
  train_cmd->add_option("--transport", train.transport,
                        "live transport: inprocess or socket");
  train_cmd->add_option("--grace", train.grace,
                        "live mode worker silence limit in seconds");
  train_cmd->add_option("--token-cost", train.token_cost,
                        "simulated seconds of compute per token");
  train_cmd->add_option("--eval-cadence", train.eval_cadence,
                        "trace every N document visits (0 = off)");
  train_cmd->add_option("--heldout", train.heldout,
                        "held-out corpus for trace metrics");
  train_cmd->add_option("--heldout-vocab", train.heldout_vocab,
                        "held-out vocabulary file");
  train_cmd->add_option("--split-seed", train.split_seed,
                        "held-out token split seed");
  train_cmd->add_option("--output-dir", train.output_dir,
                        "artifact directory (env ILDA_OUTPUT_DIR)");
  train_cmd->add_option("--name", train.name, "artifact name prefix");

  EvalArgs eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Score a test corpus against a checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "model checkpoint")
      ->required();
  eval_cmd->add_option("--corpus", eval.corpus,
                       "test docword file or directory")
      ->required();
  eval_cmd->add_option("--vocab", eval.vocab, "test vocabulary file");
  eval_cmd->add_option("--alpha0", eval.alpha0,
                       "document prior (0 = take from checkpoint)");
  eval_cmd->add_option("--estep-tol", eval.estep_tol,
                       "E-step convergence tolerance (0 = auto)");
  eval_cmd->add_option("--estep-iters", eval.estep_iters,
                       "E-step iteration cap (0 = default)");
  eval_cmd->add_option("--split-seed", eval.split_seed,
                       "held-out token split seed");
  eval_cmd->add_option("--output-dir", eval.output_dir,
                       "artifact directory (env ILDA_OUTPUT_DIR)");
  eval_cmd->add_option("--name", eval.name, "artifact name prefix");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "Sweep worker counts and mini-batch sizes (simulated clock)");
  bench_cmd->add_option("--corpus", bench.corpus,
                        "docword file or directory holding one");
  bench_cmd->add_option("--vocab", bench.vocab, "vocabulary file");
  bench_cmd->add_option("--bars-grid", bench.bars_grid,
                        "generate a bar-topic corpus instead of loading one");
  bench_cmd->add_option("--docs", bench.docs, "generated corpus size");
  bench_cmd->add_option("--tokens", bench.tokens, "generated tokens per document");
  bench_cmd->add_option("--synth-seed", bench.synth_seed, "generator seed");
  bench_cmd->add_option("--p-list", bench.p_list, "worker counts to sweep")
      ->delimiter(',');
  bench_cmd
      ->add_option("--minibatch-list", bench.minibatch_list,
                   "mini-batch sizes to sweep")
      ->delimiter(',');
  bench_cmd->add_option("--doc-budget", bench.doc_budget,
                        "document visits per sweep cell");
  bench_cmd->add_option("--k", bench.k, "number of topics");
  bench_cmd->add_option("--alpha0", bench.alpha0, "document Dirichlet prior");
  bench_cmd->add_option("--beta0", bench.beta0, "topic Dirichlet prior");
  bench_cmd->add_option("--kappa", bench.kappa, "learning rate decay");
  bench_cmd->add_option("--tau", bench.tau, "learning rate offset");
  bench_cmd->add_option("--seed", bench.seed, "run seed");
  bench_cmd->add_option("--delay-prob", bench.delay_prob,
                        "per-step worker sleep probability");
  bench_cmd->add_option("--delay-mu", bench.delay_mu,
                        "mean injected sleep in seconds (sigma = mu/5)");
  bench_cmd->add_option("--delay-seed", bench.delay_seed, "delay seed");
  bench_cmd->add_option("--token-cost", bench.token_cost,
                        "simulated seconds of compute per token");
  bench_cmd->add_option("--heldout", bench.heldout,
                        "held-out corpus for the lpp column");
  bench_cmd->add_option("--heldout-vocab", bench.heldout_vocab,
                        "held-out vocabulary file");
  bench_cmd->add_option("--split-seed", bench.split_seed,
                        "held-out token split seed");
  bench_cmd->add_option("--output-dir", bench.output_dir,
                        "artifact directory (env ILDA_OUTPUT_DIR)");
  bench_cmd->add_option("--name", bench.name, "artifact name prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (simulated_flag && train.live) {
    std::cerr << "config error: --simulated and --live are exclusive\n";
    return 1;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (train_cmd->parsed()) return cmd_train(train);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (bench_cmd->parsed()) return cmd_bench(bench);
    return 1;
  } catch (const ilda::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
