// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the core library. Matrices cross the boundary as
// numpy arrays (copies, never views into library state).

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ilda/algorithms.hpp"
#include "ilda/checkpoint.hpp"
#include "ilda/corpus.hpp"
#include "ilda/distributed.hpp"
#include "ilda/errors.hpp"
#include "ilda/eval.hpp"
#include "ilda/trace.hpp"
#include "ilda/vi.hpp"

namespace py = pybind11;

namespace {

// Builds a validated corpus from plain python data.
ilda::Corpus make_corpus(
    const std::vector<std::string>& tokens,
    const std::vector<std::vector<std::pair<std::int32_t, std::int64_t>>>&
        documents) {
  ilda::Corpus corpus;
  corpus.vocabulary.tokens = tokens;
  corpus.documents.reserve(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    ilda::Document doc;
    doc.id = static_cast<std::int64_t>(d);
    for (const auto& [word, count] : documents[d]) {
      doc.entries.push_back({word, count});
      doc.n_tokens += count;
    }
    ilda::validate_document(doc, corpus.vocabulary.size());
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Topic model inference: batch, incremental and distributed "
            "variational training";

  // ---- corpus ------------------------------------------------------------

  py::class_<ilda::DocEntry>(m, "DocEntry")
      .def(py::init<std::int32_t, std::int64_t>(), py::arg("word"),
           py::arg("count"))
      .def_readonly("word", &ilda::DocEntry::word)
      .def_readonly("count", &ilda::DocEntry::count)
      .def("__repr__", [](const ilda::DocEntry& e) {
        return "DocEntry(word=" + std::to_string(e.word) +
               ", count=" + std::to_string(e.count) + ")";
      });

  py::class_<ilda::Document>(m, "Document")
      .def_readonly("id", &ilda::Document::id)
      .def_readonly("n_tokens", &ilda::Document::n_tokens)
      .def_readonly("entries", &ilda::Document::entries);

  py::class_<ilda::Corpus>(m, "Corpus")
      .def_property_readonly("n_docs", &ilda::Corpus::n_docs)
      .def_property_readonly("vocab_size", &ilda::Corpus::vocab_size)
      .def_property_readonly("total_tokens", &ilda::Corpus::total_tokens)
      .def_property_readonly(
          "tokens",
          [](const ilda::Corpus& c) { return c.vocabulary.tokens; })
      .def_readonly("documents", &ilda::Corpus::documents);

  m.def("make_corpus", &make_corpus, py::arg("tokens"), py::arg("documents"),
        "Builds a corpus from a token list and per-document (word, count) "
        "pairs.");
  m.def("load_uci_bow",
        [](const std::string& docword, const std::string& vocab) {
          return ilda::load_uci_bow(docword, vocab);
        },
        py::arg("docword_path"), py::arg("vocab_path"));
  m.def("write_uci_bow", &ilda::write_uci_bow, py::arg("corpus"),
        py::arg("docword_path"), py::arg("vocab_path"));

  py::class_<ilda::SynthResult>(m, "SynthResult")
      .def_readonly("corpus", &ilda::SynthResult::corpus)
      .def_readonly("topics", &ilda::SynthResult::topics);

  m.def("synth_lda_corpus", &ilda::synth_lda_corpus, py::arg("n_topics"),
        py::arg("vocab_size"), py::arg("n_docs"), py::arg("tokens_per_doc"),
        py::arg("alpha0"), py::arg("topics") = std::nullopt,
        py::arg("seed") = 0);
  m.def("bars_topics", &ilda::bars_topics, py::arg("grid"));

  // ---- configuration -----------------------------------------------------

  py::class_<ilda::EStepConfig>(m, "EStepConfig")
      .def(py::init<>())
      .def_readwrite("alpha0", &ilda::EStepConfig::alpha0)
      .def_readwrite("tol", &ilda::EStepConfig::tol)
      .def_readwrite("max_iters", &ilda::EStepConfig::max_iters);

  py::class_<ilda::Schedule>(m, "Schedule")
      .def(py::init<>())
      .def(py::init([](double kappa, double tau) {
             ilda::Schedule s;
             s.kappa = kappa;
             s.tau = tau;
             return s;
           }),
           py::arg("kappa"), py::arg("tau") = 1.0)
      .def_readwrite("kappa", &ilda::Schedule::kappa)
      .def_readwrite("tau", &ilda::Schedule::tau)
      .def("validate", &ilda::Schedule::validate);

  m.def("learning_rate", &ilda::learning_rate, py::arg("t"),
        py::arg("schedule"));

  py::class_<ilda::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("n_topics", &ilda::TrainConfig::n_topics)
      .def_readwrite("beta0", &ilda::TrainConfig::beta0)
      .def_readwrite("estep", &ilda::TrainConfig::estep)
      .def_readwrite("schedule", &ilda::TrainConfig::schedule)
      .def_readwrite("minibatch_size", &ilda::TrainConfig::minibatch_size)
      .def_readwrite("epochs", &ilda::TrainConfig::epochs)
      .def_readwrite("doc_budget", &ilda::TrainConfig::doc_budget)
      .def_readwrite("seed", &ilda::TrainConfig::seed)
      .def("validate", &ilda::TrainConfig::validate);

  // ---- model state -------------------------------------------------------

  py::class_<ilda::GlobalState>(m, "GlobalState")
      .def_property_readonly("vocab_size", &ilda::GlobalState::vocab_size)
      .def_property_readonly("n_topics", &ilda::GlobalState::n_topics)
      .def_property_readonly("beta0", &ilda::GlobalState::beta0)
      .def_property_readonly(
          "beta",
          [](const ilda::GlobalState& s) { return ilda::Matrix(s.beta()); })
      .def_property_readonly("expected_counts",
                             [](const ilda::GlobalState& s) {
                               return ilda::Matrix(s.expected_counts());
                             })
      .def_property_readonly("step_count", &ilda::GlobalState::step_count)
      .def_property_readonly("visits", &ilda::GlobalState::visits);

  py::class_<ilda::LocalStore>(m, "LocalStore")
      .def_property_readonly("size", &ilda::LocalStore::size)
      .def_property_readonly("stored_count", &ilda::LocalStore::stored_count);

  py::class_<ilda::TraceRecord>(m, "TraceRecord")
      .def_readonly("docs_processed", &ilda::TraceRecord::docs_processed)
      .def_readonly("seconds", &ilda::TraceRecord::seconds)
      .def_readonly("elbo", &ilda::TraceRecord::elbo)
      .def_readonly("heldout_lpp", &ilda::TraceRecord::heldout_lpp);

  // ---- training ----------------------------------------------------------

  py::class_<ilda::TrainResult>(m, "TrainResult")
      .def_readonly("state", &ilda::TrainResult::state)
      .def_readonly("locals", &ilda::TrainResult::locals)
      .def_property_readonly("trace", [](const ilda::TrainResult& r) {
        return r.trace.records;
      });

  m.def(
      "train",
      [](const ilda::Corpus& corpus, const std::string& algo,
         const ilda::TrainConfig& cfg) {
        return ilda::train(corpus, ilda::algorithm_from_string(algo), cfg);
      },
      py::arg("corpus"), py::arg("algo"), py::arg("config"),
      py::call_guard<py::gil_scoped_release>(),
      "Runs mvi, svi, ivi or sivi to the configured document budget.");

  m.def("elbo", &ilda::elbo, py::arg("corpus"), py::arg("state"),
        py::arg("locals"), py::arg("alpha0"));

  // ---- distributed -------------------------------------------------------

  py::class_<ilda::DelayModel>(m, "DelayModel")
      .def(py::init<>())
      .def(py::init([](double sleep_prob, double mu, double sigma,
                       std::uint64_t seed) {
             ilda::DelayModel d;
             d.sleep_prob = sleep_prob;
             d.mu = mu;
             d.sigma = sigma;
             d.seed = seed;
             return d;
           }),
           py::arg("sleep_prob"), py::arg("mu"), py::arg("sigma") = 0.0,
           py::arg("seed") = 0)
      .def_static("make", &ilda::DelayModel::make, py::arg("sleep_prob"),
                  py::arg("mu"), py::arg("seed"))
      .def_readwrite("sleep_prob", &ilda::DelayModel::sleep_prob)
      .def_readwrite("mu", &ilda::DelayModel::mu)
      .def_readwrite("sigma", &ilda::DelayModel::sigma)
      .def_readwrite("seed", &ilda::DelayModel::seed);

  py::enum_<ilda::RunMode>(m, "RunMode")
      .value("SIMULATED", ilda::RunMode::kSimulated)
      .value("LIVE", ilda::RunMode::kLive);

  py::enum_<ilda::Transport>(m, "Transport")
      .value("IN_PROCESS", ilda::Transport::kInProcess)
      .value("SOCKET", ilda::Transport::kSocket);

  py::class_<ilda::DiviOptions>(m, "DiviOptions")
      .def(py::init<>())
      .def_readwrite("mode", &ilda::DiviOptions::mode)
      .def_readwrite("transport", &ilda::DiviOptions::transport)
      .def_readwrite("grace_period_seconds",
                     &ilda::DiviOptions::grace_period_seconds)
      .def_readwrite("per_token_cost_seconds",
                     &ilda::DiviOptions::per_token_cost_seconds);

  py::class_<ilda::DiviStats>(m, "DiviStats")
      .def_readonly("deltas_applied", &ilda::DiviStats::deltas_applied)
      .def_readonly("docs_processed", &ilda::DiviStats::docs_processed)
      .def_readonly("seconds", &ilda::DiviStats::seconds)
      .def_readonly("sent_per_worker", &ilda::DiviStats::sent_per_worker)
      .def_readonly("replies_per_worker", &ilda::DiviStats::replies_per_worker);

  py::class_<ilda::DiviResult>(m, "DiviResult")
      .def_readonly("state", &ilda::DiviResult::state)
      .def_readonly("stats", &ilda::DiviResult::stats)
      .def_property_readonly("trace", [](const ilda::DiviResult& r) {
        return r.trace.records;
      });

  m.def(
      "run_divi",
      [](const ilda::Corpus& corpus, int n_workers,
         const ilda::TrainConfig& cfg, std::int64_t doc_budget,
         const ilda::DelayModel& delay, const ilda::DiviOptions& options) {
        return ilda::run_divi(corpus, n_workers, cfg, delay, doc_budget,
                              options);
      },
      py::arg("corpus"), py::arg("n_workers"), py::arg("config"),
      py::arg("doc_budget"), py::arg("delay") = ilda::DelayModel{},
      py::arg("options") = ilda::DiviOptions{},
      py::call_guard<py::gil_scoped_release>(),
      "Asynchronous distributed training with one master and n_workers "
      "shard owners.");

  // ---- evaluation --------------------------------------------------------

  py::class_<ilda::DocScore>(m, "DocScore")
      .def_readonly("doc_id", &ilda::DocScore::doc_id)
      .def_readonly("log_likelihood", &ilda::DocScore::log_likelihood)
      .def_readonly("n_heldout", &ilda::DocScore::n_heldout);

  py::class_<ilda::PredictiveResult>(m, "PredictiveResult")
      .def_readonly("per_word_lpp", &ilda::PredictiveResult::per_word_lpp)
      .def_readonly("n_heldout_tokens",
                    &ilda::PredictiveResult::n_heldout_tokens)
      .def_readonly("documents", &ilda::PredictiveResult::documents);

  m.def("per_word_predictive_ll", &ilda::per_word_predictive_ll,
        py::arg("state"), py::arg("test"),
        py::arg("estep") = ilda::EStepConfig{}, py::arg("split_seed") = 0,
        py::call_guard<py::gil_scoped_release>());

  m.def("posterior_topics", &ilda::posterior_topics, py::arg("state"),
        "Column-normalized topic-word point estimates, one column per "
        "topic.");

  m.def(
      "top_words",
      [](const ilda::GlobalState& state, const ilda::Corpus& corpus, int topic,
         int n) {
        return ilda::top_words(state, corpus.vocabulary, topic, n);
      },
      py::arg("state"), py::arg("corpus"), py::arg("topic"), py::arg("n"));

  // ---- checkpoints -------------------------------------------------------

  py::class_<ilda::Checkpoint>(m, "Checkpoint")
      .def_readonly("state", &ilda::Checkpoint::state)
      .def_readonly("config_json", &ilda::Checkpoint::config_json);

  m.def("save_checkpoint", &ilda::save_checkpoint, py::arg("path"),
        py::arg("state"), py::arg("config_json") = "");
  m.def("load_checkpoint", &ilda::load_checkpoint, py::arg("path"));
}
