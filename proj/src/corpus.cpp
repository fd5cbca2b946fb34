// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include "ilda/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ilda/errors.hpp"
#include "ilda/rng.hpp"

namespace ilda {

std::int64_t Corpus::total_tokens() const {
  std::int64_t total = 0;
  for (const auto& d : documents) total += d.n_tokens;
  return total;
}

void validate_document(const Document& doc, int vocab_size) {
  std::int64_t tokens = 0;
  std::int32_t prev = -1;
  for (const auto& e : doc.entries) {
    if (e.word < 0 || e.word >= vocab_size)
      throw ContractError("document " + std::to_string(doc.id) +
                          ": word id out of range");
    if (e.word <= prev)
      throw ContractError("document " + std::to_string(doc.id) +
                          ": word ids must be unique and ascending");
    if (e.count <= 0)
      throw ContractError("document " + std::to_string(doc.id) +
                          ": counts must be positive");
    prev = e.word;
    tokens += e.count;
  }
  if (tokens != doc.n_tokens)
    throw ContractError("document " + std::to_string(doc.id) +
                        ": n_tokens does not match entry counts");
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::int64_t line,
                             const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

bool parse_i64(const std::string& tok, std::int64_t& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

}  // namespace

Corpus load_uci_bow(const std::string& docword_path,
                    const std::string& vocab_path, UciLoadStats* stats) {
  std::ifstream in(docword_path);
  if (!in) throw ParseError(docword_path + ": cannot open file");

  std::string line;
  std::int64_t lineno = 0;

  // Header: three integers D, V, NNZ, conventionally one per line but
  // accepted on fewer lines as well.
  std::vector<std::int64_t> header;
  while (header.size() < 3 && std::getline(in, line)) {
    ++lineno;
    for (const auto& tok : split_ws(line)) {
      std::int64_t v = 0;
      if (!parse_i64(tok, v))
        parse_fail(docword_path, lineno, "expected integer in header, got '" + tok + "'");
      if (header.size() == 3)
        parse_fail(docword_path, lineno, "too many header values");
      header.push_back(v);
    }
  }
  if (header.size() < 3)
    parse_fail(docword_path, lineno, "truncated header, need D V NNZ");
  const std::int64_t n_docs = header[0];
  const std::int64_t n_words = header[1];
  const std::int64_t nnz = header[2];
  if (n_docs < 0 || n_words <= 0 || nnz < 0)
    parse_fail(docword_path, lineno, "header values out of range");

  std::vector<std::map<std::int32_t, std::int64_t>> counts(
      static_cast<std::size_t>(n_docs));
  std::int64_t duplicates = 0;
  std::int64_t seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 3)
      parse_fail(docword_path, lineno, "expected 'docId wordId count'");
    std::int64_t d = 0, w = 0, c = 0;
    if (!parse_i64(toks[0], d) || !parse_i64(toks[1], w) || !parse_i64(toks[2], c))
      parse_fail(docword_path, lineno, "expected three integers");
    if (d < 1 || d > n_docs)
      parse_fail(docword_path, lineno, "document id " + std::to_string(d) +
                                           " outside 1.." + std::to_string(n_docs));
    if (w < 1 || w > n_words)
      parse_fail(docword_path, lineno, "word id " + std::to_string(w) +
                                           " outside 1.." + std::to_string(n_words));
    if (c < 1)
      parse_fail(docword_path, lineno, "count must be >= 1");
    ++seen;
    if (seen > nnz)
      parse_fail(docword_path, lineno, "more triples than the declared NNZ");
    auto& doc = counts[static_cast<std::size_t>(d - 1)];
    auto [it, inserted] = doc.emplace(static_cast<std::int32_t>(w - 1), c);
    if (!inserted) {
      it->second += c;
      ++duplicates;
    }
  }
  if (seen < nnz)
    parse_fail(docword_path, lineno,
               "declared NNZ " + std::to_string(nnz) + " but found " +
                   std::to_string(seen) + " triples");

  std::ifstream vin(vocab_path);
  if (!vin) throw ParseError(vocab_path + ": cannot open file");
  Vocabulary vocab;
  std::set<std::string> uniq;
  std::int64_t vline = 0;
  while (std::getline(vin, line)) {
    ++vline;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (static_cast<std::int64_t>(vocab.tokens.size()) == n_words) continue;
      parse_fail(vocab_path, vline, "empty vocabulary entry");
    }
    if (!uniq.insert(line).second)
      parse_fail(vocab_path, vline, "duplicate token '" + line + "'");
    vocab.tokens.push_back(line);
  }
  if (static_cast<std::int64_t>(vocab.tokens.size()) != n_words)
    throw ParseError(vocab_path + ": has " + std::to_string(vocab.tokens.size()) +
                     " tokens but docword header declares " + std::to_string(n_words));

  Corpus corpus;
  corpus.vocabulary = std::move(vocab);
  std::int64_t dropped = 0;
  for (std::int64_t d = 0; d < n_docs; ++d) {
    const auto& m = counts[static_cast<std::size_t>(d)];
    if (m.empty()) {
      ++dropped;
      continue;
    }
    Document doc;
    doc.id = static_cast<std::int64_t>(corpus.documents.size());
    doc.entries.reserve(m.size());
    for (const auto& [w, c] : m) {
      doc.entries.push_back({w, c});
      doc.n_tokens += c;
    }
    corpus.documents.push_back(std::move(doc));
  }
  if (stats) {
    stats->documents_dropped = dropped;
    stats->duplicates_merged = duplicates;
  }
  return corpus;
}

void write_uci_bow(const Corpus& corpus, const std::string& docword_path,
                   const std::string& vocab_path) {
  std::int64_t nnz = 0;
  for (const auto& d : corpus.documents)
    nnz += static_cast<std::int64_t>(d.entries.size());

  std::ofstream out(docword_path);
  if (!out) throw ParseError(docword_path + ": cannot open file for writing");
  out << corpus.n_docs() << "\n" << corpus.vocab_size() << "\n" << nnz << "\n";
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    for (const auto& e : corpus.documents[d].entries)
      out << (d + 1) << " " << (e.word + 1) << " " << e.count << "\n";
  }
  if (!out) throw ParseError(docword_path + ": write failed");

  std::ofstream vout(vocab_path);
  if (!vout) throw ParseError(vocab_path + ": cannot open file for writing");
  for (const auto& t : corpus.vocabulary.tokens) vout << t << "\n";
  if (!vout) throw ParseError(vocab_path + ": write failed");
}

HeldOutSplit split_heldout(const Document& doc, std::uint64_t seed) {
  if (doc.n_tokens < 2)
    throw ContractError("split_heldout: document " + std::to_string(doc.id) +
                        " needs at least 2 tokens");

  std::vector<std::int32_t> slots;
  slots.reserve(static_cast<std::size_t>(doc.n_tokens));
  for (const auto& e : doc.entries)
    for (std::int64_t i = 0; i < e.count; ++i) slots.push_back(e.word);

  // Seeded per document id so the split is a property of the document,
  // not of traversal order.
  Rng rng(mix_seed(seed, streams::kSplit, static_cast<std::uint64_t>(doc.id)));
  rng.shuffle(slots);

  const std::size_t n_obs = (slots.size() + 1) / 2;
  auto collect = [&](std::size_t first, std::size_t last) {
    std::map<std::int32_t, std::int64_t> m;
    for (std::size_t i = first; i < last; ++i) ++m[slots[i]];
    Document part;
    part.id = doc.id;
    for (const auto& [w, c] : m) {
      part.entries.push_back({w, c});
      part.n_tokens += c;
    }
    return part;
  };
  HeldOutSplit split;
  split.observed = collect(0, n_obs);
  split.heldout = collect(n_obs, slots.size());
  split.seed = seed;
  return split;
}

Vocabulary synthetic_vocabulary(int vocab_size) {
  Vocabulary vocab;
  vocab.tokens.reserve(static_cast<std::size_t>(vocab_size));
  int width = 1;
  for (int v = vocab_size - 1; v >= 10; v /= 10) ++width;
  for (int v = 0; v < vocab_size; ++v) {
    std::string num = std::to_string(v);
    vocab.tokens.push_back("w" + std::string(width - num.size(), '0') + num);
  }
  return vocab;
}

namespace {

// Inverse CDF sampling from a row of cumulative weights.
int sample_cdf(const std::vector<double>& cdf, double u) {
  const double target = u * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  const auto idx = std::min<std::ptrdiff_t>(it - cdf.begin(),
                                            static_cast<std::ptrdiff_t>(cdf.size()) - 1);
  return static_cast<int>(idx);
}

}  // namespace

SynthResult synth_lda_corpus(int n_topics, int vocab_size, int n_docs,
                             int tokens_per_doc, double alpha0,
                             const std::optional<Matrix>& topics,
                             std::uint64_t seed) {
  if (n_topics < 1 || vocab_size < 1 || n_docs < 1 || tokens_per_doc < 1)
    throw ConfigError("synth_lda_corpus: sizes must be >= 1");
  if (!(alpha0 > 0.0)) throw ConfigError("synth_lda_corpus: alpha0 must be > 0");

  Rng rng(mix_seed(seed, streams::kSynth));

  Matrix phi;
  if (topics) {
    phi = *topics;
    if (phi.rows() != vocab_size || phi.cols() != n_topics)
      throw ConfigError("synth_lda_corpus: topics must be V x K");
    for (int k = 0; k < n_topics; ++k) {
      double sum = 0.0;
      for (int v = 0; v < vocab_size; ++v) {
        if (phi(v, k) < 0.0)
          throw ConfigError("synth_lda_corpus: topics must be nonnegative");
        sum += phi(v, k);
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("synth_lda_corpus: topic column " + std::to_string(k) +
                          " sums to " + std::to_string(sum) + ", expected 1");
    }
  } else {
    phi.resize(vocab_size, n_topics);
    for (int k = 0; k < n_topics; ++k) {
      double sum = 0.0;
      for (int v = 0; v < vocab_size; ++v) {
        phi(v, k) = rng.gamma(1.0);
        sum += phi(v, k);
      }
      phi.col(k) /= sum;
    }
  }

  std::vector<std::vector<double>> topic_cdf(static_cast<std::size_t>(n_topics));
  for (int k = 0; k < n_topics; ++k) {
    auto& cdf = topic_cdf[static_cast<std::size_t>(k)];
    cdf.resize(static_cast<std::size_t>(vocab_size));
    double acc = 0.0;
    for (int v = 0; v < vocab_size; ++v) {
      acc += phi(v, k);
      cdf[static_cast<std::size_t>(v)] = acc;
    }
  }

  Corpus corpus;
  corpus.vocabulary = synthetic_vocabulary(vocab_size);
  corpus.documents.reserve(static_cast<std::size_t>(n_docs));
  std::vector<double> theta_cdf(static_cast<std::size_t>(n_topics));
  for (int d = 0; d < n_docs; ++d) {
    double acc = 0.0;
    for (int k = 0; k < n_topics; ++k) {
      acc += rng.gamma(alpha0);
      theta_cdf[static_cast<std::size_t>(k)] = acc;
    }
    std::map<std::int32_t, std::int64_t> m;
    for (int n = 0; n < tokens_per_doc; ++n) {
      const int z = sample_cdf(theta_cdf, rng.uniform());
      const int v = sample_cdf(topic_cdf[static_cast<std::size_t>(z)], rng.uniform());
      ++m[static_cast<std::int32_t>(v)];
    }
    Document doc;
    doc.id = d;
    for (const auto& [w, c] : m) {
      doc.entries.push_back({w, c});
      doc.n_tokens += c;
    }
    corpus.documents.push_back(std::move(doc));
  }

  return {std::move(corpus), std::move(phi)};
}

Matrix bars_topics(int grid) {
  if (grid < 1) throw ConfigError("bars_topics: grid must be >= 1");
  const int vocab_size = grid * grid;
  const int n_topics = 2 * grid;
  Matrix phi = Matrix::Zero(vocab_size, n_topics);
  const double w = 1.0 / static_cast<double>(grid);
  for (int r = 0; r < grid; ++r)
    for (int j = 0; j < grid; ++j) phi(r * grid + j, r) = w;
  for (int c = 0; c < grid; ++c)
    for (int j = 0; j < grid; ++j) phi(j * grid + c, grid + c) = w;
  return phi;
}

std::vector<int> visit_order(int n_docs, int epoch, std::uint64_t seed) {
  if (n_docs < 1) throw ContractError("visit_order: n_docs must be >= 1");
  std::vector<int> order(static_cast<std::size_t>(n_docs));
  for (int i = 0; i < n_docs; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(mix_seed(seed, streams::kVisitOrder, static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);
  return order;
}

}  // namespace ilda
