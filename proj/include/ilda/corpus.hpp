// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ilda/types.hpp"

namespace ilda {

struct Vocabulary {
  std::vector<std::string> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
};

/// One (word id, count) pair of a document's sparse bag of words.
struct DocEntry {
  std::int32_t word = 0;
  std::int64_t count = 0;
};

/// Bag of words. Entries hold unique word ids in ascending order with
/// positive counts; n_tokens is the sum of counts.
struct Document {
  std::int64_t id = 0;
  std::vector<DocEntry> entries;
  std::int64_t n_tokens = 0;
};

struct Corpus {
  Vocabulary vocabulary;
  std::vector<Document> documents;

  int n_docs() const { return static_cast<int>(documents.size()); }
  int vocab_size() const { return vocabulary.size(); }
  std::int64_t total_tokens() const;
};

/// Throws ContractError if the document violates its invariants
/// (word ids within [0, V), strictly ascending, positive counts).
void validate_document(const Document& doc, int vocab_size);

struct UciLoadStats {
  std::int64_t documents_dropped = 0;
  std::int64_t duplicates_merged = 0;
};

/// Reads the UCI bag-of-words pair: a docword file with a three-integer
/// header (D, V, NNZ) followed by NNZ "docId wordId count" triples
/// (1-based ids), and a vocabulary file with one token per line.
/// Duplicate (doc, word) triples are merged by summing counts; documents
/// that end up empty are dropped and the remaining documents renumbered.
/// Malformed content raises ParseError with the offending line number.
Corpus load_uci_bow(const std::string& docword_path,
                    const std::string& vocab_path,
                    UciLoadStats* stats = nullptr);

/// Writes the same format back out; ids are 1-based in the file.
void write_uci_bow(const Corpus& corpus, const std::string& docword_path,
                   const std::string& vocab_path);

/// Token-level held-out split of one document. Both halves keep the
/// document id; the observed half gets ceil(n_tokens / 2) tokens.
struct HeldOutSplit {
  Document observed;
  Document heldout;
  std::uint64_t seed = 0;
};

/// Splits by permuting the expanded token list with a generator seeded
/// from (seed, document id), so the split does not depend on the order in
/// which documents are processed. Documents need at least 2 tokens.
HeldOutSplit split_heldout(const Document& doc, std::uint64_t seed);

/// Placeholder tokens w0000.. for generated corpora.
Vocabulary synthetic_vocabulary(int vocab_size);

struct SynthResult {
  Corpus corpus;
  Matrix topics;  // V x K, column-stochastic; the matrix actually used
};

/// Samples a corpus from the generative model: per document a topic
/// mixture from Dirichlet(alpha0), then tokens_per_doc tokens. If topics
/// is absent, columns are drawn from a flat Dirichlet. Provided topics
/// must be V x K with nonnegative entries and columns summing to 1
/// within 1e-9, else ConfigError.
SynthResult synth_lda_corpus(int n_topics, int vocab_size, int n_docs,
                             int tokens_per_doc, double alpha0,
                             const std::optional<Matrix>& topics,
                             std::uint64_t seed);

/// The classic bars ground truth on a grid x grid image vocabulary:
/// 2 * grid topics, each uniform over one row or one column of pixels.
Matrix bars_topics(int grid);

/// Deterministic per-epoch permutation of 0..n_docs-1.
std::vector<int> visit_order(int n_docs, int epoch, std::uint64_t seed);

}  // namespace ilda
