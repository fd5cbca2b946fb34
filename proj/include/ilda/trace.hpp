// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ilda {

/// One evaluation point along a training run.
struct TraceRecord {
  std::int64_t docs_processed = 0;
  double seconds = 0.0;
  std::optional<double> elbo;
  std::optional<double> heldout_lpp;
};

struct RunTrace {
  std::vector<TraceRecord> records;

  void append(TraceRecord r) { records.push_back(r); }
  bool empty() const { return records.empty(); }

  /// Header "docs_processed,seconds,elbo,heldout_lpp"; absent metrics are
  /// empty fields. Values carry full double precision.
  void write_csv(std::ostream& out) const;
  /// One JSON object per line with the same fields; absent metrics are
  /// omitted.
  void write_jsonl(std::ostream& out) const;

  void save_csv(const std::string& path) const;
  void save_jsonl(const std::string& path) const;
};

}  // namespace ilda
