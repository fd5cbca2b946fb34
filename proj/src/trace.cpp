// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include "ilda/trace.hpp"

#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ilda/errors.hpp"

namespace ilda {

namespace {

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(std::numeric_limits<double>::max_digits10);
  ss << x;
  return ss.str();
}

}  // namespace

void RunTrace::write_csv(std::ostream& out) const {
  out << "docs_processed,seconds,elbo,heldout_lpp\n";
  for (const auto& r : records) {
    out << r.docs_processed << "," << fmt(r.seconds) << ",";
    if (r.elbo) out << fmt(*r.elbo);
    out << ",";
    if (r.heldout_lpp) out << fmt(*r.heldout_lpp);
    out << "\n";
  }
}

void RunTrace::write_jsonl(std::ostream& out) const {
  for (const auto& r : records) {
    nlohmann::json j;
    j["docs_processed"] = r.docs_processed;
    j["seconds"] = r.seconds;
    if (r.elbo) j["elbo"] = *r.elbo;
    if (r.heldout_lpp) j["heldout_lpp"] = *r.heldout_lpp;
    out << j.dump() << "\n";
  }
}

void RunTrace::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  write_csv(out);
}

void RunTrace::save_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  write_jsonl(out);
}

}  // namespace ilda
