// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "helpers.hpp"
#include "ilda/errors.hpp"
#include "ilda/trace.hpp"

using namespace ilda;

namespace {

RunTrace sample_trace() {
  RunTrace trace;
  TraceRecord a;
  a.docs_processed = 10;
  a.seconds = 0.5;
  a.elbo = -12.25;
  trace.append(a);
  TraceRecord b;
  b.docs_processed = 20;
  b.seconds = 1.5;
  b.heldout_lpp = -7.5;
  trace.append(b);
  TraceRecord c;
  c.docs_processed = 30;
  c.seconds = 2.0;
  trace.append(c);
  return trace;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("trace");

TEST_CASE("csv output leaves absent metrics as empty fields") {
  std::ostringstream out;
  sample_trace().write_csv(out);
  CHECK(out.str() ==
        "docs_processed,seconds,elbo,heldout_lpp\n"
        "10,0.5,-12.25,\n"
        "20,1.5,,-7.5\n"
        "30,2,,\n");
}

TEST_CASE("csv values survive a parse round trip at full precision") {
  RunTrace trace;
  TraceRecord r;
  r.docs_processed = 7;
  r.seconds = 1.0 / 3.0;
  r.elbo = -1234.5678901234567;
  r.heldout_lpp = -7.345678901234567;
  trace.append(r);

  std::ostringstream out;
  trace.write_csv(out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);  // header
  std::getline(in, line);

  std::istringstream fields(line);
  std::string docs, seconds, elbo, lpp;
  std::getline(fields, docs, ',');
  std::getline(fields, seconds, ',');
  std::getline(fields, elbo, ',');
  std::getline(fields, lpp, ',');
  CHECK(docs == "7");
  CHECK(std::stod(seconds) == r.seconds);
  CHECK(std::stod(elbo) == *r.elbo);
  CHECK(std::stod(lpp) == *r.heldout_lpp);
}

TEST_CASE("jsonl output omits absent metrics") {
  std::ostringstream out;
  sample_trace().write_jsonl(out);
  std::istringstream in(out.str());
  std::string line;

  REQUIRE(std::getline(in, line));
  nlohmann::json first = nlohmann::json::parse(line);
  CHECK(first["docs_processed"] == 10);
  CHECK(first["seconds"] == 0.5);
  CHECK(first["elbo"] == -12.25);
  CHECK_FALSE(first.contains("heldout_lpp"));

  REQUIRE(std::getline(in, line));
  nlohmann::json second = nlohmann::json::parse(line);
  CHECK(second["heldout_lpp"] == -7.5);
  CHECK_FALSE(second.contains("elbo"));

  REQUIRE(std::getline(in, line));
  nlohmann::json third = nlohmann::json::parse(line);
  CHECK(third["docs_processed"] == 30);
  CHECK_FALSE(third.contains("elbo"));
  CHECK_FALSE(third.contains("heldout_lpp"));

  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("jsonl doubles round trip bitwise") {
  RunTrace trace;
  TraceRecord r;
  r.docs_processed = 1;
  r.seconds = 2.0 / 3.0;
  r.elbo = -0.1234567890123456789;
  trace.append(r);

  std::ostringstream out;
  trace.write_jsonl(out);
  const nlohmann::json j = nlohmann::json::parse(out.str());
  CHECK(j["seconds"].get<double>() == r.seconds);
  CHECK(j["elbo"].get<double>() == *r.elbo);
}

TEST_CASE("an empty trace writes only the csv header") {
  RunTrace trace;
  CHECK(trace.empty());
  std::ostringstream csv;
  trace.write_csv(csv);
  CHECK(csv.str() == "docs_processed,seconds,elbo,heldout_lpp\n");
  std::ostringstream jsonl;
  trace.write_jsonl(jsonl);
  CHECK(jsonl.str().empty());
}

TEST_CASE("file writers mirror the stream writers") {
  testutil::TempDir dir;
  const RunTrace trace = sample_trace();

  const std::string csv_path = dir.file("run.csv");
  trace.save_csv(csv_path);
  std::ostringstream csv;
  trace.write_csv(csv);
  CHECK(slurp(csv_path) == csv.str());

  const std::string jsonl_path = dir.file("run.jsonl");
  trace.save_jsonl(jsonl_path);
  std::ostringstream jsonl;
  trace.write_jsonl(jsonl);
  CHECK(slurp(jsonl_path) == jsonl.str());

  CHECK_THROWS_AS(trace.save_csv(dir.file("no/such/dir/run.csv")), ParseError);
  CHECK_THROWS_AS(trace.save_jsonl(dir.file("no/such/dir/run.jsonl")),
                  ParseError);
}

TEST_SUITE_END();
