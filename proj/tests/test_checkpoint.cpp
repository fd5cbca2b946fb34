// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ilda/checkpoint.hpp"
#include "ilda/errors.hpp"
#include "ilda/vi.hpp"

using namespace ilda;

namespace {

std::vector<char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

void write_bytes(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

GlobalState busy_state() {
  GlobalState state = GlobalState::initialize(6, 3, 0.05, 50.0, 9, 12);
  DeltaStats delta;
  delta.words = {1, 4};
  delta.values.resize(2, 3);
  delta.values << 0.5, 1.25, 0.0, 2.0, 0.25, 0.75;
  state.note_processed(5);
  state.commit_delta(delta);
  state.refresh_beta();
  state.increment_step();
  state.increment_step();
  return state;
}

}  // namespace

TEST_SUITE_BEGIN("checkpoint");

TEST_CASE("checkpoints round-trip every field bit for bit") {
  testutil::TempDir dir;
  const std::string path = dir.file("model.ckpt");
  const GlobalState state = busy_state();
  const std::string config = "{\"algo\":\"ivi\",\"seed\":9,\"note\":\"a\\nb\"}";

  save_checkpoint(path, state, config);
  const Checkpoint cp = load_checkpoint(path);

  CHECK(cp.config_json == config);
  CHECK(cp.state.beta0() == state.beta0());
  CHECK(cp.state.vocab_size() == 6);
  CHECK(cp.state.n_topics() == 3);
  CHECK(cp.state.anneal_docs() == state.anneal_docs());
  CHECK(cp.state.visits() == state.visits());
  CHECK(cp.state.step_count() == state.step_count());
  CHECK(testutil::bitwise_equal(cp.state.beta(), state.beta()));
  CHECK(testutil::bitwise_equal(cp.state.expected_counts(),
                                state.expected_counts()));
  CHECK(testutil::bitwise_equal(cp.state.noise(), state.noise()));
  REQUIRE(cp.state.beta_colsum().size() == state.beta_colsum().size());
  for (Eigen::Index k = 0; k < 3; ++k)
    CHECK(cp.state.beta_colsum()[k] == state.beta_colsum()[k]);

  // Loading must restore exactly the save: a second save of the loaded
  // state with the same config is byte-identical.
  const std::string copy = dir.file("copy.ckpt");
  save_checkpoint(copy, cp.state, cp.config_json);
  CHECK(read_bytes(copy) == read_bytes(path));
}

TEST_CASE("an empty config blob is preserved") {
  testutil::TempDir dir;
  const std::string path = dir.file("bare.ckpt");
  save_checkpoint(path, busy_state(), "");
  CHECK(load_checkpoint(path).config_json.empty());
}

TEST_CASE("the magic header is enforced") {
  testutil::TempDir dir;
  const std::string path = dir.file("bad.ckpt");
  save_checkpoint(path, busy_state(), "{}");

  std::vector<char> bytes = read_bytes(path);
  bytes[0] = 'X';
  write_bytes(path, bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint(path),
                       doctest::Contains("not an ilda checkpoint"), ParseError);
}

TEST_CASE("truncated files are rejected at any cut point") {
  testutil::TempDir dir;
  const std::string path = dir.file("cut.ckpt");
  save_checkpoint(path, busy_state(), "{\"k\":3}");
  const std::vector<char> bytes = read_bytes(path);

  // Inside the magic, inside the header, inside a matrix, inside the
  // config blob, and one byte short.
  for (const std::size_t keep :
       {std::size_t{4}, std::size_t{20}, std::size_t{200}, bytes.size() - 3,
        bytes.size() - 1}) {
    REQUIRE(keep < bytes.size());
    write_bytes(path, std::vector<char>(bytes.begin(),
                                        bytes.begin() + static_cast<long>(keep)));
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
}

TEST_CASE("trailing bytes are rejected") {
  testutil::TempDir dir;
  const std::string path = dir.file("extra.ckpt");
  save_checkpoint(path, busy_state(), "{}");
  std::vector<char> bytes = read_bytes(path);
  bytes.push_back('\0');
  write_bytes(path, bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("trailing"),
                       ParseError);
}

TEST_CASE("implausible headers are rejected") {
  testutil::TempDir dir;
  const std::string path = dir.file("dims.ckpt");
  save_checkpoint(path, busy_state(), "{}");
  std::vector<char> bytes = read_bytes(path);
  // The vocabulary size lives in the 8 little-endian bytes after the magic.
  for (int i = 8; i < 16; ++i) bytes[static_cast<std::size_t>(i)] = 0;
  write_bytes(path, bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint(path),
                       doctest::Contains("implausible dimensions"), ParseError);
}

TEST_CASE("a missing file raises a parse error") {
  testutil::TempDir dir;
  CHECK_THROWS_AS(load_checkpoint(dir.file("absent.ckpt")), ParseError);
}

TEST_SUITE_END();
