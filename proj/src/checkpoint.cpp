// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include "ilda/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "ilda/errors.hpp"

namespace ilda {

namespace {

constexpr char kMagic[8] = {'I', 'L', 'D', 'A', 'C', 'P', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t x) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

void put_f64(std::ostream& out, double x) {
  put_u64(out, std::bit_cast<std::uint64_t>(x));
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  char buf[8];
  in.read(buf, 8);
  if (in.gcount() != 8) throw ParseError(path + ": truncated checkpoint");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i)
    x |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return x;
}

double get_f64(std::istream& in, const std::string& path) {
  return std::bit_cast<double>(get_u64(in, path));
}

void put_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
}

Matrix get_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols,
                  const std::string& path) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get_f64(in, path);
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const GlobalState& state,
                     const std::string& config_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out.write(kMagic, sizeof(kMagic));
  put_u64(out, static_cast<std::uint64_t>(state.vocab_size()));
  put_u64(out, static_cast<std::uint64_t>(state.n_topics()));
  put_f64(out, state.beta0());
  put_u64(out, static_cast<std::uint64_t>(state.anneal_docs()));
  put_u64(out, static_cast<std::uint64_t>(state.visits()));
  put_u64(out, static_cast<std::uint64_t>(state.step_count()));
  put_matrix(out, state.beta());
  put_matrix(out, state.expected_counts());
  put_matrix(out, state.noise());
  put_u64(out, config_json.size());
  out.write(config_json.data(),
            static_cast<std::streamsize>(config_json.size()));
  if (!out) throw ParseError(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
    throw ParseError(path + ": not an ilda checkpoint");

  const auto vocab_size = static_cast<Eigen::Index>(get_u64(in, path));
  const auto n_topics = static_cast<Eigen::Index>(get_u64(in, path));
  if (vocab_size < 1 || n_topics < 1 || vocab_size > (1 << 26) ||
      n_topics > (1 << 26))
    throw ParseError(path + ": implausible dimensions");
  const double beta0 = get_f64(in, path);
  const auto anneal_docs = static_cast<std::int64_t>(get_u64(in, path));
  const auto visits = static_cast<std::int64_t>(get_u64(in, path));
  const auto step = static_cast<std::int64_t>(get_u64(in, path));
  Matrix beta = get_matrix(in, vocab_size, n_topics, path);
  Matrix counts = get_matrix(in, vocab_size, n_topics, path);
  Matrix noise = get_matrix(in, vocab_size, n_topics, path);
  const std::uint64_t json_len = get_u64(in, path);
  if (json_len > (1ULL << 30)) throw ParseError(path + ": implausible config size");
  std::string config(json_len, '\0');
  in.read(config.data(), static_cast<std::streamsize>(json_len));
  if (static_cast<std::uint64_t>(in.gcount()) != json_len)
    throw ParseError(path + ": truncated checkpoint");
  if (in.peek() != std::ifstream::traits_type::eof())
    throw ParseError(path + ": trailing bytes after checkpoint payload");

  Checkpoint cp;
  cp.state = GlobalState::restore(beta0, std::move(beta), std::move(counts),
                                  std::move(noise), anneal_docs, visits, step);
  cp.config_json = std::move(config);
  return cp;
}

}  // namespace ilda
