// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#include "ilda/wire.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>
#include <string>

#include "ilda/errors.hpp"

namespace ilda::wire {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  out.push_back(static_cast<std::uint8_t>(x >> 24));
  out.push_back(static_cast<std::uint8_t>(x >> 16));
  out.push_back(static_cast<std::uint8_t>(x >> 8));
  out.push_back(static_cast<std::uint8_t>(x));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t x) {
  put_u32(out, static_cast<std::uint32_t>(x >> 32));
  put_u32(out, static_cast<std::uint32_t>(x));
}

void put_f64(std::vector<std::uint8_t>& out, double x) {
  put_u64(out, std::bit_cast<std::uint64_t>(x));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x = (x << 8) | data_[pos_++];
    return x;
  }
  std::uint64_t u64() {
    const std::uint64_t hi = u32();
    return (hi << 32) | u32();
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size())
      throw ParseError("wire: truncated payload");
  }
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void put_header(std::vector<std::uint8_t>& out, MsgType type,
                std::uint32_t worker_id, std::uint64_t basis_step) {
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(type));
  put_u32(out, worker_id);
  put_u64(out, basis_step);
}

}  // namespace

std::vector<std::uint8_t> encode_delta(const DeltaStats& delta,
                                       std::uint32_t worker_id) {
  const auto n = static_cast<std::uint32_t>(delta.words.size());
  const auto k = static_cast<std::uint32_t>(n == 0 ? 0 : delta.values.cols());
  std::vector<std::uint8_t> out;
  out.reserve(14 + 8 + static_cast<std::size_t>(n) * (4 + 8 * k));
  put_header(out, MsgType::kDelta, worker_id,
             static_cast<std::uint64_t>(delta.basis_step));
  put_u32(out, n);
  put_u32(out, k);
  for (std::uint32_t r = 0; r < n; ++r) {
    put_u32(out, static_cast<std::uint32_t>(delta.words[r]));
    for (std::uint32_t c = 0; c < k; ++c)
      put_f64(out, delta.values(static_cast<Eigen::Index>(r),
                                static_cast<Eigen::Index>(c)));
  }
  return out;
}

std::vector<std::uint8_t> encode_snapshot(const BetaSnapshot& snapshot,
                                          std::uint32_t worker_id) {
  const auto rows = static_cast<std::uint32_t>(snapshot.beta.rows());
  const auto cols = static_cast<std::uint32_t>(snapshot.beta.cols());
  std::vector<std::uint8_t> out;
  out.reserve(14 + 8 + static_cast<std::size_t>(rows) * cols * 8);
  put_header(out, MsgType::kSnapshot, worker_id,
             static_cast<std::uint64_t>(snapshot.step));
  put_u32(out, rows);
  put_u32(out, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c)
      put_f64(out, snapshot.beta(static_cast<Eigen::Index>(r),
                                 static_cast<Eigen::Index>(c)));
  return out;
}

std::vector<std::uint8_t> encode_stop(std::uint32_t worker_id) {
  std::vector<std::uint8_t> out;
  put_header(out, MsgType::kStop, worker_id, 0);
  return out;
}

Message decode(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  const std::uint8_t version = r.u8();
  if (version != kVersion)
    throw ParseError("wire: unsupported version " + std::to_string(version));
  const std::uint8_t type = r.u8();
  Message msg;
  msg.worker_id = r.u32();
  const std::uint64_t basis_step = r.u64();
  switch (type) {
    case static_cast<std::uint8_t>(MsgType::kDelta): {
      msg.type = MsgType::kDelta;
      const std::uint32_t n = r.u32();
      const std::uint32_t k = r.u32();
      if (r.remaining() != static_cast<std::size_t>(n) * (4 + 8 * k))
        throw ParseError("wire: delta body size mismatch");
      msg.delta.basis_step = static_cast<std::int64_t>(basis_step);
      msg.delta.words.reserve(n);
      msg.delta.values.resize(n, k);
      for (std::uint32_t i = 0; i < n; ++i) {
        msg.delta.words.push_back(static_cast<std::int32_t>(r.u32()));
        for (std::uint32_t c = 0; c < k; ++c)
          msg.delta.values(static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(c)) = r.f64();
      }
      break;
    }
    case static_cast<std::uint8_t>(MsgType::kSnapshot): {
      msg.type = MsgType::kSnapshot;
      const std::uint32_t rows = r.u32();
      const std::uint32_t cols = r.u32();
      if (r.remaining() != static_cast<std::size_t>(rows) * cols * 8)
        throw ParseError("wire: snapshot body size mismatch");
      msg.snapshot.step = static_cast<std::int64_t>(basis_step);
      msg.snapshot.beta.resize(rows, cols);
      for (std::uint32_t i = 0; i < rows; ++i)
        for (std::uint32_t c = 0; c < cols; ++c)
          msg.snapshot.beta(static_cast<Eigen::Index>(i),
                            static_cast<Eigen::Index>(c)) = r.f64();
      break;
    }
    case static_cast<std::uint8_t>(MsgType::kStop):
      msg.type = MsgType::kStop;
      break;
    default:
      throw ParseError("wire: unknown message type " + std::to_string(type));
  }
  if (!r.done()) throw ParseError("wire: trailing bytes in payload");
  return msg;
}

std::vector<std::uint8_t> frame(std::vector<std::uint8_t> payload) {
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + 4);
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

namespace {

void send_all(int fd, const std::uint8_t* data, std::size_t len) {
  std::size_t sent = 0;
  while (sent < len) {
    const ssize_t n = ::send(fd, data + sent, len - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw RunError(std::string("wire: send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

// Returns bytes read; 0 only on EOF before the first byte.
std::size_t recv_exact(int fd, std::uint8_t* data, std::size_t len) {
  std::size_t got = 0;
  while (got < len) {
    const ssize_t n = ::recv(fd, data + got, len - got, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw RunError(std::string("wire: recv failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      if (got == 0) return 0;
      throw ParseError("wire: connection closed mid-frame");
    }
    got += static_cast<std::size_t>(n);
  }
  return got;
}

}  // namespace

void send_frame(int fd, const std::vector<std::uint8_t>& payload) {
  std::uint8_t len[4];
  const auto size = static_cast<std::uint32_t>(payload.size());
  len[0] = static_cast<std::uint8_t>(size >> 24);
  len[1] = static_cast<std::uint8_t>(size >> 16);
  len[2] = static_cast<std::uint8_t>(size >> 8);
  len[3] = static_cast<std::uint8_t>(size);
  send_all(fd, len, 4);
  if (!payload.empty()) send_all(fd, payload.data(), payload.size());
}

bool recv_frame(int fd, std::vector<std::uint8_t>& payload) {
  std::uint8_t len[4];
  if (recv_exact(fd, len, 4) == 0) return false;
  const std::uint32_t size = (static_cast<std::uint32_t>(len[0]) << 24) |
                             (static_cast<std::uint32_t>(len[1]) << 16) |
                             (static_cast<std::uint32_t>(len[2]) << 8) |
                             static_cast<std::uint32_t>(len[3]);
  if (size > (1u << 30)) throw ParseError("wire: implausible frame size");
  payload.resize(size);
  if (size > 0 && recv_exact(fd, payload.data(), size) == 0)
    throw ParseError("wire: connection closed mid-frame");
  return true;
}

}  // namespace ilda::wire
