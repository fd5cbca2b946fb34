// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ilda/types.hpp"
#include "ilda/vi.hpp"

namespace ilda::wire {

// Frame layout: a 4-byte big-endian payload length, then the payload.
// Payload: u8 version, u8 msg_type, u32 worker_id, u64 basis_step,
// followed by the body. All multi-byte fields are big-endian.
//
// Delta body: u32 n_entries, u32 n_topics, then n_entries records of
// {u32 word_id, n_topics f64 values}.
// Snapshot body: u32 vocab_size, u32 n_topics, then the dense beta
// matrix row by row as f64. basis_step carries the master step count.
// Stop has an empty body.

inline constexpr std::uint8_t kVersion = 1;

enum class MsgType : std::uint8_t {
  kDelta = 1,
  kSnapshot = 2,
  kStop = 3,
};

struct BetaSnapshot {
  Matrix beta;
  std::int64_t step = 0;
};

struct Message {
  MsgType type = MsgType::kStop;
  std::uint32_t worker_id = 0;
  DeltaStats delta;       // valid for kDelta
  BetaSnapshot snapshot;  // valid for kSnapshot
};

std::vector<std::uint8_t> encode_delta(const DeltaStats& delta,
                                       std::uint32_t worker_id);
std::vector<std::uint8_t> encode_snapshot(const BetaSnapshot& snapshot,
                                          std::uint32_t worker_id);
std::vector<std::uint8_t> encode_stop(std::uint32_t worker_id);

/// Decodes one payload (without the length prefix). Throws ParseError on
/// malformed bytes.
Message decode(std::span<const std::uint8_t> payload);

/// Wraps a payload in the 4-byte big-endian length prefix.
std::vector<std::uint8_t> frame(std::vector<std::uint8_t> payload);

/// Blocking frame IO on a connected socket. recv_frame returns false on
/// a clean EOF at a frame boundary; mid-frame EOF raises ParseError.
void send_frame(int fd, const std::vector<std::uint8_t>& payload);
bool recv_frame(int fd, std::vector<std::uint8_t>& payload);

}  // namespace ilda::wire
