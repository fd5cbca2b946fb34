// Copyright 2026 the ilda authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "ilda/vi.hpp"

namespace ilda {

struct Checkpoint {
  GlobalState state;
  std::string config_json;
};

/// Binary snapshot of the full global state plus an opaque JSON blob with
/// the run configuration. Round-trips bit for bit.
void save_checkpoint(const std::string& path, const GlobalState& state,
                     const std::string& config_json);

/// Throws ParseError on bad magic, truncation or trailing bytes.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ilda
