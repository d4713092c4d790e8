// Copyright 2026 The cbbd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>

#include "cbbd/core.hpp"

namespace cbbd {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/*!
 * Counter-based random stream keyed by (seed, chain_id).
 *
 * The Philox key is the seed; the 128-bit counter is [block, chain_id], so two
 * streams with distinct chain ids never share a block. A stream is single-owner;
 * run chains in parallel by giving each its own chain id.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t chain_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t chain_id() const { return chain_id_; }
  std::uint64_t counter() const { return counter_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal (Box-Muller).
  double normal();
  Vector normal_vector(std::size_t dim);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t chain_id_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

RngStream substream(std::uint64_t seed, std::uint64_t chain_id);

}  // namespace cbbd
