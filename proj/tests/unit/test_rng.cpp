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

#include <cmath>
#include <thread>
#include <vector>

#include <doctest.h>

#include "cbbd/rng.hpp"

using namespace cbbd;

using Block = std::array<std::uint32_t, 4>;

TEST_CASE("philox known-answer vectors") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same seed and chain give identical draws") {
  RngStream a = substream(7, 0);
  RngStream b = substream(7, 0);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.normal() == b.normal());
    CHECK(a.uniform() == b.uniform());
  }
}

TEST_CASE("neighbouring chains are uncorrelated") {
  RngStream a = substream(7, 0);
  RngStream b = substream(7, 1);
  const int n = 100000;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal();
    const double y = b.normal();
    sa += x;
    sb += y;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  CHECK(std::abs(corr) <= 0.02);
}

TEST_CASE("normal draws pass the moment test at one million samples") {
  RngStream rng = substream(11, 3);
  const int n = 1000000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) <= 4.0 / std::sqrt(n));
  CHECK(std::abs(var - 1.0) <= 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("uniform stays in the open unit interval") {
  RngStream rng = substream(0, 0);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("serial and four-thread execution agree") {
  const int chains = 8;
  const int draws = 1000;
  auto run_chain = [](std::uint64_t id, std::vector<double>& out) {
    RngStream rng = substream(7, id);
    for (double& v : out) v = rng.normal();
  };
  std::vector<std::vector<double>> serial(chains, std::vector<double>(draws));
  for (int c = 0; c < chains; ++c) run_chain(static_cast<std::uint64_t>(c), serial[c]);

  std::vector<std::vector<double>> parallel(chains, std::vector<double>(draws));
  std::vector<std::thread> pool;
  for (int w = 0; w < 4; ++w) {
    pool.emplace_back([&, w] {
      for (int c = w; c < chains; c += 4) run_chain(static_cast<std::uint64_t>(c), parallel[c]);
    });
  }
  for (auto& t : pool) t.join();
  CHECK(serial == parallel);
}

TEST_CASE("normal_vector consumes the stream in order") {
  RngStream a = substream(5, 2);
  RngStream b = substream(5, 2);
  const Vector v = a.normal_vector(5);
  for (int i = 0; i < 5; ++i) CHECK(v[i] == b.normal());
}
