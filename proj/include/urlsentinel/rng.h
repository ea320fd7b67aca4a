// Copyright 2026 The URLSentinel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef URLSENTINEL_RNG_H_
#define URLSENTINEL_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace urlsentinel {

// Deterministic random source. The standard distributions are
// implementation-defined, so every draw here is derived directly from the
// 64-bit Mersenne Twister output and is identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();

  // Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t Below(std::uint64_t bound);

  // Standard normal via Box-Muller; the second variate is cached.
  double Normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Seed for a named sub-component, a pure function of (master, tag).
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view tag);
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t index);

}  // namespace urlsentinel

#endif  // URLSENTINEL_RNG_H_
