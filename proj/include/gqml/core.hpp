// Copyright 2026 The gqml Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gqml {

using real = double;
using cplx = std::complex<double>;

/// Every sampling routine draws from this engine. Bit-level reproducibility
/// is promised only within one standard library implementation.
using Rng = std::mt19937_64;

/// Raised when an input violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by file loaders; the message names the offending line or field.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when a numerical consistency check fails at runtime.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

constexpr bool is_power_of_two(std::size_t v) noexcept { return std::has_single_bit(v); }

/// log2 of a power of two.
constexpr int log2_exact(std::size_t v) noexcept { return std::countr_zero(v); }

constexpr int parity(std::uint64_t v) noexcept { return std::popcount(v) & 1; }

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a, used to fold string identifiers into derived seeds.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Order-sensitive combination of seed components.
template <class... Parts>
constexpr std::uint64_t derive_seed(std::uint64_t master, Parts... parts) noexcept {
    std::uint64_t h = mix64(master);
    ((h = mix64(h ^ static_cast<std::uint64_t>(parts))), ...);
    return h;
}

inline void require(bool cond, const std::string& message) {
    if (!cond) throw ValidationError(message);
}

} // namespace gqml
