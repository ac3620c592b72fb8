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

#include <cmath>
#include <cstdint>
#include <span>

#include "gqml/core.hpp"

namespace gqml {

/// In-place normalized Walsh-Hadamard butterflies over every index bit set in
/// `bit_mask` (bit k of the mask selects index bit k). Each stage scales by
/// 1/sqrt(2), so the transform is orthogonal and an involution.
template <class T>
void fwht_bits(std::span<T> v, std::uint64_t bit_mask) {
    require(is_power_of_two(v.size()), "fwht: length must be a power of two");
    const real s = 1.0 / std::sqrt(2.0);
    const std::size_t len = v.size();
    for (std::size_t h = 1; h < len; h <<= 1) {
        if ((bit_mask & h) == 0) continue;
        for (std::size_t i = 0; i < len; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                T a = v[j];
                T b = v[j + h];
                v[j] = (a + b) * s;
                v[j + h] = (a - b) * s;
            }
        }
    }
}

/// Unnormalized (+1/-1 matrix) transform; exact for integer element types.
template <class T>
void fwht_unnormalized(std::span<T> v) {
    require(is_power_of_two(v.size()), "fwht: length must be a power of two");
    for (std::size_t h = 1; h < v.size(); h <<= 1)
        for (std::size_t i = 0; i < v.size(); i += 2 * h)
            for (std::size_t j = i; j < i + h; ++j) {
                T a = v[j];
                T b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
}

/// Normalized transform over all index bits; O(D log D).
template <class T>
void fwht(std::span<T> v) {
    fwht_bits(v, ~std::uint64_t{0});
}

} // namespace gqml
