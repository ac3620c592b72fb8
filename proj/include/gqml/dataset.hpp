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
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gqml/core.hpp"
#include "gqml/wht.hpp"

namespace gqml {

inline constexpr int kMaxQubitsPerRegister = 24;

/// Binary image of N = 2^n pixels. Pixel k is the sign of basis state |k>,
/// and character k of the serialized string.
class Barcode {
  public:
    Barcode() = default;

    explicit Barcode(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        require(!bits_.empty() && is_power_of_two(bits_.size()),
                "barcode length " + std::to_string(bits_.size()) + " is not a power of two");
        for (auto b : bits_) require(b <= 1, "barcode entries must be 0 or 1");
    }

    static Barcode from_string(std::string_view s) {
        std::vector<std::uint8_t> bits;
        bits.reserve(s.size());
        for (char c : s) {
            require(c == '0' || c == '1', std::string("invalid barcode character '") + c + "'");
            bits.push_back(static_cast<std::uint8_t>(c - '0'));
        }
        return Barcode(std::move(bits));
    }

    std::string to_string() const {
        std::string s(bits_.size(), '0');
        for (std::size_t k = 0; k < bits_.size(); ++k) s[k] = static_cast<char>('0' + bits_[k]);
        return s;
    }

    std::size_t size() const noexcept { return bits_.size(); }
    int qubits() const noexcept { return log2_exact(bits_.size()); }
    std::uint8_t operator[](std::size_t k) const { return bits_[k]; }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    /// Pixel-wise complement.
    Barcode complement() const {
        auto out = bits_;
        for (auto& b : out) b ^= 1U;
        return Barcode(std::move(out));
    }

    friend bool operator==(const Barcode&, const Barcode&) = default;

  private:
    std::vector<std::uint8_t> bits_;
};

/// Class labels: 0 = correlated (forrelated distribution), 1 = uncorrelated.
inline constexpr int kCorrelated = 0;
inline constexpr int kUncorrelated = 1;

struct SamplePair {
    Barcode x1;
    Barcode x2;
    int label = kCorrelated;

    SamplePair exchanged() const { return {x2, x1, label}; }
    SamplePair complemented() const { return {x1.complement(), x2.complement(), label}; }

    friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

/// How truncated Gaussian entries become pixels.
enum class Rounding {
    sign,       ///< pixel = 1 iff z < 0
    randomized, ///< pixel = 1 with probability (1 - trnc(z)) / 2
};

inline std::string to_string(Rounding r) { return r == Rounding::sign ? "sign" : "randomized"; }

inline Rounding parse_rounding(std::string_view s) {
    if (s == "sign") return Rounding::sign;
    if (s == "randomized") return Rounding::randomized;
    throw ValidationError("unknown rounding mode '" + std::string(s) + "'");
}

/// 1 / (4 ln N).
inline real default_epsilon(int n) {
    require(n >= 1, "default_epsilon: n must be >= 1");
    return 1.0 / (4.0 * std::log(std::ldexp(1.0, n)));
}

/// Clamp to [-1, 1].
inline real truncate(real z) {
    require(std::isfinite(z), "truncate: non-finite input");
    if (z > 1.0) return 1.0;
    if (z < -1.0) return -1.0;
    return z;
}

/// Randomized rounding so that E[(-1)^bit] = t.
inline int round_to_bit(real t, Rng& rng) {
    require(std::isfinite(t) && t >= -1.0 && t <= 1.0, "round_to_bit: t must lie in [-1, 1]");
    std::uniform_real_distribution<real> u(0.0, 1.0);
    return u(rng) < (1.0 - t) / 2.0 ? 1 : 0;
}

struct GaussianDraw {
    std::vector<real> z1;
    std::vector<real> z2;
};

/// z1 ~ N(0, eps*I). Correlated: z2 = WHT(z1). Uncorrelated: z2 drawn
/// independently after z1.
inline GaussianDraw draw_gaussian(int n, real epsilon, bool correlated, Rng& rng) {
    require(n >= 1 && n <= kMaxQubitsPerRegister, "sample: n out of range");
    require(std::isfinite(epsilon) && epsilon > 0.0, "sample: epsilon must be > 0");
    const std::size_t N = std::size_t{1} << n;
    std::normal_distribution<real> gauss(0.0, std::sqrt(epsilon));
    GaussianDraw d;
    d.z1.resize(N);
    for (auto& z : d.z1) z = gauss(rng);
    if (correlated) {
        d.z2 = d.z1;
        fwht(std::span<real>(d.z2));
    } else {
        d.z2.resize(N);
        for (auto& z : d.z2) z = gauss(rng);
    }
    return d;
}

inline Barcode round_vector(const std::vector<real>& z, Rounding rounding, Rng& rng) {
    std::vector<std::uint8_t> bits(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const real t = truncate(z[k]);
        bits[k] = rounding == Rounding::sign ? static_cast<std::uint8_t>(t < 0.0)
                                             : static_cast<std::uint8_t>(round_to_bit(t, rng));
    }
    return Barcode(std::move(bits));
}

/// Draw one labeled pair. Stream order: z1, [z2], rounding of x1, rounding of x2.
inline SamplePair sample_pair(int n, real epsilon, bool correlated, Rng& rng,
                              Rounding rounding = Rounding::sign) {
    auto d = draw_gaussian(n, epsilon, correlated, rng);
    SamplePair p;
    p.x1 = round_vector(d.z1, rounding, rng);
    p.x2 = round_vector(d.z2, rounding, rng);
    p.label = correlated ? kCorrelated : kUncorrelated;
    return p;
}

struct Dataset {
    int n = 0;
    real epsilon = 0.0;
    std::uint64_t seed = 0;
    std::vector<SamplePair> samples;

    std::size_t size() const noexcept { return samples.size(); }
    std::vector<real> labels() const {
        std::vector<real> y;
        y.reserve(samples.size());
        for (const auto& s : samples) y.push_back(static_cast<real>(s.label));
        return y;
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// count_per_class samples of each class, interleaved A,B,A,B,... so every
/// even-length prefix is balanced.
inline Dataset generate_dataset(int n, real epsilon, int count_per_class, std::uint64_t seed,
                                Rounding rounding = Rounding::sign) {
    require(count_per_class >= 1, "generate_dataset: count_per_class must be >= 1");
    Rng rng(seed);
    Dataset ds{n, epsilon, seed, {}};
    ds.samples.reserve(2 * static_cast<std::size_t>(count_per_class));
    for (int i = 0; i < count_per_class; ++i) {
        ds.samples.push_back(sample_pair(n, epsilon, true, rng, rounding));
        ds.samples.push_back(sample_pair(n, epsilon, false, rng, rounding));
    }
    return ds;
}

inline nlohmann::json to_json(const Dataset& ds) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : ds.samples)
        samples.push_back({{"x1", s.x1.to_string()}, {"x2", s.x2.to_string()}, {"y", s.label}});
    return {{"n", ds.n}, {"epsilon", ds.epsilon}, {"seed", ds.seed}, {"samples", std::move(samples)}};
}

namespace detail {

template <class T>
T json_field(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw ParseError(where + ": missing field '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(where + "." + key + ": wrong type");
    }
}

} // namespace detail

inline Dataset dataset_from_json(const nlohmann::json& j) {
    Dataset ds;
    ds.n = detail::json_field<int>(j, "n", "dataset");
    ds.epsilon = detail::json_field<real>(j, "epsilon", "dataset");
    ds.seed = detail::json_field<std::uint64_t>(j, "seed", "dataset");
    require(ds.n >= 1 && ds.n <= kMaxQubitsPerRegister, "dataset.n out of range");
    if (!j.contains("samples") || !j["samples"].is_array())
        throw ParseError("dataset: missing array field 'samples'");
    const auto& arr = j["samples"];
    for (std::size_t m = 0; m < arr.size(); ++m) {
        const std::string where = "dataset.samples[" + std::to_string(m) + "]";
        SamplePair p;
        for (auto [key, slot] : {std::pair{"x1", &p.x1}, std::pair{"x2", &p.x2}}) {
            auto s = detail::json_field<std::string>(arr[m], key, where);
            try {
                *slot = Barcode::from_string(s);
            } catch (const ValidationError& e) {
                throw ValidationError(where + "." + key + ": " + e.what());
            }
            if (slot->size() != (std::size_t{1} << ds.n))
                throw ValidationError(where + "." + key + ": length " + std::to_string(slot->size()) +
                                      " does not match n = " + std::to_string(ds.n));
        }
        p.label = detail::json_field<int>(arr[m], "y", where);
        if (p.label != kCorrelated && p.label != kUncorrelated)
            throw ValidationError(where + ".y: label must be 0 or 1");
        ds.samples.push_back(std::move(p));
    }
    return ds;
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    write_text_file(path, to_json(ds).dump(1) + "\n");
}

inline Dataset load_dataset(const std::string& path) {
    return dataset_from_json(parse_json_text(read_text_file(path), path));
}

} // namespace gqml
