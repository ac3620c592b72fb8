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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gqml/core.hpp"
#include "gqml/dataset.hpp"
#include "gqml/dense.hpp"
#include "gqml/wht.hpp"

namespace gqml {

/// Real amplitudes (-1)^{b_j} / sqrt(N) of one encoded barcode.
struct PhaseState {
    std::vector<real> amps;

    int qubits() const noexcept { return log2_exact(amps.size()); }
};

inline PhaseState phase_state(const Barcode& b) {
    const real amp = 1.0 / std::sqrt(static_cast<real>(b.size()));
    PhaseState s;
    s.amps.resize(b.size());
    for (std::size_t j = 0; j < b.size(); ++j) s.amps[j] = b[j] ? -amp : amp;
    return s;
}

/// Amplitudes over two n-qubit registers; index = j1 * 2^n + j2, so register 1
/// holds the n most significant qubits. Qubit q (0-based, q < 2n) is index bit
/// 2n - 1 - q.
struct RegisterState {
    int n = 0;
    std::vector<cplx> amps;

    int total_qubits() const noexcept { return 2 * n; }
    std::size_t register_dim() const noexcept { return std::size_t{1} << n; }

    real norm() const {
        real s = 0.0;
        for (const auto& z : amps) s += std::norm(z);
        return std::sqrt(s);
    }
};

inline RegisterState product_state(const PhaseState& p1, const PhaseState& p2) {
    require(p1.amps.size() == p2.amps.size(), "product_state: register sizes differ");
    const std::size_t N = p1.amps.size();
    RegisterState s{p1.qubits(), std::vector<cplx>(N * N)};
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) s.amps[i * N + j] = p1.amps[i] * p2.amps[j];
    return s;
}

inline RegisterState encode_pair(const SamplePair& p) {
    return product_state(phase_state(p.x1), phase_state(p.x2));
}

/// |+>^{2n}
inline RegisterState uniform_state(int n) {
    const std::size_t D = std::size_t{1} << (2 * n);
    return RegisterState{n, std::vector<cplx>(D, cplx{1.0 / std::sqrt(static_cast<real>(D))})};
}

inline real inner_real(std::span<const real> a, std::span<const real> b) {
    real s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

enum class WhtTarget { register1, register2, both };

/// Normalized Hadamard transform on the selected register(s) of a 2n-qubit vector.
template <class T>
void apply_wht(std::span<T> v, int n, WhtTarget which) {
    require(v.size() == (std::size_t{1} << (2 * n)), "apply_wht: length is not 2^(2n)");
    const std::uint64_t low = (std::uint64_t{1} << n) - 1;
    std::uint64_t mask = 0;
    switch (which) {
    case WhtTarget::register1: mask = low << n; break;
    case WhtTarget::register2: mask = low; break;
    case WhtTarget::both: mask = (low << n) | low; break;
    }
    fwht_bits(v, mask);
}

/// Tensor product of single-qubit Paulis, one letter per qubit (I, X, Y, Z).
/// Acts as P|j> = i^{#Y} (-1)^{popcount(j & phase_mask)} |j ^ flip_mask>.
class PauliString {
  public:
    PauliString() = default;

    explicit PauliString(std::string letters) : letters_(std::move(letters)) {
        require(!letters_.empty() && letters_.size() <= 62, "PauliString: bad length");
        const int q_total = qubits();
        for (int q = 0; q < q_total; ++q) {
            const char c = letters_[static_cast<std::size_t>(q)];
            const std::uint64_t bit = std::uint64_t{1} << (q_total - 1 - q);
            switch (c) {
            case 'I': break;
            case 'X': flip_ |= bit; break;
            case 'Z': phase_ |= bit; break;
            case 'Y':
                flip_ |= bit;
                phase_ |= bit;
                ++num_y_;
                break;
            default: throw ValidationError(std::string("PauliString: invalid letter '") + c + "'");
            }
        }
    }

    static PauliString uniform(int qubits, char letter) {
        return PauliString(std::string(static_cast<std::size_t>(qubits), letter));
    }

    static PauliString single(int qubits, int q, char letter) {
        std::string s(static_cast<std::size_t>(qubits), 'I');
        s.at(static_cast<std::size_t>(q)) = letter;
        return PauliString(std::move(s));
    }

    static PauliString pair(int qubits, int q1, int q2, char letter) {
        std::string s(static_cast<std::size_t>(qubits), 'I');
        s.at(static_cast<std::size_t>(q1)) = letter;
        s.at(static_cast<std::size_t>(q2)) = letter;
        return PauliString(std::move(s));
    }

    const std::string& letters() const noexcept { return letters_; }
    int qubits() const noexcept { return static_cast<int>(letters_.size()); }
    std::uint64_t flip_mask() const noexcept { return flip_; }
    std::uint64_t phase_mask() const noexcept { return phase_; }

    cplx global_phase() const noexcept {
        static constexpr cplx kPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        return kPow[num_y_ % 4];
    }

    bool commutes_with(const PauliString& o) const {
        require(o.qubits() == qubits(), "PauliString: size mismatch");
        // Anticommuting positions are where the symplectic product is odd.
        const int sym = std::popcount(flip_ & o.phase_) + std::popcount(phase_ & o.flip_);
        return sym % 2 == 0;
    }

    PauliString slice(int first, int count) const {
        return PauliString(letters_.substr(static_cast<std::size_t>(first), static_cast<std::size_t>(count)));
    }

    template <class T>
    std::vector<cplx> apply(std::span<const T> in) const {
        require(in.size() == (std::size_t{1} << qubits()), "PauliString: vector size mismatch");
        std::vector<cplx> out(in.size());
        const cplx g = global_phase();
        for (std::size_t j = 0; j < in.size(); ++j) {
            const real sign = parity(j & phase_) ? -1.0 : 1.0;
            out[j ^ flip_] = g * sign * cplx(in[j]);
        }
        return out;
    }

    /// v <- exp(-i theta P) v = cos(theta) v - i sin(theta) P v, in place.
    void rotate(std::vector<cplx>& v, real theta) const {
        require(v.size() == (std::size_t{1} << qubits()), "PauliString: vector size mismatch");
        const real c = std::cos(theta);
        const cplx mis = cplx(0.0, -std::sin(theta)) * global_phase();
        auto sgn = [&](std::size_t j) { return parity(j & phase_) ? -1.0 : 1.0; };
        if (flip_ == 0) {
            for (std::size_t j = 0; j < v.size(); ++j) v[j] *= c + mis * sgn(j);
            return;
        }
        for (std::size_t j = 0; j < v.size(); ++j) {
            const std::size_t k = j ^ flip_;
            if (k < j) continue;
            const cplx vj = v[j];
            const cplx vk = v[k];
            v[j] = c * vj + mis * sgn(k) * vk;
            v[k] = c * vk + mis * sgn(j) * vj;
        }
    }

    friend bool operator==(const PauliString& a, const PauliString& b) { return a.letters_ == b.letters_; }

  private:
    std::string letters_;
    std::uint64_t flip_ = 0;
    std::uint64_t phase_ = 0;
    int num_y_ = 0;
};

struct PauliTerm {
    real weight = 1.0;
    PauliString string;
};

/// Real-weighted sum of Pauli strings (Hermitian by construction).
struct PauliSum {
    std::vector<PauliTerm> terms;

    bool pairwise_commuting() const {
        for (std::size_t i = 0; i < terms.size(); ++i)
            for (std::size_t j = i + 1; j < terms.size(); ++j)
                if (!terms[i].string.commutes_with(terms[j].string)) return false;
        return true;
    }
};

/// prod_i SWAP(i, i+n): exchanges the two registers.
struct SwapNetwork {};

/// H^{(x)2n}
struct GlobalWht {};

using Primitive = std::variant<PauliSum, PauliString, SwapNetwork, GlobalWht>;

/// Operator product factors[0] * factors[1] * ... acting on 2n qubits; the
/// last factor is applied to a state first.
struct ObservableExpr {
    int n = 0;
    std::vector<Primitive> factors;
};

namespace detail {

inline std::vector<cplx> swap_registers(std::span<const cplx> v, int n) {
    const std::size_t N = std::size_t{1} << n;
    std::vector<cplx> out(v.size());
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) out[j * N + i] = v[i * N + j];
    return out;
}

inline void check_qubits(const PauliString& p, int n) {
    require(p.qubits() == 2 * n, "Pauli string width does not match 2n");
}

} // namespace detail

/// In-place application of one primitive to a full register state.
inline void apply_primitive(RegisterState& s, const Primitive& p) {
    std::visit(
        [&](const auto& prim) {
            using P = std::decay_t<decltype(prim)>;
            if constexpr (std::is_same_v<P, PauliString>) {
                detail::check_qubits(prim, s.n);
                s.amps = prim.apply(std::span<const cplx>(s.amps));
            } else if constexpr (std::is_same_v<P, PauliSum>) {
                std::vector<cplx> acc(s.amps.size());
                for (const auto& t : prim.terms) {
                    detail::check_qubits(t.string, s.n);
                    auto part = t.string.apply(std::span<const cplx>(s.amps));
                    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += t.weight * part[j];
                }
                s.amps = std::move(acc);
            } else if constexpr (std::is_same_v<P, SwapNetwork>) {
                s.amps = detail::swap_registers(s.amps, s.n);
            } else {
                apply_wht(std::span<cplx>(s.amps), s.n, WhtTarget::both);
            }
        },
        p);
}

inline RegisterState apply_observable(RegisterState s, const ObservableExpr& o) {
    require(o.n == s.n, "observable register size does not match state");
    for (auto it = o.factors.rbegin(); it != o.factors.rend(); ++it) apply_primitive(s, *it);
    return s;
}

inline constexpr real kImagTolerance = 1e-9;

inline real real_part_checked(cplx value) {
    if (std::abs(value.imag()) > kImagTolerance)
        throw NumericalError("expectation has imaginary residue " + std::to_string(value.imag()) +
                             " (non-Hermitian observable?)");
    return value.real();
}

/// <v|O|v> on the full 2n-qubit register.
inline real expectation(const RegisterState& s, const ObservableExpr& o) {
    auto ov = apply_observable(s, o);
    return real_part_checked(inner(s.amps, ov.amps));
}

namespace detail {

/// coeff * (u (x) w)
struct ProductTerm {
    cplx coeff;
    std::vector<cplx> u;
    std::vector<cplx> w;
};

inline void apply_factor(std::vector<ProductTerm>& terms, const Primitive& p, int n) {
    std::visit(
        [&](const auto& prim) {
            using P = std::decay_t<decltype(prim)>;
            if constexpr (std::is_same_v<P, PauliString>) {
                check_qubits(prim, n);
                const auto p1 = prim.slice(0, n);
                const auto p2 = prim.slice(n, n);
                for (auto& t : terms) {
                    t.u = p1.apply(std::span<const cplx>(t.u));
                    t.w = p2.apply(std::span<const cplx>(t.w));
                }
            } else if constexpr (std::is_same_v<P, PauliSum>) {
                std::vector<ProductTerm> out;
                out.reserve(terms.size() * prim.terms.size());
                for (const auto& pt : prim.terms) {
                    check_qubits(pt.string, n);
                    const auto p1 = pt.string.slice(0, n);
                    const auto p2 = pt.string.slice(n, n);
                    for (const auto& t : terms)
                        out.push_back({t.coeff * pt.weight, p1.apply(std::span<const cplx>(t.u)),
                                       p2.apply(std::span<const cplx>(t.w))});
                }
                terms = std::move(out);
            } else if constexpr (std::is_same_v<P, SwapNetwork>) {
                for (auto& t : terms) std::swap(t.u, t.w);
            } else {
                for (auto& t : terms) {
                    fwht(std::span<cplx>(t.u));
                    fwht(std::span<cplx>(t.w));
                }
            }
        },
        p);
}

} // namespace detail

/// <a (x) b| O |a (x) b> without forming the 2^{2n} register: every primitive
/// maps a sum of product vectors to another sum of product vectors.
inline real expectation_product(const PhaseState& a, const PhaseState& b, const ObservableExpr& o) {
    require(a.amps.size() == b.amps.size(), "expectation_product: register sizes differ");
    require(a.qubits() == o.n, "observable register size does not match state");
    std::vector<detail::ProductTerm> terms(1);
    terms[0].coeff = 1.0;
    terms[0].u.assign(a.amps.begin(), a.amps.end());
    terms[0].w.assign(b.amps.begin(), b.amps.end());
    for (auto it = o.factors.rbegin(); it != o.factors.rend(); ++it) detail::apply_factor(terms, *it, o.n);
    cplx total{};
    for (const auto& t : terms) {
        cplx au{}, bw{};
        for (std::size_t j = 0; j < t.u.size(); ++j) {
            au += a.amps[j] * t.u[j];
            bw += b.amps[j] * t.w[j];
        }
        total += t.coeff * au * bw;
    }
    return real_part_checked(total);
}

/// F = |<phi_x1| H^{(x)n} |phi_x2>|^2 via one transform and one inner product.
/// The transform runs on the integer +-1 signs, so F is exact up to the final
/// squaring (e.g. F(0^N, x) = 1/N bit-exactly).
inline real forrelation(const Barcode& x1, const Barcode& x2) {
    require(x1.size() == x2.size(), "forrelation: barcode lengths differ");
    const std::size_t N = x1.size();
    std::vector<std::int64_t> h(N);
    for (std::size_t j = 0; j < N; ++j) h[j] = x2[j] ? -1 : 1;
    fwht_unnormalized(std::span<std::int64_t>(h));
    std::int64_t overlap = 0;
    for (std::size_t j = 0; j < N; ++j) overlap += x1[j] ? -h[j] : h[j];
    // <phi1|H|phi2> = overlap / N^{3/2}
    const real scaled = static_cast<real>(overlap) / static_cast<real>(N);
    return std::min(1.0, scaled * scaled / static_cast<real>(N));
}

inline DenseMatrix dense_matrix(const ObservableExpr& o) {
    const std::size_t dim = std::size_t{1} << (2 * o.n);
    return dense_from_action(dim, [&](std::vector<cplx>& v) {
        RegisterState s{o.n, std::move(v)};
        s = apply_observable(std::move(s), o);
        v = std::move(s.amps);
    });
}

} // namespace gqml
