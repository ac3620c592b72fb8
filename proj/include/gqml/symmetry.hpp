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
#include <array>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gqml/core.hpp"
#include "gqml/dataset.hpp"
#include "gqml/dense.hpp"
#include "gqml/statevec.hpp"

namespace gqml {

/// Nearest-neighbour pairs on the closed ring of 2n qubits. The ring is
/// mapped onto itself by the register exchange q -> q + n (mod 2n); an open
/// line that keeps the register-crossing bond is not.
inline std::vector<std::pair<int, int>> ring_bonds(int total_qubits) {
    std::vector<std::pair<int, int>> bonds;
    for (int q = 0; q + 1 < total_qubits; ++q) bonds.emplace_back(q, q + 1);
    if (total_qubits > 2) bonds.emplace_back(total_qubits - 1, 0);
    return bonds;
}

inline PauliSum local_sum(int n, char letter) {
    PauliSum s;
    for (int q = 0; q < 2 * n; ++q) s.terms.push_back({1.0, PauliString::single(2 * n, q, letter)});
    return s;
}

inline PauliSum bond_sum(int n, char letter) {
    PauliSum s;
    for (auto [a, b] : ring_bonds(2 * n)) s.terms.push_back({1.0, PauliString::pair(2 * n, a, b, letter)});
    return s;
}

/// Catalog in default order; the first kDefaultPoolSize entries form the
/// standard measurement pool. The last entry commutes with both symmetries
/// but is not Hermitian.
inline constexpr std::array<std::string_view, 11> kPoolCatalog = {
    "sum_Y", "sum_XX",     "sum_YY",     "sum_ZZ",      "X_all", "Z_all",
    "SWAP",  "H_all",      "SWAP*X_all", "SWAP*H_all", "H_all*Z_all",
};
inline constexpr std::size_t kDefaultPoolSize = 10;

inline ObservableExpr make_pool_operator(std::string_view name, int n) {
    require(n >= 1 && n <= kMaxQubitsPerRegister, "pool operator: n out of range");
    const int q = 2 * n;
    ObservableExpr o{n, {}};
    if (name == "sum_Y") o.factors = {local_sum(n, 'Y')};
    else if (name == "sum_XX") o.factors = {bond_sum(n, 'X')};
    else if (name == "sum_YY") o.factors = {bond_sum(n, 'Y')};
    else if (name == "sum_ZZ") o.factors = {bond_sum(n, 'Z')};
    else if (name == "X_all") o.factors = {PauliString::uniform(q, 'X')};
    else if (name == "Z_all") o.factors = {PauliString::uniform(q, 'Z')};
    else if (name == "SWAP") o.factors = {SwapNetwork{}};
    else if (name == "H_all") o.factors = {GlobalWht{}};
    else if (name == "SWAP*X_all") o.factors = {SwapNetwork{}, PauliString::uniform(q, 'X')};
    else if (name == "SWAP*H_all") o.factors = {SwapNetwork{}, GlobalWht{}};
    else if (name == "H_all*Z_all") o.factors = {GlobalWht{}, PauliString::uniform(q, 'Z')};
    else throw ValidationError("unknown pool operator '" + std::string(name) + "'");
    return o;
}

// ---------------------------------------------------------------------------
// Symmetry representations

enum class SymmetryKind { exchange, complement };

/// Exchange: prod_i SWAP(i, i+n), acting on samples by swapping the barcodes.
/// Complement: Y^{(x)n} (x) Y^{(x)n}. On phase states Y^{(x)n} sends pixel k to
/// pixel ~k with an extra parity flip, which is the sample action used for the
/// embedding check. Pixel-wise complement of both barcodes only flips the
/// sign of each phase state and so leaves every encoded pair unchanged.
struct SymmetryRep {
    SymmetryKind kind;
    std::string name;
    ObservableExpr op;

    SamplePair act(const SamplePair& p) const {
        if (kind == SymmetryKind::exchange) return p.exchanged();
        return {y_remap(p.x1), y_remap(p.x2), p.label};
    }

    static Barcode y_remap(const Barcode& b) {
        const std::size_t N = b.size();
        std::vector<std::uint8_t> out(N);
        for (std::size_t k = 0; k < N; ++k) {
            const std::size_t kbar = k ^ (N - 1);
            out[k] = static_cast<std::uint8_t>(b[kbar] ^ parity(kbar));
        }
        return Barcode(std::move(out));
    }
};

inline std::vector<SymmetryRep> symmetry_reps(int n) {
    return {
        {SymmetryKind::exchange, "exchange", ObservableExpr{n, {SwapNetwork{}}}},
        {SymmetryKind::complement, "complement", ObservableExpr{n, {PauliString::uniform(2 * n, 'Y')}}},
    };
}

inline constexpr int kMaxDenseCheckQubits = 3;

/// max over reps of ||[O, U_sigma]||_F, dense, at o.n qubits per register.
inline real check_equivariance(const ObservableExpr& o, std::span<const SymmetryRep> reps) {
    require(o.n >= 1 && o.n <= kMaxDenseCheckQubits, "check_equivariance: dense check needs n <= 3");
    const auto om = dense_matrix(o);
    real worst = 0.0;
    for (const auto& r : reps) {
        require(r.op.n == o.n, "check_equivariance: representation size mismatch");
        worst = std::max(worst, commutator_norm(om, dense_matrix(r.op)));
    }
    return worst;
}

inline real check_equivariance(const ObservableExpr& o) {
    auto reps = symmetry_reps(o.n);
    return check_equivariance(o, reps);
}

// ---------------------------------------------------------------------------
// Pool

struct PoolEntry {
    std::string name;
    ObservableExpr op;
    bool hermitian = false;  ///< usable as an observable
    bool involutory = false; ///< O^2 = 1
    bool generator = false;  ///< exp(-i theta O) has a closed form used by the ansatz
    real equivariance_norm = 0.0;
};

inline constexpr real kCertifyTolerance = 1e-10;

struct PoolCertificate {
    bool hermitian;
    bool involutory;
    bool generator;
    real equivariance_norm;
};

/// Dense certification at a small register size (the families are n-uniform).
inline PoolCertificate certify_pool_operator(std::string_view name, int n_check = 2) {
    const auto op = make_pool_operator(name, n_check);
    const auto m = dense_matrix(op);
    PoolCertificate c{};
    c.hermitian = hermiticity_residual(m) <= kCertifyTolerance;
    c.involutory = (m * m - DenseMatrix::identity(m.dim)).frobenius_norm() <= kCertifyTolerance;
    const bool commuting_sum = op.factors.size() == 1 && std::holds_alternative<PauliSum>(op.factors[0]) &&
                               std::get<PauliSum>(op.factors[0]).pairwise_commuting();
    c.generator = c.hermitian && (c.involutory || commuting_sum);
    c.equivariance_norm = check_equivariance(op);
    return c;
}

class OperatorPool {
  public:
    OperatorPool() = default;
    OperatorPool(int n, std::vector<PoolEntry> entries) : n_(n), entries_(std::move(entries)) {}

    int n() const noexcept { return n_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<PoolEntry>& entries() const noexcept { return entries_; }
    const PoolEntry& operator[](std::size_t i) const { return entries_.at(i); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& e : entries_) out.push_back(e.name);
        return out;
    }

    const PoolEntry& find(std::string_view name) const {
        for (const auto& e : entries_)
            if (e.name == name) return e;
        throw ValidationError("pool has no entry '" + std::string(name) + "'");
    }

    std::size_t index_of(std::string_view name) const {
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].name == name) return i;
        throw ValidationError("pool has no entry '" + std::string(name) + "'");
    }

    const ObservableExpr& observable(std::string_view name) const {
        const auto& e = find(name);
        if (!e.hermitian) throw ValidationError("pool entry '" + e.name + "' is not Hermitian; not an observable");
        return e.op;
    }

    const ObservableExpr& generator(std::string_view name) const {
        const auto& e = find(name);
        if (!e.generator) throw ValidationError("pool entry '" + e.name + "' is not usable as a generator");
        return e.op;
    }

    /// Every entry as an observable; fails if any entry is not Hermitian.
    std::vector<ObservableExpr> observables() const {
        std::vector<ObservableExpr> out;
        for (const auto& e : entries_) out.push_back(observable(e.name));
        return out;
    }

  private:
    int n_ = 0;
    std::vector<PoolEntry> entries_;
};

namespace detail {

inline const PoolCertificate& cached_certificate(std::size_t catalog_index) {
    static const auto certs = [] {
        std::vector<PoolCertificate> v;
        for (auto name : kPoolCatalog) v.push_back(certify_pool_operator(name));
        return v;
    }();
    return certs.at(catalog_index);
}

inline std::size_t catalog_index(std::string_view name) {
    auto it = std::find(kPoolCatalog.begin(), kPoolCatalog.end(), name);
    if (it == kPoolCatalog.end()) throw ValidationError("unknown pool operator '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - kPoolCatalog.begin());
}

} // namespace detail

/// Pool from explicit catalog names; every entry must pass the dense
/// equivariance certificate.
inline OperatorPool build_pool(int n, std::span<const std::string> names) {
    std::vector<PoolEntry> entries;
    for (const auto& name : names) {
        const auto& c = detail::cached_certificate(detail::catalog_index(name));
        if (c.equivariance_norm > kCertifyTolerance)
            throw NumericalError("pool entry '" + name + "' fails the equivariance certificate");
        entries.push_back({name, make_pool_operator(name, n), c.hermitian, c.involutory, c.generator,
                           c.equivariance_norm});
    }
    return OperatorPool(n, std::move(entries));
}

/// First K entries of the default catalog order.
inline OperatorPool build_pool(int n, std::size_t K = kDefaultPoolSize) {
    require(K >= 1 && K <= kPoolCatalog.size(),
            "build_pool: K must be in [1, " + std::to_string(kPoolCatalog.size()) + "]");
    std::vector<std::string> names(kPoolCatalog.begin(), kPoolCatalog.begin() + static_cast<std::ptrdiff_t>(K));
    return build_pool(n, names);
}

// ---------------------------------------------------------------------------
// Invariance conditions

struct InvarianceLine {
    std::string condition;
    std::string subject;
    bool passed = false;
    real residual = 0.0;
};

struct InvarianceReport {
    std::vector<InvarianceLine> lines;

    bool all_passed() const {
        return std::all_of(lines.begin(), lines.end(), [](const auto& l) { return l.passed; });
    }

    const InvarianceLine& line(std::string_view condition, std::string_view subject) const {
        for (const auto& l : lines)
            if (l.condition == condition && l.subject == subject) return l;
        throw ValidationError("report has no line " + std::string(condition) + "/" + std::string(subject));
    }

    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        for (const auto& l : lines)
            if (!l.passed) out.push_back(l.condition + "/" + l.subject);
        return out;
    }
};

using FeatureMap = std::function<RegisterState(const SamplePair&)>;

inline SamplePair random_pair(int n, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    std::vector<std::uint8_t> b1(std::size_t{1} << n), b2(std::size_t{1} << n);
    for (auto& b : b1) b = coin(rng);
    for (auto& b : b2) b = coin(rng);
    return {Barcode(std::move(b1)), Barcode(std::move(b2)), kCorrelated};
}

/// Checks, densely at n_check qubits per register:
///  initial_state      |<psi0|U|psi0>| = 1
///  embedding          encode(V[x]) = U encode(x) up to phase, on random pairs
///  pixel_complement   encode(complement x) = encode(x) up to phase
///  observable         U O U^dagger = O for every Hermitian pool entry
///  generator          [G, U] = 0 for every generator entry
inline InvarianceReport check_invariance_conditions(const FeatureMap& feature_map, int n_check,
                                                    int samples = 50, std::uint64_t seed = 7) {
    require(n_check >= 1 && n_check <= kMaxDenseCheckQubits, "check_invariance_conditions: n_check <= 3");
    const auto reps = symmetry_reps(n_check);
    const auto pool = build_pool(n_check, kPoolCatalog.size());
    InvarianceReport report;
    const auto psi0 = uniform_state(n_check);
    Rng rng(seed);
    std::vector<SamplePair> pairs;
    for (int i = 0; i < samples; ++i) pairs.push_back(random_pair(n_check, rng));

    for (const auto& r : reps) {
        const real overlap = std::abs(inner(psi0.amps, apply_observable(psi0, r.op).amps));
        report.lines.push_back({"initial_state", r.name, std::abs(overlap - 1.0) <= kCertifyTolerance,
                                std::abs(overlap - 1.0)});

        real worst = 0.0;
        for (const auto& p : pairs) {
            const auto lhs = feature_map(r.act(p));
            const auto rhs = apply_observable(feature_map(p), r.op);
            worst = std::max(worst, std::abs(std::abs(inner(lhs.amps, rhs.amps)) - 1.0));
        }
        report.lines.push_back({"embedding", r.name, worst <= kCertifyTolerance, worst});

        const auto um = dense_matrix(r.op);
        const auto ud = um.adjoint();
        for (const auto& e : pool.entries()) {
            const auto om = dense_matrix(e.op);
            const real res = (um * om * ud - om).frobenius_norm();
            if (e.hermitian)
                report.lines.push_back({"observable", r.name + ":" + e.name, res <= kCertifyTolerance, res});
            if (e.generator)
                report.lines.push_back({"generator", r.name + ":" + e.name, res <= kCertifyTolerance, res});
        }
    }

    real worst = 0.0;
    for (const auto& p : pairs) {
        const auto a = feature_map(p);
        const auto b = feature_map(p.complemented());
        worst = std::max(worst, std::abs(std::abs(inner(a.amps, b.amps)) - 1.0));
    }
    report.lines.push_back({"pixel_complement", "encoding", worst <= kCertifyTolerance, worst});
    return report;
}

inline InvarianceReport check_invariance_conditions(int n_check) {
    return check_invariance_conditions(FeatureMap(encode_pair), n_check);
}

} // namespace gqml
