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

#include "gqml/statevec.hpp"

#include <cmath>

#include "gtest/gtest.h"

#include "gqml/symmetry.hpp"
#include "oracles.hpp"

using namespace gqml;

namespace {

std::vector<cplx> as_complex(const std::vector<double>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST(phase_state, examples) {
    auto s = phase_state(Barcode::from_string("0000"));
    for (double a : s.amps) EXPECT_DOUBLE_EQ(a, 0.5);
    auto t = phase_state(Barcode::from_string("01"));
    EXPECT_DOUBLE_EQ(t.amps[0], 1 / std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(t.amps[1], -1 / std::sqrt(2.0));
}

TEST(phase_state, complement_negates) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        auto b = oracle::random_barcode(4, rng);
        auto a = phase_state(b).amps;
        auto c = phase_state(b.complement()).amps;
        for (std::size_t j = 0; j < a.size(); ++j) EXPECT_EQ(c[j], -a[j]);
    }
}

TEST(product_state, examples) {
    auto u = phase_state(Barcode::from_string("00"));
    auto s = product_state(u, u);
    for (auto z : s.amps) EXPECT_NEAR(std::abs(z - cplx(0.5)), 0.0, 1e-15);
    EXPECT_NEAR(s.norm(), 1.0, 1e-15);
    EXPECT_THROW(product_state(u, phase_state(Barcode::from_string("0000"))), ValidationError);
}

TEST(product_state, brute_force_index_layout) {
    std::mt19937_64 rng(2);
    auto p1 = phase_state(oracle::random_barcode(2, rng));
    auto p2 = phase_state(oracle::random_barcode(2, rng));
    auto s = product_state(p1, p2);
    ASSERT_EQ(s.amps.size(), 16u);
    for (int idx = 0; idx < 16; ++idx) {
        const int i = idx >> 2, j = idx & 3;
        EXPECT_EQ(s.amps[idx], cplx(p1.amps[i] * p2.amps[j]));
    }
}

TEST(apply_wht, single_qubit) {
    std::vector<double> v{1, 0};
    fwht(std::span<double>(v));
    EXPECT_NEAR(v[0], 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(v[1], 1 / std::sqrt(2.0), 1e-15);
}

TEST(apply_wht, involution_and_dense_oracle) {
    std::mt19937_64 rng(3);
    auto v = oracle::random_complex_state(8, rng);
    auto w = v;
    fwht(std::span<cplx>(w));
    auto expected = (oracle::hadamard_all(3) * oracle::to_eigen(v)).eval();
    EXPECT_LT(oracle::max_abs_diff(oracle::to_eigen(w), expected), 1e-12);
    fwht(std::span<cplx>(w));
    EXPECT_LT(oracle::max_abs_diff(oracle::to_eigen(w), oracle::to_eigen(v)), 1e-12);
}

TEST(apply_wht, register_selection_matches_kronecker) {
    std::mt19937_64 rng(4);
    const int n = 2;
    auto v = oracle::random_complex_state(16, rng);
    const auto h = oracle::hadamard_all(n);
    const auto id = oracle::Mat::Identity(4, 4);
    struct Case {
        WhtTarget target;
        oracle::Mat m;
    };
    std::vector<Case> cases{
        {WhtTarget::register1, Eigen::kroneckerProduct(h, id).eval()},
        {WhtTarget::register2, Eigen::kroneckerProduct(id, h).eval()},
        {WhtTarget::both, Eigen::kroneckerProduct(h, h).eval()},
    };
    for (const auto& c : cases) {
        auto w = v;
        apply_wht(std::span<cplx>(w), n, c.target);
        EXPECT_LT(oracle::max_abs_diff(oracle::to_eigen(w), c.m * oracle::to_eigen(v)), 1e-12);
    }
}

TEST(apply_primitive, swap_exchanges_registers) {
    std::mt19937_64 rng(5);
    auto p1 = phase_state(oracle::random_barcode(3, rng));
    auto p2 = phase_state(oracle::random_barcode(3, rng));
    auto s = product_state(p1, p2);
    apply_primitive(s, SwapNetwork{});
    auto expected = product_state(p2, p1);
    for (std::size_t j = 0; j < s.amps.size(); ++j) EXPECT_EQ(s.amps[j], expected.amps[j]);
    apply_primitive(s, SwapNetwork{});
    EXPECT_EQ(s.amps, product_state(p1, p2).amps);
}

TEST(apply_primitive, z_string_fixes_all_zero_state) {
    RegisterState s{2, std::vector<cplx>(16)};
    s.amps[0] = 1.0;
    apply_primitive(s, PauliString::uniform(4, 'Z'));
    EXPECT_EQ(s.amps[0], cplx(1.0));
    for (std::size_t j = 1; j < 16; ++j) EXPECT_EQ(s.amps[j], cplx(0.0));
}

TEST(apply_primitive, every_pool_primitive_matches_dense_matrix) {
    std::mt19937_64 rng(6);
    const int n = 2;
    for (auto name : kPoolCatalog) {
        const auto op = make_pool_operator(name, n);
        for (const auto& f : op.factors) {
            const auto m = oracle::primitive(f, n);
            for (int trial = 0; trial < 20; ++trial) {
                RegisterState s{n, oracle::random_complex_state(16, rng)};
                const auto expected = (m * oracle::to_eigen(s.amps)).eval();
                apply_primitive(s, f);
                EXPECT_LT(oracle::max_abs_diff(oracle::to_eigen(s.amps), expected), 1e-10) << name;
            }
        }
        // Whole composed expression vs product of dense factors.
        RegisterState s{n, oracle::random_complex_state(16, rng)};
        const auto expected = (oracle::expr(op) * oracle::to_eigen(s.amps)).eval();
        EXPECT_LT(oracle::max_abs_diff(oracle::to_eigen(apply_observable(s, op).amps), expected), 1e-10) << name;
    }
}

TEST(apply_primitive, unitary_primitives_preserve_norm_and_square_to_identity) {
    std::mt19937_64 rng(7);
    const int n = 3;
    std::vector<Primitive> prims{SwapNetwork{}, GlobalWht{}, PauliString("XYZIYX"), PauliString::uniform(6, 'Y')};
    for (const auto& p : prims) {
        RegisterState s{n, oracle::random_complex_state(64, rng)};
        const auto original = s.amps;
        apply_primitive(s, p);
        EXPECT_NEAR(s.norm(), 1.0, 1e-10);
        apply_primitive(s, p);
        EXPECT_LT(oracle::max_abs_diff(oracle::to_eigen(s.amps), oracle::to_eigen(original)), 1e-12);
    }
}

TEST(pauli_string, rotation_matches_cos_sin_form) {
    std::mt19937_64 rng(8);
    for (std::string letters : {"XIYZ", "ZZII", "IYIY", "XXXX"}) {
        PauliString p(letters);
        auto v = oracle::random_complex_state(16, rng);
        auto w = v;
        const double theta = 0.37;
        p.rotate(w, theta);
        const auto m = oracle::kron_letters(letters);
        const auto expected = (std::cos(theta) * oracle::to_eigen(v) -
                               cplx(0, std::sin(theta)) * (m * oracle::to_eigen(v)))
                                  .eval();
        EXPECT_LT(oracle::max_abs_diff(oracle::to_eigen(w), expected), 1e-12) << letters;
    }
}

TEST(pauli_string, commutation) {
    EXPECT_TRUE(PauliString("XXII").commutes_with(PauliString("IXXI")));
    EXPECT_TRUE(PauliString("YYII").commutes_with(PauliString("YYYY")));
    EXPECT_FALSE(PauliString("XIII").commutes_with(PauliString("YYYY")));
    EXPECT_FALSE(PauliString("ZIII").commutes_with(PauliString("XIII")));
}

TEST(expectation, swap_is_squared_overlap) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        auto p1 = phase_state(oracle::random_barcode(3, rng));
        auto p2 = phase_state(oracle::random_barcode(3, rng));
        const double ov = inner_real(p1.amps, p2.amps);
        ObservableExpr swap{3, {SwapNetwork{}}};
        EXPECT_NEAR(expectation(product_state(p1, p2), swap), ov * ov, 1e-12);
    }
}

TEST(expectation, sum_y_vanishes_on_real_states) {
    std::mt19937_64 rng(10);
    auto op = make_pool_operator("sum_Y", 3);
    for (int trial = 0; trial < 10; ++trial) {
        std::normal_distribution<double> g;
        std::vector<double> v(64);
        double norm = 0;
        for (auto& x : v) norm += (x = g(rng)) * x;
        for (auto& x : v) x /= std::sqrt(norm);
        EXPECT_NEAR(expectation(RegisterState{3, as_complex(v)}, op), 0.0, 1e-14);
    }
}

TEST(expectation, swap_hadamard_equals_forrelation) {
    std::mt19937_64 rng(11);
    for (int n : {1, 2, 3, 4}) {
        auto op = make_pool_operator("SWAP*H_all", n);
        for (int trial = 0; trial < 20; ++trial) {
            auto x1 = oracle::random_barcode(n, rng), x2 = oracle::random_barcode(n, rng);
            const auto s = product_state(phase_state(x1), phase_state(x2));
            EXPECT_NEAR(expectation(s, op), forrelation(x1, x2), 1e-10);
        }
    }
}

TEST(expectation, non_hermitian_composition_is_rejected) {
    std::mt19937_64 rng(12);
    auto op = make_pool_operator("H_all*Z_all", 2);
    int rejected = 0;
    for (int trial = 0; trial < 10; ++trial) {
        RegisterState s{2, oracle::random_complex_state(16, rng)};
        try {
            expectation(s, op);
        } catch (const NumericalError&) {
            ++rejected;
        }
    }
    EXPECT_EQ(rejected, 10);
}

TEST(expectation, factorized_route_matches_full_register) {
    std::mt19937_64 rng(13);
    for (int n : {1, 2, 3}) {
        for (auto name : kPoolCatalog) {
            if (name == "H_all*Z_all") continue;
            auto op = make_pool_operator(name, n);
            for (int trial = 0; trial < 10; ++trial) {
                auto a = phase_state(oracle::random_barcode(n, rng));
                auto b = phase_state(oracle::random_barcode(n, rng));
                EXPECT_NEAR(expectation_product(a, b, op), expectation(product_state(a, b), op), 1e-10)
                    << name << " n=" << n;
            }
        }
    }
}

TEST(expectation, structured_matches_dense_for_pool) {
    std::mt19937_64 rng(14);
    for (auto name : kPoolCatalog) {
        if (name == "H_all*Z_all") continue;
        auto op = make_pool_operator(name, 2);
        const auto m = oracle::expr(op);
        for (int trial = 0; trial < 10; ++trial) {
            auto v = oracle::random_complex_state(16, rng);
            const auto ev = oracle::to_eigen(v);
            const double dense = (ev.adjoint() * m * ev)(0, 0).real();
            EXPECT_NEAR(expectation(RegisterState{2, v}, op), dense, 1e-10) << name;
        }
    }
}

TEST(forrelation, uniform_bra_gives_one_over_n) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        auto x2 = oracle::random_barcode(2, rng);
        EXPECT_EQ(forrelation(Barcode::from_string("0000"), x2), 0.25);
    }
}

TEST(forrelation, symmetric_and_complement_invariant) {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 100; ++trial) {
        auto x1 = oracle::random_barcode(4, rng), x2 = oracle::random_barcode(4, rng);
        const double f = forrelation(x1, x2);
        EXPECT_NEAR(forrelation(x2, x1), f, 1e-15);
        EXPECT_EQ(forrelation(x1.complement(), x2.complement()), f);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
    }
}

TEST(forrelation, matches_dense_oracle) {
    std::mt19937_64 rng(17);
    const auto h = oracle::hadamard_all(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto x1 = oracle::random_barcode(3, rng), x2 = oracle::random_barcode(3, rng);
        auto a = oracle::to_eigen(as_complex(phase_state(x1).amps));
        auto b = oracle::to_eigen(as_complex(phase_state(x2).amps));
        const double expected = std::norm((a.adjoint() * h * b)(0, 0));
        EXPECT_NEAR(forrelation(x1, x2), expected, 1e-12);
    }
    EXPECT_THROW(forrelation(Barcode::from_string("01"), Barcode::from_string("0101")), ValidationError);
}
