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
#include <complex>
#include <cstddef>
#include <vector>

#include "gqml/core.hpp"

namespace gqml {

/// Row-major complex square matrix for small-dimension certification checks.
struct DenseMatrix {
    std::size_t dim = 0;
    std::vector<cplx> data;

    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t d) : dim(d), data(d * d) {}

    cplx& operator()(std::size_t r, std::size_t c) { return data[r * dim + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }

    static DenseMatrix identity(std::size_t d) {
        DenseMatrix m(d);
        for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }

    DenseMatrix adjoint() const {
        DenseMatrix m(dim);
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) m(c, r) = std::conj((*this)(r, c));
        return m;
    }

    friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
        require(a.dim == b.dim, "DenseMatrix: dimension mismatch");
        DenseMatrix m(a.dim);
        for (std::size_t r = 0; r < a.dim; ++r)
            for (std::size_t k = 0; k < a.dim; ++k) {
                const cplx ark = a(r, k);
                if (ark == cplx{}) continue;
                for (std::size_t c = 0; c < a.dim; ++c) m(r, c) += ark * b(k, c);
            }
        return m;
    }

    friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
        require(a.dim == b.dim, "DenseMatrix: dimension mismatch");
        DenseMatrix m(a.dim);
        for (std::size_t i = 0; i < a.data.size(); ++i) m.data[i] = a.data[i] - b.data[i];
        return m;
    }

    real frobenius_norm() const {
        real s = 0.0;
        for (const auto& z : data) s += std::norm(z);
        return std::sqrt(s);
    }
};

/// Builds the matrix of a linear map from its action on basis vectors.
/// `apply` receives a std::vector<cplx> and transforms it in place.
template <class Apply>
DenseMatrix dense_from_action(std::size_t dim, Apply&& apply) {
    DenseMatrix m(dim);
    std::vector<cplx> col(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        std::fill(col.begin(), col.end(), cplx{});
        col[c] = 1.0;
        apply(col);
        require(col.size() == dim, "dense_from_action: map changed the vector length");
        for (std::size_t r = 0; r < dim; ++r) m(r, c) = col[r];
    }
    return m;
}

/// ||AB - BA||_F
inline real commutator_norm(const DenseMatrix& a, const DenseMatrix& b) {
    return (a * b - b * a).frobenius_norm();
}

/// ||A - A^dagger||_F
inline real hermiticity_residual(const DenseMatrix& a) { return (a - a.adjoint()).frobenius_norm(); }

/// ||U^dagger U - I||_F
inline real unitarity_residual(const DenseMatrix& u) {
    return (u.adjoint() * u - DenseMatrix::identity(u.dim)).frobenius_norm();
}

} // namespace gqml
