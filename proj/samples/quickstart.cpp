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

// Generates a small forrelation dataset, fits the measurement-based model and
// compares it with a threshold on the exact forrelation value.
//
//   quickstart [n] [per_class] [seed]

#include <cstdio>
#include <cstdlib>

#include "gqml/gqml.hpp"

int main(int argc, char** argv) {
    using namespace gqml;
    const int n = argc > 1 ? std::atoi(argv[1]) : 6;
    const int per_class = argc > 2 ? std::atoi(argv[2]) : 10;
    const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 7;

    const real eps = default_epsilon(n);
    const auto train = generate_dataset(n, eps, per_class, seed);
    const auto test = generate_dataset(n, eps, 50, seed + 1);
    std::printf("n=%d  N=%d  epsilon=%.4f  train=%zu  test=%zu\n", n, 1 << n, eps, train.size(), test.size());

    const auto pool = build_pool(n);
    const auto model = lasso_fit(extract_features(train, pool), train.labels());
    std::printf("\nLASSO (lambda=%.3g) converged in %d sweeps\n", model.lambda, model.sweeps);
    const auto [raw, offset] = model.raw_coefficients();
    for (std::size_t k = 0; k < raw.size(); ++k)
        if (model.alpha[k] != 0.0) std::printf("  %-12s %+.4f\n", model.feature_names[k].c_str(), raw[k]);

    const auto obs = pool.observables();
    int qnn_hits = 0;
    for (const auto& p : test.samples) qnn_hits += predict(model, feature_row(p, obs)).label == p.label;

    const real t = fit_f_threshold(train);
    int f_hits = 0;
    for (const auto& p : test.samples) f_hits += (forrelation(p.x1, p.x2) > t ? kCorrelated : kUncorrelated) == p.label;

    const auto total = static_cast<double>(test.size());
    std::printf("\ntest accuracy  QNN_M %.3f   F > %.4f %.3f\n", qnn_hits / total, t, f_hits / total);
    return 0;
}
