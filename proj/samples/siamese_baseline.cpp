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

// Trains the Siamese DNN and CNN baselines on one dataset and prints the
// loss curve every 50 epochs.
//
//   siamese_baseline [n] [per_class] [seed]

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

    for (Arch arch : {Arch::dnn, Arch::cnn}) {
        SiameseSpec spec;
        spec.arch = arch;
        SiameseConfig cfg;
        cfg.seed = seed;
        std::printf("%s (%zu parameters)\n", to_string(arch).c_str(), SiameseModel(n, spec).params().size());
        const auto result = train_siamese(train, spec, cfg);
        for (const auto& s : result.history)
            if (s.epoch % 50 == 0) std::printf("  epoch %3d  loss %.5f  train acc %.3f\n", s.epoch, s.loss, s.train_acc);
        int hits = 0;
        for (const auto& p : test.samples) hits += result.model.predict(p) == p.label;
        std::printf("  stopped after %d epochs, test accuracy %.3f\n\n", result.history.back().epoch,
                    hits / static_cast<double>(test.size()));
    }
    return 0;
}
