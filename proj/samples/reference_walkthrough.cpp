// Copyright 2026 The feedguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Walks through the reference ten-user system: payoff of user 1 as a
// function of its oracle count, the solved exponent, and the error rate.
//
//   reference_walkthrough [config.json]

#include <cstdio>
#include <string>

#include "feedguard/config_io.hpp"
#include "feedguard/feedguard.hpp"

int main(int argc, char** argv) {
    using namespace feedguard;
    const std::string path = argc > 1 ? argv[1] : FEEDGUARD_DATA_DIR "/reference_system.json";
    const auto config = SystemConfig::from_document(load_config_file(path).document);

    const auto result = find_d_opt(config);
    std::printf("d_opt = %.4f (%zu checks, %zu reversals)\n", result.d_opt, result.certificate.checks.size(),
                result.reversals.size());

    for (double d : {1.0, result.d_opt}) {
        const auto curve = payoff_curve(config, 1, d);
        std::printf("d = %.4f, best c = %u\n", d, best_response_c(config, 1, d));
        for (std::size_t c = 1; c <= curve.size(); ++c) std::printf("  c=%zu  E[R_1]=%.6f\n", c, curve[c - 1].value);
    }

    ExperimentSpec spec{config};
    spec.c_values = {1, 2, 3, 4, 5, 6, 7, 8};
    spec.d_values = {1.0};
    for (const auto& row : run_experiment(spec)) std::printf("c=%u  P_e=%.6f\n", row.c, row.error_rate);
    return 0;
}
