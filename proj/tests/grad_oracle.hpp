// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The rfembed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Central-difference gradient oracle. It only calls the loss, never the
// analytic backward pass, so it checks the two independently.

#ifndef RFEMBED_TESTS_GRAD_ORACLE_HPP
#define RFEMBED_TESTS_GRAD_ORACLE_HPP

#include <algorithm>
#include <cmath>

#include "rfembed/embednet.hpp"

namespace testing_oracle {

// Largest relative error |g - fd| / max(|g| + |fd|, 1e-6) over every
// parameter. Head rows of normalized heads are perturbed directly; the loss
// depends on them only through w / |w|, which the analytic gradient reflects.
inline double max_gradient_error(const rfembed::EmbedModel& model, const Eigen::MatrixXd& X,
                                 const std::vector<int>& y, double h = 1e-6) {
    auto m = model;
    const auto analytic = rfembed::loss_and_gradients(m, X, y).gradients;
    auto g = analytic;
    auto params = rfembed::parameters(m);
    auto grads = rfembed::parameters(g);
    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (Eigen::Index i = 0; i < params[p]->size(); ++i) {
            double& w = params[p]->data()[i];
            const double keep = w;
            w = keep + h;
            const double up = rfembed::loss_and_gradients(m, X, y).loss;
            w = keep - h;
            const double dn = rfembed::loss_and_gradients(m, X, y).loss;
            w = keep;
            const double fd = (up - dn) / (2.0 * h);
            const double an = grads[p]->data()[i];
            worst = std::max(worst, std::abs(an - fd) / std::max(std::abs(an) + std::abs(fd), 1e-6));
        }
    }
    return worst;
}

}  // namespace testing_oracle

#endif
