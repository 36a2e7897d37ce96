// SPDX-License-Identifier: Apache-2.0
//
// beamcast — link-level simulator for predictive hybrid beamforming on
// high-speed-railway mmWave links
// Copyright (C) 2026 beamcast developers
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
// ------------------------------------------------------------------------

#ifndef BEAMCAST_SEARCH_HPP
#define BEAMCAST_SEARCH_HPP

#include <cmath>
#include <limits>
#include <optional>

namespace beamcast {

struct LineSearchResult {
    double arg = 0.0;
    double value = -std::numeric_limits<double>::infinity();
};

// Two-stage 1-D maximization on [lo, hi]: coarse grid sweep, then
// golden-section refinement inside the bracket around the best grid point.
// Coarse ties break toward the smaller |arg|. An optional incumbent is
// always evaluated, so the result value never falls below it.
template <typename F>
LineSearchResult maximize_1d(F&& f, double lo, double hi, double coarse_step, double tol,
                             std::optional<double> incumbent = std::nullopt) {
    LineSearchResult best;
    auto consider = [&](double x) {
        double v = f(x);
        if (v > best.value || (v == best.value && std::abs(x) < std::abs(best.arg))) {
            best.arg = x;
            best.value = v;
        }
        return v;
    };

    int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / coarse_step)));
    for (int k = 0; k <= n; ++k)
        consider(std::min(lo + k * coarse_step, hi));

    double a = std::max(lo, best.arg - coarse_step);
    double b = std::min(hi, best.arg + coarse_step);
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = consider(x1);
    double f2 = consider(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = consider(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = consider(x1);
        }
    }

    if (incumbent) {
        double v = f(*incumbent);
        if (v >= best.value) {
            best.arg = *incumbent;
            best.value = v;
        }
    }
    return best;
}

} // namespace beamcast

#endif
