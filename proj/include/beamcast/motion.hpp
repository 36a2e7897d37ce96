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

#ifndef BEAMCAST_MOTION_HPP
#define BEAMCAST_MOTION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "beamcast/common.hpp"
#include "beamcast/rng.hpp"

namespace beamcast {

// Closed-form power sums S^1..S^4 of 1..L.
struct PowerSums {
    double s1, s2, s3, s4;
};
PowerSums power_sums(int l);

// Noisy displacement observations relative to instant 1:
// dx_n[i-1] = x_{i+1} - x_1 + (n_{i+1} - n_1), i = 1..L-1.
struct MotionObservation {
    std::vector<double> delta_x_n;
    double delta_t;
    double sigma_n;
    int observations() const { return static_cast<int>(delta_x_n.size()) + 1; } // L
};

struct SpeedAccel {
    double v;
    double a;
};

// Closed-form least-squares speed/acceleration from the displacement rows.
// Requires L >= 3 (two unknowns).
SpeedAccel ls_speed_accel(const MotionObservation& obs);

// Theoretical estimator variances under the correlated differenced-noise
// model (shared n_1 across rows).
struct VaVariances {
    double sigma_v_sq;
    double sigma_a_sq;
};
VaVariances va_variances(int l, double delta_t, double sigma_n);

// Draws L raw location noises, differences them, and runs the closed-form
// estimator; the correlation through n_1 is what the theory accounts for.
SpeedAccel simulate_ls_estimate(int l, double delta_t, double sigma_n, double v, double a, Rng& rng);

struct ScalingRow {
    std::string param; // "dt", "L", "sigma_sq"
    double value;
    double var_v_emp, var_v_theory;
    double var_a_emp, var_a_theory;
};

struct ScalingStudy {
    std::vector<ScalingRow> rows;
    // Log-log slope fits of the empirical variances along each swept axis.
    double slope_v_dt, slope_a_dt;
    double slope_v_l, slope_a_l;
    double slope_v_sigma, slope_a_sigma;
};

// Monte-Carlo validation of the variance scaling laws. Each grid point uses
// its own derived RNG stream, so results are independent of evaluation order.
ScalingStudy scaling_study(std::span<const int> l_list, std::span<const double> dt_list,
                           std::span<const double> sigma_list, int trials, uint64_t seed);

// Least-squares slope of log10(y) against log10(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace beamcast

#endif
