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

#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>

#include "beamcast/motion.hpp"

using namespace beamcast;

TEST_CASE("power sums: closed forms equal loop sums") {
    PowerSums one = power_sums(1);
    CHECK(one.s1 == 1.0);
    CHECK(one.s2 == 1.0);
    CHECK(one.s3 == 1.0);
    CHECK(one.s4 == 1.0);

    PowerSums three = power_sums(3);
    CHECK(three.s1 == 6.0);
    CHECK(three.s2 == 14.0);
    CHECK(three.s3 == 36.0);
    CHECK(three.s4 == 98.0);

    for (int l = 1; l <= 100; ++l) {
        double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
        for (int i = 1; i <= l; ++i) {
            s1 += i;
            s2 += static_cast<double>(i) * i;
            s3 += static_cast<double>(i) * i * i;
            s4 += static_cast<double>(i) * i * i * i;
        }
        PowerSums p = power_sums(l);
        CHECK(p.s1 == s1);
        CHECK(p.s2 == s2);
        CHECK(p.s3 == s3);
        CHECK(p.s4 == s4);
    }
}

TEST_CASE("closed-form speed/acceleration on exact motion") {
    auto make_obs = [](int l, double dt, double v, double a) {
        MotionObservation obs;
        obs.delta_t = dt;
        obs.sigma_n = 0.0;
        for (int i = 1; i <= l - 1; ++i) {
            double t = i * dt;
            obs.delta_x_n.push_back(v * t + 0.5 * a * t * t);
        }
        return obs;
    };
    SpeedAccel e1 = ls_speed_accel(make_obs(3, 0.1, 71.1, 0.0));
    CHECK_THAT(e1.v, Catch::Matchers::WithinAbs(71.1, 1e-9));
    CHECK_THAT(e1.a, Catch::Matchers::WithinAbs(0.0, 1e-9));

    SpeedAccel e2 = ls_speed_accel(make_obs(3, 0.1, 0.0, 0.3));
    CHECK_THAT(e2.v, Catch::Matchers::WithinAbs(0.0, 1e-9));
    CHECK_THAT(e2.a, Catch::Matchers::WithinAbs(0.3, 1e-9));

    CHECK_THROWS_AS(ls_speed_accel(make_obs(2, 0.1, 1.0, 0.0)), RangeError);
}

TEST_CASE("closed-form estimator equals a generic least-squares solve") {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        int l = 3 + rng.uniform_int(8);
        double dt = 0.05 + rng.uniform() * 0.3;
        MotionObservation obs;
        obs.delta_t = dt;
        obs.sigma_n = 0.1;
        for (int i = 1; i <= l - 1; ++i)
            obs.delta_x_n.push_back(rng.normal(0.0, 10.0));

        // Generic normal-equations solve of the design matrix.
        Eigen::MatrixXd a(l - 1, 2);
        Eigen::VectorXd b(l - 1);
        for (int i = 1; i <= l - 1; ++i) {
            a(i - 1, 0) = i * dt;
            a(i - 1, 1) = 0.5 * (i * dt) * (i * dt);
            b(i - 1) = obs.delta_x_n[i - 1];
        }
        Eigen::Vector2d sol = (a.transpose() * a).ldlt().solve(a.transpose() * b);

        SpeedAccel e = ls_speed_accel(obs);
        CHECK_THAT(e.v, Catch::Matchers::WithinAbs(sol(0), 1e-9));
        CHECK_THAT(e.a, Catch::Matchers::WithinAbs(sol(1), 1e-9));
    }
}

TEST_CASE("variance formulas: zero noise and time-interval scaling") {
    VaVariances z = va_variances(3, 0.1, 0.0);
    CHECK(z.sigma_v_sq == 0.0);
    CHECK(z.sigma_a_sq == 0.0);

    VaVariances v1 = va_variances(5, 0.1, 0.2);
    VaVariances v2 = va_variances(5, 0.2, 0.2);
    CHECK_THAT(v2.sigma_v_sq / v1.sigma_v_sq, Catch::Matchers::WithinAbs(0.25, 1e-12));
    CHECK_THAT(v2.sigma_a_sq / v1.sigma_a_sq, Catch::Matchers::WithinAbs(0.0625, 1e-12));
}

TEST_CASE("Monte-Carlo variances match the closed forms") {
    const int trials = 100000;
    const int l = 3;
    const double dt = 0.1, sigma = 0.1;
    Rng rng(47);
    double sv = 0, sv2 = 0, sa = 0, sa2 = 0;
    const double v_true = 71.1, a_true = 0.0;
    for (int t = 0; t < trials; ++t) {
        SpeedAccel e = simulate_ls_estimate(l, dt, sigma, v_true, a_true, rng);
        sv += e.v;
        sv2 += e.v * e.v;
        sa += e.a;
        sa2 += e.a * e.a;
    }
    double mv = sv / trials, ma = sa / trials;
    double var_v = sv2 / trials - mv * mv;
    double var_a = sa2 / trials - ma * ma;
    VaVariances th = va_variances(l, dt, sigma);
    CHECK_THAT(var_v, Catch::Matchers::WithinRel(th.sigma_v_sq, 0.05));
    CHECK_THAT(var_a, Catch::Matchers::WithinRel(th.sigma_a_sq, 0.05));

    // Unbiasedness within three standard errors.
    double se_v = std::sqrt(th.sigma_v_sq / trials);
    double se_a = std::sqrt(th.sigma_a_sq / trials);
    CHECK(std::abs(mv - v_true) < 3.0 * se_v);
    CHECK(std::abs(ma - a_true) < 3.0 * se_a);
}

TEST_CASE("acceleration error is about ten times the speed error at L=3") {
    VaVariances th = va_variances(3, 0.1, 0.1);
    double ratio = std::sqrt(th.sigma_a_sq / th.sigma_v_sq);
    CHECK(ratio > 8.0);
    CHECK(ratio < 12.0);
}

TEST_CASE("scaling-law slopes") {
    const int l_list[] = {32, 56, 100, 178, 316};
    const double dt_list[] = {0.05, 0.1, 0.2, 0.4};
    const double sigma_list[] = {0.03162277660168379, 0.1, 0.31622776601683794};
    ScalingStudy study = scaling_study(l_list, dt_list, sigma_list, 4000, 2026);
    CHECK_THAT(study.slope_v_dt, Catch::Matchers::WithinAbs(-2.0, 0.1));
    CHECK_THAT(study.slope_a_dt, Catch::Matchers::WithinAbs(-4.0, 0.1));
    CHECK_THAT(study.slope_v_sigma, Catch::Matchers::WithinAbs(1.0, 0.05));
    CHECK_THAT(study.slope_a_sigma, Catch::Matchers::WithinAbs(1.0, 0.05));
    CHECK_THAT(study.slope_v_l, Catch::Matchers::WithinAbs(-2.0, 0.2));
    CHECK_THAT(study.slope_a_l, Catch::Matchers::WithinAbs(-4.0, 0.2));
    CHECK(study.rows.size() == 5 + 4 + 3);
    CHECK_THROWS_AS(scaling_study(l_list, dt_list, sigma_list, 10, 1), RangeError);
}
