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

#include "beamcast/motion.hpp"

#include <cassert>
#include <cmath>

namespace beamcast {

PowerSums power_sums(int l) {
    if (l < 1)
        throw RangeError("power_sums: L must be >= 1");
    double ld = l;
    return {
        (ld + 1.0) * ld / 2.0,
        (2.0 * ld + 1.0) * (ld + 1.0) * ld / 6.0,
        (ld + 1.0) * (ld + 1.0) * ld * ld / 4.0,
        (3.0 * ld * ld + 3.0 * ld - 1.0) * (2.0 * ld + 1.0) * (ld + 1.0) * ld / 30.0,
    };
}

SpeedAccel ls_speed_accel(const MotionObservation& obs) {
    int l = obs.observations();
    if (l < 3)
        throw RangeError("ls_speed_accel: needs L >= 3");
    PowerSums s = power_sums(l - 1);
    double den = s.s4 * s.s2 - s.s3 * s.s3;
    assert(den > 0.0 && "power-sum denominator is positive for L >= 3");

    double num_v = 0.0, num_a = 0.0;
    for (int i = 1; i <= l - 1; ++i) {
        double dx = obs.delta_x_n[i - 1];
        num_v += (s.s4 * i - s.s3 * i * i) * dx;
        num_a += (s.s2 * i * i - s.s3 * i) * dx;
    }
    return {num_v / (obs.delta_t * den), 2.0 * num_a / (obs.delta_t * obs.delta_t * den)};
}

VaVariances va_variances(int l, double delta_t, double sigma_n) {
    if (l < 3)
        throw RangeError("va_variances: needs L >= 3");
    PowerSums s = power_sums(l - 1);
    double den = s.s4 * s.s2 - s.s3 * s.s3;
    double sn2 = sigma_n * sigma_n;
    double tv = s.s4 / den;
    double tv2 = (s.s4 * s.s1 - s.s3 * s.s2) / den;
    double ta = s.s2 / den;
    double ta2 = (s.s2 * s.s2 - s.s3 * s.s1) / den;
    double dt2 = delta_t * delta_t;
    return {
        sn2 / dt2 * (tv + tv2 * tv2),
        4.0 * sn2 / (dt2 * dt2) * (ta + ta2 * ta2),
    };
}

SpeedAccel simulate_ls_estimate(int l, double delta_t, double sigma_n, double v, double a, Rng& rng) {
    std::vector<double> noise(l);
    for (int i = 0; i < l; ++i)
        noise[i] = rng.normal(0.0, sigma_n);
    MotionObservation obs;
    obs.delta_t = delta_t;
    obs.sigma_n = sigma_n;
    obs.delta_x_n.resize(l - 1);
    for (int i = 1; i <= l - 1; ++i) {
        double t = i * delta_t;
        obs.delta_x_n[i - 1] = v * t + 0.5 * a * t * t + (noise[i] - noise[0]);
    }
    return ls_speed_accel(obs);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    double mx = 0.0, my = 0.0;
    int n = static_cast<int>(x.size());
    std::vector<double> lx(n), ly(n);
    for (int i = 0; i < n; ++i) {
        lx[i] = std::log10(x[i]);
        ly[i] = std::log10(y[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < n; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

namespace {

struct EmpiricalVar {
    double var_v, var_a;
};

EmpiricalVar run_point(int l, double dt, double sigma, int trials, uint64_t seed, uint64_t point_id) {
    Rng rng = Rng::stream(seed, point_id);
    const double v_true = 71.1, a_true = 0.05;
    double sv = 0.0, sv2 = 0.0, sa = 0.0, sa2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        SpeedAccel e = simulate_ls_estimate(l, dt, sigma, v_true, a_true, rng);
        sv += e.v;
        sv2 += e.v * e.v;
        sa += e.a;
        sa2 += e.a * e.a;
    }
    double mv = sv / trials, ma = sa / trials;
    return {sv2 / trials - mv * mv, sa2 / trials - ma * ma};
}

} // namespace

ScalingStudy scaling_study(std::span<const int> l_list, std::span<const double> dt_list,
                           std::span<const double> sigma_list, int trials, uint64_t seed) {
    if (trials < 1000)
        throw RangeError("scaling_study: needs at least 1e3 trials per grid point");
    ScalingStudy out{};
    uint64_t point_id = 0;

    const int l_ref = 3;
    const double dt_ref = 0.1, sigma_ref = 0.1;

    std::vector<double> xs, vv, va;
    for (double dt : dt_list) {
        auto e = run_point(l_ref, dt, sigma_ref, trials, seed, point_id++);
        auto th = va_variances(l_ref, dt, sigma_ref);
        out.rows.push_back({"dt", dt, e.var_v, th.sigma_v_sq, e.var_a, th.sigma_a_sq});
        xs.push_back(dt);
        vv.push_back(e.var_v);
        va.push_back(e.var_a);
    }
    out.slope_v_dt = loglog_slope(xs, vv);
    out.slope_a_dt = loglog_slope(xs, va);

    xs.clear();
    vv.clear();
    va.clear();
    for (int l : l_list) {
        auto e = run_point(l, dt_ref, sigma_ref, trials, seed, point_id++);
        auto th = va_variances(l, dt_ref, sigma_ref);
        out.rows.push_back({"L", static_cast<double>(l), e.var_v, th.sigma_v_sq, e.var_a, th.sigma_a_sq});
        xs.push_back(l);
        vv.push_back(e.var_v);
        va.push_back(e.var_a);
    }
    out.slope_v_l = loglog_slope(xs, vv);
    out.slope_a_l = loglog_slope(xs, va);

    xs.clear();
    vv.clear();
    va.clear();
    for (double sg : sigma_list) {
        auto e = run_point(l_ref, dt_ref, sg, trials, seed, point_id++);
        auto th = va_variances(l_ref, dt_ref, sg);
        out.rows.push_back({"sigma_sq", sg * sg, e.var_v, th.sigma_v_sq, e.var_a, th.sigma_a_sq});
        xs.push_back(sg * sg);
        vv.push_back(e.var_v);
        va.push_back(e.var_a);
    }
    out.slope_v_sigma = loglog_slope(xs, vv);
    out.slope_a_sigma = loglog_slope(xs, va);
    return out;
}

} // namespace beamcast
