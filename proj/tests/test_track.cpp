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

#include <catch2/catch_amalgamated.hpp>

#include "beamcast/rng.hpp"
#include "beamcast/track.hpp"

using namespace beamcast;

namespace {

// The evaluated curved track: f(x) = (6/200)^2 (x-5)^2 + 11.
TrackModel quad_track() {
    double a = std::pow(6.0 / 200.0, 2);
    return TrackModel::quadratic(a, -2.0 * a * 5.0, a * 25.0 + 11.0, 100.0);
}

// Independent fine-grained trapezoid quadrature for arc length.
double trapezoid_arc(const TrackModel& t, double a, double b, int panels) {
    double h = (b - a) / panels;
    double acc = 0.0;
    auto g = [&](double x) {
        double fp = t.slope(x);
        return std::sqrt(1.0 + fp * fp);
    };
    for (int i = 0; i < panels; ++i)
        acc += 0.5 * h * (g(a + i * h) + g(a + (i + 1) * h));
    return acc;
}

} // namespace

TEST_CASE("track evaluation on the three kinds") {
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    CHECK(lin.eval(37.0) == 11.0);
    CHECK(lin.slope(-90.0) == 0.0);

    TrackModel quad = quad_track();
    CHECK_THAT(quad.eval(5.0), Catch::Matchers::WithinAbs(11.0, 1e-12));
    CHECK_THAT(quad.slope(5.0), Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(quad.eval(100.0), Catch::Matchers::WithinAbs(19.1225, 1e-10));

    PiecewiseTrack pw;
    pw.r_max = 100.0;
    pw.y.assign(11, 7.0);
    TrackModel flat = TrackModel::piecewise(pw);
    CHECK(flat.eval(-63.2) == 7.0);
    CHECK(flat.eval(41.0) == 7.0);

    PiecewiseTrack ramp;
    ramp.r_max = 100.0;
    ramp.y = {0, 1, 2, 3, 4};
    TrackModel rampt = TrackModel::piecewise(ramp);
    double dx = ramp.delta_x();
    CHECK_THAT(rampt.slope(-99.0), Catch::Matchers::WithinAbs(1.0 / dx, 1e-14));
    CHECK_THAT(rampt.slope(12.0), Catch::Matchers::WithinAbs(1.0 / dx, 1e-14));
    // Knots take the right piece.
    CHECK_THAT(rampt.slope(ramp.knot_x(2)), Catch::Matchers::WithinAbs(1.0 / dx, 1e-14));
}

TEST_CASE("out-of-support evaluation clamps and counts") {
    TrackModel quad = quad_track();
    double edge = quad.eval(100.0);
    CHECK(quad.eval(140.0) == edge);
    CHECK(quad.clamp_events() >= 1);
}

TEST_CASE("LoS departure angle") {
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    CHECK(phi_of_x(lin, 0.0) == 0.0);
    CHECK_THAT(phi_of_x(lin, 11.0), Catch::Matchers::WithinAbs(kPi / 4.0, 1e-14));

    TrackModel quad = quad_track();
    CHECK_THAT(phi_of_x(quad, 100.0),
               Catch::Matchers::WithinAbs(std::atan(100.0 / 19.1225), 1e-12));
    CHECK_THAT(phi_of_x(quad, 100.0), Catch::Matchers::WithinAbs(1.3819, 2e-4));

    TrackModel degenerate = TrackModel::linear(0.0, 100.0);
    CHECK_THROWS_AS(phi_of_x(degenerate, 3.0), std::domain_error);
}

TEST_CASE("phi is strictly increasing across the support") {
    for (const TrackModel& t : {TrackModel::linear(11.0, 100.0), quad_track()}) {
        double prev = phi_of_x(t, -100.0);
        for (int i = 1; i <= 2000; ++i) {
            double x = -100.0 + 0.1 * i;
            double cur = phi_of_x(t, x);
            REQUIRE(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("motion-direction angle branches") {
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    CHECK(psi_of_xv(lin, 20.0, +1) == kPi / 2.0);

    // Synthetic slope 1 via a piecewise ramp.
    PiecewiseTrack ramp;
    ramp.r_max = 100.0;
    ramp.y.resize(201);
    for (int i = 0; i <= 200; ++i)
        ramp.y[i] = static_cast<double>(i); // slope exactly 1
    TrackModel t = TrackModel::piecewise(ramp);
    CHECK_THAT(psi_of_xv(t, 0.0, -1), Catch::Matchers::WithinAbs(kPi / 4.0, 1e-14));
    CHECK_THAT(psi_of_xv(t, 0.0, +1), Catch::Matchers::WithinAbs(kPi / 4.0 + kPi, 1e-14));
}

TEST_CASE("arc length against the trapezoid oracle") {
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    CHECK_THAT(arc_length(lin, 3.0, 10.0), Catch::Matchers::WithinAbs(7.0, 1e-12));
    CHECK(arc_length(lin, 42.0, 42.0) == 0.0);

    TrackModel quad = quad_track();
    double oracle = trapezoid_arc(quad, 0.0, 100.0, 2'000'000);
    CHECK_THAT(arc_length(quad, 0.0, 100.0), Catch::Matchers::WithinAbs(oracle, 1e-6));
    CHECK_THAT(arc_length_exact(quad, 0.0, 100.0), Catch::Matchers::WithinAbs(oracle, 1e-6));

    PiecewiseTrack pw;
    pw.r_max = 100.0;
    pw.y = {11, 13, 10, 11, 15, 11, 11, 12, 14, 11, 11};
    TrackModel pwt = TrackModel::piecewise(pw);
    double o2 = trapezoid_arc(pwt, -87.0, 63.0, 1'500'000);
    CHECK_THAT(arc_length(pwt, -87.0, 63.0), Catch::Matchers::WithinAbs(o2, 1e-5));
    CHECK_THAT(arc_length_exact(pwt, -87.0, 63.0), Catch::Matchers::WithinAbs(o2, 1e-5));
}

TEST_CASE("arc length properties") {
    TrackModel quad = quad_track();
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        double x1 = rng.uniform(-100.0, 100.0);
        double x2 = rng.uniform(-100.0, 100.0);
        double x3 = rng.uniform(-100.0, 100.0);
        double lhs = arc_length(quad, x1, x2) + arc_length(quad, x2, x3);
        CHECK_THAT(lhs, Catch::Matchers::WithinAbs(arc_length(quad, x1, x3),
                                                   10.0 * kQuadratureTolerance));
        CHECK(arc_length(quad, x1, x2) * (x2 >= x1 ? 1.0 : -1.0) >= std::abs(x2 - x1) - 1e-9);
        CHECK_THAT(arc_length(quad, x1, x2),
                   Catch::Matchers::WithinAbs(-arc_length(quad, x2, x1),
                                              10.0 * kQuadratureTolerance));
    }
}

TEST_CASE("location solver") {
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    CHECK_THAT(solve_location(lin, 50.0, 20.0), Catch::Matchers::WithinAbs(30.0, kArcTolerance));
    CHECK_THAT(solve_location(lin, -17.0, 0.0), Catch::Matchers::WithinAbs(-17.0, kArcTolerance));

    TrackModel quad = quad_track();
    double s = arc_length(quad, -40.0, 0.0);
    CHECK_THAT(solve_location(quad, 0.0, s), Catch::Matchers::WithinAbs(-40.0, kArcTolerance));
    CHECK_THROWS_AS(solve_location(quad, 90.0, -300.0), NoBracketError);

    // Round trip at random anchors.
    Rng rng(11);
    for (int i = 0; i < 40; ++i) {
        double xl = rng.uniform(-95.0, 95.0);
        double anchor = rng.uniform(-95.0, 95.0);
        double arc = arc_length(quad, xl, anchor);
        CHECK_THAT(solve_location(quad, anchor, arc),
                   Catch::Matchers::WithinAbs(xl, 2.0 * kArcTolerance));
    }
}

TEST_CASE("piecewise continuity at interior knots") {
    Rng rng(3);
    PiecewiseTrack pw;
    pw.r_max = 100.0;
    pw.y.resize(21);
    for (auto& y : pw.y)
        y = rng.uniform(8.0, 20.0);
    for (int i = 1; i < 20; ++i) {
        double xk = pw.knot_x(i);
        double left = pw.eval(std::nextafter(xk, -1e9));
        double right = pw.eval(xk);
        CHECK_THAT(left, Catch::Matchers::WithinAbs(right, 1e-9));
    }
}

TEST_CASE("fitting a linear track is exact") {
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    Rng rng(5);
    std::vector<TrackSample> samples;
    for (int i = 0; i < 5000; ++i) {
        double x = rng.uniform(-100.0, 100.0);
        samples.push_back({x, lin.eval(x)});
    }
    TrackFitOptions opt;
    opt.n_pieces = 8;
    opt.max_epochs = 400;
    PiecewiseTrack pw = fit_track(samples, opt);
    CHECK(piecewise_mean_abs_error(pw, samples) < 1e-6);
}

TEST_CASE("single-piece squared-loss fit matches closed-form least squares") {
    // One piece over the support; the gradient-descent endpoints must agree
    // with the analytic LS line fit reparameterized by its endpoint values.
    Rng rng(17);
    std::vector<TrackSample> samples;
    for (int i = 0; i < 2000; ++i) {
        double x = rng.uniform(-100.0, 100.0);
        samples.push_back({x, 11.0 + 0.03 * x + rng.normal(0.0, 0.05)});
    }
    TrackFitOptions opt;
    opt.n_pieces = 1;
    opt.loss = FitLoss::MeanSquare;
    opt.max_epochs = 4000;
    opt.learning_rate = 0.05;
    PiecewiseTrack pw = fit_track(samples, opt);

    // Closed-form simple linear regression.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : samples) {
        sx += s.x;
        sy += s.f;
        sxx += s.x * s.x;
        sxy += s.x * s.f;
    }
    double n = samples.size();
    double beta = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    double alpha = sy / n - beta * sx / n;
    CHECK_THAT(pw.y[0], Catch::Matchers::WithinAbs(alpha - 100.0 * beta, 1e-4));
    CHECK_THAT(pw.y[1], Catch::Matchers::WithinAbs(alpha + 100.0 * beta, 1e-4));
}

TEST_CASE("fit reports uncovered pieces") {
    std::vector<TrackSample> samples;
    for (int i = 0; i < 100; ++i)
        samples.push_back({-90.0 + i * 0.1, 11.0}); // left edge only
    TrackFitOptions opt;
    opt.n_pieces = 10;
    CHECK_THROWS_AS(fit_track(samples, opt), EmptyBinError);
}

TEST_CASE("fitting error bound arithmetic") {
    CHECK(fitting_error_bound(0.0, 3.0, 0.0) == 0.0);
    CHECK_THAT(fitting_error_bound(9e-4, 3.0, 0.0), Catch::Matchers::WithinAbs(1.35e-3, 1e-12));
    CHECK_THAT(fitting_error_bound(9e-4, 3.0, 0.1),
               Catch::Matchers::WithinAbs(1.35e-3 + 0.1 * std::sqrt(2.0 / kPi), 1e-12));
    CHECK_THAT(fitting_error_bound(9e-4, 3.0, 0.1), Catch::Matchers::WithinAbs(0.08113, 1e-4));
}

TEST_CASE("fit respects the quadratic bound on noiseless data") {
    TrackModel quad = quad_track();
    Rng rng(23);
    std::vector<TrackSample> samples;
    for (int i = 0; i < 20000; ++i) {
        double x = rng.uniform(-100.0, 100.0);
        samples.push_back({x, quad.eval(x)});
    }
    TrackFitOptions opt;
    opt.n_pieces = 10; // dx = 20 m
    PiecewiseTrack pw = fit_track(samples, opt);
    double mae = piecewise_mean_abs_error(pw, samples);
    CHECK(mae <= fitting_error_bound(quad.quad_a(), pw.delta_x(), 0.0));
}

TEST_CASE("track csv round trips") {
    std::vector<TrackSample> samples = {{-5.0, 11.25}, {0.0, 11.0}, {7.5, 11.1}};
    std::string sp = "/tmp/beamcast_samples_test.csv";
    write_track_samples_csv(sp, samples);
    auto back = read_track_samples_csv(sp);
    REQUIRE(back.size() == samples.size());
    for (size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].x == samples[i].x);
        CHECK(back[i].f == samples[i].f);
    }

    PiecewiseTrack pw;
    pw.r_max = 100.0;
    pw.y = {11.0, 12.5, 11.75};
    std::string pp = "/tmp/beamcast_pw_test.csv";
    write_piecewise_csv(pp, pw);
    PiecewiseTrack pb = read_piecewise_csv(pp, 100.0);
    REQUIRE(pb.y.size() == pw.y.size());
    for (size_t i = 0; i < pb.y.size(); ++i)
        CHECK(pb.y[i] == pw.y[i]);
}
