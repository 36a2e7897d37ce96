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

#include "beamcast/channel.hpp"

using namespace beamcast;

namespace {

TrackModel quad_track() {
    double a = std::pow(6.0 / 200.0, 2);
    return TrackModel::quadratic(a, -2.0 * a * 5.0, a * 25.0 + 11.0, 100.0);
}

} // namespace

TEST_CASE("array response basics") {
    Eigen::VectorXcd broadside = array_response(0.0, 4);
    for (int k = 0; k < 4; ++k)
        CHECK_THAT(std::abs(broadside(k) - cdouble(0.5, 0.0)), Catch::Matchers::WithinAbs(0.0, 1e-15));

    Eigen::VectorXcd single = array_response(0.7, 1);
    CHECK(single.size() == 1);
    CHECK_THAT(std::abs(single(0) - cdouble(1.0, 0.0)), Catch::Matchers::WithinAbs(0.0, 1e-15));

    Eigen::VectorXcd endfire = array_response(kPi / 2.0, 2);
    CHECK_THAT(std::abs(endfire(0) - cdouble(1.0 / std::sqrt(2.0), 0.0)),
               Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(std::abs(endfire(1) - cdouble(-1.0 / std::sqrt(2.0), 0.0)),
               Catch::Matchers::WithinAbs(0.0, 1e-12));

    // Unit norm for arbitrary angles and sizes.
    for (int n : {1, 2, 3, 8, 17})
        for (double phi : {-1.2, -0.3, 0.0, 0.9, 1.5})
            CHECK_THAT(array_response(phi, n).norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("DFT codebooks are orthonormal") {
    for (int n : {1, 2, 8}) {
        Eigen::MatrixXcd f = dft_codebook(n);
        Eigen::MatrixXcd gram = f.adjoint() * f;
        CHECK((gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("LoS channel construction") {
    ArrayConfig cfg{8, 4, 4};
    ChannelRealization zero = los_channel(0.0, 0.3, cfg);
    CHECK(zero.h.norm() == 0.0);

    ChannelRealization unit = los_channel(1.0, 0.0, cfg);
    CHECK_THAT(unit.h.norm(), Catch::Matchers::WithinAbs(std::sqrt(32.0), 1e-12));

    Rng rng(5);
    for (int i = 0; i < 10; ++i) {
        cdouble alpha = 0.5 * rng.unit_phase() + cdouble(0.7, 0.0);
        double phi = rng.uniform(-1.4, 1.4);
        ChannelRealization c = los_channel(alpha, phi, cfg);
        CHECK_THAT(c.h.norm(), Catch::Matchers::WithinAbs(std::sqrt(32.0) * std::abs(alpha), 1e-10));
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c.h);
        CHECK(svd.singularValues()(1) < 1e-10 * svd.singularValues()(0)); // rank 1
    }
}

TEST_CASE("UMa LoS path gain") {
    CHECK_THAT(uma_los_path_loss_db(11.0, 30e9), Catch::Matchers::WithinAbs(80.46, 0.01));

    LinkBudget budget{30e9, 0.25, 3.184e-13};
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    Rng rng(9);

    // Doubling the distance costs 22 log10(2) ~ 6.62 dB.
    TrackModel t20 = TrackModel::linear(20.0, 100.0);
    TrackModel t40 = TrackModel::linear(40.0, 100.0);
    double p20 = std::norm(path_gain(t20, 0.0, budget, rng));
    double p40 = std::norm(path_gain(t40, 0.0, budget, rng));
    CHECK_THAT(10.0 * std::log10(p20 / p40), Catch::Matchers::WithinAbs(22.0 * std::log10(2.0), 1e-9));

    TrackModel close = TrackModel::linear(0.5, 100.0);
    CHECK_THROWS_AS(path_gain(close, 0.0, budget, rng), TooCloseError);

    // Phase uniformity: chi-square over 16 bins at the 1% level.
    const int draws = 100000, bins = 16;
    std::vector<int> hist(bins, 0);
    for (int i = 0; i < draws; ++i) {
        double ph = std::arg(path_gain(lin, 10.0, budget, rng));
        int b = std::clamp(static_cast<int>((ph + kPi) / (2.0 * kPi) * bins), 0, bins - 1);
        hist[b]++;
    }
    double expected = static_cast<double>(draws) / bins;
    double chi2 = 0.0;
    for (int b = 0; b < bins; ++b)
        chi2 += (hist[b] - expected) * (hist[b] - expected) / expected;
    CHECK(chi2 < 30.578); // chi2_{0.99} at 15 dof
}

TEST_CASE("pilot sweep generation") {
    ArrayConfig arr{8, 4, 4};
    Codebooks books = Codebooks::make(arr);
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    Rng rng(13);

    SECTION("zero gain, zero noise gives zero snapshots") {
        std::vector<double> xs = {10.0, 11.0};
        std::vector<cdouble> alphas = {0.0, 0.0};
        auto pilots = gen_pilot_observations(lin, xs, alphas, arr, books, 0.0, rng);
        for (const auto& y : pilots)
            CHECK(y.norm() == 0.0);
    }

    SECTION("on-grid angle peaks at the matched codeword with unit correlation") {
        // Pick the codeword direction sin = -1 + (2*6+1)/8 = 0.625 and place
        // the MT on it: x = d tan(phi).
        double s = 0.625;
        double phi = std::asin(s);
        double x = 11.0 * std::tan(phi);
        std::vector<double> xs = {x};
        std::vector<cdouble> alphas = {cdouble(1.0, 0.0)};
        auto pilots = gen_pilot_observations(lin, xs, alphas, arr, books, 0.0, rng);
        int best = 0;
        double best_norm = 0.0;
        for (int i = 0; i < 8; ++i) {
            double n = pilots[0].col(i).norm();
            if (n > best_norm) {
                best_norm = n;
                best = i;
            }
        }
        CHECK(best == 6);
        double corr = std::abs((array_response(phi, 8).adjoint() * books.f_t.col(6))(0, 0));
        CHECK_THAT(corr, Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK_THAT(best_norm, Catch::Matchers::WithinAbs(std::sqrt(32.0), 1e-10));
    }

    SECTION("noise power moment") {
        std::vector<double> xs = {10.0};
        std::vector<cdouble> alphas = {0.0};
        double acc = 0.0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i) {
            auto pilots = gen_pilot_observations(lin, xs, alphas, arr, books, 1.0, rng);
            acc += pilots[0].col(0).squaredNorm();
        }
        CHECK_THAT(acc / draws, Catch::Matchers::WithinRel(4.0, 0.03)); // N_r sigma^2
    }
}

TEST_CASE("measurement variance model") {
    MeasVariances v = measurement_variances(80e6, 30e9, 12.5e-3, 1e-6);
    CHECK_THAT(v.sigma_tau_sq, Catch::Matchers::WithinAbs(1.875, 1e-12));
    CHECK_THAT(v.sigma_fd_sq, Catch::Matchers::WithinAbs(30000.4, 1e-9));

    MeasVariances nofc = measurement_variances(80e6, 30e9, 1e9, 0.0);
    CHECK(nofc.sigma_fd_sq < 1e-8); // k_fc = 0 and Tc -> inf kills the Doppler noise
    CHECK_THROWS_AS(measurement_variances(0.0, 30e9, 1.0, 0.0), RangeError);
}

TEST_CASE("geometric delay and Doppler") {
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    DelayDoppler broadside = true_delay_doppler(lin, 0.0, 50.0, 30e9);
    CHECK_THAT(broadside.tau, Catch::Matchers::WithinAbs(11.0 / 3e8, 1e-15));
    CHECK_THAT(broadside.fd, Catch::Matchers::WithinAbs(0.0, 1e-12));

    DelayDoppler diag = true_delay_doppler(lin, 11.0, 71.1, 30e9);
    CHECK_THAT(diag.fd, Catch::Matchers::WithinAbs(-200.0 * 71.1 * std::sin(kPi / 4.0), 1e-6));
    CHECK_THAT(diag.fd, Catch::Matchers::WithinAbs(-10055.0, 0.5));

    SECTION("linear-track reduction and symmetries") {
        Rng rng(3);
        for (int i = 0; i < 200; ++i) {
            double x = rng.uniform(-99.0, 99.0);
            double v = rng.uniform(-80.0, 80.0);
            DelayDoppler dd = true_delay_doppler(lin, x, v, 30e9);
            double reduced = -2.0 * 30e9 / kLightSpeed * v * std::sin(std::atan(x / 11.0));
            CHECK_THAT(dd.fd, Catch::Matchers::WithinAbs(reduced, 1e-9));
            // Odd in v, odd in x; tau even in x.
            CHECK_THAT(true_delay_doppler(lin, x, -v, 30e9).fd,
                       Catch::Matchers::WithinAbs(-dd.fd, 1e-9));
            CHECK_THAT(true_delay_doppler(lin, -x, v, 30e9).fd,
                       Catch::Matchers::WithinAbs(-dd.fd, 1e-9));
            CHECK_THAT(true_delay_doppler(lin, -x, v, 30e9).tau,
                       Catch::Matchers::WithinAbs(dd.tau, 1e-18));
        }
    }

    SECTION("Doppler magnitude bound and angle-form agreement") {
        TrackModel quad = quad_track();
        Rng rng(21);
        for (int i = 0; i < 300; ++i) {
            double x = rng.uniform(-99.0, 99.0);
            double v = rng.uniform(-80.0, 80.0);
            DelayDoppler dd = true_delay_doppler(quad, x, v, 30e9);
            CHECK(std::abs(dd.fd) <= 2.0 * 30e9 * std::abs(v) / kLightSpeed + 1e-9);
            // |f_d| equals the |v| cos(Phi - Psi) form.
            double via_angles = 2.0 * 30e9 / kLightSpeed * std::abs(v) *
                                std::abs(std::cos(phi_of_x(quad, x) -
                                                  psi_of_xv(quad, x, v >= 0.0 ? 1 : -1)));
            CHECK_THAT(std::abs(dd.fd), Catch::Matchers::WithinAbs(via_angles, 1e-6));
        }
    }
}

TEST_CASE("pilot snapshot energy decays with distance on a linear track") {
    ArrayConfig arr{8, 4, 4};
    Codebooks books = Codebooks::make(arr);
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    LinkBudget budget{30e9, 0.25, 3.184e-13};
    Rng rng(77);
    double prev = 1e300;
    for (double x : {5.0, 20.0, 40.0, 70.0, 95.0}) {
        std::vector<double> xs = {x};
        std::vector<cdouble> alphas = {std::abs(path_gain(lin, x, budget, rng))};
        auto pilots = gen_pilot_observations(lin, xs, alphas, arr, books, 0.0, rng);
        double energy = pilots[0].squaredNorm();
        CHECK(energy < prev);
        prev = energy;
    }
}

TEST_CASE("measurement generation moments") {
    TrackModel lin = TrackModel::linear(11.0, 100.0);
    MeasVariances var = measurement_variances(80e6, 30e9, 12.5e-3, 1e-6);
    Rng rng(8);

    std::vector<double> xs = {30.0};
    std::vector<double> vs = {71.1};
    MeasVariances zero{0.0, 0.0};
    Measurements exact = gen_measurements(lin, xs, vs, 30e9, zero, rng);
    DelayDoppler truth = true_delay_doppler(lin, 30.0, 71.1, 30e9);
    CHECK(exact.tau_m[0] == truth.tau);
    CHECK(exact.fd_m[0] == truth.fd);

    const int draws = 100000;
    double racc = 0.0, facc = 0.0, fmean = 0.0;
    for (int i = 0; i < draws; ++i) {
        Measurements m = gen_measurements(lin, xs, vs, 30e9, var, rng);
        double dr = (m.tau_m[0] - truth.tau) * kLightSpeed; // range-domain error
        racc += dr * dr;
        double df = m.fd_m[0] - truth.fd;
        facc += df * df;
        fmean += df;
    }
    CHECK_THAT(racc / draws, Catch::Matchers::WithinRel(var.sigma_tau_sq, 0.03));
    CHECK_THAT(facc / draws, Catch::Matchers::WithinRel(var.sigma_fd_sq, 0.03));
    CHECK(std::abs(fmean / draws) < 3.0 * std::sqrt(var.sigma_fd_sq / draws));
}
