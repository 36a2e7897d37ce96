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

#include "beamcast/channel.hpp"

#include <cmath>

namespace beamcast {

Eigen::VectorXcd steering_from_sin(double sin_phi, int n) {
    if (n < 1)
        throw RangeError("steering_from_sin: N must be >= 1");
    Eigen::VectorXcd v(n);
    double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k) {
        double ph = kPi * k * sin_phi;
        v(k) = cdouble(std::cos(ph) * scale, std::sin(ph) * scale);
    }
    return v;
}

Eigen::VectorXcd array_response(double phi, int n) { return steering_from_sin(std::sin(phi), n); }

Eigen::MatrixXcd dft_codebook(int n) {
    Eigen::MatrixXcd f(n, n);
    for (int j = 0; j < n; ++j)
        f.col(j) = steering_from_sin(-1.0 + (2.0 * j + 1.0) / n, n);
    return f;
}

ChannelRealization los_channel(cdouble alpha, double phi, const ArrayConfig& cfg) {
    double gain = std::sqrt(static_cast<double>(cfg.n_t) * cfg.n_r);
    Eigen::VectorXcd ar = array_response(kPi - phi, cfg.n_r);
    Eigen::VectorXcd at = array_response(phi, cfg.n_t);
    ChannelRealization out;
    out.alpha = alpha;
    out.phi = phi;
    out.h = gain * alpha * ar * at.adjoint();
    return out;
}

double uma_los_path_loss_db(double dist_m, double fc_hz) {
    return 28.0 + 22.0 * std::log10(dist_m) + 20.0 * std::log10(fc_hz / 1e9);
}

cdouble path_gain(const TrackModel& track, double x, const LinkBudget& budget, Rng& rng) {
    double f = track.eval(x);
    double dist = std::sqrt(x * x + f * f);
    if (dist <= 1.0)
        throw TooCloseError("path_gain: BS-MT distance <= 1 m");
    double pl_db = uma_los_path_loss_db(dist, budget.fc_hz);
    double mag = std::sqrt(budget.tx_power_w * db_to_linear(-pl_db) / budget.noise_power_w);
    return mag * rng.unit_phase();
}

std::vector<Eigen::MatrixXcd> gen_pilot_observations(const TrackModel& track,
                                                     std::span<const double> x_traj,
                                                     std::span<const cdouble> alphas,
                                                     const ArrayConfig& cfg, const Codebooks& books,
                                                     double sigma_n, Rng& rng) {
    if (x_traj.size() != alphas.size())
        throw RangeError("gen_pilot_observations: trajectory/alpha length mismatch");
    double gain = std::sqrt(static_cast<double>(cfg.n_t) * cfg.n_r);
    std::vector<Eigen::MatrixXcd> pilots;
    pilots.reserve(x_traj.size());
    for (size_t l = 0; l < x_traj.size(); ++l) {
        double phi = phi_of_x(track, x_traj[l]);
        Eigen::VectorXcd ar = array_response(kPi - phi, cfg.n_r);
        Eigen::VectorXcd at = array_response(phi, cfg.n_t);
        // Row vector of codeword correlations a_t^H F_t,i for the whole sweep.
        Eigen::RowVectorXcd corr = at.adjoint() * books.f_t;
        Eigen::MatrixXcd y = (gain * alphas[l]) * ar * corr;
        if (sigma_n > 0.0) {
            double ns = sigma_n / std::sqrt(2.0);
            for (int i = 0; i < cfg.n_t; ++i)
                for (int r = 0; r < cfg.n_r; ++r)
                    y(r, i) += cdouble(rng.normal(0.0, ns), rng.normal(0.0, ns));
        }
        pilots.push_back(std::move(y));
    }
    return pilots;
}

MeasVariances measurement_variances(double b_hz, double fc_hz, double tc_s, double k_fc) {
    if (b_hz <= 0.0 || fc_hz <= 0.0 || tc_s <= 0.0)
        throw RangeError("measurement_variances: B, fc, Tc must be positive");
    return {kLightSpeed / (2.0 * b_hz), kLightSpeed / (2.0 * fc_hz * tc_s) + k_fc * fc_hz};
}

DelayDoppler true_delay_doppler(const TrackModel& track, double x, double v, double fc_hz) {
    x = track.clamp(x);
    double f = track.eval(x);
    double fp = track.slope(x);
    double r = std::sqrt(x * x + f * f);
    if (r == 0.0)
        throw std::domain_error("true_delay_doppler: MT at BS location");
    double radial = (x + f * fp) / (r * std::sqrt(1.0 + fp * fp)); // range rate per unit speed
    return {r / kLightSpeed, -2.0 * fc_hz / kLightSpeed * v * radial};
}

Measurements gen_measurements(const TrackModel& track, std::span<const double> x_traj,
                              std::span<const double> v_traj, double fc_hz,
                              const MeasVariances& var, Rng& rng) {
    if (x_traj.size() != v_traj.size())
        throw RangeError("gen_measurements: trajectory/speed length mismatch");
    Measurements m;
    double tau_std = var.delay_noise_std_s();
    double fd_std = var.doppler_noise_std_hz();
    for (size_t l = 0; l < x_traj.size(); ++l) {
        DelayDoppler dd = true_delay_doppler(track, x_traj[l], v_traj[l], fc_hz);
        m.tau_m.push_back(dd.tau + (tau_std > 0.0 ? rng.normal(0.0, tau_std) : 0.0));
        m.fd_m.push_back(dd.fd + (fd_std > 0.0 ? rng.normal(0.0, fd_std) : 0.0));
    }
    return m;
}

} // namespace beamcast
