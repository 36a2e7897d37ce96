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

#ifndef BEAMCAST_ESTIMATION_HPP
#define BEAMCAST_ESTIMATION_HPP

#include <span>
#include <vector>

#include "beamcast/channel.hpp"
#include "beamcast/common.hpp"
#include "beamcast/track.hpp"

namespace beamcast {

enum class EstimateSource { Pilot, Measurement, Fused, Truth };

// Projected location (m) and signed along-track speed (m/s) at the final
// observation instant.
struct ParamEstimate {
    double x = 0.0;
    double v = 0.0;
    EstimateSource source = EstimateSource::Truth;
};

enum class InitStatus { Ok, SignAmbiguity, NoGeometricSolution };

struct EstimatorSettings {
    double theta_th_x = 0.1; // m
    double theta_th_v = 0.1; // m/s
    int k_max = 20;
    double grid_x = 0.05;  // m, refinement resolution
    double grid_v = 0.05;  // m/s
    double coarse_x = 1.0; // m, coarse sweep step
    double coarse_v = 1.0; // m/s
    double v_max = 200.0;  // m/s
    // Signed nominal speed of the deployment; fallback for degenerate inits
    // and center of the pilot speed prior.
    double v_prior = 256.0 / 3.6;
    // Laplace scale (m/s) of the speed prior regularizing the pilot speed
    // search; 0 disables it (pure ML). Far from the BS the pilot likelihood
    // is flat in v and its bare argmax lands on search-range artifacts.
    double v_prior_scale = std::sqrt(18.0 / (3.6 * 3.6) / 2.0);
    // With an unknown travel direction the prior is symmetric around
    // +-v_prior.
    bool v_prior_symmetric = false;
    double fd_eps = 1e-6;  // Hz, below which the Doppler sign is meaningless

    void validate() const;

    double log_speed_prior(double v) const {
        if (v_prior_scale <= 0.0)
            return 0.0;
        double dev = v_prior_symmetric
                         ? std::min(std::abs(v - std::abs(v_prior)), std::abs(v + std::abs(v_prior)))
                         : std::abs(v - v_prior);
        return -dev / v_prior_scale;
    }
};

struct EstimateResult {
    ParamEstimate estimate;
    bool converged = false;
    InitStatus init_status = InitStatus::Ok;
    int iterations = 0;
    double loglik = 0.0;
    // Objective value after initialization and after every coordinate sweep;
    // non-decreasing by construction.
    std::vector<double> objective_trace;
};

// Projected locations at instants 1..L given the state (x, v) at instant L.
// Linear tracks use x_l = x + (l - L) v dt; otherwise each x_l solves the
// along-arc displacement equation. Propagates NoBracketError.
std::vector<double> trajectory_locations(const TrackModel& track, double x, double v, int l_count,
                                         double delta_t);

// Least-squares complex gain at one instant given the hypothesized location:
// alpha = sum_i z_i^H y_i / sum_i ||z_i||^2 with
// z_i = sqrt(N_t N_r) (a_t(phi)^H F_t,i) a_r(pi - phi).
cdouble alpha_closed_form(const Eigen::MatrixXcd& snapshots, double x_l, const TrackModel& track,
                          const ArrayConfig& cfg, const Codebooks& books);

// Log-likelihood of the pilot sweep (additive constants dropped):
// -sum_l sum_i ||y_l,i - alpha_l z_i(x_l)||^2 / (2 sigma_n^2).
double loglik_pilot(const ObservationSet& obs, const TrackModel& track, double x, double v,
                    std::span<const cdouble> alphas, double sigma_n, const ArrayConfig& cfg,
                    const Codebooks& books);

// Coordinate-descent ML estimation from the pilot sweep. Per-instant 1-D
// location search with unit gain initializes, then alternating closed-form
// gain / location search / speed search sweeps run until both thresholds or
// k_max. Every 1-D search spans the full range and keeps the incumbent, so
// the objective trace never decreases.
EstimateResult estimate_from_pilots(const ObservationSet& obs, const TrackModel& track,
                                    const ArrayConfig& cfg, const Codebooks& books,
                                    const EstimatorSettings& settings, double sigma_n = 1.0);

struct MeasurementInit {
    double x0 = 0.0;
    double v0 = 0.0;
    InitStatus status = InitStatus::Ok;
};

// Geometric initialization from the final-instant measurements: location
// from the range equation on the Doppler-sign branch, speed by inverting the
// signed Doppler at x0. Degenerate cases fall back (x0 = closest approach or
// 0, v0 = prior) with the status recorded.
MeasurementInit init_from_measurements(double tau_m_l, double fd_m_l, const TrackModel& track,
                                       double fc_hz, const EstimatorSettings& settings);

// -sum_l [(range residual)^2 / (2 sigma_tau^2) + (fd residual)^2 / (2 sigma_fd^2)];
// the delay residual is evaluated in the range domain to match the variance
// units of measurement_variances.
double loglik_measurements(std::span<const double> tau_m, std::span<const double> fd_m,
                           const TrackModel& track, double x, double v, double fc_hz,
                           const MeasVariances& var, double delta_t);

EstimateResult estimate_from_measurements(std::span<const double> tau_m,
                                          std::span<const double> fd_m, const TrackModel& track,
                                          double fc_hz, const MeasVariances& var,
                                          const EstimatorSettings& settings, double delta_t);

} // namespace beamcast

#endif
