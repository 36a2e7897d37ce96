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

#ifndef BEAMCAST_CHANNEL_HPP
#define BEAMCAST_CHANNEL_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "beamcast/common.hpp"
#include "beamcast/rng.hpp"
#include "beamcast/track.hpp"

namespace beamcast {

struct ArrayConfig {
    int n_t = 8;  // BS antennas
    int n_r = 4;  // MT antennas
    int n_rf = 4; // BS RF chains = simultaneously served MTs
};

// Half-wavelength ULA response, element k = exp(j pi k sin(phi)) / sqrt(N).
Eigen::VectorXcd array_response(double phi, int n);

// Same, parameterized directly by sin(phi).
Eigen::VectorXcd steering_from_sin(double sin_phi, int n);

// Orthonormal DFT codebook as matrix columns; codeword j (0-based) steers to
// sin(phi) = -1 + (2 j + 1) / N.
Eigen::MatrixXcd dft_codebook(int n);

struct Codebooks {
    Eigen::MatrixXcd f_t; // N_t x N_t
    Eigen::MatrixXcd f_r; // N_r x N_r
    static Codebooks make(const ArrayConfig& cfg) {
        return {dft_codebook(cfg.n_t), dft_codebook(cfg.n_r)};
    }
};

struct ChannelRealization {
    cdouble alpha;
    double phi;
    Eigen::MatrixXcd h; // N_r x N_t, rank 1
};

// LoS channel H = sqrt(N_t N_r) alpha a_r(pi - phi) a_t(phi)^H.
ChannelRealization los_channel(cdouble alpha, double phi, const ArrayConfig& cfg);

// Everything needed to place path loss, transmit power and thermal noise in
// a unit-noise frame: |alpha|^2 = tx_power * 10^(-PL/10) / noise_power, so
// sigma_n^2 = 1 downstream. tx_power is per MT stream (P_t,max / N_rf).
struct LinkBudget {
    double fc_hz;
    double tx_power_w;
    double noise_power_w;
};

// 3GPP TR 38.901 UMa-LoS path loss (below breakpoint branch):
// 28.0 + 22 log10(d_3d) + 20 log10(fc / 1 GHz)  [dB].
double uma_los_path_loss_db(double dist_m, double fc_hz);

// Complex gain with UMa-LoS magnitude and uniform random phase. Throws
// TooCloseError when the BS-MT distance is <= 1 m.
cdouble path_gain(const TrackModel& track, double x, const LinkBudget& budget, Rng& rng);

// Per instant l: pilots[l] is an N_r x N_t matrix whose column i is the
// received snapshot for Tx beam i. Delay/Doppler measurements sit alongside.
struct ObservationSet {
    std::vector<Eigen::MatrixXcd> pilots;
    std::vector<double> tau_m;
    std::vector<double> fd_m;
    double delta_t = 0.1;

    int instants() const { return static_cast<int>(pilots.size()); } // L
};

// Full horizontal pilot sweep at each trajectory instant: beam i's snapshot
// is sqrt(N_t N_r) alpha_l a_r(pi - phi_l) (a_t(phi_l)^H F_t,i) + CN(0, sigma_n^2 I).
// Pilot symbol is 1 and the sweep-phase digital precoder is identity.
std::vector<Eigen::MatrixXcd> gen_pilot_observations(const TrackModel& track,
                                                     std::span<const double> x_traj,
                                                     std::span<const cdouble> alphas,
                                                     const ArrayConfig& cfg, const Codebooks& books,
                                                     double sigma_n, Rng& rng);

// Radar-resolution measurement error model, kept exactly as the source
// formulas read: sigma_tau_sq = c / (2B) and sigma_fd_sq = c / (2 fc Tc) + k_fc fc.
// The first is a range-domain variance (m^2): delay noise has standard
// deviation sqrt(sigma_tau_sq) / c seconds. The second is in Hz^2.
struct MeasVariances {
    double sigma_tau_sq; // m^2 (range domain)
    double sigma_fd_sq;  // Hz^2

    double delay_noise_std_s() const { return std::sqrt(sigma_tau_sq) / kLightSpeed; }
    double doppler_noise_std_hz() const { return std::sqrt(sigma_fd_sq); }
};
MeasVariances measurement_variances(double b_hz, double fc_hz, double tc_s, double k_fc);

struct DelayDoppler {
    double tau; // s
    double fd;  // Hz
};

// Geometric delay and signed Doppler at projected location x with signed
// along-track speed v:
//   tau = sqrt(x^2 + f(x)^2) / c
//   f_d = -(2 fc / c) v (x + f f') / (sqrt(x^2 + f^2) sqrt(1 + f'^2))
// On a linear track this reduces to -(2 fc / c) v sin(arctan(x/d)); its
// magnitude equals the |v| cos(Phi - Psi) form for all tracks.
DelayDoppler true_delay_doppler(const TrackModel& track, double x, double v, double fc_hz);

struct Measurements {
    std::vector<double> tau_m;
    std::vector<double> fd_m;
};

// Noisy delay/Doppler per instant; v_traj holds the instantaneous speeds.
Measurements gen_measurements(const TrackModel& track, std::span<const double> x_traj,
                              std::span<const double> v_traj, double fc_hz,
                              const MeasVariances& var, Rng& rng);

} // namespace beamcast

#endif
