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

#ifndef BEAMCAST_BEAMFORMING_HPP
#define BEAMCAST_BEAMFORMING_HPP

#include <span>
#include <vector>

#include "beamcast/channel.hpp"
#include "beamcast/estimation.hpp"
#include "beamcast/track.hpp"

namespace beamcast {

// Projected location reached from (x, v) after time t along the track arc,
// clamped to the support; `clamped` reports whether the edge was hit.
double predict_location(const TrackModel& track, double x, double v, double t, bool* clamped = nullptr);

// Locations at instants i = 1..n_p with granularity dt_p.
std::vector<double> predict_locations(const TrackModel& track, const ParamEstimate& est, int n_p,
                                      double dt_p, bool* clamped = nullptr);

struct BeamSelection {
    int tx_idx; // 0-based codeword columns
    int rx_idx;
};

// Nearest codewords in Euclidean distance to the steering vectors at the
// predicted angle; ties break toward the lower index.
BeamSelection select_codewords(double phi, const Codebooks& books);

// Stacks the per-MT equivalent rows f_r[rx]^H H_u A_t into an
// n_mts x n_streams matrix (the CSI-RS product).
Eigen::MatrixXcd equivalent_channels(std::span<const Eigen::MatrixXcd> h_true,
                                     std::span<const int> rx_idx, const Eigen::MatrixXcd& a_t,
                                     const Codebooks& books);

// Regularized MMSE transmit precoder D = xi H^H (H H^H + sigma^2 I)^-1 with
// xi setting ||A_t D||_F^2 = power. Solved as a linear system; a conditioning
// floor kicks in past 1e12 (flagged via `regularized`).
Eigen::MatrixXcd mmse_precoder(const Eigen::MatrixXcd& h_eq, const Eigen::MatrixXcd& a_t,
                               double sigma_n_sq, double power, bool* regularized = nullptr);

struct InstantPlan {
    std::vector<int> tx_idx, rx_idx;
    Eigen::MatrixXcd a_t; // N_t x n_mts, selected codeword columns
    Eigen::MatrixXcd d;   // n_mts x n_mts digital precoder
    bool clamped = false;
};

// One instant of the hybrid beamforming pipeline: predicted locations ->
// AoDs -> codeword selection -> equivalent channel -> MMSE precoder.
InstantPlan hybrid_beamform_instant(const TrackModel& track, std::span<const ParamEstimate> ests,
                                    std::span<const Eigen::MatrixXcd> h_true,
                                    const ArrayConfig& cfg, const Codebooks& books, int instant,
                                    double dt_p, double sigma_n_sq, double power);

// Sum over MTs of log2(1 + SINR_u) with the MT's analog combiner applied:
// SINR_u = |g_u d_u|^2 / (sum_{u' != u} |g_u d_u'|^2 + sigma^2),
// g_u = f_r[rx_u]^H H_u A_t.
double spectral_efficiency(const InstantPlan& plan, std::span<const Eigen::MatrixXcd> h_true,
                           const Codebooks& books, double sigma_n_sq);

// Codebook beam with the largest received power on the true channel.
int genie_tx_index(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& f_t);
int genie_rx_index(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& f_r);

// Fraction of (instant, MT) pairs whose selected Tx codeword equals the
// genie index; spans are flattened instant-major.
double beam_accuracy(std::span<const int> selected_tx, std::span<const int> genie_tx);

} // namespace beamcast

#endif
