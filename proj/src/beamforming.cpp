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

#include "beamcast/beamforming.hpp"

#include <cmath>

namespace beamcast {

double predict_location(const TrackModel& track, double x, double v, double t, bool* clamped) {
    double r = track.r_max();
    x = std::clamp(x, -r, r);
    if (track.kind() == TrackKind::Linear) {
        double xp = x + v * t;
        if (clamped && (xp < -r || xp > r))
            *clamped = true;
        return std::clamp(xp, -r, r);
    }
    try {
        // Arc displacement v*t forward from x: arc(result -> x) = -v*t.
        return solve_location(track, x, -v * t);
    } catch (const NoBracketError&) {
        if (clamped)
            *clamped = true;
        return v > 0.0 ? r : -r;
    }
}

std::vector<double> predict_locations(const TrackModel& track, const ParamEstimate& est, int n_p,
                                      double dt_p, bool* clamped) {
    std::vector<double> xs(n_p);
    for (int i = 1; i <= n_p; ++i)
        xs[i - 1] = predict_location(track, est.x, est.v, i * dt_p, clamped);
    return xs;
}

BeamSelection select_codewords(double phi, const Codebooks& books) {
    auto nearest = [](const Eigen::MatrixXcd& book, const Eigen::VectorXcd& target) {
        int best = 0;
        double best_d = (book.col(0) - target).squaredNorm();
        for (int j = 1; j < book.cols(); ++j) {
            double d = (book.col(j) - target).squaredNorm();
            if (d < best_d) { // strict keeps the lower index on ties
                best_d = d;
                best = j;
            }
        }
        return best;
    };
    int n_t = static_cast<int>(books.f_t.rows());
    int n_r = static_cast<int>(books.f_r.rows());
    return {nearest(books.f_t, array_response(phi, n_t)),
            nearest(books.f_r, array_response(kPi - phi, n_r))};
}

Eigen::MatrixXcd equivalent_channels(std::span<const Eigen::MatrixXcd> h_true,
                                     std::span<const int> rx_idx, const Eigen::MatrixXcd& a_t,
                                     const Codebooks& books) {
    int n_mts = static_cast<int>(h_true.size());
    Eigen::MatrixXcd h_eq(n_mts, a_t.cols());
    for (int u = 0; u < n_mts; ++u)
        h_eq.row(u) = books.f_r.col(rx_idx[u]).adjoint() * h_true[u] * a_t;
    return h_eq;
}

Eigen::MatrixXcd mmse_precoder(const Eigen::MatrixXcd& h_eq, const Eigen::MatrixXcd& a_t,
                               double sigma_n_sq, double power, bool* regularized) {
    int n = static_cast<int>(h_eq.rows());
    Eigen::MatrixXcd gram = h_eq * h_eq.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
    double lmax = eig.eigenvalues().maxCoeff();
    if (lmax <= 0.0)
        return Eigen::MatrixXcd::Zero(n, n); // dead channel, nothing to send

    double sigma = sigma_n_sq;
    if (sigma < lmax * 1e-12) {
        sigma = lmax * 1e-12;
        if (regularized)
            *regularized = true;
    }
    Eigen::MatrixXcd m = gram + sigma * Eigen::MatrixXcd::Identity(n, n);
    // D0 = H^H M^-1 = (M^-1 H)^H since M is Hermitian.
    Eigen::MatrixXcd d0 = m.llt().solve(h_eq).adjoint();
    double norm = (a_t * d0).norm();
    if (norm == 0.0)
        return d0;
    return d0 * (std::sqrt(power) / norm);
}

InstantPlan hybrid_beamform_instant(const TrackModel& track, std::span<const ParamEstimate> ests,
                                    std::span<const Eigen::MatrixXcd> h_true,
                                    const ArrayConfig& cfg, const Codebooks& books, int instant,
                                    double dt_p, double sigma_n_sq, double power) {
    int n_mts = static_cast<int>(ests.size());
    InstantPlan plan;
    plan.a_t.resize(cfg.n_t, n_mts);
    for (int u = 0; u < n_mts; ++u) {
        double xp = predict_location(track, ests[u].x, ests[u].v, instant * dt_p, &plan.clamped);
        BeamSelection sel = select_codewords(phi_of_x(track, xp), books);
        plan.tx_idx.push_back(sel.tx_idx);
        plan.rx_idx.push_back(sel.rx_idx);
        plan.a_t.col(u) = books.f_t.col(sel.tx_idx);
    }
    Eigen::MatrixXcd h_eq = equivalent_channels(h_true, plan.rx_idx, plan.a_t, books);
    plan.d = mmse_precoder(h_eq, plan.a_t, sigma_n_sq, power);
    return plan;
}

double spectral_efficiency(const InstantPlan& plan, std::span<const Eigen::MatrixXcd> h_true,
                           const Codebooks& books, double sigma_n_sq) {
    int n_mts = static_cast<int>(h_true.size());
    double se = 0.0;
    for (int u = 0; u < n_mts; ++u) {
        Eigen::RowVectorXcd g = books.f_r.col(plan.rx_idx[u]).adjoint() * h_true[u] * plan.a_t;
        Eigen::RowVectorXcd gd = g * plan.d;
        double signal = std::norm(gd(u));
        double interference = 0.0;
        for (int w = 0; w < n_mts; ++w)
            if (w != u)
                interference += std::norm(gd(w));
        se += std::log2(1.0 + signal / (interference + sigma_n_sq));
    }
    return se;
}

int genie_tx_index(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& f_t) {
    int best = 0;
    double best_p = (h * f_t.col(0)).squaredNorm();
    for (int j = 1; j < f_t.cols(); ++j) {
        double p = (h * f_t.col(j)).squaredNorm();
        if (p > best_p) {
            best_p = p;
            best = j;
        }
    }
    return best;
}

int genie_rx_index(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& f_r) {
    int best = 0;
    double best_p = (f_r.col(0).adjoint() * h).squaredNorm();
    for (int j = 1; j < f_r.cols(); ++j) {
        double p = (f_r.col(j).adjoint() * h).squaredNorm();
        if (p > best_p) {
            best_p = p;
            best = j;
        }
    }
    return best;
}

double beam_accuracy(std::span<const int> selected_tx, std::span<const int> genie_tx) {
    if (selected_tx.size() != genie_tx.size() || selected_tx.empty())
        throw RangeError("beam_accuracy: mismatched or empty selections");
    size_t hits = 0;
    for (size_t i = 0; i < selected_tx.size(); ++i)
        hits += selected_tx[i] == genie_tx[i];
    return static_cast<double>(hits) / selected_tx.size();
}

} // namespace beamcast
