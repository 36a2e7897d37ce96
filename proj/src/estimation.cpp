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

#include "beamcast/estimation.hpp"

#include <cmath>
#include <limits>

#include "beamcast/search.hpp"

namespace beamcast {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void EstimatorSettings::validate() const {
    if (theta_th_x <= 0.0 || theta_th_v <= 0.0 || k_max < 1 || grid_x <= 0.0 || grid_v <= 0.0 ||
        coarse_x <= 0.0 || coarse_v <= 0.0 || v_max <= 0.0)
        throw RangeError("estimator settings must be positive (k_max >= 1)");
    if (grid_x > theta_th_x || grid_v > theta_th_v)
        throw RangeError("estimator grid must be at least as fine as the thresholds");
}

std::vector<double> trajectory_locations(const TrackModel& track, double x, double v, int l_count,
                                         double delta_t) {
    std::vector<double> xs(l_count);
    for (int l = 1; l <= l_count; ++l) {
        if (track.kind() == TrackKind::Linear)
            xs[l - 1] = x + (l - l_count) * v * delta_t;
        else
            // Arc displacement from x_l forward to the final location x.
            xs[l - 1] = (l == l_count) ? x : solve_location(track, x, (l_count - l) * v * delta_t);
    }
    return xs;
}

cdouble alpha_closed_form(const Eigen::MatrixXcd& snapshots, double x_l, const TrackModel& track,
                          const ArrayConfig& cfg, const Codebooks& books) {
    double phi = phi_of_x(track, x_l);
    double gain = std::sqrt(static_cast<double>(cfg.n_t) * cfg.n_r);
    Eigen::VectorXcd ar = array_response(kPi - phi, cfg.n_r);
    Eigen::VectorXcd at = array_response(phi, cfg.n_t);
    Eigen::RowVectorXcd corr = at.adjoint() * books.f_t; // c_i
    Eigen::RowVectorXcd u = ar.adjoint() * snapshots;    // a_r^H y_i

    cdouble num = 0.0;
    double den = 0.0;
    for (int i = 0; i < cfg.n_t; ++i) {
        num += gain * std::conj(corr(i)) * u(i);
        den += gain * gain * std::norm(corr(i));
    }
    if (den < 1e-300)
        throw DegenerateBasisError("alpha_closed_form: zero pilot energy basis");
    return num / den;
}

namespace {

// Residual energy of one instant's sweep against alpha * z_i(x_l), expanded
// so the N_r x N_t snapshot block is touched once.
double instant_residual(const Eigen::MatrixXcd& snapshots, double x_l, cdouble alpha,
                        const TrackModel& track, const ArrayConfig& cfg, const Codebooks& books) {
    double phi = phi_of_x(track, x_l);
    double gain = std::sqrt(static_cast<double>(cfg.n_t) * cfg.n_r);
    Eigen::VectorXcd ar = array_response(kPi - phi, cfg.n_r);
    Eigen::VectorXcd at = array_response(phi, cfg.n_t);
    Eigen::RowVectorXcd corr = at.adjoint() * books.f_t;
    Eigen::RowVectorXcd u = ar.adjoint() * snapshots;

    double acc = snapshots.squaredNorm();
    for (int i = 0; i < cfg.n_t; ++i) {
        cdouble s = alpha * gain * corr(i);
        acc += std::norm(s) - 2.0 * std::real(std::conj(s) * u(i));
    }
    return acc;
}

} // namespace

double loglik_pilot(const ObservationSet& obs, const TrackModel& track, double x, double v,
                    std::span<const cdouble> alphas, double sigma_n, const ArrayConfig& cfg,
                    const Codebooks& books) {
    int l_count = obs.instants();
    if (static_cast<int>(alphas.size()) != l_count)
        throw RangeError("loglik_pilot: alpha count != L");
    std::vector<double> xs = trajectory_locations(track, x, v, l_count, obs.delta_t);
    double acc = 0.0;
    for (int l = 0; l < l_count; ++l)
        acc += instant_residual(obs.pilots[l], xs[l], alphas[l], track, cfg, books);
    return -acc / (2.0 * sigma_n * sigma_n);
}

EstimateResult estimate_from_pilots(const ObservationSet& obs, const TrackModel& track,
                                    const ArrayConfig& cfg, const Codebooks& books,
                                    const EstimatorSettings& settings, double sigma_n) {
    settings.validate();
    int l_count = obs.instants();
    if (l_count < 2)
        throw RangeError("estimate_from_pilots: needs L >= 2 instants");
    double r = track.r_max();

    // Per-instant location sweep. The gain is concentrated out with its
    // closed form at every candidate: a fixed unit gain would make the
    // correlation objective sign-flip with the unknown channel phase and the
    // sweep would lock onto sidelobes.
    std::vector<double> x0(l_count);
    std::vector<cdouble> alphas(l_count);
    for (int l = 0; l < l_count; ++l) {
        auto obj = [&](double xc) {
            cdouble a = alpha_closed_form(obs.pilots[l], xc, track, cfg, books);
            return -instant_residual(obs.pilots[l], xc, a, track, cfg, books) /
                   (2.0 * sigma_n * sigma_n);
        };
        x0[l] = maximize_1d(obj, -r, r, settings.coarse_x, settings.grid_x).arg;
        alphas[l] = alpha_closed_form(obs.pilots[l], x0[l], track, cfg, books);
    }

    // Trajectory anchored at the final instant's location for the speed init.
    // The searched objective carries the speed prior; with a sharp
    // likelihood it is negligible, on the flat far-range likelihood it keeps
    // the speed near the deployment envelope.
    double x = x0[l_count - 1];
    auto safe_loglik = [&](double xc, double vc, std::span<const cdouble> al) {
        try {
            return loglik_pilot(obs, track, xc, vc, al, sigma_n, cfg, books) +
                   settings.log_speed_prior(vc);
        } catch (const NoBracketError&) {
            return kNegInf;
        }
    };
    double v = maximize_1d([&](double vc) { return safe_loglik(x, vc, alphas); }, -settings.v_max,
                           settings.v_max, settings.coarse_v, settings.grid_v)
                   .arg;

    EstimateResult out;
    out.objective_trace.push_back(safe_loglik(x, v, alphas));

    for (int k = 1; k <= settings.k_max; ++k) {
        out.iterations = k;
        std::vector<double> xs = trajectory_locations(track, x, v, l_count, obs.delta_t);
        for (int l = 0; l < l_count; ++l)
            alphas[l] = alpha_closed_form(obs.pilots[l], xs[l], track, cfg, books);

        auto bx = maximize_1d([&](double xc) { return safe_loglik(xc, v, alphas); }, -r, r,
                              settings.coarse_x, settings.grid_x, x);
        double x_new = bx.arg;
        auto bv = maximize_1d([&](double vc) { return safe_loglik(x_new, vc, alphas); },
                              -settings.v_max, settings.v_max, settings.coarse_v, settings.grid_v, v);
        double v_new = bv.arg;

        double obj = bv.value;
        double prev = out.objective_trace.back();
        if (obj + 1e-9 * (1.0 + std::abs(obj)) < prev)
            throw std::logic_error("estimate_from_pilots: objective decreased");
        out.objective_trace.push_back(obj);

        bool done = std::abs(x_new - x) < settings.theta_th_x &&
                    std::abs(v_new - v) < settings.theta_th_v;
        x = x_new;
        v = v_new;
        if (done) {
            out.converged = true;
            break;
        }
    }

    out.estimate = {std::clamp(x, -r, r), std::clamp(v, -settings.v_max, settings.v_max),
                    EstimateSource::Pilot};
    out.loglik = out.objective_trace.back();
    return out;
}

// ---------------------------------------------------------------------------
// Measurement path

namespace {

// Range equation root x^2 + f(x)^2 = (c tau)^2 on the branch of given sign,
// located by a grid scan from the BS outward plus bisection.
struct RangeRoot {
    double x;
    bool found;
};

RangeRoot solve_range_branch(const TrackModel& track, double r_target_sq, int branch_sign) {
    auto h = [&](double x) {
        double f = track.eval(x);
        return x * x + f * f - r_target_sq;
    };
    const int grid = 256;
    double step = track.r_max() / grid;
    double best_x = 0.0, best_abs = std::abs(h(0.0));
    double prev_x = 0.0, prev_h = h(0.0);
    for (int i = 1; i <= grid; ++i) {
        double x = branch_sign * step * i;
        double hx = h(x);
        if (std::abs(hx) < best_abs) {
            best_abs = std::abs(hx);
            best_x = x;
        }
        if ((prev_h <= 0.0 && hx >= 0.0) || (prev_h >= 0.0 && hx <= 0.0)) {
            double lo = prev_x, hi = x;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                if ((h(lo) <= 0.0) == (h(mid) <= 0.0))
                    lo = mid;
                else
                    hi = mid;
            }
            return {0.5 * (lo + hi), true};
        }
        prev_x = x;
        prev_h = hx;
    }
    return {best_x, false};
}

} // namespace

MeasurementInit init_from_measurements(double tau_m_l, double fd_m_l, const TrackModel& track,
                                       double fc_hz, const EstimatorSettings& settings) {
    MeasurementInit out;
    if (std::abs(fd_m_l) < settings.fd_eps) {
        // Near broadside the Doppler sign carries no direction information.
        out.x0 = 0.0;
        out.v0 = settings.v_prior;
        out.status = InitStatus::SignAmbiguity;
        return out;
    }
    int branch = fd_m_l < 0.0 ? +1 : -1; // -sign(fd)
    double r_target_sq = kLightSpeed * tau_m_l * kLightSpeed * tau_m_l;

    if (track.kind() == TrackKind::Linear) {
        double d = track.linear_d();
        if (r_target_sq < d * d) {
            out.x0 = 0.0;
            out.v0 = settings.v_prior;
            out.status = InitStatus::NoGeometricSolution;
            return out;
        }
        out.x0 = branch * std::sqrt(r_target_sq - d * d);
    } else {
        RangeRoot root = solve_range_branch(track, r_target_sq, branch);
        out.x0 = root.x;
        if (!root.found)
            out.status = InitStatus::NoGeometricSolution;
    }
    out.x0 = std::clamp(out.x0, -track.r_max(), track.r_max());

    // Doppler is linear in signed speed, so inverting the unit-speed value
    // settles both the magnitude and the direction at once.
    double q = true_delay_doppler(track, out.x0, 1.0, fc_hz).fd;
    if (std::abs(q) < 2.0 * fc_hz / kLightSpeed * 1e-4) {
        out.v0 = settings.v_prior;
        if (out.status == InitStatus::Ok)
            out.status = InitStatus::SignAmbiguity;
    } else {
        out.v0 = std::clamp(fd_m_l / q, -settings.v_max, settings.v_max);
    }
    return out;
}

double loglik_measurements(std::span<const double> tau_m, std::span<const double> fd_m,
                           const TrackModel& track, double x, double v, double fc_hz,
                           const MeasVariances& var, double delta_t) {
    if (tau_m.size() != fd_m.size())
        throw RangeError("loglik_measurements: delay/Doppler length mismatch");
    int l_count = static_cast<int>(tau_m.size());
    std::vector<double> xs = trajectory_locations(track, x, v, l_count, delta_t);
    double acc = 0.0;
    for (int l = 0; l < l_count; ++l) {
        DelayDoppler dd = true_delay_doppler(track, xs[l], v, fc_hz);
        double dr = (tau_m[l] - dd.tau) * kLightSpeed; // range-domain residual
        double df = fd_m[l] - dd.fd;
        acc += dr * dr / (2.0 * var.sigma_tau_sq) + df * df / (2.0 * var.sigma_fd_sq);
    }
    return -acc;
}

EstimateResult estimate_from_measurements(std::span<const double> tau_m,
                                          std::span<const double> fd_m, const TrackModel& track,
                                          double fc_hz, const MeasVariances& var,
                                          const EstimatorSettings& settings, double delta_t) {
    settings.validate();
    int l_count = static_cast<int>(tau_m.size());
    if (l_count < 2)
        throw RangeError("estimate_from_measurements: needs L >= 2 instants");
    double r = track.r_max();

    MeasurementInit init =
        init_from_measurements(tau_m[l_count - 1], fd_m[l_count - 1], track, fc_hz, settings);

    auto safe_loglik = [&](double xc, double vc) {
        try {
            return loglik_measurements(tau_m, fd_m, track, xc, vc, fc_hz, var, delta_t);
        } catch (const NoBracketError&) {
            return kNegInf;
        }
    };

    double x = init.x0, v = init.v0;
    EstimateResult out;
    out.init_status = init.status;
    out.objective_trace.push_back(safe_loglik(x, v));

    for (int k = 1; k <= settings.k_max; ++k) {
        out.iterations = k;
        auto bx = maximize_1d([&](double xc) { return safe_loglik(xc, v); }, -r, r,
                              settings.coarse_x, settings.grid_x, x);
        double x_new = bx.arg;
        auto bv = maximize_1d([&](double vc) { return safe_loglik(x_new, vc); }, -settings.v_max,
                              settings.v_max, settings.coarse_v, settings.grid_v, v);
        double v_new = bv.arg;

        double obj = bv.value;
        double prev = out.objective_trace.back();
        if (obj + 1e-9 * (1.0 + std::abs(obj)) < prev)
            throw std::logic_error("estimate_from_measurements: objective decreased");
        out.objective_trace.push_back(obj);

        bool done = std::abs(x_new - x) < settings.theta_th_x &&
                    std::abs(v_new - v) < settings.theta_th_v;
        x = x_new;
        v = v_new;
        if (done) {
            out.converged = true;
            break;
        }
    }

    out.estimate = {std::clamp(x, -r, r), std::clamp(v, -settings.v_max, settings.v_max),
                    EstimateSource::Measurement};
    out.loglik = out.objective_trace.back();
    return out;
}

} // namespace beamcast
