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

#include "beamcast/simulate.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace beamcast {

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    if (workers <= 0)
        workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n || failed.load())
                    return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

MtState sample_mt_state(const ScenarioConfig& cfg, Rng& rng) {
    MtState s;
    s.x = rng.uniform(-cfg.r_max_m, cfg.r_max_m);
    int dir = cfg.mt_direction;
    if (dir == 0)
        dir = rng.uniform() < 0.5 ? -1 : 1;
    double speed_kmh = rng.laplace(cfg.hsr_speed_kmh, std::sqrt(cfg.speed_var_kmh2 / 2.0));
    s.v = dir * kmh_to_ms(speed_kmh);
    s.a = rng.normal(0.0, std::sqrt(cfg.accel_var));
    return s;
}

namespace {

// Advances a position by arc displacement ds, clamping at the support edge.
double step_along(const TrackModel& track, double x, double ds, bool* clamped) {
    if (track.kind() == TrackKind::Linear) {
        double xn = x + ds;
        if (xn < -track.r_max() || xn > track.r_max()) {
            if (clamped)
                *clamped = true;
            return std::clamp(xn, -track.r_max(), track.r_max());
        }
        return xn;
    }
    try {
        return solve_location(track, x, -ds);
    } catch (const NoBracketError&) {
        if (clamped)
            *clamped = true;
        return ds > 0.0 ? track.r_max() : -track.r_max();
    }
}

struct ObservationWindow {
    std::vector<double> x; // instants 1..L
    std::vector<double> v;
};

// Walks backwards from the final-instant state; each step draws its own
// acceleration jitter so the marginal accel variance matches the config.
ObservationWindow observation_window(const ScenarioConfig& cfg, const TrackModel& truth,
                                     const MtState& mt, Rng& rng) {
    int l = cfg.l_obs;
    ObservationWindow w;
    w.x.assign(l, mt.x);
    w.v.assign(l, mt.v);
    double sig_a = std::sqrt(cfg.accel_var);
    for (int i = l - 2; i >= 0; --i) {
        double a_step = sig_a > 0.0 ? rng.normal(0.0, sig_a) : 0.0;
        double v_next = w.v[i + 1];
        double v_prev = v_next - a_step * cfg.delta_t_s;
        double ds = v_prev * cfg.delta_t_s + 0.5 * a_step * cfg.delta_t_s * cfg.delta_t_s;
        w.x[i] = step_along(truth, w.x[i + 1], -ds, nullptr);
        w.v[i] = v_prev;
    }
    return w;
}

} // namespace

TrialResult run_trial(const ScenarioConfig& cfg, const TrackModel& truth_track,
                      const TrackModel& est_track, const FusionNetwork* net, uint64_t trial_idx,
                      bool with_beamforming, std::vector<InstantPlanRecord>* fused_plan) {
    Rng rng = Rng::stream(cfg.seed, trial_idx);
    ArrayConfig arr = cfg.array();
    Codebooks books = Codebooks::make(arr);
    LinkBudget budget = cfg.link_budget();
    MeasVariances var = cfg.variances();
    int n_mts = cfg.n_mts;

    // The speed prior follows the deployment direction; a random direction
    // makes it symmetric.
    EstimatorSettings est = cfg.est;
    est.v_prior = std::abs(est.v_prior) * (cfg.mt_direction < 0 ? -1.0 : 1.0);
    est.v_prior_symmetric = cfg.mt_direction == 0;

    TrialResult out;
    out.with_beamforming = with_beamforming;
    out.records.resize(n_mts);

    // Per-source per-MT estimates feeding the prediction stage.
    std::vector<std::array<ParamEstimate, kSourceCount>> ests(n_mts);
    std::vector<MtState> states(n_mts);

    for (int u = 0; u < n_mts; ++u) {
        MtState mt = sample_mt_state(cfg, rng);
        states[u] = mt;
        ObservationWindow w = observation_window(cfg, truth_track, mt, rng);

        std::vector<cdouble> alphas(cfg.l_obs);
        for (int l = 0; l < cfg.l_obs; ++l)
            alphas[l] = path_gain(truth_track, w.x[l], budget, rng);

        ObservationSet obs;
        obs.pilots = gen_pilot_observations(truth_track, w.x, alphas, arr, books, 1.0, rng);
        obs.delta_t = cfg.delta_t_s;
        MeasVariances gen_var = var;
        gen_var.sigma_tau_sq *= cfg.meas_noise_scale * cfg.meas_noise_scale;
        gen_var.sigma_fd_sq *= cfg.meas_noise_scale * cfg.meas_noise_scale;
        Measurements meas = gen_measurements(truth_track, w.x, w.v, cfg.fc_hz, gen_var, rng);
        obs.tau_m = meas.tau_m;
        obs.fd_m = meas.fd_m;

        EstimateResult pilot = estimate_from_pilots(obs, est_track, arr, books, est, 1.0);
        EstimateResult ml = estimate_from_measurements(obs.tau_m, obs.fd_m, est_track, cfg.fc_hz,
                                                       var, est, cfg.delta_t_s);

        ParamEstimate fused;
        fused.source = EstimateSource::Fused;
        if (net) {
            FusionOutput fo = fusion_forward(*net, pilot.estimate.x, pilot.estimate.v,
                                             ml.estimate.x, ml.estimate.v);
            fused.x = fo.x;
            fused.v = fo.v;
        } else {
            // Untrained fallback: plain average of the two estimators.
            fused.x = 0.5 * (pilot.estimate.x + ml.estimate.x);
            fused.v = 0.5 * (pilot.estimate.v + ml.estimate.v);
        }

        ests[u][kSrcPilot] = pilot.estimate;
        ests[u][kSrcMeasurement] = ml.estimate;
        ests[u][kSrcFused] = fused;
        ests[u][kSrcOptimal] = {mt.x, mt.v, EstimateSource::Truth};

        MetricRecord& rec = out.records[u];
        rec.trial = static_cast<int>(trial_idx);
        rec.mt = u;
        rec.x_true = mt.x;
        rec.v_true = mt.v;
        rec.x_est[kSrcPilot] = pilot.estimate.x;
        rec.v_est[kSrcPilot] = pilot.estimate.v;
        rec.x_est[kSrcMeasurement] = ml.estimate.x;
        rec.v_est[kSrcMeasurement] = ml.estimate.v;
        rec.x_est[kSrcFused] = fused.x;
        rec.v_est[kSrcFused] = fused.v;
        rec.pilot_converged = pilot.converged;
        rec.meas_converged = ml.converged;
        rec.meas_init = ml.init_status;
    }

    if (!with_beamforming)
        return out;

    int n_p = cfg.n_p();
    double sig_a = std::sqrt(cfg.accel_var);
    std::vector<double> x_now(n_mts), v_now(n_mts);
    for (int u = 0; u < n_mts; ++u) {
        x_now[u] = states[u].x;
        v_now[u] = states[u].v;
    }
    std::vector<Eigen::MatrixXcd> h_true(n_mts);
    std::vector<int> genie(n_mts);
    std::vector<ParamEstimate> source_ests(n_mts);
    std::array<std::vector<int>, kSourceCount> hits;
    for (auto& h : hits)
        h.assign(n_mts, 0);
    std::array<double, kSourceCount> se_acc{0, 0, 0, 0};
    double power = static_cast<double>(n_mts); // unit-noise frame, P_t,max total

    for (int i = 1; i <= n_p; ++i) {
        // True kinematics advance with per-instant acceleration jitter; the
        // very first step uses the sampled initial acceleration.
        for (int u = 0; u < n_mts; ++u) {
            double a_step = (i == 1) ? states[u].a : (sig_a > 0.0 ? rng.normal(0.0, sig_a) : 0.0);
            double ds = v_now[u] * cfg.delta_t_p_s + 0.5 * a_step * cfg.delta_t_p_s * cfg.delta_t_p_s;
            bool clamped = false;
            x_now[u] = step_along(truth_track, x_now[u], ds, &clamped);
            v_now[u] += a_step * cfg.delta_t_p_s;

            cdouble alpha = path_gain(truth_track, x_now[u], budget, rng);
            h_true[u] = los_channel(alpha, phi_of_x(truth_track, x_now[u]), arr).h;
            genie[u] = genie_tx_index(h_true[u], books.f_t);
        }
        for (int s = 0; s < kSourceCount; ++s) {
            for (int u = 0; u < n_mts; ++u)
                source_ests[u] = ests[u][s];
            InstantPlan plan = hybrid_beamform_instant(est_track, source_ests, h_true, arr, books,
                                                       i, cfg.delta_t_p_s, 1.0, power);
            for (int u = 0; u < n_mts; ++u) {
                hits[s][u] += plan.tx_idx[u] == genie[u];
                out.records[u].plan_clamped |= plan.clamped;
            }
            double se = spectral_efficiency(plan, h_true, books, 1.0);
            se_acc[s] += se;
            if (s == kSrcFused && fused_plan) {
                InstantPlanRecord rec;
                rec.instant = i;
                rec.tx = plan.tx_idx;
                rec.rx = plan.rx_idx;
                rec.genie = genie;
                rec.se = se;
                rec.d = plan.d;
                fused_plan->push_back(std::move(rec));
            }
        }
    }
    for (int s = 0; s < kSourceCount; ++s) {
        out.se_sum[s] = se_acc[s] / n_p;
        for (int u = 0; u < n_mts; ++u)
            out.records[u].beam_acc[s] = static_cast<double>(hits[s][u]) / n_p;
    }
    return out;
}

std::vector<TrialResult> run_sweep(const ScenarioConfig& cfg, const TrackModel& truth_track,
                                   const TrackModel& est_track, const FusionNetwork* net,
                                   bool with_beamforming) {
    std::vector<TrialResult> results(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](int t) {
        results[t] = run_trial(cfg, truth_track, est_track, net, static_cast<uint64_t>(t),
                               with_beamforming);
    });
    return results;
}

MseBins mse_vs_location(std::span<const MetricRecord> records, double bin_width, double r_max,
                        double clip) {
    if (records.empty())
        throw RangeError("mse_vs_location: no records");
    MseBins bins;
    bins.bin_width = bin_width;
    bins.r_max = r_max;
    int n = std::max(1, static_cast<int>(std::ceil(2.0 * r_max / bin_width)));
    bins.cells.assign(n, {});
    for (const auto& rec : records) {
        int b = std::clamp(static_cast<int>((rec.x_true + r_max) / bin_width), 0, n - 1);
        auto& cell = bins.cells[b];
        cell.n++;
        for (int s = 0; s < 3; ++s) {
            double ex = (rec.x_est[s] - rec.x_true) * (rec.x_est[s] - rec.x_true);
            double ev = (rec.v_est[s] - rec.v_true) * (rec.v_est[s] - rec.v_true);
            cell.x_mse[s] += std::min(ex, clip);
            cell.v_mse[s] += std::min(ev, clip);
            cell.x_mse_raw[s] += ex;
            cell.v_mse_raw[s] += ev;
        }
    }
    for (auto& cell : bins.cells) {
        if (cell.n == 0)
            continue;
        for (int s = 0; s < 3; ++s) {
            cell.x_mse[s] /= cell.n;
            cell.v_mse[s] /= cell.n;
            cell.x_mse_raw[s] /= cell.n;
            cell.v_mse_raw[s] /= cell.n;
        }
    }
    return bins;
}

} // namespace beamcast
