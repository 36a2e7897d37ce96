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

#include "beamcast/experiments.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "beamcast/csv.hpp"
#include "beamcast/motion.hpp"

namespace beamcast {

const char* const kExperimentNames[7] = {"fit",       "bound-check", "motion-scaling",
                                         "fusion-train", "mse-sweep", "endtoend",
                                         "overhead"};

std::vector<TrackSample> generate_track_corpus(const ScenarioConfig& cfg, int count, double sigma,
                                               uint64_t seed) {
    TrackModel truth = cfg.true_track();
    Rng rng(seed);
    std::vector<TrackSample> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        double x = rng.uniform(-cfg.r_max_m, cfg.r_max_m);
        double f = truth.eval(x) + (sigma > 0.0 ? rng.normal(0.0, sigma) : 0.0);
        out.push_back({x, f});
    }
    return out;
}

std::vector<FitComparisonRow> baseline_comparison_fit(std::span<const TrackSample> train,
                                                      std::span<const TrackSample> eval,
                                                      const TrackFitOptions& opt) {
    std::vector<FitComparisonRow> rows;

    PiecewiseTrack pw = fit_track(train, opt);
    rows.push_back({"proposed", piecewise_mean_abs_error(pw, eval)});

    // Degree-2 polynomial least squares.
    Eigen::MatrixXd vand(train.size(), 3);
    Eigen::VectorXd rhs(train.size());
    for (size_t i = 0; i < train.size(); ++i) {
        vand(i, 0) = 1.0;
        vand(i, 1) = train[i].x;
        vand(i, 2) = train[i].x * train[i].x;
        rhs(i) = train[i].f;
    }
    Eigen::Vector3d coef = (vand.transpose() * vand).ldlt().solve(vand.transpose() * rhs);
    double poly_mae = 0.0;
    for (const auto& s : eval)
        poly_mae += std::abs(coef(0) + coef(1) * s.x + coef(2) * s.x * s.x - s.f);
    rows.push_back({"poly2", poly_mae / eval.size()});

    // Nearest-neighbour bin average over the same piece grid.
    int n = opt.n_pieces;
    double dx = 2.0 * opt.r_max / n;
    std::vector<double> sum(n, 0.0);
    std::vector<int> cnt(n, 0);
    for (const auto& s : train) {
        int b = std::clamp(static_cast<int>((s.x + opt.r_max) / dx), 0, n - 1);
        sum[b] += s.f;
        cnt[b]++;
    }
    double nn_mae = 0.0;
    for (const auto& s : eval) {
        int b = std::clamp(static_cast<int>((s.x + opt.r_max) / dx), 0, n - 1);
        double pred = cnt[b] ? sum[b] / cnt[b] : 0.0;
        nn_mae += std::abs(pred - s.f);
    }
    rows.push_back({"bin_average", nn_mae / eval.size()});
    return rows;
}

std::vector<OverheadRow> overhead_throughput(const ScenarioConfig& cfg,
                                             std::span<const int> n_mts_list) {
    std::vector<OverheadRow> rows;
    double slot_s = cfg.oh_slot_us * 1e-6;
    double fb_rate = cfg.oh_feedback_rate_mbps * 1e6; // bit/s

    // Prediction scheme, per MT per prediction period: L pilot sweeps of N_t
    // beam slots downlink, then feedback of the N_t x N_r complex pilot block
    // and the two measurements at 32 bit per real.
    double pilot_time = cfg.l_obs * cfg.n_t * slot_s;
    double fb_bits = cfg.l_obs * (2.0 * cfg.n_t * cfg.n_r + 2.0) * 32.0;
    double pred_per_mt = (pilot_time + fb_bits / fb_rate) / cfg.predict_duration_s;

    // BA/T baseline: bat_beams beam-pair trainings plus their reports every
    // period, and a reporting delay charged once per report interval.
    double bat_time = cfg.oh_bat_beams * slot_s;
    double bat_bits = cfg.oh_bat_beams * 2.0 * 32.0;
    double bat_per_mt = (bat_time + bat_bits / fb_rate) / (cfg.oh_bat_period_ms * 1e-3);
    double bat_delay_frac = cfg.oh_bat_delay_ms / cfg.oh_bat_report_interval_ms;

    for (int n : n_mts_list) {
        OverheadRow row;
        row.n_mts = n;
        double pr = n * pred_per_mt;
        double br = n * bat_per_mt;
        row.saturated = pr >= 1.0 || br >= 1.0;
        row.pred_ratio = std::min(1.0, pr);
        row.bat_ratio = std::min(1.0, br);
        double share = std::min(1.0, static_cast<double>(cfg.n_rf) / n);
        row.pred_tput_mbps =
            cfg.oh_se_bpshz * cfg.bandwidth_hz * (1.0 - row.pred_ratio) * share / 1e6;
        row.bat_tput_mbps = cfg.oh_se_bpshz * cfg.bandwidth_hz * (1.0 - row.bat_ratio) * share *
                            (1.0 - bat_delay_frac) / 1e6;
        rows.push_back(row);
    }
    return rows;
}

std::vector<FusionSample> generate_fusion_dataset(const ScenarioConfig& cfg,
                                                  const TrackModel& truth_track,
                                                  const TrackModel& est_track, int count,
                                                  uint64_t seed) {
    ScenarioConfig gen_cfg = cfg;
    gen_cfg.seed = seed;
    gen_cfg.trials = (count + cfg.n_mts - 1) / cfg.n_mts;
    auto results = run_sweep(gen_cfg, truth_track, est_track, nullptr, false);
    std::vector<FusionSample> out;
    out.reserve(count);
    for (const auto& trial : results)
        for (const auto& rec : trial.records) {
            if (static_cast<int>(out.size()) >= count)
                return out;
            out.push_back({rec.x_est[kSrcPilot], rec.v_est[kSrcPilot], rec.x_est[kSrcMeasurement],
                           rec.v_est[kSrcMeasurement], rec.x_true, rec.v_true});
        }
    return out;
}

TrackModel estimation_track(const ScenarioConfig& cfg, const TrackModel& truth) {
    if (cfg.track_kind == TrackKind::Linear)
        return truth;
    TrackFitOptions opt = cfg.fit;
    opt.r_max = cfg.r_max_m;
    opt.seed = cfg.seed ^ 0x7261636b666974ull; // distinct from trial streams
    auto corpus = generate_track_corpus(cfg, cfg.fit_samples, cfg.fit_noise_sigma,
                                        cfg.seed ^ 0x636f72707573ull);
    return TrackModel::piecewise(fit_track(corpus, opt));
}

EndToEndSummary summarize(const ScenarioConfig& cfg, std::span<const TrialResult> results) {
    EndToEndSummary s{};
    double n_rec = 0.0;
    for (const auto& trial : results) {
        for (int src = 0; src < kSourceCount; ++src)
            s.se[src] += trial.se_sum[src];
        for (const auto& rec : trial.records) {
            n_rec += 1.0;
            for (int src = 0; src < kSourceCount; ++src)
                s.accuracy[src] += rec.beam_acc[src];
            for (int e = 0; e < 3; ++e) {
                double ex = (rec.x_est[e] - rec.x_true) * (rec.x_est[e] - rec.x_true);
                double ev = (rec.v_est[e] - rec.v_true) * (rec.v_est[e] - rec.v_true);
                s.x_mse[e] += std::min(ex, cfg.mse_clip);
                s.v_mse[e] += std::min(ev, cfg.mse_clip);
            }
        }
    }
    for (int src = 0; src < kSourceCount; ++src) {
        s.se[src] /= results.size();
        s.accuracy[src] /= n_rec;
    }
    for (int e = 0; e < 3; ++e) {
        s.x_mse[e] /= n_rec;
        s.v_mse[e] /= n_rec;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Experiment driver

namespace {

namespace fs = std::filesystem;

std::string out_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void write_manifest(const ScenarioConfig& cfg, const std::string& experiment,
                    const std::string& out_dir) {
    std::ofstream out(out_path(out_dir, "manifest.txt"));
    out << "tool = beamcast 1.0.0\n";
    out << "experiment = " << experiment << "\n";
    out << "compiler = " << __VERSION__ << "\n";
    out << "eigen = " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
        << EIGEN_MINOR_VERSION << "\n";
    out << "# configuration\n" << cfg.echo();
}

std::string csv_name(const std::string& experiment, uint64_t seed) {
    return experiment + "_" + std::to_string(seed) + ".csv";
}

FusionNetwork obtain_fusion_net(const ScenarioConfig& cfg, const TrackModel& truth,
                                const TrackModel& est_track) {
    if (!cfg.fusion_model_file.empty())
        return load_fusion(cfg.fusion_model_file);
    auto dataset = generate_fusion_dataset(cfg, truth, est_track, cfg.fusion_dataset_size,
                                           cfg.seed ^ 0x66757364617461ull);
    FusionTrainOptions opt = cfg.fusion;
    opt.seed = cfg.seed ^ 0x667573696f6eull;
    opt.r_max = cfg.r_max_m;
    opt.v_max = cfg.est.v_max;
    return train_fusion(dataset, opt);
}

void write_records_csv(const std::string& path, std::span<const TrialResult> results) {
    CsvWriter w(path,
                "trial,mt,x_true,v_true,x_pilot,v_pilot,x_meas,v_meas,x_fused,v_fused,"
                "pilot_converged,meas_converged,meas_init,acc_pilot,acc_meas,acc_fused,acc_optimal");
    for (const auto& trial : results)
        for (const auto& r : trial.records) {
            w.row({std::to_string(r.trial), std::to_string(r.mt), fmt_num(r.x_true),
                   fmt_num(r.v_true), fmt_num(r.x_est[0]), fmt_num(r.v_est[0]), fmt_num(r.x_est[1]),
                   fmt_num(r.v_est[1]), fmt_num(r.x_est[2]), fmt_num(r.v_est[2]),
                   std::to_string(r.pilot_converged), std::to_string(r.meas_converged),
                   std::to_string(static_cast<int>(r.meas_init)), fmt_num(r.beam_acc[0]),
                   fmt_num(r.beam_acc[1]), fmt_num(r.beam_acc[2]), fmt_num(r.beam_acc[3])});
        }
}

void write_bins_csv(const std::string& path, const MseBins& bins) {
    CsvWriter w(path, "bin_center,count,x_mse_pilot,x_mse_meas,x_mse_fused,v_mse_pilot,"
                      "v_mse_meas,v_mse_fused,x_mse_raw_pilot,x_mse_raw_meas,x_mse_raw_fused,"
                      "v_mse_raw_pilot,v_mse_raw_meas,v_mse_raw_fused");
    for (size_t i = 0; i < bins.cells.size(); ++i) {
        const auto& c = bins.cells[i];
        if (c.n == 0)
            continue; // empty bins are skipped, not emitted as zeros
        w.row({fmt_num(bins.bin_center(static_cast<int>(i))), std::to_string(c.n),
               fmt_num(c.x_mse[0]), fmt_num(c.x_mse[1]), fmt_num(c.x_mse[2]), fmt_num(c.v_mse[0]),
               fmt_num(c.v_mse[1]), fmt_num(c.v_mse[2]), fmt_num(c.x_mse_raw[0]),
               fmt_num(c.x_mse_raw[1]), fmt_num(c.x_mse_raw[2]), fmt_num(c.v_mse_raw[0]),
               fmt_num(c.v_mse_raw[1]), fmt_num(c.v_mse_raw[2])});
    }
}

void run_fit(const ScenarioConfig& cfg, const std::string& out_dir) {
    auto train = generate_track_corpus(cfg, cfg.fit_samples, cfg.fit_noise_sigma, cfg.seed);
    auto eval =
        generate_track_corpus(cfg, cfg.fit_samples / 4, cfg.fit_noise_sigma, cfg.seed + 1);
    TrackFitOptions opt = cfg.fit;
    opt.r_max = cfg.r_max_m;
    opt.seed = cfg.seed;
    auto rows = baseline_comparison_fit(train, eval, opt);
    CsvWriter w(out_path(out_dir, csv_name("fit", cfg.seed)), "method,mae");
    for (const auto& r : rows)
        w.row({r.method, fmt_num(r.mae)});
    PiecewiseTrack pw = fit_track(train, opt);
    write_piecewise_csv(out_path(out_dir, "fit_track_" + std::to_string(cfg.seed) + ".csv"), pw);
}

void run_bound_check(const ScenarioConfig& cfg, const std::string& out_dir) {
    ScenarioConfig qcfg = cfg;
    qcfg.track_kind = TrackKind::Quadratic; // the bound is a quadratic-track statement
    const double dx_nominal[] = {3.0, 6.0, 12.0, 25.0};
    const double sigmas[] = {0.0, 0.1};
    CsvWriter w(out_path(out_dir, csv_name("bound-check", cfg.seed)),
                "dx_nominal,n_pieces,dx_actual,sigma_n,mae,bound");
    uint64_t cell = 0;
    for (double dxn : dx_nominal) {
        int n_pieces = static_cast<int>(std::lround(2.0 * qcfg.r_max_m / dxn));
        double dx_actual = 2.0 * qcfg.r_max_m / n_pieces;
        for (double sg : sigmas) {
            auto train = generate_track_corpus(qcfg, qcfg.fit_samples, sg, qcfg.seed + 101 + cell);
            auto eval =
                generate_track_corpus(qcfg, qcfg.fit_samples / 2, sg, qcfg.seed + 301 + cell);
            TrackFitOptions opt = qcfg.fit;
            opt.n_pieces = n_pieces;
            opt.r_max = qcfg.r_max_m;
            opt.seed = qcfg.seed + cell;
            PiecewiseTrack pw = fit_track(train, opt);
            double mae = piecewise_mean_abs_error(pw, eval);
            double bound = fitting_error_bound(qcfg.quad_a, dx_actual, sg);
            w.row({fmt_num(dxn), std::to_string(n_pieces), fmt_num(dx_actual), fmt_num(sg),
                   fmt_num(mae), fmt_num(bound)});
            ++cell;
        }
    }
}

void run_motion_scaling(const ScenarioConfig& cfg, const std::string& out_dir) {
    const int l_list[] = {32, 56, 100, 178, 316};
    const double dt_list[] = {0.05, 0.1, 0.2, 0.4};
    const double sigma_list[] = {0.01, 0.0316227766016838, 0.1, 0.316227766016838, 1.0};
    ScalingStudy study = scaling_study(l_list, dt_list, sigma_list, 10000, cfg.seed);
    CsvWriter w(out_path(out_dir, csv_name("motion-scaling", cfg.seed)),
                "param,value,var_v_emp,var_v_theory,var_a_emp,var_a_theory");
    for (const auto& r : study.rows)
        w.row({r.param, fmt_num(r.value), fmt_num(r.var_v_emp), fmt_num(r.var_v_theory),
               fmt_num(r.var_a_emp), fmt_num(r.var_a_theory)});
}

void run_fusion_train(const ScenarioConfig& cfg, const std::string& out_dir) {
    TrackModel truth = cfg.true_track();
    TrackModel est_track = estimation_track(cfg, truth);
    auto dataset = generate_fusion_dataset(cfg, truth, est_track, cfg.fusion_dataset_size,
                                           cfg.seed ^ 0x66757364617461ull);
    write_fusion_dataset_csv(out_path(out_dir, "fusion_dataset_" + std::to_string(cfg.seed) + ".csv"),
                             dataset);
    FusionTrainOptions opt = cfg.fusion;
    opt.seed = cfg.seed ^ 0x667573696f6eull;
    opt.r_max = cfg.r_max_m;
    opt.v_max = cfg.est.v_max;
    FusionTrainCurve curve;
    FusionNetwork net = train_fusion(dataset, opt, &curve);
    save_fusion(net, out_path(out_dir, "fusion_" + std::to_string(cfg.seed) + ".bin"));
    CsvWriter w(out_path(out_dir, csv_name("fusion-train", cfg.seed)),
                "epoch,train_loss,val_loss");
    for (size_t e = 0; e < curve.train_loss.size(); ++e)
        w.row({std::to_string(e), fmt_num(curve.train_loss[e]), fmt_num(curve.val_loss[e])});
}

void run_mse_sweep(const ScenarioConfig& cfg, const std::string& out_dir) {
    TrackModel truth = cfg.true_track();
    TrackModel est_track = estimation_track(cfg, truth);
    FusionNetwork net = obtain_fusion_net(cfg, truth, est_track);
    auto results = run_sweep(cfg, truth, est_track, &net, false);

    std::vector<MetricRecord> records;
    for (const auto& t : results)
        records.insert(records.end(), t.records.begin(), t.records.end());
    write_records_csv(out_path(out_dir, csv_name("mse-sweep", cfg.seed)), results);
    MseBins bins = mse_vs_location(records, cfg.bin_width_m, cfg.r_max_m, cfg.mse_clip);
    write_bins_csv(out_path(out_dir, "mse_bins_" + std::to_string(cfg.seed) + ".csv"), bins);
}

void run_endtoend(const ScenarioConfig& cfg, const std::string& out_dir) {
    TrackModel truth = cfg.true_track();
    TrackModel est_track = estimation_track(cfg, truth);
    FusionNetwork net = obtain_fusion_net(cfg, truth, est_track);

    auto results = run_sweep(cfg, truth, est_track, &net, true);
    EndToEndSummary s = summarize(cfg, results);

    CsvWriter w(out_path(out_dir, csv_name("endtoend", cfg.seed)),
                "source,beam_accuracy,se_bpshz,x_mse,v_mse");
    const int est_idx[kSourceCount] = {0, 1, 2, -1};
    for (int src = 0; src < kSourceCount; ++src) {
        int e = est_idx[src];
        w.row({kSourceNames[src], fmt_num(s.accuracy[src]), fmt_num(s.se[src]),
               e >= 0 ? fmt_num(s.x_mse[e]) : "0", e >= 0 ? fmt_num(s.v_mse[e]) : "0"});
    }
    write_records_csv(out_path(out_dir, "endtoend_records_" + std::to_string(cfg.seed) + ".csv"),
                      results);

    // BeamPlan export of the first drop's fused plan, with the digital
    // precoder dumped per instant in a sidecar.
    std::vector<InstantPlanRecord> plan;
    run_trial(cfg, truth, est_track, &net, 0, true, &plan);
    CsvWriter pw(out_path(out_dir, "beam_plan_" + std::to_string(cfg.seed) + ".csv"),
                 "instant,mt,tx_idx,rx_idx,se_bpshz,genie_tx_idx,match");
    CsvWriter dw(out_path(out_dir, "beam_plan_d_" + std::to_string(cfg.seed) + ".csv"),
                 "instant,row,col,re,im");
    for (const auto& rec : plan) {
        for (size_t u = 0; u < rec.tx.size(); ++u)
            pw.row({std::to_string(rec.instant), std::to_string(u), std::to_string(rec.tx[u] + 1),
                    std::to_string(rec.rx[u] + 1), fmt_num(rec.se),
                    std::to_string(rec.genie[u] + 1),
                    std::to_string(rec.tx[u] == rec.genie[u])});
        for (Eigen::Index r = 0; r < rec.d.rows(); ++r)
            for (Eigen::Index c = 0; c < rec.d.cols(); ++c)
                dw.row({std::to_string(rec.instant), std::to_string(r), std::to_string(c),
                        fmt_num(rec.d(r, c).real()), fmt_num(rec.d(r, c).imag())});
    }
}

void run_overhead(const ScenarioConfig& cfg, const std::string& out_dir) {
    const int counts[] = {4, 10, 20, 50, 100};
    auto rows = overhead_throughput(cfg, counts);
    CsvWriter w(out_path(out_dir, csv_name("overhead", cfg.seed)),
                "n_mts,pred_ratio,bat_ratio,pred_tput_mbps,bat_tput_mbps,saturated");
    for (const auto& r : rows)
        w.row({std::to_string(r.n_mts), fmt_num(r.pred_ratio), fmt_num(r.bat_ratio),
               fmt_num(r.pred_tput_mbps), fmt_num(r.bat_tput_mbps), std::to_string(r.saturated)});
}

} // namespace

void run_experiment(const ScenarioConfig& cfg, const std::string& experiment,
                    const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    write_manifest(cfg, experiment, out_dir);
    if (experiment == "fit")
        run_fit(cfg, out_dir);
    else if (experiment == "bound-check")
        run_bound_check(cfg, out_dir);
    else if (experiment == "motion-scaling")
        run_motion_scaling(cfg, out_dir);
    else if (experiment == "fusion-train")
        run_fusion_train(cfg, out_dir);
    else if (experiment == "mse-sweep")
        run_mse_sweep(cfg, out_dir);
    else if (experiment == "endtoend")
        run_endtoend(cfg, out_dir);
    else if (experiment == "overhead")
        run_overhead(cfg, out_dir);
    else
        throw ConfigError("unknown experiment '" + experiment + "'");
}

} // namespace beamcast
