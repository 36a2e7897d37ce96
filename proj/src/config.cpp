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

#include "beamcast/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "beamcast/csv.hpp"

namespace beamcast {

TrackModel ScenarioConfig::true_track() const {
    switch (track_kind) {
    case TrackKind::Linear:
        return TrackModel::linear(d_m, r_max_m);
    case TrackKind::Quadratic:
        return TrackModel::quadratic(quad_a, quad_b, quad_c, r_max_m);
    case TrackKind::Piecewise:
        if (track_file.empty())
            throw ConfigError("track.kind = piecewise requires track.file");
        return TrackModel::piecewise(read_piecewise_csv(track_file, r_max_m));
    }
    return TrackModel::linear(d_m, r_max_m);
}

void ScenarioConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw RangeError(std::string(name) + " must be positive");
    };
    positive(fc_hz, "fc_hz");
    positive(bandwidth_hz, "bandwidth_hz");
    positive(r_max_m, "r_max_m");
    positive(d_m, "d_m");
    positive(delta_t_s, "delta_t_s");
    positive(t_c_s, "t_c_s");
    positive(predict_duration_s, "predict_duration_s");
    positive(delta_t_p_s, "delta_t_p_s");
    positive(bin_width_m, "bin_width_m");
    if (n_t < 1 || n_r < 1 || n_rf < 1 || n_t < n_rf)
        throw RangeError("need n_t >= n_rf >= 1 and n_r >= 1");
    if (n_mts < 1 || n_mts > n_rf)
        throw RangeError("n_mts must lie in [1, n_rf]");
    if (l_obs < 2)
        throw RangeError("L must be >= 2 for identifiability");
    if (mt_direction != -1 && mt_direction != 0 && mt_direction != 1)
        throw RangeError("mt.direction must be -1, 0 or +1");
    double n_p_exact = predict_duration_s / delta_t_p_s;
    if (std::abs(n_p_exact - std::llround(n_p_exact)) > 1e-9 * n_p_exact)
        throw RangeError("delta_t_p must divide the prediction duration");
    if (trials < 1)
        throw RangeError("trials must be >= 1");
    if (fit.n_pieces < 1)
        throw RangeError("fit.n_pieces must be >= 1");
    if (fusion_dataset_size < 16)
        throw RangeError("fusion.dataset_size must be >= 16");
    est.validate();
}

namespace {

struct KeyTable {
    std::map<std::string, std::function<void(ScenarioConfig&, const std::string&)>> set;

    template <typename T> static T parse_num(const std::string& v) {
        std::istringstream ss(v);
        T out;
        ss >> out;
        if (ss.fail())
            throw std::invalid_argument("bad numeric value '" + v + "'");
        std::string rest;
        ss >> rest;
        if (!rest.empty())
            throw std::invalid_argument("trailing characters in '" + v + "'");
        return out;
    }

    void num(const std::string& key, double ScenarioConfig::* field) {
        set[key] = [field](ScenarioConfig& c, const std::string& v) {
            c.*field = parse_num<double>(v);
        };
    }
    void integer(const std::string& key, int ScenarioConfig::* field) {
        set[key] = [field](ScenarioConfig& c, const std::string& v) {
            c.*field = parse_num<int>(v);
        };
    }
    void str(const std::string& key, std::string ScenarioConfig::* field) {
        set[key] = [field](ScenarioConfig& c, const std::string& v) { c.*field = v; };
    }
};

const KeyTable& key_table() {
    static const KeyTable table = [] {
        KeyTable t;
        t.num("fc_hz", &ScenarioConfig::fc_hz);
        t.num("bandwidth_hz", &ScenarioConfig::bandwidth_hz);
        t.integer("n_t", &ScenarioConfig::n_t);
        t.integer("n_r", &ScenarioConfig::n_r);
        t.integer("n_rf", &ScenarioConfig::n_rf);
        t.num("pt_max_dbm", &ScenarioConfig::pt_max_dbm);
        t.num("noise_psd_dbm_hz", &ScenarioConfig::noise_psd_dbm_hz);
        t.num("r_max_m", &ScenarioConfig::r_max_m);
        t.num("d_m", &ScenarioConfig::d_m);
        t.num("hsr_speed_kmh", &ScenarioConfig::hsr_speed_kmh);
        t.num("speed_var_kmh2", &ScenarioConfig::speed_var_kmh2);
        t.num("accel_var", &ScenarioConfig::accel_var);
        t.integer("mt.direction", &ScenarioConfig::mt_direction);
        t.num("delta_t_s", &ScenarioConfig::delta_t_s);
        t.num("meas.noise_scale", &ScenarioConfig::meas_noise_scale);
        t.integer("L", &ScenarioConfig::l_obs);
        t.num("t_c_s", &ScenarioConfig::t_c_s);
        t.num("k_fc", &ScenarioConfig::k_fc);
        t.num("predict_duration_s", &ScenarioConfig::predict_duration_s);
        t.num("delta_t_p_s", &ScenarioConfig::delta_t_p_s);

        t.set["track.kind"] = [](ScenarioConfig& c, const std::string& v) {
            if (v == "linear")
                c.track_kind = TrackKind::Linear;
            else if (v == "quadratic")
                c.track_kind = TrackKind::Quadratic;
            else if (v == "piecewise")
                c.track_kind = TrackKind::Piecewise;
            else
                throw std::invalid_argument("track.kind must be linear|quadratic|piecewise");
        };
        t.num("track.quad_a", &ScenarioConfig::quad_a);
        t.num("track.quad_b", &ScenarioConfig::quad_b);
        t.num("track.quad_c", &ScenarioConfig::quad_c);
        t.str("track.file", &ScenarioConfig::track_file);

        t.set["est.theta_th_x"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.theta_th_x = KeyTable::parse_num<double>(v);
        };
        t.set["est.theta_th_v"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.theta_th_v = KeyTable::parse_num<double>(v);
        };
        t.set["est.k_max"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.k_max = KeyTable::parse_num<int>(v);
        };
        t.set["est.grid_x"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.grid_x = KeyTable::parse_num<double>(v);
        };
        t.set["est.grid_v"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.grid_v = KeyTable::parse_num<double>(v);
        };
        t.set["est.v_max"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.v_max = KeyTable::parse_num<double>(v);
        };
        t.set["est.coarse_x"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.coarse_x = KeyTable::parse_num<double>(v);
        };
        t.set["est.coarse_v"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.coarse_v = KeyTable::parse_num<double>(v);
        };
        t.set["est.v_prior"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.v_prior = KeyTable::parse_num<double>(v);
        };
        t.set["est.v_prior_scale"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.v_prior_scale = KeyTable::parse_num<double>(v);
        };
        t.set["est.fd_eps"] = [](ScenarioConfig& c, const std::string& v) {
            c.est.fd_eps = KeyTable::parse_num<double>(v);
        };

        t.set["fit.n_pieces"] = [](ScenarioConfig& c, const std::string& v) {
            c.fit.n_pieces = KeyTable::parse_num<int>(v);
        };
        t.set["fit.learning_rate"] = [](ScenarioConfig& c, const std::string& v) {
            c.fit.learning_rate = KeyTable::parse_num<double>(v);
        };
        t.set["fit.batch_size"] = [](ScenarioConfig& c, const std::string& v) {
            c.fit.batch_size = KeyTable::parse_num<int>(v);
        };
        t.set["fit.max_epochs"] = [](ScenarioConfig& c, const std::string& v) {
            c.fit.max_epochs = KeyTable::parse_num<int>(v);
        };
        t.set["fit.tol"] = [](ScenarioConfig& c, const std::string& v) {
            c.fit.tol = KeyTable::parse_num<double>(v);
        };
        t.integer("fit.samples", &ScenarioConfig::fit_samples);
        t.num("fit.noise_sigma", &ScenarioConfig::fit_noise_sigma);

        t.set["fusion.learning_rate"] = [](ScenarioConfig& c, const std::string& v) {
            c.fusion.learning_rate = KeyTable::parse_num<double>(v);
        };
        t.set["fusion.batch_size"] = [](ScenarioConfig& c, const std::string& v) {
            c.fusion.batch_size = KeyTable::parse_num<int>(v);
        };
        t.set["fusion.max_epochs"] = [](ScenarioConfig& c, const std::string& v) {
            c.fusion.max_epochs = KeyTable::parse_num<int>(v);
        };
        t.set["fusion.patience"] = [](ScenarioConfig& c, const std::string& v) {
            c.fusion.patience = KeyTable::parse_num<int>(v);
        };
        t.integer("fusion.dataset_size", &ScenarioConfig::fusion_dataset_size);
        t.str("fusion.model_file", &ScenarioConfig::fusion_model_file);

        t.integer("trials", &ScenarioConfig::trials);
        t.set["seed"] = [](ScenarioConfig& c, const std::string& v) {
            c.seed = KeyTable::parse_num<uint64_t>(v);
        };
        t.integer("workers", &ScenarioConfig::workers);
        t.integer("n_mts", &ScenarioConfig::n_mts);
        t.num("bin_width_m", &ScenarioConfig::bin_width_m);
        t.num("mse_clip", &ScenarioConfig::mse_clip);

        t.num("overhead.slot_us", &ScenarioConfig::oh_slot_us);
        t.num("overhead.feedback_rate_mbps", &ScenarioConfig::oh_feedback_rate_mbps);
        t.num("overhead.bat_period_ms", &ScenarioConfig::oh_bat_period_ms);
        t.integer("overhead.bat_beams", &ScenarioConfig::oh_bat_beams);
        t.num("overhead.bat_delay_ms", &ScenarioConfig::oh_bat_delay_ms);
        t.num("overhead.bat_report_interval_ms", &ScenarioConfig::oh_bat_report_interval_ms);
        t.num("overhead.se_bpshz", &ScenarioConfig::oh_se_bpshz);
        return t;
    }();
    return table;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

ScenarioConfig parse_config_stream(std::istream& in, const std::string& label) {
    ScenarioConfig cfg;
    const auto& table = key_table();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(label + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = table.set.find(key);
        if (it == table.set.end())
            throw ConfigError(label + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(label + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    return parse_config_stream(in, path);
}

std::string ScenarioConfig::echo() const {
    std::ostringstream out;
    auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << "\n"; };
    kv("fc_hz", fmt_num(fc_hz));
    kv("bandwidth_hz", fmt_num(bandwidth_hz));
    kv("n_t", std::to_string(n_t));
    kv("n_r", std::to_string(n_r));
    kv("n_rf", std::to_string(n_rf));
    kv("pt_max_dbm", fmt_num(pt_max_dbm));
    kv("noise_psd_dbm_hz", fmt_num(noise_psd_dbm_hz));
    kv("r_max_m", fmt_num(r_max_m));
    kv("d_m", fmt_num(d_m));
    kv("hsr_speed_kmh", fmt_num(hsr_speed_kmh));
    kv("speed_var_kmh2", fmt_num(speed_var_kmh2));
    kv("accel_var", fmt_num(accel_var));
    kv("mt.direction", std::to_string(mt_direction));
    kv("delta_t_s", fmt_num(delta_t_s));
    kv("meas.noise_scale", fmt_num(meas_noise_scale));
    kv("L", std::to_string(l_obs));
    kv("t_c_s", fmt_num(t_c_s));
    kv("k_fc", fmt_num(k_fc));
    kv("predict_duration_s", fmt_num(predict_duration_s));
    kv("delta_t_p_s", fmt_num(delta_t_p_s));
    kv("track.kind", track_kind == TrackKind::Linear      ? "linear"
                     : track_kind == TrackKind::Quadratic ? "quadratic"
                                                          : "piecewise");
    kv("track.quad_a", fmt_num(quad_a));
    kv("track.quad_b", fmt_num(quad_b));
    kv("track.quad_c", fmt_num(quad_c));
    if (!track_file.empty())
        kv("track.file", track_file);
    kv("est.theta_th_x", fmt_num(est.theta_th_x));
    kv("est.theta_th_v", fmt_num(est.theta_th_v));
    kv("est.k_max", std::to_string(est.k_max));
    kv("est.grid_x", fmt_num(est.grid_x));
    kv("est.grid_v", fmt_num(est.grid_v));
    kv("est.v_max", fmt_num(est.v_max));
    kv("est.coarse_x", fmt_num(est.coarse_x));
    kv("est.coarse_v", fmt_num(est.coarse_v));
    kv("est.v_prior", fmt_num(est.v_prior));
    kv("est.v_prior_scale", fmt_num(est.v_prior_scale));
    kv("est.fd_eps", fmt_num(est.fd_eps));
    kv("fit.n_pieces", std::to_string(fit.n_pieces));
    kv("fit.learning_rate", fmt_num(fit.learning_rate));
    kv("fit.batch_size", std::to_string(fit.batch_size));
    kv("fit.max_epochs", std::to_string(fit.max_epochs));
    kv("fit.tol", fmt_num(fit.tol));
    kv("fit.samples", std::to_string(fit_samples));
    kv("fit.noise_sigma", fmt_num(fit_noise_sigma));
    kv("fusion.learning_rate", fmt_num(fusion.learning_rate));
    kv("fusion.batch_size", std::to_string(fusion.batch_size));
    kv("fusion.max_epochs", std::to_string(fusion.max_epochs));
    kv("fusion.patience", std::to_string(fusion.patience));
    kv("fusion.dataset_size", std::to_string(fusion_dataset_size));
    if (!fusion_model_file.empty())
        kv("fusion.model_file", fusion_model_file);
    kv("trials", std::to_string(trials));
    kv("seed", std::to_string(seed));
    kv("workers", std::to_string(workers));
    kv("n_mts", std::to_string(n_mts));
    kv("bin_width_m", fmt_num(bin_width_m));
    kv("mse_clip", fmt_num(mse_clip));
    kv("overhead.slot_us", fmt_num(oh_slot_us));
    kv("overhead.feedback_rate_mbps", fmt_num(oh_feedback_rate_mbps));
    kv("overhead.bat_period_ms", fmt_num(oh_bat_period_ms));
    kv("overhead.bat_beams", std::to_string(oh_bat_beams));
    kv("overhead.bat_delay_ms", fmt_num(oh_bat_delay_ms));
    kv("overhead.bat_report_interval_ms", fmt_num(oh_bat_report_interval_ms));
    kv("overhead.se_bpshz", fmt_num(oh_se_bpshz));
    return out.str();
}

} // namespace beamcast
