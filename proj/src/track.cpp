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

#include "beamcast/track.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "beamcast/csv.hpp"
#include "beamcast/rng.hpp"

namespace beamcast {

// ---------------------------------------------------------------------------
// PiecewiseTrack

int PiecewiseTrack::piece_index(double x) const {
    double dx = delta_x();
    int i = static_cast<int>(std::floor((x + r_max) / dx));
    return std::clamp(i, 0, piece_count() - 1);
}

double PiecewiseTrack::eval(double x) const {
    int i = piece_index(x);
    double x_i = knot_x(i);
    double t = (x - x_i) / delta_x();
    return y[i] + (y[i + 1] - y[i]) * t;
}

double PiecewiseTrack::slope(double x) const {
    int i = piece_index(x);
    return (y[i + 1] - y[i]) / delta_x();
}

// ---------------------------------------------------------------------------
// TrackModel

TrackModel::TrackModel(TrackKind kind, double r_max)
    : kind_(kind), r_max_(r_max), clamp_count_(std::make_shared<std::atomic<uint64_t>>(0)) {}

TrackModel TrackModel::linear(double d, double r_max) {
    TrackModel t(TrackKind::Linear, r_max);
    t.c_ = d;
    return t;
}

TrackModel TrackModel::quadratic(double a, double b, double c, double r_max) {
    TrackModel t(TrackKind::Quadratic, r_max);
    t.a_ = a;
    t.b_ = b;
    t.c_ = c;
    return t;
}

TrackModel TrackModel::piecewise(PiecewiseTrack pw) {
    if (pw.piece_count() < 1)
        throw RangeError("piecewise track needs at least one piece");
    TrackModel t(TrackKind::Piecewise, pw.r_max);
    t.pw_ = std::move(pw);
    // Exact cumulative arc length at knots: within a piece the slope is
    // constant, so arc accumulates linearly.
    int n = t.pw_.piece_count();
    t.pw_cum_.assign(n + 1, 0.0);
    double dx = t.pw_.delta_x();
    for (int i = 0; i < n; ++i) {
        double k = (t.pw_.y[i + 1] - t.pw_.y[i]) / dx;
        t.pw_cum_[i + 1] = t.pw_cum_[i] + dx * std::sqrt(1.0 + k * k);
    }
    return t;
}

double TrackModel::clamp(double x) const {
    if (x < -r_max_ || x > r_max_) {
        if (clamp_count_->fetch_add(1) == 0)
            std::fprintf(stderr, "beamcast: track eval outside [-%g, %g] m, clamping (warned once)\n",
                         r_max_, r_max_);
        return std::clamp(x, -r_max_, r_max_);
    }
    return x;
}

double TrackModel::eval(double x) const {
    x = clamp(x);
    switch (kind_) {
    case TrackKind::Linear:
        return c_;
    case TrackKind::Quadratic:
        return (a_ * x + b_) * x + c_;
    case TrackKind::Piecewise:
        return pw_.eval(x);
    }
    return c_;
}

double TrackModel::slope(double x) const {
    x = clamp(x);
    switch (kind_) {
    case TrackKind::Linear:
        return 0.0;
    case TrackKind::Quadratic:
        return 2.0 * a_ * x + b_;
    case TrackKind::Piecewise:
        return pw_.slope(x);
    }
    return 0.0;
}

double track_eval(const TrackModel& t, double x) { return t.eval(x); }
double track_slope(const TrackModel& t, double x) { return t.slope(x); }

double phi_of_x(const TrackModel& t, double x) {
    x = t.clamp(x);
    double f = t.eval(x);
    if (f == 0.0)
        throw std::domain_error("phi_of_x: f(x) = 0, MT coincides with the BS axis");
    return std::atan(x / f);
}

double psi_of_xv(const TrackModel& t, double x, int v_sign) {
    double fp = t.slope(x);
    if (fp == 0.0)
        return kPi / 2.0;
    double base = std::atan(1.0 / fp);
    return (v_sign * fp <= 0.0) ? base : base + kPi;
}

// ---------------------------------------------------------------------------
// Arc length

namespace {

double integrand(const TrackModel& t, double x) {
    double fp = t.slope(x);
    return std::sqrt(1.0 + fp * fp);
}

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const TrackModel& t, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = integrand(t, lm), frm = integrand(t, rm);
    double left = simpson(a, m, fa, flm, fm);
    double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(t, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(t, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double simpson_interval(const TrackModel& t, double a, double b, double tol) {
    if (a == b)
        return 0.0;
    double fa = integrand(t, a);
    double fb = integrand(t, b);
    double fm = integrand(t, 0.5 * (a + b));
    return adaptive_simpson(t, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 40);
}

// Antiderivative of sqrt(1 + (2ax + b)^2) for the quadratic track.
double quad_arc_antideriv(double a, double b, double x) {
    double u = 2.0 * a * x + b;
    double s = std::sqrt(1.0 + u * u);
    return (u * s + std::asinh(u)) / (4.0 * a);
}

} // namespace

double arc_length(const TrackModel& t, double x_from, double x_to) {
    double sign = 1.0;
    if (x_from > x_to) {
        std::swap(x_from, x_to);
        sign = -1.0;
    }
    double total = 0.0;
    if (t.kind() == TrackKind::Piecewise) {
        // Split at knots so each sub-interval has a smooth (constant) integrand.
        const auto& pw = t.pw();
        double lo = x_from;
        int i = pw.piece_index(x_from);
        while (lo < x_to) {
            double hi = std::min(x_to, pw.knot_x(i + 1));
            total += simpson_interval(t, lo, hi, kQuadratureTolerance);
            lo = hi;
            ++i;
        }
    } else {
        total = simpson_interval(t, x_from, x_to, kQuadratureTolerance);
    }
    return sign * total;
}

double arc_length_exact(const TrackModel& t, double x_from, double x_to) {
    switch (t.kind()) {
    case TrackKind::Linear:
        return x_to - x_from;
    case TrackKind::Quadratic: {
        if (t.quad_a() == 0.0) {
            double b = t.slope(0.0);
            return (x_to - x_from) * std::sqrt(1.0 + b * b);
        }
        return quad_arc_antideriv(t.a_, t.b_, x_to) - quad_arc_antideriv(t.a_, t.b_, x_from);
    }
    case TrackKind::Piecewise: {
        const auto& pw = t.pw();
        auto cum = [&](double x) {
            int i = pw.piece_index(x);
            double k = pw.slope(x);
            return t.pw_cum_[i] + (x - pw.knot_x(i)) * std::sqrt(1.0 + k * k);
        };
        return cum(x_to) - cum(x_from);
    }
    }
    return 0.0;
}

double solve_location(const TrackModel& t, double x_anchor, double s) {
    // G(x) = arc(x -> anchor) decreases strictly in x.
    auto g = [&](double x) { return arc_length_exact(t, x, x_anchor); };
    double lo = -t.r_max(), hi = t.r_max();
    double g_lo = g(lo), g_hi = g(hi);
    if (s > g_lo + kArcTolerance || s < g_hi - kArcTolerance)
        throw NoBracketError("solve_location: displacement leaves the track support");
    if (s >= g_lo)
        return lo;
    if (s <= g_hi)
        return hi;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double gm = g(mid);
        if (std::abs(gm - s) < kArcTolerance)
            return mid;
        if (gm > s)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

void check_opts(std::span<const TrackSample> samples, const TrackFitOptions& opt) {
    if (opt.n_pieces < 1)
        throw RangeError("fit_track: n_pieces must be >= 1");
    if (samples.empty())
        throw RangeError("fit_track: no samples");
}

std::vector<double> init_knots(std::span<const TrackSample> samples, const TrackFitOptions& opt) {
    int n = opt.n_pieces;
    double r = opt.r_max;
    double dx = 2.0 * r / n;

    std::vector<double> piece_sum(n, 0.0), knot_sum(n + 1, 0.0);
    std::vector<int> piece_cnt(n, 0), knot_cnt(n + 1, 0);
    for (const auto& s : samples) {
        double x = std::clamp(s.x, -r, r);
        int p = std::clamp(static_cast<int>(std::floor((x + r) / dx)), 0, n - 1);
        piece_sum[p] += s.f;
        piece_cnt[p]++;
        // Knot bin: half-piece on either side of the knot.
        int k = std::clamp(static_cast<int>(std::floor((x + r) / dx + 0.5)), 0, n);
        knot_sum[k] += s.f;
        knot_cnt[k]++;
    }
    for (int p = 0; p < n; ++p)
        if (piece_cnt[p] == 0)
            throw EmptyBinError("fit_track: piece " + std::to_string(p) + " has no samples");

    std::vector<double> y(n + 1);
    for (int k = 0; k <= n; ++k) {
        if (knot_cnt[k] > 0) {
            y[k] = knot_sum[k] / knot_cnt[k];
        } else {
            double acc = 0.0;
            int cnt = 0;
            if (k > 0) {
                acc += piece_sum[k - 1] / piece_cnt[k - 1];
                cnt++;
            }
            if (k < n) {
                acc += piece_sum[k] / piece_cnt[k];
                cnt++;
            }
            y[k] = acc / cnt;
        }
    }
    return y;
}

} // namespace

PiecewiseTrack fit_track(std::span<const TrackSample> samples, const TrackFitOptions& opt) {
    check_opts(samples, opt);
    const int n = opt.n_pieces;
    const double r = opt.r_max;
    const double dx = 2.0 * r / n;

    PiecewiseTrack pw;
    pw.r_max = r;
    pw.y = init_knots(samples, opt);

    Rng rng(opt.seed);
    std::vector<size_t> order(samples.size());
    std::iota(order.begin(), order.end(), size_t{0});

    std::vector<double> grad(n + 1, 0.0);
    auto full_loss = [&](const PiecewiseTrack& m) {
        return opt.loss == FitLoss::MeanAbs ? piecewise_mean_abs_error(m, samples)
                                            : piecewise_mean_sq_error(m, samples);
    };

    double lr = opt.learning_rate;
    double best_loss = full_loss(pw);
    std::vector<double> best_y = pw.y;
    int stale = 0, decays = 0;
    const int plateau = 30;

    for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
        // Fisher-Yates shuffle with the local stream.
        for (size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[rng.uniform_int(static_cast<int>(i + 1))]);

        for (size_t start = 0; start < order.size(); start += opt.batch_size) {
            size_t stop = std::min(order.size(), start + opt.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            double inv_b = 1.0 / static_cast<double>(stop - start);
            for (size_t j = start; j < stop; ++j) {
                const auto& s = samples[order[j]];
                double x = std::clamp(s.x, -r, r);
                int p = std::clamp(static_cast<int>(std::floor((x + r) / dx)), 0, n - 1);
                double t = (x - (-r + p * dx)) / dx;
                double pred = pw.y[p] * (1.0 - t) + pw.y[p + 1] * t;
                double res = pred - s.f;
                double g;
                if (opt.loss == FitLoss::MeanAbs)
                    g = (res > 0.0) - (res < 0.0); // subgradient, 0 at 0
                else
                    g = 2.0 * res;
                grad[p] += g * (1.0 - t) * inv_b;
                grad[p + 1] += g * t * inv_b;
            }
            for (int k = 0; k <= n; ++k)
                pw.y[k] -= lr * grad[k];
        }

        double loss = full_loss(pw);
        if (loss < best_loss - opt.tol) {
            best_loss = loss;
            best_y = pw.y;
            stale = 0;
        } else {
            if (loss < best_loss) {
                best_loss = loss;
                best_y = pw.y;
            }
            if (++stale >= plateau) {
                lr *= 0.5;
                stale = 0;
                if (++decays > 6)
                    break;
            }
        }
    }
    pw.y = std::move(best_y);
    return pw;
}

double piecewise_mean_abs_error(const PiecewiseTrack& pw, std::span<const TrackSample> samples) {
    double acc = 0.0;
    for (const auto& s : samples)
        acc += std::abs(pw.eval(std::clamp(s.x, -pw.r_max, pw.r_max)) - s.f);
    return acc / samples.size();
}

double piecewise_mean_sq_error(const PiecewiseTrack& pw, std::span<const TrackSample> samples) {
    double acc = 0.0;
    for (const auto& s : samples) {
        double e = pw.eval(std::clamp(s.x, -pw.r_max, pw.r_max)) - s.f;
        acc += e * e;
    }
    return acc / samples.size();
}

double fitting_error_bound(double a, double delta_x, double sigma_n) {
    return std::abs(a) * delta_x * delta_x / 6.0 + sigma_n * std::sqrt(2.0 / kPi);
}

// ---------------------------------------------------------------------------
// CSV

std::vector<TrackSample> read_track_samples_csv(const std::string& path) {
    auto rows = read_numeric_csv(path, "x_m,f_m");
    std::vector<TrackSample> out;
    out.reserve(rows.size());
    for (auto& r : rows)
        out.push_back({r.at(0), r.at(1)});
    return out;
}

void write_track_samples_csv(const std::string& path, std::span<const TrackSample> samples) {
    CsvWriter w(path, "x_m,f_m");
    for (const auto& s : samples)
        w.row({fmt_num(s.x), fmt_num(s.f)});
}

PiecewiseTrack read_piecewise_csv(const std::string& path, double r_max) {
    auto rows = read_numeric_csv(path, "i,x_i_m,y_i_m");
    PiecewiseTrack pw;
    pw.r_max = r_max;
    pw.y.resize(rows.size());
    for (auto& r : rows) {
        int i = static_cast<int>(r.at(0));
        if (i < 0 || i >= static_cast<int>(rows.size()))
            throw std::runtime_error("piecewise csv: bad knot index");
        pw.y[i] = r.at(2);
    }
    if (pw.piece_count() < 1)
        throw std::runtime_error("piecewise csv: need at least two knots");
    return pw;
}

void write_piecewise_csv(const std::string& path, const PiecewiseTrack& pw) {
    CsvWriter w(path, "i,x_i_m,y_i_m");
    for (int i = 0; i < static_cast<int>(pw.y.size()); ++i)
        w.row({std::to_string(i), fmt_num(pw.knot_x(i)), fmt_num(pw.y[i])});
}

} // namespace beamcast
