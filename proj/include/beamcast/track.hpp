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

#ifndef BEAMCAST_TRACK_HPP
#define BEAMCAST_TRACK_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "beamcast/common.hpp"

namespace beamcast {

enum class TrackKind { Linear, Quadratic, Piecewise };

// Equally spaced piecewise-linear track: N_x pieces over [-r_max, r_max],
// knot i at x_i = -r_max + i * dx (0-based), values y[0..N_x]. Adjacent
// pieces share their endpoint values, so the function is continuous by
// construction.
struct PiecewiseTrack {
    double r_max = 100.0;
    std::vector<double> y;

    int piece_count() const { return static_cast<int>(y.size()) - 1; }
    double delta_x() const { return 2.0 * r_max / piece_count(); }
    double knot_x(int i) const { return -r_max + i * delta_x(); }

    // Index of the piece containing x; knots belong to the right piece.
    int piece_index(double x) const;
    double eval(double x) const;
    double slope(double x) const;
};

// A railway track described by its perpendicular distance f(x) from the BS
// axis. Evaluation clamps x into [-r_max, r_max]; clamp events are counted
// (shared across copies) and warned about once.
class TrackModel {
  public:
    static TrackModel linear(double d, double r_max = 100.0);
    // f(x) = a x^2 + b x + c
    static TrackModel quadratic(double a, double b, double c, double r_max = 100.0);
    static TrackModel piecewise(PiecewiseTrack pw);

    TrackKind kind() const { return kind_; }
    double r_max() const { return r_max_; }
    double clamp(double x) const;
    uint64_t clamp_events() const { return clamp_count_->load(); }

    double eval(double x) const;  // f(x)
    double slope(double x) const; // f'(x); at piecewise knots, the right piece

    double linear_d() const { return c_; }
    double quad_a() const { return a_; }
    const PiecewiseTrack& pw() const { return pw_; }

  private:
    TrackModel(TrackKind kind, double r_max);
    TrackKind kind_;
    double r_max_;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0; // quadratic coefficients (linear: c_ = d)
    PiecewiseTrack pw_;
    std::shared_ptr<std::atomic<uint64_t>> clamp_count_;
    std::vector<double> pw_cum_; // exact cumulative arc length at piecewise knots

    friend double arc_length_exact(const TrackModel&, double, double);
};

double track_eval(const TrackModel& t, double x);
double track_slope(const TrackModel& t, double x);

// LoS departure angle, measured from the BS boresight toward +x. All
// supported tracks keep f(x) > 0, so phi lies in (-pi/2, pi/2) and the
// curved-track expression reduces to arctan(x/d) on a constant track.
double phi_of_x(const TrackModel& t, double x);

// Motion-direction angle with the branch on the sign of v*f'(x); returns
// pi/2 when f'(x) = 0.
double psi_of_xv(const TrackModel& t, double x, int v_sign);

// Signed arc length from x_from to x_to by adaptive Simpson quadrature
// (tolerance 1e-8 m); piecewise tracks integrate piece by piece.
double arc_length(const TrackModel& t, double x_from, double x_to);

// Closed-form arc length (all supported kinds admit one); used by the
// location solver and cross-checked against the quadrature in tests.
double arc_length_exact(const TrackModel& t, double x_from, double x_to);

// Solves arc_length(x_l, x_anchor) = s for x_l by bisection on the exact
// cumulative arc (monotone in x_l), to |residual| < 1e-4 m. Throws
// NoBracketError when s points outside the support.
double solve_location(const TrackModel& t, double x_anchor, double s);

inline constexpr double kArcTolerance = 1e-4;      // m, solve_location stop
inline constexpr double kQuadratureTolerance = 1e-8; // m, adaptive Simpson

// ---------------------------------------------------------------------------
// Track fitting

struct TrackSample {
    double x;
    double f;
};

enum class FitLoss { MeanAbs, MeanSquare };

struct TrackFitOptions {
    int n_pieces = 20;
    double learning_rate = 1e-2;
    int batch_size = 64;
    int max_epochs = 2000;
    double tol = 1e-6;      // epoch-loss improvement threshold
    FitLoss loss = FitLoss::MeanAbs;
    uint64_t seed = 1;
    double r_max = 100.0;
};

// Mini-batch (sub)gradient fit of the piecewise-linear track to samples.
// Knots start at per-bin sample means; the learning rate halves on loss
// plateaus and the best-epoch parameters are returned. Throws EmptyBinError
// if any piece receives no samples.
PiecewiseTrack fit_track(std::span<const TrackSample> samples, const TrackFitOptions& opt);

double piecewise_mean_abs_error(const PiecewiseTrack& pw, std::span<const TrackSample> samples);
double piecewise_mean_sq_error(const PiecewiseTrack& pw, std::span<const TrackSample> samples);

// Appendix-style upper bound on the expected fitting MAE of a quadratic
// track with curvature a, piece width delta_x, observation noise sigma_n:
// |a| dx^2 / 6 + sigma_n sqrt(2/pi).
double fitting_error_bound(double a, double delta_x, double sigma_n);

// CSV interop: sample corpora `x_m,f_m`, fitted tracks `i,x_i_m,y_i_m`.
std::vector<TrackSample> read_track_samples_csv(const std::string& path);
void write_track_samples_csv(const std::string& path, std::span<const TrackSample> samples);
PiecewiseTrack read_piecewise_csv(const std::string& path, double r_max);
void write_piecewise_csv(const std::string& path, const PiecewiseTrack& pw);

} // namespace beamcast

#endif
