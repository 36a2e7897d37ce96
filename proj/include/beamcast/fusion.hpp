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

#ifndef BEAMCAST_FUSION_HPP
#define BEAMCAST_FUSION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "beamcast/common.hpp"
#include "beamcast/rng.hpp"

namespace beamcast {

struct FusionSample {
    double x_p, v_p, x_m, v_m; // estimator outputs
    double x_tar, v_tar;       // simulator ground truth
};

// One sub-network: 4 -> 32 -> 32 -> out, dense / BN / ReLU per hidden block,
// sigmoid output for the weight net (out = 1), linear for the bias net
// (out = 2). Running statistics serve inference; training uses batch stats.
struct Subnet {
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;
    Eigen::VectorXd g1, be1, g2, be2;   // BN scale / shift
    Eigen::VectorXd rm1, rv1, rm2, rv2; // BN running mean / variance
    bool sigmoid_out = false;

    static constexpr double kBnEps = 1e-5;

    static Subnet make(int in_dim, int hidden, int out_dim, bool sigmoid, Rng& rng);
    Eigen::MatrixXd infer(const Eigen::MatrixXd& in) const; // in: in_dim x B
    int out_dim() const { return static_cast<int>(w3.rows()); }
};

struct SubnetGrads {
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;
    Eigen::VectorXd g1, be1, g2, be2;
    static SubnetGrads zeros_like(const Subnet& s);
};

// Location and speed fusion heads, each a weight subnet plus a bias subnet.
// Inputs enter scaled by (1/r_max, 1/v_max) for conditioning; bias subnets
// emit directly in physical units (m, m/s).
struct FusionNetwork {
    Subnet weight_x, bias_x, weight_v, bias_v;
    double x_scale = 0.01;  // 1 / r_max
    double v_scale = 0.005; // 1 / v_max

    static FusionNetwork make(double r_max, double v_max, uint64_t seed);
};

struct FusionOutput {
    double x, v;
    double w_x, w_v;
    double b_xp, b_xm, b_vp, b_vm;
};

// Inference-mode fused estimate:
//   x = w_x (x_p - b_xp) + (1 - w_x)(x_m - b_xm), likewise for v.
FusionOutput fusion_forward(const FusionNetwork& net, double x_p, double v_p, double x_m,
                            double v_m);

// Mean over the batch of (x - x_tar)^2 + (v - v_tar)^2, inference mode.
double fusion_loss(const FusionNetwork& net, std::span<const FusionSample> batch);

struct FusionGrads {
    SubnetGrads weight_x, bias_x, weight_v, bias_v;
};

// Training-mode (batch-BN) loss; the differentiation target of fusion_backward.
double fusion_loss_train(const FusionNetwork& net, std::span<const FusionSample> batch);

// Exact gradients of fusion_loss_train for every trainable parameter.
FusionGrads fusion_backward(const FusionNetwork& net, std::span<const FusionSample> batch,
                            double* loss_out = nullptr);

struct FusionTrainOptions {
    double learning_rate = 1e-3;
    int batch_size = 128;
    int max_epochs = 500;
    int patience = 20;      // epochs of stale validation loss before stopping
    int decay_patience = 8; // stale epochs before halving the rate
    double val_fraction = 0.2;
    double bn_momentum = 0.9;
    double clip_norm = 50.0; // global gradient-norm clip
    uint64_t seed = 1;
    double r_max = 100.0;
    double v_max = 200.0;
};

struct FusionTrainCurve {
    std::vector<double> train_loss, val_loss;
};

// Mini-batch gradient descent with an 80/20 split; returns the
// best-validation snapshot with BN running statistics recomputed over the
// whole training set. Throws DivergedError if the loss explodes past 1000x
// its initial value.
FusionNetwork train_fusion(std::span<const FusionSample> dataset, const FusionTrainOptions& opt,
                           FusionTrainCurve* curve = nullptr);

// Flat binary format: magic "FUSN1", then length-prefixed little-endian
// float64 arrays: [x_scale, v_scale], then for each subnet in the order
// weight_x, bias_x, weight_v, bias_v the arrays
// w1 (row-major), b1, g1, be1, rm1, rv1, w2, b2, g2, be2, rm2, rv2, w3, b3.
void save_fusion(const FusionNetwork& net, const std::string& path);
FusionNetwork load_fusion(const std::string& path);

// Dataset CSV with header x_p,v_p,x_m,v_m,x_tar,v_tar.
void write_fusion_dataset_csv(const std::string& path, std::span<const FusionSample> samples);
std::vector<FusionSample> read_fusion_dataset_csv(const std::string& path);

// Entry pointers in matching order, for finite-difference checks and updates.
std::vector<double*> trainable_entries(FusionNetwork& net);
std::vector<double*> gradient_entries(FusionGrads& grads);

} // namespace beamcast

#endif
