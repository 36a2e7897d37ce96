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

#include "beamcast/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "beamcast/csv.hpp"

namespace beamcast {

namespace {
constexpr int kHidden = 32;
constexpr int kInput = 4;

Eigen::MatrixXd fan_in_uniform(int rows, int cols, Rng& rng) {
    double lim = 1.0 / std::sqrt(static_cast<double>(cols));
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            m(r, c) = rng.uniform(-lim, lim);
    return m;
}
} // namespace

Subnet Subnet::make(int in_dim, int hidden, int out_dim, bool sigmoid, Rng& rng) {
    Subnet s;
    s.w1 = fan_in_uniform(hidden, in_dim, rng);
    s.w2 = fan_in_uniform(hidden, hidden, rng);
    // Zero output layer: the untrained head emits w = 1/2 and zero biases,
    // so training starts from the plain average of the two estimators
    // instead of random meter-scale corrections.
    s.w3 = Eigen::MatrixXd::Zero(out_dim, hidden);
    s.b1 = Eigen::VectorXd::Zero(hidden);
    s.b2 = Eigen::VectorXd::Zero(hidden);
    s.b3 = Eigen::VectorXd::Zero(out_dim);
    s.g1 = Eigen::VectorXd::Ones(hidden);
    s.g2 = Eigen::VectorXd::Ones(hidden);
    s.be1 = Eigen::VectorXd::Zero(hidden);
    s.be2 = Eigen::VectorXd::Zero(hidden);
    s.rm1 = Eigen::VectorXd::Zero(hidden);
    s.rm2 = Eigen::VectorXd::Zero(hidden);
    s.rv1 = Eigen::VectorXd::Ones(hidden);
    s.rv2 = Eigen::VectorXd::Ones(hidden);
    s.sigmoid_out = sigmoid;
    return s;
}

namespace {

inline Eigen::MatrixXd bn_apply(const Eigen::MatrixXd& z, const Eigen::VectorXd& mean,
                                const Eigen::VectorXd& var, const Eigen::VectorXd& gamma,
                                const Eigen::VectorXd& beta) {
    Eigen::ArrayXd inv_std = (var.array() + Subnet::kBnEps).sqrt().inverse();
    return (((z.colwise() - mean).array().colwise() * (gamma.array() * inv_std)).colwise() +
            beta.array())
        .matrix();
}

inline Eigen::MatrixXd relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& m) {
    return (1.0 / (1.0 + (-m.array()).exp())).matrix();
}

// Training-mode caches for one subnet forward pass.
struct SubnetCache {
    Eigen::MatrixXd in;
    Eigen::MatrixXd z1, y1, a1, z2, y2, a2, z3, out;
    Eigen::VectorXd mu1, var1, mu2, var2;
};

void batch_stats(const Eigen::MatrixXd& z, Eigen::VectorXd& mu, Eigen::VectorXd& var) {
    mu = z.rowwise().mean();
    var = ((z.colwise() - mu).array().square()).rowwise().mean();
}

Eigen::MatrixXd forward_train(const Subnet& s, const Eigen::MatrixXd& in, SubnetCache& c) {
    c.in = in;
    c.z1 = (s.w1 * in).colwise() + s.b1;
    batch_stats(c.z1, c.mu1, c.var1);
    c.y1 = bn_apply(c.z1, c.mu1, c.var1, s.g1, s.be1);
    c.a1 = relu(c.y1);
    c.z2 = (s.w2 * c.a1).colwise() + s.b2;
    batch_stats(c.z2, c.mu2, c.var2);
    c.y2 = bn_apply(c.z2, c.mu2, c.var2, s.g2, s.be2);
    c.a2 = relu(c.y2);
    c.z3 = (s.w3 * c.a2).colwise() + s.b3;
    c.out = s.sigmoid_out ? sigmoid(c.z3) : c.z3;
    return c.out;
}

// Backward through batch normalization given dY and the cached batch stats.
Eigen::MatrixXd bn_backward(const Eigen::MatrixXd& z, const Eigen::VectorXd& mu,
                            const Eigen::VectorXd& var, const Eigen::VectorXd& gamma,
                            const Eigen::MatrixXd& d_y, Eigen::VectorXd& d_gamma,
                            Eigen::VectorXd& d_beta) {
    const double b = static_cast<double>(z.cols());
    Eigen::ArrayXXd zc = (z.colwise() - mu).array();
    Eigen::ArrayXd inv_std = (var.array() + Subnet::kBnEps).sqrt().inverse();
    Eigen::ArrayXXd xhat = zc.colwise() * inv_std;

    d_gamma = (d_y.array() * xhat).rowwise().sum().matrix();
    d_beta = d_y.rowwise().sum();

    Eigen::ArrayXXd dxhat = d_y.array().colwise() * gamma.array();
    Eigen::ArrayXd dvar =
        (dxhat * zc).rowwise().sum() * (-0.5) * inv_std * inv_std * inv_std;
    Eigen::ArrayXd dmu = (dxhat.colwise() * (-inv_std)).rowwise().sum();
    Eigen::ArrayXXd dz = (dxhat.colwise() * inv_std) + (zc.colwise() * (dvar * 2.0 / b)) +
                         ((Eigen::ArrayXXd::Zero(z.rows(), z.cols()).colwise() + dmu) / b);
    return dz.matrix();
}

void backward_subnet(const Subnet& s, const SubnetCache& c, const Eigen::MatrixXd& d_out,
                     SubnetGrads& g) {
    Eigen::MatrixXd dz3 = d_out;
    if (s.sigmoid_out)
        dz3 = (d_out.array() * c.out.array() * (1.0 - c.out.array())).matrix();
    g.w3 += dz3 * c.a2.transpose();
    g.b3 += dz3.rowwise().sum();

    Eigen::MatrixXd da2 = s.w3.transpose() * dz3;
    Eigen::MatrixXd dy2 = (da2.array() * (c.y2.array() > 0.0).cast<double>()).matrix();
    Eigen::VectorXd dg2, dbe2;
    Eigen::MatrixXd dz2 = bn_backward(c.z2, c.mu2, c.var2, s.g2, dy2, dg2, dbe2);
    g.g2 += dg2;
    g.be2 += dbe2;
    g.w2 += dz2 * c.a1.transpose();
    g.b2 += dz2.rowwise().sum();

    Eigen::MatrixXd da1 = s.w2.transpose() * dz2;
    Eigen::MatrixXd dy1 = (da1.array() * (c.y1.array() > 0.0).cast<double>()).matrix();
    Eigen::VectorXd dg1, dbe1;
    Eigen::MatrixXd dz1 = bn_backward(c.z1, c.mu1, c.var1, s.g1, dy1, dg1, dbe1);
    g.g1 += dg1;
    g.be1 += dbe1;
    g.w1 += dz1 * c.in.transpose();
    g.b1 += dz1.rowwise().sum();
}

Eigen::MatrixXd scaled_inputs(const FusionNetwork& net, std::span<const FusionSample> batch) {
    Eigen::MatrixXd u(kInput, batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
        u(0, i) = batch[i].x_p * net.x_scale;
        u(1, i) = batch[i].v_p * net.v_scale;
        u(2, i) = batch[i].x_m * net.x_scale;
        u(3, i) = batch[i].v_m * net.v_scale;
    }
    return u;
}

struct CombinedForward {
    Eigen::MatrixXd wx, bx, wv, bv; // subnet outputs (1xB, 2xB, 1xB, 2xB)
    Eigen::VectorXd x_f, v_f;
};

void combine(const FusionNetwork& net, std::span<const FusionSample> batch, CombinedForward& f) {
    const auto n = static_cast<Eigen::Index>(batch.size());
    f.x_f.resize(n);
    f.v_f.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double w_x = f.wx(0, i);
        f.x_f(i) = w_x * (batch[i].x_p - f.bx(0, i)) + (1.0 - w_x) * (batch[i].x_m - f.bx(1, i));
        double w_v = f.wv(0, i);
        f.v_f(i) = w_v * (batch[i].v_p - f.bv(0, i)) + (1.0 - w_v) * (batch[i].v_m - f.bv(1, i));
    }
}

} // namespace

Eigen::MatrixXd Subnet::infer(const Eigen::MatrixXd& in) const {
    Eigen::MatrixXd y1 = relu(bn_apply((w1 * in).colwise() + b1, rm1, rv1, g1, be1));
    Eigen::MatrixXd y2 = relu(bn_apply((w2 * y1).colwise() + b2, rm2, rv2, g2, be2));
    Eigen::MatrixXd z3 = (w3 * y2).colwise() + b3;
    return sigmoid_out ? sigmoid(z3) : z3;
}

FusionNetwork FusionNetwork::make(double r_max, double v_max, uint64_t seed) {
    Rng rng(seed);
    FusionNetwork net;
    net.weight_x = Subnet::make(kInput, kHidden, 1, true, rng);
    net.bias_x = Subnet::make(kInput, kHidden, 2, false, rng);
    net.weight_v = Subnet::make(kInput, kHidden, 1, true, rng);
    net.bias_v = Subnet::make(kInput, kHidden, 2, false, rng);
    net.x_scale = 1.0 / r_max;
    net.v_scale = 1.0 / v_max;
    return net;
}

FusionOutput fusion_forward(const FusionNetwork& net, double x_p, double v_p, double x_m,
                            double v_m) {
    Eigen::MatrixXd u(kInput, 1);
    u << x_p * net.x_scale, v_p * net.v_scale, x_m * net.x_scale, v_m * net.v_scale;
    double w_x = net.weight_x.infer(u)(0, 0);
    double w_v = net.weight_v.infer(u)(0, 0);
    Eigen::MatrixXd bx = net.bias_x.infer(u);
    Eigen::MatrixXd bv = net.bias_v.infer(u);
    FusionOutput out;
    out.w_x = w_x;
    out.w_v = w_v;
    out.b_xp = bx(0, 0);
    out.b_xm = bx(1, 0);
    out.b_vp = bv(0, 0);
    out.b_vm = bv(1, 0);
    out.x = w_x * (x_p - out.b_xp) + (1.0 - w_x) * (x_m - out.b_xm);
    out.v = w_v * (v_p - out.b_vp) + (1.0 - w_v) * (v_m - out.b_vm);
    return out;
}

double fusion_loss(const FusionNetwork& net, std::span<const FusionSample> batch) {
    if (batch.empty())
        throw RangeError("fusion_loss: empty batch");
    double acc = 0.0;
    for (const auto& s : batch) {
        FusionOutput o = fusion_forward(net, s.x_p, s.v_p, s.x_m, s.v_m);
        acc += (o.x - s.x_tar) * (o.x - s.x_tar) + (o.v - s.v_tar) * (o.v - s.v_tar);
    }
    return acc / batch.size();
}

SubnetGrads SubnetGrads::zeros_like(const Subnet& s) {
    SubnetGrads g;
    g.w1 = Eigen::MatrixXd::Zero(s.w1.rows(), s.w1.cols());
    g.w2 = Eigen::MatrixXd::Zero(s.w2.rows(), s.w2.cols());
    g.w3 = Eigen::MatrixXd::Zero(s.w3.rows(), s.w3.cols());
    g.b1 = Eigen::VectorXd::Zero(s.b1.size());
    g.b2 = Eigen::VectorXd::Zero(s.b2.size());
    g.b3 = Eigen::VectorXd::Zero(s.b3.size());
    g.g1 = Eigen::VectorXd::Zero(s.g1.size());
    g.g2 = Eigen::VectorXd::Zero(s.g2.size());
    g.be1 = Eigen::VectorXd::Zero(s.be1.size());
    g.be2 = Eigen::VectorXd::Zero(s.be2.size());
    return g;
}

namespace {

double train_forward_all(const FusionNetwork& net, std::span<const FusionSample> batch,
                         SubnetCache& cwx, SubnetCache& cbx, SubnetCache& cwv, SubnetCache& cbv,
                         CombinedForward& f) {
    Eigen::MatrixXd u = scaled_inputs(net, batch);
    f.wx = forward_train(net.weight_x, u, cwx);
    f.bx = forward_train(net.bias_x, u, cbx);
    f.wv = forward_train(net.weight_v, u, cwv);
    f.bv = forward_train(net.bias_v, u, cbv);
    combine(net, batch, f);
    double acc = 0.0;
    for (size_t i = 0; i < batch.size(); ++i) {
        double ex = f.x_f(i) - batch[i].x_tar;
        double ev = f.v_f(i) - batch[i].v_tar;
        acc += ex * ex + ev * ev;
    }
    return acc / batch.size();
}

} // namespace

double fusion_loss_train(const FusionNetwork& net, std::span<const FusionSample> batch) {
    SubnetCache cwx, cbx, cwv, cbv;
    CombinedForward f;
    return train_forward_all(net, batch, cwx, cbx, cwv, cbv, f);
}

FusionGrads fusion_backward(const FusionNetwork& net, std::span<const FusionSample> batch,
                            double* loss_out) {
    if (batch.empty())
        throw RangeError("fusion_backward: empty batch");
    SubnetCache cwx, cbx, cwv, cbv;
    CombinedForward f;
    double loss = train_forward_all(net, batch, cwx, cbx, cwv, cbv, f);
    if (loss_out)
        *loss_out = loss;

    const auto n = static_cast<Eigen::Index>(batch.size());
    Eigen::MatrixXd d_wx(1, n), d_wv(1, n), d_bx(2, n), d_bv(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = batch[i];
        double dxf = 2.0 * (f.x_f(i) - s.x_tar) / n;
        double dvf = 2.0 * (f.v_f(i) - s.v_tar) / n;
        double w_x = f.wx(0, i), w_v = f.wv(0, i);
        d_wx(0, i) = dxf * ((s.x_p - f.bx(0, i)) - (s.x_m - f.bx(1, i)));
        d_wv(0, i) = dvf * ((s.v_p - f.bv(0, i)) - (s.v_m - f.bv(1, i)));
        d_bx(0, i) = dxf * (-w_x);
        d_bx(1, i) = dxf * (-(1.0 - w_x));
        d_bv(0, i) = dvf * (-w_v);
        d_bv(1, i) = dvf * (-(1.0 - w_v));
    }

    FusionGrads g{SubnetGrads::zeros_like(net.weight_x), SubnetGrads::zeros_like(net.bias_x),
                  SubnetGrads::zeros_like(net.weight_v), SubnetGrads::zeros_like(net.bias_v)};
    backward_subnet(net.weight_x, cwx, d_wx, g.weight_x);
    backward_subnet(net.bias_x, cbx, d_bx, g.bias_x);
    backward_subnet(net.weight_v, cwv, d_wv, g.weight_v);
    backward_subnet(net.bias_v, cbv, d_bv, g.bias_v);
    return g;
}

// ---------------------------------------------------------------------------
// Training

namespace {

template <typename F> void for_each_trainable(Subnet& s, SubnetGrads& g, F&& f) {
    f(s.w1, g.w1);
    f(s.b1, g.b1);
    f(s.g1, g.g1);
    f(s.be1, g.be1);
    f(s.w2, g.w2);
    f(s.b2, g.b2);
    f(s.g2, g.g2);
    f(s.be2, g.be2);
    f(s.w3, g.w3);
    f(s.b3, g.b3);
}

template <typename F> void for_each_subnet_pair(FusionNetwork& n, FusionGrads& g, F&& f) {
    for_each_trainable(n.weight_x, g.weight_x, f);
    for_each_trainable(n.bias_x, g.bias_x, f);
    for_each_trainable(n.weight_v, g.weight_v, f);
    for_each_trainable(n.bias_v, g.bias_v, f);
}

void update_running_stats(Subnet& s, const SubnetCache& c, double momentum) {
    s.rm1 = momentum * s.rm1 + (1.0 - momentum) * c.mu1;
    s.rv1 = momentum * s.rv1 + (1.0 - momentum) * c.var1;
    s.rm2 = momentum * s.rm2 + (1.0 - momentum) * c.mu2;
    s.rv2 = momentum * s.rv2 + (1.0 - momentum) * c.var2;
}

// Recomputes BN running statistics as exact population moments over the
// whole training set, layer by layer with earlier layers already frozen.
void freeze_bn(Subnet& s, const Eigen::MatrixXd& in) {
    Eigen::MatrixXd z1 = (s.w1 * in).colwise() + s.b1;
    Eigen::VectorXd mu, var;
    batch_stats(z1, mu, var);
    s.rm1 = mu;
    s.rv1 = var;
    Eigen::MatrixXd a1 = relu(bn_apply(z1, s.rm1, s.rv1, s.g1, s.be1));
    Eigen::MatrixXd z2 = (s.w2 * a1).colwise() + s.b2;
    batch_stats(z2, mu, var);
    s.rm2 = mu;
    s.rv2 = var;
}

} // namespace

FusionNetwork train_fusion(std::span<const FusionSample> dataset, const FusionTrainOptions& opt,
                           FusionTrainCurve* curve) {
    if (dataset.size() < 16)
        throw RangeError("train_fusion: dataset too small");
    Rng rng(opt.seed);

    std::vector<size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(static_cast<int>(i + 1))]);

    size_t n_val = static_cast<size_t>(dataset.size() * opt.val_fraction);
    std::vector<FusionSample> val, train;
    for (size_t i = 0; i < order.size(); ++i)
        (i < n_val ? val : train).push_back(dataset[order[i]]);

    FusionNetwork net = FusionNetwork::make(opt.r_max, opt.v_max, rng.next_u64());

    double lr = opt.learning_rate;
    double initial_loss = fusion_loss_train(net, train);
    double best_val = std::numeric_limits<double>::infinity();
    // Plateau detection runs on a smoothed validation loss; the raw
    // per-epoch value is too noisy under mini-batch updates.
    double ema_val = std::numeric_limits<double>::infinity();
    double best_ema = std::numeric_limits<double>::infinity();
    FusionNetwork best = net;
    int stale = 0;

    std::vector<size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::vector<FusionSample> batch;

    for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
        for (size_t i = idx.size() - 1; i > 0; --i)
            std::swap(idx[i], idx[rng.uniform_int(static_cast<int>(i + 1))]);

        double epoch_loss = 0.0;
        int batches = 0;
        for (size_t start = 0; start < idx.size(); start += opt.batch_size) {
            size_t stop = std::min(idx.size(), start + opt.batch_size);
            if (stop - start < 2)
                break; // batch statistics need at least two samples
            batch.clear();
            for (size_t j = start; j < stop; ++j)
                batch.push_back(train[idx[j]]);

            SubnetCache cwx, cbx, cwv, cbv;
            CombinedForward f;
            double loss = train_forward_all(net, batch, cwx, cbx, cwv, cbv, f);
            epoch_loss += loss;
            ++batches;

            const auto n = static_cast<Eigen::Index>(batch.size());
            Eigen::MatrixXd d_wx(1, n), d_wv(1, n), d_bx(2, n), d_bv(2, n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto& s = batch[i];
                double dxf = 2.0 * (f.x_f(i) - s.x_tar) / n;
                double dvf = 2.0 * (f.v_f(i) - s.v_tar) / n;
                double w_x = f.wx(0, i), w_v = f.wv(0, i);
                d_wx(0, i) = dxf * ((s.x_p - f.bx(0, i)) - (s.x_m - f.bx(1, i)));
                d_wv(0, i) = dvf * ((s.v_p - f.bv(0, i)) - (s.v_m - f.bv(1, i)));
                d_bx(0, i) = dxf * (-w_x);
                d_bx(1, i) = dxf * (-(1.0 - w_x));
                d_bv(0, i) = dvf * (-w_v);
                d_bv(1, i) = dvf * (-(1.0 - w_v));
            }
            FusionGrads g{SubnetGrads::zeros_like(net.weight_x), SubnetGrads::zeros_like(net.bias_x),
                          SubnetGrads::zeros_like(net.weight_v), SubnetGrads::zeros_like(net.bias_v)};
            backward_subnet(net.weight_x, cwx, d_wx, g.weight_x);
            backward_subnet(net.bias_x, cbx, d_bx, g.bias_x);
            backward_subnet(net.weight_v, cwv, d_wv, g.weight_v);
            backward_subnet(net.bias_v, cbv, d_bv, g.bias_v);

            double norm_sq = 0.0;
            for_each_subnet_pair(net, g, [&](auto&, auto& gm) { norm_sq += gm.squaredNorm(); });
            double scale = lr;
            if (norm_sq > opt.clip_norm * opt.clip_norm)
                scale = lr * opt.clip_norm / std::sqrt(norm_sq);
            for_each_subnet_pair(net, g, [&](auto& pm, auto& gm) { pm -= scale * gm; });

            update_running_stats(net.weight_x, cwx, opt.bn_momentum);
            update_running_stats(net.bias_x, cbx, opt.bn_momentum);
            update_running_stats(net.weight_v, cwv, opt.bn_momentum);
            update_running_stats(net.bias_v, cbv, opt.bn_momentum);
        }
        epoch_loss /= std::max(1, batches);
        if (!std::isfinite(epoch_loss) || epoch_loss > 1e3 * initial_loss)
            throw DivergedError("train_fusion: loss diverged");

        double vl = val.empty() ? epoch_loss : fusion_loss(net, val);
        if (curve) {
            curve->train_loss.push_back(epoch_loss);
            curve->val_loss.push_back(vl);
        }
        if (vl < best_val) {
            best_val = vl;
            best = net;
        }
        ema_val = std::isfinite(ema_val) ? 0.7 * ema_val + 0.3 * vl : vl;
        if (ema_val < best_ema * (1.0 - 1e-6)) {
            best_ema = ema_val;
            stale = 0;
        } else {
            ++stale;
            if (stale % opt.decay_patience == 0)
                lr *= 0.5;
            if (stale >= opt.patience)
                break;
        }
    }

    // Freeze BN statistics of the selected snapshot on the training set.
    Eigen::MatrixXd u = scaled_inputs(best, train);
    freeze_bn(best.weight_x, u);
    freeze_bn(best.bias_x, u);
    freeze_bn(best.weight_v, u);
    freeze_bn(best.bias_v, u);
    return best;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void write_array(std::ofstream& out, const double* data, size_t count) {
    uint32_t n = static_cast<uint32_t>(count);
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(data), count * sizeof(double));
}

std::vector<double> read_array(std::ifstream& in) {
    uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), n * sizeof(double));
    if (!in)
        throw std::runtime_error("fusion model file truncated");
    return v;
}

template <typename F> void for_each_array_const(const Subnet& s, F&& f) {
    f(s.w1);
    f(s.b1);
    f(s.g1);
    f(s.be1);
    f(s.rm1);
    f(s.rv1);
    f(s.w2);
    f(s.b2);
    f(s.g2);
    f(s.be2);
    f(s.rm2);
    f(s.rv2);
    f(s.w3);
    f(s.b3);
}

template <typename F> void for_each_array(Subnet& s, F&& f) {
    f(s.w1);
    f(s.b1);
    f(s.g1);
    f(s.be1);
    f(s.rm1);
    f(s.rv1);
    f(s.w2);
    f(s.b2);
    f(s.g2);
    f(s.be2);
    f(s.rm2);
    f(s.rv2);
    f(s.w3);
    f(s.b3);
}

void write_subnet(std::ofstream& out, const Subnet& s) {
    for_each_array_const(s, [&](const auto& m) {
        // Row-major on disk for matrices.
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
        write_array(out, rm.data(), static_cast<size_t>(rm.size()));
    });
}

void read_subnet(std::ifstream& in, Subnet& s) {
    for_each_array(s, [&](auto& m) {
        auto v = read_array(in);
        if (static_cast<Eigen::Index>(v.size()) != m.size())
            throw std::runtime_error("fusion model file: array size mismatch");
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(m.rows(),
                                                                                  m.cols());
        std::copy(v.begin(), v.end(), rm.data());
        m = rm;
    });
}

constexpr char kMagic[5] = {'F', 'U', 'S', 'N', '1'};

} // namespace

void save_fusion(const FusionNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    double header[2] = {net.x_scale, net.v_scale};
    write_array(out, header, 2);
    write_subnet(out, net.weight_x);
    write_subnet(out, net.bias_x);
    write_subnet(out, net.weight_v);
    write_subnet(out, net.bias_v);
}

FusionNetwork load_fusion(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open: " + path);
    char magic[5];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a fusion model file: " + path);
    auto header = read_array(in);
    if (header.size() != 2)
        throw std::runtime_error("fusion model file: bad header");
    Rng rng(0);
    FusionNetwork net;
    net.weight_x = Subnet::make(kInput, kHidden, 1, true, rng);
    net.bias_x = Subnet::make(kInput, kHidden, 2, false, rng);
    net.weight_v = Subnet::make(kInput, kHidden, 1, true, rng);
    net.bias_v = Subnet::make(kInput, kHidden, 2, false, rng);
    net.x_scale = header[0];
    net.v_scale = header[1];
    read_subnet(in, net.weight_x);
    read_subnet(in, net.bias_x);
    read_subnet(in, net.weight_v);
    read_subnet(in, net.bias_v);
    return net;
}

void write_fusion_dataset_csv(const std::string& path, std::span<const FusionSample> samples) {
    CsvWriter w(path, "x_p,v_p,x_m,v_m,x_tar,v_tar");
    for (const auto& s : samples)
        w.row({fmt_num(s.x_p), fmt_num(s.v_p), fmt_num(s.x_m), fmt_num(s.v_m), fmt_num(s.x_tar),
               fmt_num(s.v_tar)});
}

std::vector<FusionSample> read_fusion_dataset_csv(const std::string& path) {
    auto rows = read_numeric_csv(path, "x_p,v_p,x_m,v_m,x_tar,v_tar");
    std::vector<FusionSample> out;
    out.reserve(rows.size());
    for (auto& r : rows)
        out.push_back({r.at(0), r.at(1), r.at(2), r.at(3), r.at(4), r.at(5)});
    return out;
}

std::vector<double*> trainable_entries(FusionNetwork& net) {
    std::vector<double*> ptrs;
    FusionGrads dummy{SubnetGrads::zeros_like(net.weight_x), SubnetGrads::zeros_like(net.bias_x),
                      SubnetGrads::zeros_like(net.weight_v), SubnetGrads::zeros_like(net.bias_v)};
    for_each_subnet_pair(net, dummy, [&](auto& pm, auto&) {
        for (Eigen::Index i = 0; i < pm.size(); ++i)
            ptrs.push_back(pm.data() + i);
    });
    return ptrs;
}

std::vector<double*> gradient_entries(FusionGrads& grads) {
    std::vector<double*> ptrs;
    auto collect = [&](SubnetGrads& g) {
        // Keep the exact order used by for_each_trainable.
        auto push = [&](auto& m) {
            for (Eigen::Index i = 0; i < m.size(); ++i)
                ptrs.push_back(m.data() + i);
        };
        push(g.w1);
        push(g.b1);
        push(g.g1);
        push(g.be1);
        push(g.w2);
        push(g.b2);
        push(g.g2);
        push(g.be2);
        push(g.w3);
        push(g.b3);
    };
    collect(grads.weight_x);
    collect(grads.bias_x);
    collect(grads.weight_v);
    collect(grads.bias_v);
    return ptrs;
}

} // namespace beamcast
