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

#include <catch2/catch_amalgamated.hpp>

#include "beamcast/fusion.hpp"

using namespace beamcast;

namespace {

// Reference forward pass written independently with plain loops; checks the
// production (Eigen expression) path.
std::vector<double> reference_subnet_infer(const Subnet& s, const std::array<double, 4>& in) {
    auto dense = [](const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                    const std::vector<double>& x) {
        std::vector<double> out(w.rows(), 0.0);
        for (int r = 0; r < w.rows(); ++r) {
            double acc = b(r);
            for (int c = 0; c < w.cols(); ++c)
                acc += w(r, c) * x[c];
            out[r] = acc;
        }
        return out;
    };
    auto bn = [](const Eigen::VectorXd& g, const Eigen::VectorXd& be, const Eigen::VectorXd& rm,
                 const Eigen::VectorXd& rv, std::vector<double>& x) {
        for (size_t i = 0; i < x.size(); ++i)
            x[i] = g(i) * (x[i] - rm(i)) / std::sqrt(rv(i) + Subnet::kBnEps) + be(i);
    };
    auto relu = [](std::vector<double>& x) {
        for (auto& v : x)
            v = std::max(v, 0.0);
    };
    std::vector<double> h(in.begin(), in.end());
    h = dense(s.w1, s.b1, h);
    bn(s.g1, s.be1, s.rm1, s.rv1, h);
    relu(h);
    h = dense(s.w2, s.b2, h);
    bn(s.g2, s.be2, s.rm2, s.rv2, h);
    relu(h);
    h = dense(s.w3, s.b3, h);
    if (s.sigmoid_out)
        for (auto& v : h)
            v = 1.0 / (1.0 + std::exp(-v));
    return h;
}

FusionNetwork random_net(uint64_t seed) {
    FusionNetwork net = FusionNetwork::make(100.0, 200.0, seed);
    // Perturb BN stats away from the identity so inference is non-trivial.
    Rng rng(seed + 1);
    for (Subnet* s : {&net.weight_x, &net.bias_x, &net.weight_v, &net.bias_v}) {
        for (int i = 0; i < s->rm1.size(); ++i) {
            s->rm1(i) = rng.normal(0.0, 0.2);
            s->rv1(i) = 0.5 + rng.uniform();
            s->rm2(i) = rng.normal(0.0, 0.2);
            s->rv2(i) = 0.5 + rng.uniform();
        }
    }
    return net;
}

// Forces the weight subnet to a constant w and zeroes the bias subnets.
void surgery(FusionNetwork& net, double w_logit) {
    for (Subnet* s : {&net.weight_x, &net.weight_v}) {
        s->w3.setZero();
        s->b3.setConstant(w_logit);
    }
    for (Subnet* s : {&net.bias_x, &net.bias_v}) {
        s->w3.setZero();
        s->b3.setZero();
    }
}

} // namespace

TEST_CASE("fusion forward matches the reference implementation") {
    FusionNetwork net = random_net(41);
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        double xp = rng.uniform(-100.0, 100.0), vp = rng.uniform(-80.0, 80.0);
        double xm = rng.uniform(-100.0, 100.0), vm = rng.uniform(-80.0, 80.0);
        FusionOutput out = fusion_forward(net, xp, vp, xm, vm);

        std::array<double, 4> u = {xp * net.x_scale, vp * net.v_scale, xm * net.x_scale,
                                   vm * net.v_scale};
        double w_x = reference_subnet_infer(net.weight_x, u)[0];
        auto bx = reference_subnet_infer(net.bias_x, u);
        double w_v = reference_subnet_infer(net.weight_v, u)[0];
        auto bv = reference_subnet_infer(net.bias_v, u);
        double x_ref = w_x * (xp - bx[0] / net.x_scale) + (1.0 - w_x) * (xm - bx[1] / net.x_scale);
        double v_ref = w_v * (vp - bv[0] / net.v_scale) + (1.0 - w_v) * (vm - bv[1] / net.v_scale);

        CHECK_THAT(out.x, Catch::Matchers::WithinAbs(x_ref, 1e-10));
        CHECK_THAT(out.v, Catch::Matchers::WithinAbs(v_ref, 1e-10));
        CHECK(out.w_x > 0.0);
        CHECK(out.w_x < 1.0);
    }
}

TEST_CASE("convex-combination endpoints by parameter surgery") {
    FusionNetwork hard_p = random_net(43);
    surgery(hard_p, 40.0); // sigmoid(40) ~ 1
    FusionOutput op = fusion_forward(hard_p, 12.0, 70.0, -55.0, -60.0);
    CHECK_THAT(op.x, Catch::Matchers::WithinAbs(12.0, 1e-9));
    CHECK_THAT(op.v, Catch::Matchers::WithinAbs(70.0, 1e-9));

    FusionNetwork hard_m = random_net(43);
    surgery(hard_m, -40.0); // sigmoid(-40) ~ 0
    FusionOutput om = fusion_forward(hard_m, 12.0, 70.0, -55.0, -60.0);
    CHECK_THAT(om.x, Catch::Matchers::WithinAbs(-55.0, 1e-9));
    CHECK_THAT(om.v, Catch::Matchers::WithinAbs(-60.0, 1e-9));
}

TEST_CASE("zero-bias fusion stays between its inputs") {
    FusionNetwork net = random_net(47);
    for (Subnet* s : {&net.bias_x, &net.bias_v}) {
        s->w3.setZero();
        s->b3.setZero();
    }
    Rng rng(48);
    for (int i = 0; i < 50; ++i) {
        double xp = rng.uniform(-100.0, 100.0), xm = rng.uniform(-100.0, 100.0);
        double vp = rng.uniform(-80.0, 80.0), vm = rng.uniform(-80.0, 80.0);
        FusionOutput o = fusion_forward(net, xp, vp, xm, vm);
        CHECK(o.x >= std::min(xp, xm) - 1e-9);
        CHECK(o.x <= std::max(xp, xm) + 1e-9);
        CHECK(o.v >= std::min(vp, vm) - 1e-9);
        CHECK(o.v <= std::max(vp, vm) + 1e-9);
    }
}

TEST_CASE("fusion loss arithmetic") {
    FusionNetwork net = random_net(51);
    surgery(net, 40.0); // fused = pilot input exactly

    std::vector<FusionSample> perfect = {{10.0, 70.0, -3.0, 2.0, 10.0, 70.0}};
    CHECK_THAT(fusion_loss(net, perfect), Catch::Matchers::WithinAbs(0.0, 1e-12));

    std::vector<FusionSample> off_x = {{12.0, 70.0, 0.0, 0.0, 10.0, 70.0}};
    CHECK_THAT(fusion_loss(net, off_x), Catch::Matchers::WithinAbs(4.0, 1e-9));

    std::vector<FusionSample> two = {{11.0, 70.0, 0.0, 0.0, 10.0, 70.0},
                                     {10.0, 73.0, 0.0, 0.0, 10.0, 70.0}};
    CHECK_THAT(fusion_loss(net, two), Catch::Matchers::WithinAbs(5.0, 1e-9));
}

TEST_CASE("inference is deterministic bit for bit") {
    FusionNetwork net = random_net(53);
    FusionOutput a = fusion_forward(net, 31.4, 70.2, 29.8, 69.5);
    FusionOutput b = fusion_forward(net, 31.4, 70.2, 29.8, 69.5);
    CHECK(a.x == b.x);
    CHECK(a.v == b.v);
    CHECK(a.w_x == b.w_x);
    CHECK(a.w_v == b.w_v);
}

TEST_CASE("backward gradients pass a central-difference check") {
    FusionNetwork net = random_net(57);
    Rng rng(58);
    std::vector<FusionSample> batch;
    for (int i = 0; i < 16; ++i)
        batch.push_back({rng.uniform(-90.0, 90.0), rng.uniform(-75.0, 75.0),
                         rng.uniform(-90.0, 90.0), rng.uniform(-75.0, 75.0),
                         rng.uniform(-90.0, 90.0), rng.uniform(-75.0, 75.0)});

    FusionGrads grads = fusion_backward(net, batch);
    auto params = trainable_entries(net);
    auto gptrs = gradient_entries(grads);
    REQUIRE(params.size() == gptrs.size());

    // Relative error with an absolute floor: zero-gradient parameters (dead
    // ReLU paths) would otherwise compare central-difference roundoff noise
    // against exact zeros.
    double gmax = 0.0;
    for (double* g : gptrs)
        gmax = std::max(gmax, std::abs(*g));
    const double floor = 1e-4 * (1.0 + gmax);

    double worst = 0.0;
    const double h = 1e-6;
    for (size_t i = 0; i < params.size(); ++i) {
        double saved = *params[i];
        *params[i] = saved + h;
        double up = fusion_loss_train(net, batch);
        *params[i] = saved - h;
        double down = fusion_loss_train(net, batch);
        *params[i] = saved;
        double fd = (up - down) / (2.0 * h);
        double denom = std::max({std::abs(fd), std::abs(*gptrs[i]), floor});
        worst = std::max(worst, std::abs(fd - *gptrs[i]) / denom);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("dead ReLU paths carry zero gradient") {
    FusionNetwork net = random_net(61);
    // Kill every first-layer unit of the x-weight subnet: BN shift very
    // negative drives all activations to the flat side.
    net.weight_x.be1.setConstant(-100.0);
    std::vector<FusionSample> batch = {{10.0, 70.0, -3.0, 2.0, 4.0, 60.0},
                                       {-20.0, 65.0, -24.0, 66.0, -22.0, 65.0}};
    FusionGrads grads = fusion_backward(net, batch);
    CHECK(grads.weight_x.w1.norm() == 0.0);
    CHECK(grads.weight_x.b1.norm() == 0.0);
    // The downstream layer still learns through its own bias path.
    CHECK(grads.weight_x.b3.norm() > 0.0);
}

TEST_CASE("zero-residual samples do not pull the gradient") {
    FusionNetwork net = random_net(63);
    surgery(net, 40.0); // fused = pilot exactly, bias nets zeroed
    std::vector<FusionSample> batch = {{10.0, 70.0, 99.0, -99.0, 10.0, 70.0}};
    FusionGrads grads = fusion_backward(net, batch);
    // Perfect sample: loss gradient vanishes everywhere.
    auto gptrs = gradient_entries(grads);
    double norm = 0.0;
    for (double* g : gptrs)
        norm += *g * *g;
    CHECK(norm == 0.0);
}

TEST_CASE("training learns to trust the informative estimator") {
    // Pilot input equals the target; measurement input is pure noise.
    Rng rng(67);
    std::vector<FusionSample> data;
    for (int i = 0; i < 4000; ++i) {
        double x = rng.uniform(-95.0, 95.0);
        double v = 71.0 + rng.normal(0.0, 1.0);
        data.push_back({x, v, rng.uniform(-95.0, 95.0), 71.0 + rng.normal(0.0, 15.0), x, v});
    }
    FusionTrainOptions opt;
    opt.seed = 68;
    FusionNetwork net = train_fusion(data, opt);

    double w_acc = 0.0;
    int n = 0;
    for (int i = 0; i < 200; ++i) {
        const auto& s = data[i];
        FusionOutput o = fusion_forward(net, s.x_p, s.v_p, s.x_m, s.v_m);
        w_acc += o.w_x;
        ++n;
    }
    CHECK(w_acc / n > 0.9);
    CHECK(fusion_loss(net, std::span<const FusionSample>(data).subspan(0, 500)) < 4.0);
}

TEST_CASE("agreeing estimators pass through nearly unchanged") {
    Rng rng(71);
    std::vector<FusionSample> data;
    for (int i = 0; i < 3000; ++i) {
        double x = rng.uniform(-95.0, 95.0);
        double v = 71.0 + rng.normal(0.0, 1.0);
        double nx = rng.normal(0.0, 0.3), nv = rng.normal(0.0, 0.1);
        data.push_back({x + nx, v + nv, x + nx, v + nv, x, v});
    }
    FusionTrainOptions opt;
    opt.seed = 72;
    FusionNetwork net = train_fusion(data, opt);
    for (int i = 0; i < 100; ++i) {
        const auto& s = data[i];
        FusionOutput o = fusion_forward(net, s.x_p, s.v_p, s.x_m, s.v_m);
        CHECK(std::abs(o.x - s.x_p) <= std::max(1.0, 0.01 * std::abs(s.x_p)));
        CHECK(std::abs(o.v - s.v_p) <= std::max(1.0, 0.01 * std::abs(s.v_p)));
    }
}

TEST_CASE("BN running statistics reproduce the training batch after freezing") {
    Rng rng(73);
    std::vector<FusionSample> data;
    for (int i = 0; i < 2000; ++i) {
        double x = rng.uniform(-95.0, 95.0);
        double v = 71.0 + rng.normal(0.0, 1.0);
        data.push_back({x + rng.normal(0.0, 2.0), v, x + rng.normal(0.0, 1.0), v, x, v});
    }
    FusionTrainOptions opt;
    opt.seed = 74;
    opt.max_epochs = 40;
    opt.val_fraction = 0.2;
    FusionNetwork net = train_fusion(data, opt);

    // Training split reconstruction mirrors train_fusion's shuffle.
    double infer_loss = fusion_loss(net, data);
    double train_mode = fusion_loss_train(net, data);
    CHECK_THAT(train_mode, Catch::Matchers::WithinRel(infer_loss, 2e-2));
}

TEST_CASE("training throws on divergence") {
    Rng rng(79);
    std::vector<FusionSample> data;
    for (int i = 0; i < 512; ++i) {
        double x = rng.uniform(-95.0, 95.0);
        data.push_back({x + 20.0, 70.0, x - 20.0, 70.0, x, 70.0});
    }
    FusionTrainOptions opt;
    opt.seed = 80;
    opt.learning_rate = 1e9; // force blow-up
    opt.clip_norm = 1e12;
    opt.max_epochs = 50;
    CHECK_THROWS_AS(train_fusion(data, opt), DivergedError);
}

TEST_CASE("fusion model file round trip") {
    FusionNetwork net = random_net(83);
    std::string path = "/tmp/beamcast_fusion_test.bin";
    save_fusion(net, path);
    FusionNetwork back = load_fusion(path);
    CHECK(back.x_scale == net.x_scale);
    CHECK(back.v_scale == net.v_scale);
    Rng rng(84);
    for (int i = 0; i < 10; ++i) {
        double xp = rng.uniform(-90.0, 90.0), vp = rng.uniform(-80.0, 80.0);
        double xm = rng.uniform(-90.0, 90.0), vm = rng.uniform(-80.0, 80.0);
        FusionOutput a = fusion_forward(net, xp, vp, xm, vm);
        FusionOutput b = fusion_forward(back, xp, vp, xm, vm);
        CHECK(a.x == b.x);
        CHECK(a.v == b.v);
    }
}

TEST_CASE("fusion dataset csv round trip") {
    std::vector<FusionSample> samples = {{1.5, 70.0, 1.25, 69.5, 1.4, 69.9},
                                         {-20.0, -71.0, -21.0, -70.0, -20.5, -70.5}};
    std::string path = "/tmp/beamcast_fusion_dataset_test.csv";
    write_fusion_dataset_csv(path, samples);
    auto back = read_fusion_dataset_csv(path);
    REQUIRE(back.size() == samples.size());
    CHECK(back[1].x_m == samples[1].x_m);
    CHECK(back[0].v_tar == samples[0].v_tar);
}
