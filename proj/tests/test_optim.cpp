// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "emo/convlab.hpp"
#include "emo/memstore.hpp"
#include "emo/optim.hpp"
#include "emo/rng.hpp"

using namespace emo;
using namespace emo::optim;

namespace {

GradSet g1(double v) {
    GradSet g;
    g.add("p", Tensor::vector({v}));
    return g;
}

GradSet g2(double a, double b) {
    GradSet g;
    g.add("p", Tensor::vector({a, b}));
    return g;
}

} // namespace

TEST_CASE("aggr_mean examples") {
    GradSet g = g1(2), m = g1(4);
    CHECK(aggr_mean(g, {&m}).at("p").data[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(aggr_mean(g, {}).at("p").data[0] == 2.0);

    GradSet gg = g2(1, 1), v1 = g2(3, -1), v2 = g2(5, 3);
    GradSet out = aggr_mean(gg, {&v1, &v2});
    CHECK(out.at("p").data[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(out.at("p").data[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("aggr_sum examples") {
    GradSet g = g1(2), v1 = g1(4), v2 = g1(6);
    CHECK(aggr_sum(g, {&v1, &v2}).at("p").data[0] == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(aggr_sum(g, {}).at("p").data[0] == 2.0);
    GradSet z = g1(0), x = g1(-3.25);
    CHECK(aggr_sum(z, {&x}).at("p").data[0] == doctest::Approx(-3.25).epsilon(1e-15));
}

TEST_CASE("aggregators reject shape mismatches") {
    GradSet g = g1(1), bad = g2(1, 2);
    CHECK_THROWS_AS(aggr_mean(g, {&bad}), std::invalid_argument);
    CHECK_THROWS_AS(aggr_sum(g, {&bad}), std::invalid_argument);
}

TEST_CASE("emo_step arithmetic and reduction to SGD") {
    ParamSet theta;
    theta.add("p", Tensor::vector({5.0}));
    GradSet g = g1(2), m = g1(4);
    InnerOptConfig cfg;
    cfg.alpha = 0.1;
    // Aggr result 3 -> 5 - 0.3
    ParamSet out = emo_step(theta, g, {&m}, cfg);
    CHECK(out.at("p").data[0] == doctest::Approx(4.7).epsilon(1e-15));

    // Empty memory: identical to a plain SGD step, bit for bit.
    ParamSet a = emo_step(theta, g, {}, cfg);
    ParamSet b = sgd_step(theta, g, cfg.alpha);
    CHECK(max_abs_diff(a, b) == 0.0);
}

TEST_CASE("emo_step reports the layer with a non-finite gradient") {
    ParamSet theta;
    theta.add("ok", Tensor::vector({1.0}));
    theta.add("broken", Tensor::vector({1.0}));
    GradSet g;
    g.add("ok", Tensor::vector({1.0}));
    g.add("broken", Tensor::vector({std::numeric_limits<double>::infinity()}));
    InnerOptConfig cfg;
    CHECK_THROWS_WITH_AS(emo_step(theta, g, {}, cfg), doctest::Contains("broken"),
                         std::runtime_error);
}

TEST_CASE("aggr_mean scales linearly") {
    RngStream rng(1);
    for (int rep = 0; rep < 10; ++rep) {
        GradSet g = g2(rng.gauss(0, 1), rng.gauss(0, 1));
        GradSet v1 = g2(rng.gauss(0, 1), rng.gauss(0, 1));
        GradSet v2 = g2(rng.gauss(0, 1), rng.gauss(0, 1));
        double c = rng.uniform(-2, 2);
        GradSet lhs = aggr_mean(scale_params(g, c), {});
        GradSet base = aggr_mean(g, {&v1, &v2});
        GradSet gs = scale_params(g, c), v1s = scale_params(v1, c), v2s = scale_params(v2, c);
        GradSet scaled = aggr_mean(gs, {&v1s, &v2s});
        for (size_t i = 0; i < 2; ++i)
            CHECK(scaled.at("p").data[i] ==
                  doctest::Approx(c * base.at("p").data[i]).epsilon(1e-12));
        (void)lhs;
    }
}

TEST_CASE("mean and sum are permutation invariant in V with fixed order") {
    GradSet g = g2(0.5, -0.25), a = g2(1, 2), b = g2(-3, 4), c = g2(0.125, 7);
    GradSet m1 = aggr_mean(g, {&a, &b, &c});
    GradSet m2 = aggr_mean(g, {&a, &b, &c});
    CHECK(max_abs_diff(m1, m2) == 0.0); // fixed order is reproducible bit-exactly
    GradSet p = aggr_mean(g, {&c, &a, &b});
    for (size_t i = 0; i < 2; ++i)
        CHECK(p.at("p").data[i] == doctest::Approx(m1.at("p").data[i]).epsilon(1e-13));
}

TEST_CASE("sgd, momentum, adam steps") {
    ParamSet theta;
    theta.add("p", Tensor::vector({1.0}));
    GradSet g = g1(1.0);

    CHECK(sgd_step(theta, g, 0.1).at("p").data[0] == doctest::Approx(0.9).epsilon(1e-15));

    OptState ms;
    ParamSet m1 = momentum_step(theta, g, ms, 0.1, 0.9);
    ParamSet s1 = sgd_step(theta, g, 0.1);
    CHECK(max_abs_diff(m1, s1) == 0.0); // first step: buffer v = g
    CHECK(ms.momentum.at("p").data[0] == 1.0);

    // Adam first step: theta - alpha * g / (|g| + eps') after bias correction.
    for (double c : {0.5, -2.0, 3.25}) {
        OptState as;
        GradSet gc = g1(c);
        ParamSet a1 = adam_step(theta, gc, as, 0.001, 0.9, 0.999, 1e-8);
        double expect = 1.0 - 0.001 * c / (std::abs(c) + 1e-8);
        CHECK(a1.at("p").data[0] == doctest::Approx(expect).epsilon(1e-12));
    }

    GradSet inf = g1(std::numeric_limits<double>::quiet_NaN());
    OptState st;
    CHECK_THROWS_AS(sgd_step(theta, inf, 0.1), std::runtime_error);
    CHECK_THROWS_AS(momentum_step(theta, inf, st, 0.1, 0.9), std::runtime_error);
    CHECK_THROWS_AS(adam_step(theta, inf, st, 0.1, 0.9, 0.999, 1e-8), std::runtime_error);
}

TEST_CASE("config validation") {
    InnerOptConfig cfg;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    InnerOptConfig cfg2;
    cfg2.aggregator.kind = AggregatorKind::Attention;
    CHECK_THROWS_AS(cfg2.validate(), std::invalid_argument);
}

// The multi-step bridge: FIFO store of capacity S-1, retrieve-all, Mean
// aggregation, writing each step's gradient, must reproduce the direct
// linear multi-step recursion with uniform weights 1/S.
TEST_CASE("EMO pipeline equals the multi-step recursion") {
    RngStream master(77);
    for (int rep = 0; rep < 4; ++rep) {
        size_t S = 2 + master.index(3);
        size_t d = 1 + master.index(3);
        double alpha = 0.02 + 0.02 * master.uniform01();

        taskgen::QuadraticConfig qc{.dim = d, .mu = 1.0, .lipschitz = 4.0, .sigma = 0.3};
        RngStream trng = master.split(rep);
        taskgen::QuadraticTask task = sample_quadratic_task(qc, trng);
        Tensor theta1 = Tensor::zeros({d});
        for (double& v : theta1.data) v = trng.gauss(0.0, 1.0);

        // Direct recursion with matched noise stream.
        convlab::MultiStepSpec spec = convlab::MultiStepSpec::uniform(S, alpha, qc.sigma);
        RngStream noise_a(1000 + rep);
        convlab::Trajectory traj =
            convlab::run_multistep_recursion(task, spec, theta1, 60, noise_a);

        // EMO pipeline: every step writes g_t, retrieves everything, means.
        LayerSchema schema{{"theta", {d}}};
        memstore::MemoryStore store(S - 1, memstore::ControllerSpec{memstore::ControllerKind::FIFO},
                                    d, schema);
        RngStream noise_b(1000 + rep);
        ParamSet theta;
        theta.add("theta", theta1);
        InnerOptConfig cfg;
        cfg.alpha = alpha;
        double worst = 0.0;
        for (size_t t = 0; t < 60; ++t) {
            Tensor gt = task.exact_grad(theta.at("theta"));
            for (double& v : gt.data) v += noise_b.gauss(0.0, qc.sigma);
            GradSet g;
            g.add("theta", gt);
            std::vector<memstore::MemoryStore::Retrieved> got;
            if (store.size() > 0) got = store.retrieve(gt, store.size());
            std::sort(got.begin(), got.end(),
                      [](const auto& a, const auto& b) { return a.slot_index < b.slot_index; });
            std::vector<const GradSet*> v;
            for (auto& r : got) v.push_back(r.values);
            theta = emo_step(theta, g, v, cfg);
            store.write(gt, g);
            for (size_t i = 0; i < d; ++i)
                worst = std::max(worst, std::abs(theta.at("theta").data[i] -
                                                 traj.iterates[t + 1].data[i]));
        }
        CHECK(worst < 1e-12);
    }
}
