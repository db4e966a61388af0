// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "emo/graph.hpp"
#include "emo/models.hpp"
#include "emo/params.hpp"
#include "emo/rng.hpp"
#include "emo/spectral.hpp"

using namespace emo;

TEST_CASE("grad of x^2 at x=3 is 6") {
    Graph g;
    Value x = g.param(Tensor::vector({3.0}));
    Value loss = g.reduce_sum(g.mul(x, x));
    auto grads = g.grad(loss, {x});
    CHECK(grads[0].data[0] == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("grad of sum(W v) w.r.t. v with identity W") {
    Graph g;
    Value w = g.input(Tensor::matrix(2, 2, {1, 0, 0, 1}));
    Value v = g.param(Tensor::matrix(2, 1, {1, 2}));
    Value loss = g.reduce_sum(g.matmul(w, v));
    auto grads = g.grad(loss, {v});
    CHECK(grads[0].data[0] == 1.0);
    CHECK(grads[0].data[1] == 1.0);
}

namespace {

// Scalar loss of a 2-layer tanh MLP on a fixed batch, evaluated from plain
// parameter values. Kept independent of the graph so it can serve as the
// finite-difference target.
double mlp_loss(const ParamSet& p, const Tensor& x, const Tensor& target) {
    Graph g;
    auto gp = models::load_params(g, p);
    Value h = g.tanh(g.add_rowvec(g.matmul(g.input(x), gp.at("w1")), gp.at("b1")));
    Value o = g.add_rowvec(g.matmul(h, gp.at("w2")), gp.at("b2"));
    Value diff = g.sub(o, g.input(target));
    return g.value(g.reduce_sum(g.mul(diff, diff))).data[0];
}

ParamSet seed_mlp(uint64_t seed, size_t in, size_t hid, size_t out) {
    RngStream rng(seed);
    ParamSet p;
    auto mat = [&](size_t r, size_t c) {
        Tensor t = Tensor::zeros({r, c});
        for (double& v : t.data) v = rng.gauss(0.0, 0.7);
        return t;
    };
    p.add("w1", mat(in, hid));
    p.add("b1", Tensor::zeros({hid}));
    p.add("w2", mat(hid, out));
    p.add("b2", Tensor::zeros({out}));
    return p;
}

} // namespace

TEST_CASE("2-layer tanh MLP gradient matches central finite differences") {
    RngStream rng(0);
    Tensor x = Tensor::zeros({3, 4});
    for (double& v : x.data) v = rng.gauss(0.0, 1.0);
    Tensor target = Tensor::zeros({3, 2});
    for (double& v : target.data) v = rng.gauss(0.0, 1.0);
    ParamSet p = seed_mlp(0, 4, 5, 2);

    Graph g;
    auto gp = models::load_params(g, p);
    Value h = g.tanh(g.add_rowvec(g.matmul(g.input(x), gp.at("w1")), gp.at("b1")));
    Value o = g.add_rowvec(g.matmul(h, gp.at("w2")), gp.at("b2"));
    Value diff = g.sub(o, g.input(target));
    Value loss = g.reduce_sum(g.mul(diff, diff));
    auto grads = g.grad(loss, gp.leaves());
    GradSet analytic;
    for (size_t i = 0; i < p.size(); ++i) analytic.add(p[i].first, grads[i]);

    double err = finite_diff_check([&](const ParamSet& q) { return mlp_loss(q, x, target); }, p,
                                   analytic, 1e-6);
    CHECK(err < 1e-5);
}

TEST_CASE("finite_diff_check on exact quadratic and tanh") {
    ParamSet p;
    p.add("p", Tensor::vector({1.0, -2.0}));
    GradSet g;
    g.add("p", Tensor::vector({1.0, -2.0}));
    double err = finite_diff_check(
        [](const ParamSet& q) {
            const Tensor& t = q.at("p");
            return 0.5 * (t.data[0] * t.data[0] + t.data[1] * t.data[1]);
        },
        p, g, 1e-4);
    CHECK(err < 1e-8);

    ParamSet p2;
    p2.add("p", Tensor::vector({0.0}));
    GradSet g2;
    g2.add("p", Tensor::vector({1.0}));
    double err2 = finite_diff_check(
        [](const ParamSet& q) { return std::tanh(q.at("p").data[0]); }, p2, g2, 1e-5);
    CHECK(err2 < 1e-7);
}

TEST_CASE("finite_diff_check names the non-finite coordinate") {
    ParamSet p;
    p.add("layer", Tensor::vector({1.0}));
    GradSet g;
    g.add("layer", Tensor::vector({0.0}));
    CHECK_THROWS_WITH_AS(
        finite_diff_check([](const ParamSet&) { return std::nan(""); }, p, g, 1e-6),
        doctest::Contains("layer"), std::runtime_error);
}

TEST_CASE("shape mismatch is rejected at record time") {
    Graph g;
    Value a = g.input(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
    Value b = g.input(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
    CHECK_THROWS_AS(g.matmul(a, b), std::invalid_argument);
    CHECK_THROWS_AS(g.add(a, g.input(Tensor::vector({1.0}))), std::invalid_argument);
}

TEST_CASE("grad is linear over sums of random small graphs") {
    RngStream rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        Tensor pv = Tensor::zeros({4});
        for (double& v : pv.data) v = rng.gauss(0.0, 1.0);
        Tensor c1 = Tensor::zeros({4});
        Tensor c2 = Tensor::zeros({4});
        for (double& v : c1.data) v = rng.gauss(0.0, 1.0);
        for (double& v : c2.data) v = rng.gauss(0.0, 1.0);

        auto build = [&](Graph& g, Value x, const Tensor& c) {
            Value t = g.tanh(g.mul(x, g.input(c)));
            return g.reduce_sum(g.mul(t, x));
        };

        Graph ga;
        Value xa = ga.param(pv);
        auto grads_f = ga.grad(build(ga, xa, c1), {xa});
        Graph gb;
        Value xb = gb.param(pv);
        auto grads_h = gb.grad(build(gb, xb, c2), {xb});
        Graph gc;
        Value xc = gc.param(pv);
        Value total = gc.add(build(gc, xc, c1), build(gc, xc, c2));
        auto grads_sum = gc.grad(total, {xc});

        for (size_t i = 0; i < 4; ++i)
            CHECK(grads_sum[0].data[i] ==
                  doctest::Approx(grads_f[0].data[i] + grads_h[0].data[i]).epsilon(1e-12));
    }
}

TEST_CASE("spectral norm basics") {
    CHECK(spectral_norm(SmallMatrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));

    SmallMatrix one(1, 1);
    one.at(0, 0) = -0.8;
    CHECK(spectral_norm(one) == doctest::Approx(0.8).epsilon(1e-12));

    // Closed-form 2x2 oracle: m^T m = [[1.81, -0.09], [-0.09, 0.01]].
    SmallMatrix m(2, 2);
    m.at(0, 0) = 0.9;
    m.at(0, 1) = -0.1;
    m.at(1, 0) = 1.0;
    m.at(1, 1) = 0.0;
    double tr = 1.81 + 0.01;
    double det = 1.81 * 0.01 - 0.09 * 0.09;
    double lam = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
    double expected = std::sqrt(lam); // = 1.34703...
    CHECK(expected == doctest::Approx(1.3470).epsilon(1e-4));
    CHECK(spectral_norm(m) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("spectral norm scaling and column lower bound") {
    RngStream rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        size_t n = 2 + rng.index(5);
        SmallMatrix m(n, n);
        for (double& v : m.a) v = rng.gauss(0.0, 1.0);
        double s = spectral_norm(m);

        double alpha = rng.uniform(-3.0, 3.0);
        SmallMatrix ms = m;
        for (double& v : ms.a) v *= alpha;
        CHECK(spectral_norm(ms) == doctest::Approx(std::abs(alpha) * s).epsilon(1e-9));

        double max_col = 0.0;
        for (size_t j = 0; j < n; ++j) {
            double c = 0.0;
            for (size_t i = 0; i < n; ++i) c += m.at(i, j) * m.at(i, j);
            max_col = std::max(max_col, std::sqrt(c));
        }
        CHECK(s >= max_col - 1e-10);
    }
}

TEST_CASE("symmetric eigenvalues via Jacobi agree with known spectra") {
    SmallMatrix m(3, 3);
    m.at(0, 0) = 2.0;
    m.at(1, 1) = 5.0;
    m.at(2, 2) = -1.0;
    m.at(0, 1) = m.at(1, 0) = 0.5;
    auto eig = sym_eigenvalues(m);
    // Exact eigenvalues: -1 and the roots of (2-x)(5-x) - 0.25.
    double tr = 7.0, det = 10.0 - 0.25;
    double hi = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
    double lo = 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
    CHECK(eig[0] == doctest::Approx(hi).epsilon(1e-10));
    CHECK(eig[1] == doctest::Approx(lo).epsilon(1e-10));
    CHECK(eig[2] == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("polynomial root solver recovers known roots") {
    // (z - 0.5)(z + 0.25) = z^2 - 0.25 z - 0.125
    auto roots = poly_roots_monic({-0.25, -0.125});
    double rmax = 0.0;
    for (auto& z : roots) rmax = std::max(rmax, std::abs(z));
    CHECK(rmax == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(poly_spectral_radius({-0.25, -0.125}) == doctest::Approx(0.5).epsilon(1e-10));

    // Complex pair: z^2 + 0.64 has roots +-0.8i.
    CHECK(poly_spectral_radius({0.0, 0.64}) == doctest::Approx(0.8).epsilon(1e-10));
}

TEST_CASE("non-finite op output is rejected") {
    Graph g;
    Value x = g.input(Tensor::vector({-1.0}));
    CHECK_THROWS_AS(g.log(x), std::runtime_error);
}
