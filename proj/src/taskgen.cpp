// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "emo/taskgen.hpp"

#include <cmath>
#include <stdexcept>

namespace emo::taskgen {

double QuadraticTask::objective(const Tensor& theta) const {
    const size_t d = dim();
    double acc = 0.0;
    for (size_t i = 0; i < d; ++i) {
        double hi = 0.0;
        for (size_t j = 0; j < d; ++j)
            hi += hessian.at(i, j) * (theta.data[j] - optimum.data[j]);
        acc += (theta.data[i] - optimum.data[i]) * hi;
    }
    return 0.5 * acc;
}

Tensor QuadraticTask::exact_grad(const Tensor& theta) const {
    const size_t d = dim();
    Tensor g = Tensor::zeros({d});
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j)
            g.data[i] += hessian.at(i, j) * (theta.data[j] - optimum.data[j]);
    return g;
}

Tensor QuadraticTask::noisy_grad(const Tensor& theta, RngStream& rng) const {
    Tensor g = exact_grad(theta);
    if (sigma > 0.0)
        for (double& v : g.data) v += rng.gauss(0.0, sigma);
    return g;
}

void FamilyConfig::validate() const {
    if (n_way < 1 || k_shot < 1 || m_query < 1)
        throw std::invalid_argument("family config: n_way/k_shot/m_query must be >= 1");
    if (input_dim < 1) throw std::invalid_argument("family config: input_dim must be >= 1");
    if (modes.empty()) throw std::invalid_argument("family config: at least one mode required");
    if (amp_lo <= 0.0 || amp_hi < amp_lo || phase_hi < phase_lo || x_range <= 0.0)
        throw std::invalid_argument("family config: bad sinusoid ranges");
}

QuadraticTask sample_quadratic_task(const QuadraticConfig& cfg, RngStream& rng) {
    if (cfg.mu <= 0.0 || cfg.mu > cfg.lipschitz)
        throw std::invalid_argument("quadratic config: need 0 < mu <= lipschitz");
    const size_t d = cfg.dim;

    // Random rotation via Gram-Schmidt on a gaussian matrix.
    SmallMatrix q(d, d);
    for (size_t c = 0; c < d; ++c) {
        std::vector<double> col(d);
        for (size_t i = 0; i < d; ++i) col[i] = rng.gauss(0.0, 1.0);
        for (size_t prev = 0; prev < c; ++prev) {
            double proj = 0.0;
            for (size_t i = 0; i < d; ++i) proj += col[i] * q.at(i, prev);
            for (size_t i = 0; i < d; ++i) col[i] -= proj * q.at(i, prev);
        }
        double nrm = 0.0;
        for (double v : col) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) { col[c % d] = 1.0; nrm = 1.0; }
        for (size_t i = 0; i < d; ++i) q.at(i, c) = col[i] / nrm;
    }

    std::vector<double> lam(d);
    for (size_t i = 0; i < d; ++i) lam[i] = rng.uniform(cfg.mu, cfg.lipschitz);

    QuadraticTask t;
    t.hessian = SmallMatrix(d, d);
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) {
            double v = 0.0;
            for (size_t k = 0; k < d; ++k) v += q.at(i, k) * lam[k] * q.at(j, k);
            t.hessian.at(i, j) = v;
        }
    t.optimum = Tensor::zeros({d});
    for (double& v : t.optimum.data) v = rng.uniform(-cfg.optimum_spread, cfg.optimum_spread);
    t.mu = cfg.mu;
    t.lipschitz = cfg.lipschitz;
    t.sigma = cfg.sigma;
    return t;
}

namespace {

// Fixed per-(family, mode, label) class anchor; the task stream only jitters
// around these, so labels stay predictive across tasks of the same mode.
Tensor class_anchor(const FamilyConfig& cfg, size_t mode_id, size_t label) {
    RngStream r = RngStream(cfg.seed ^ 0xA5C3E671B29D480Full).split(mode_id * 131 + label + 7);
    Tensor a = Tensor::zeros({cfg.input_dim});
    for (double& v : a.data) v = r.gauss(0.0, 1.0);
    return a;
}

} // namespace

Task sample_cluster_task(const FamilyConfig& cfg, size_t mode_id, RngStream& rng) {
    cfg.validate();
    if (mode_id >= cfg.modes.size())
        throw std::invalid_argument("sample_cluster_task: mode out of range");
    const ModeConfig& mode = cfg.modes[mode_id];

    Task t;
    t.family_id = cfg.seed;
    t.mode_id = mode_id;

    std::vector<Tensor> prototypes;
    prototypes.reserve(cfg.n_way);
    for (size_t c = 0; c < cfg.n_way; ++c) {
        Tensor p = class_anchor(cfg, mode_id, c);
        for (double& v : p.data)
            v = (v + mode.prototype_jitter * rng.gauss(0.0, 1.0)) * mode.prototype_scale;
        prototypes.push_back(std::move(p));
    }

    auto draw = [&](size_t c) {
        Tensor x = prototypes[c];
        if (mode.noise_std > 0.0)
            for (double& v : x.data) v += rng.gauss(0.0, mode.noise_std);
        return x;
    };
    for (size_t c = 0; c < cfg.n_way; ++c)
        for (size_t k = 0; k < cfg.k_shot; ++k) t.support.emplace_back(draw(c), double(c));
    for (size_t c = 0; c < cfg.n_way; ++c)
        for (size_t m = 0; m < cfg.m_query; ++m) t.query.emplace_back(draw(c), double(c));
    return t;
}

Task sample_multimode_task(const FamilyConfig& cfg, RngStream& rng) {
    cfg.validate();
    if (cfg.modes.size() < 1)
        throw std::invalid_argument("sample_multimode_task: no modes configured");
    size_t mode = rng.index(cfg.modes.size());
    return sample_cluster_task(cfg, mode, rng);
}

Task sample_sinusoid_task(const FamilyConfig& cfg, RngStream& rng) {
    cfg.validate();
    double amp = rng.uniform(cfg.amp_lo, cfg.amp_hi);
    double phase = rng.uniform(cfg.phase_lo, cfg.phase_hi);
    Task t;
    t.family_id = cfg.seed;
    auto draw = [&]() {
        double x = rng.uniform(-cfg.x_range, cfg.x_range);
        return std::make_pair(Tensor::vector({x}), amp * std::sin(x + phase));
    };
    size_t n_support = cfg.n_way * cfg.k_shot;
    size_t n_query = cfg.n_way * cfg.m_query;
    for (size_t i = 0; i < n_support; ++i) t.support.push_back(draw());
    for (size_t i = 0; i < n_query; ++i) t.query.push_back(draw());
    return t;
}

RngStream train_stream(const FamilyConfig& cfg, uint64_t index) {
    return RngStream(cfg.seed).split(0x1000000000000000ull + index);
}

RngStream test_stream(const FamilyConfig& cfg, uint64_t index) {
    return RngStream(cfg.seed).split(0x2000000000000000ull + index);
}

} // namespace emo::taskgen
