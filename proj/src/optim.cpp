// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "emo/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace emo::optim {

const char* aggregator_name(AggregatorKind k) {
    switch (k) {
    case AggregatorKind::Mean: return "mean";
    case AggregatorKind::Sum: return "sum";
    case AggregatorKind::Attention: return "attention";
    }
    return "?";
}

AggregatorKind aggregator_from_name(const std::string& name) {
    if (name == "mean") return AggregatorKind::Mean;
    if (name == "sum") return AggregatorKind::Sum;
    if (name == "attention" || name == "transformer") return AggregatorKind::Attention;
    throw std::invalid_argument("unknown aggregator '" + name + "'");
}

void InnerOptConfig::validate() const {
    if (alpha <= 0.0) throw std::invalid_argument("inner config: alpha must be positive");
    if (aggregator.kind == AggregatorKind::Attention && !aggregator.attention_params)
        throw std::invalid_argument("inner config: attention aggregator has no registered network");
    if (retrieval_k < 1) throw std::invalid_argument("inner config: retrieval k must be >= 1");
}

namespace {

void check_congruent(const GradSet& g, const std::vector<const GradSet*>& v, const char* op) {
    for (const GradSet* m : v)
        if (!m->congruent(g)) throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

} // namespace

GradSet aggr_mean(const GradSet& g, const std::vector<const GradSet*>& v) {
    check_congruent(g, v, "aggr_mean");
    if (v.empty()) return clone(g);
    GradSet out = clone(g);
    for (const GradSet* m : v) axpy_params(out, 1.0, *m);
    return scale_params(out, 1.0 / double(v.size() + 1));
}

GradSet aggr_sum(const GradSet& g, const std::vector<const GradSet*>& v) {
    check_congruent(g, v, "aggr_sum");
    if (v.empty()) return clone(g);
    GradSet acc = zeros_like(g);
    for (const GradSet* m : v) axpy_params(acc, 1.0, *m);
    GradSet out = clone(g);
    axpy_params(out, 1.0 / double(v.size()), acc);
    return out;
}

GradSet aggregate(const GradSet& g, const std::vector<const GradSet*>& v,
                  const AggregatorSpec& spec) {
    switch (spec.kind) {
    case AggregatorKind::Mean: return aggr_mean(g, v);
    case AggregatorKind::Sum: return aggr_sum(g, v);
    case AggregatorKind::Attention:
        if (!spec.attention_params)
            throw std::invalid_argument("aggregate: attention aggregator has no network");
        return models::aggregator_attention(g, v, *spec.attention_params, spec.attention_cfg);
    }
    throw std::logic_error("aggregate: bad kind");
}

namespace {

void check_finite_update(const GradSet& a, const char* op) {
    for (const auto& [name, t] : a)
        if (!t.all_finite())
            throw std::runtime_error(std::string(op) + ": non-finite gradient in layer '" + name +
                                     "'");
}

} // namespace

ParamSet emo_step(const ParamSet& theta, const GradSet& g, const std::vector<const GradSet*>& v,
                  const InnerOptConfig& cfg) {
    cfg.validate();
    GradSet a = aggregate(g, v, cfg.aggregator);
    check_finite_update(a, "emo_step");
    ParamSet out = clone(theta);
    axpy_params(out, -cfg.alpha, a);
    return out;
}

ParamSet emo_step_vec(const ParamSet& theta, const ParamSet& alpha_vec, const GradSet& g,
                      const std::vector<const GradSet*>& v, const AggregatorSpec& spec) {
    if (!alpha_vec.congruent(theta))
        throw std::invalid_argument("emo_step_vec: alpha_vec incongruent with theta");
    GradSet a = aggregate(g, v, spec);
    check_finite_update(a, "emo_step_vec");
    ParamSet out = clone(theta);
    for (size_t i = 0; i < out.size(); ++i)
        for (size_t j = 0; j < out[i].second.data.size(); ++j)
            out[i].second.data[j] -= alpha_vec[i].second.data[j] * a[i].second.data[j];
    return out;
}

ParamSet sgd_step(const ParamSet& theta, const GradSet& g, double alpha) {
    check_finite_update(g, "sgd_step");
    ParamSet out = clone(theta);
    axpy_params(out, -alpha, g);
    return out;
}

ParamSet momentum_step(const ParamSet& theta, const GradSet& g, OptState& state, double alpha,
                       double mu) {
    check_finite_update(g, "momentum_step");
    if (state.momentum.empty()) state.momentum = zeros_like(theta);
    for (size_t i = 0; i < theta.size(); ++i)
        for (size_t j = 0; j < theta[i].second.data.size(); ++j)
            state.momentum[i].second.data[j] =
                mu * state.momentum[i].second.data[j] + g[i].second.data[j];
    ParamSet out = clone(theta);
    axpy_params(out, -alpha, state.momentum);
    return out;
}

ParamSet adam_step(const ParamSet& theta, const GradSet& g, OptState& state, double alpha,
                   double beta1, double beta2, double eps) {
    check_finite_update(g, "adam_step");
    if (state.momentum.empty()) {
        state.momentum = zeros_like(theta);
        state.second = zeros_like(theta);
    }
    state.step += 1;
    double c1 = 1.0 - std::pow(beta1, double(state.step));
    double c2 = 1.0 - std::pow(beta2, double(state.step));
    ParamSet out = clone(theta);
    for (size_t i = 0; i < theta.size(); ++i)
        for (size_t j = 0; j < theta[i].second.data.size(); ++j) {
            double gj = g[i].second.data[j];
            double& m = state.momentum[i].second.data[j];
            double& v = state.second[i].second.data[j];
            m = beta1 * m + (1.0 - beta1) * gj;
            v = beta2 * v + (1.0 - beta2) * gj * gj;
            out[i].second.data[j] -= alpha * (m / c1) / (std::sqrt(v / c2) + eps);
        }
    return out;
}

} // namespace emo::optim
