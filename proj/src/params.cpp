// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "emo/params.hpp"

#include <cmath>
#include <stdexcept>

namespace emo {

void ParamSet::add(std::string name, Tensor t) {
    if (has(name)) throw std::invalid_argument("paramset: duplicate layer '" + name + "'");
    items_.emplace_back(std::move(name), std::move(t));
}

bool ParamSet::has(const std::string& name) const {
    for (const auto& [k, v] : items_)
        if (k == name) return true;
    return false;
}

Tensor& ParamSet::at(const std::string& name) {
    for (auto& [k, v] : items_)
        if (k == name) return v;
    throw std::invalid_argument("paramset: no layer '" + name + "'");
}

const Tensor& ParamSet::at(const std::string& name) const {
    for (const auto& [k, v] : items_)
        if (k == name) return v;
    throw std::invalid_argument("paramset: no layer '" + name + "'");
}

LayerSchema ParamSet::schema() const {
    LayerSchema s;
    for (const auto& [k, v] : items_) s.emplace_back(k, v.shape);
    return s;
}

bool ParamSet::congruent(const ParamSet& o) const {
    if (items_.size() != o.items_.size()) return false;
    for (size_t i = 0; i < items_.size(); ++i)
        if (items_[i].first != o.items_[i].first ||
            items_[i].second.shape != o.items_[i].second.shape)
            return false;
    return true;
}

size_t ParamSet::total_numel() const {
    size_t n = 0;
    for (const auto& [k, v] : items_) n += v.numel();
    return n;
}

bool ParamSet::all_finite() const {
    for (const auto& [k, v] : items_)
        if (!v.all_finite()) return false;
    return true;
}

GradSet zeros_like(const ParamSet& p) {
    GradSet g;
    for (const auto& [k, v] : p) g.add(k, Tensor::zeros(v.shape));
    return g;
}

ParamSet clone(const ParamSet& p) {
    ParamSet out;
    for (const auto& [k, v] : p) out.add(k, v);
    return out;
}

void axpy_params(ParamSet& p, double c, const ParamSet& g) {
    if (!p.congruent(g)) throw std::invalid_argument("axpy_params: incongruent sets");
    for (size_t i = 0; i < p.size(); ++i) axpy(p[i].second, c, g[i].second);
}

ParamSet scale_params(const ParamSet& p, double c) {
    ParamSet out = clone(p);
    for (auto& [k, v] : out) v = scale(v, c);
    return out;
}

double max_abs_diff(const ParamSet& a, const ParamSet& b) {
    if (!a.congruent(b)) throw std::invalid_argument("max_abs_diff: incongruent sets");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].second.data.size(); ++j)
            m = std::max(m, std::abs(a[i].second.data[j] - b[i].second.data[j]));
    return m;
}

double norm2_params(const ParamSet& p) {
    double s = 0.0;
    for (const auto& [k, v] : p) s += dot(v, v);
    return std::sqrt(s);
}

double finite_diff_check(const std::function<double(const ParamSet&)>& f, const ParamSet& params,
                         const GradSet& analytic, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("finite_diff_check: eps must be positive");
    if (!params.congruent(analytic))
        throw std::invalid_argument("finite_diff_check: gradient incongruent with params");
    ParamSet work = clone(params);
    double worst = 0.0;
    for (size_t li = 0; li < work.size(); ++li) {
        for (size_t j = 0; j < work[li].second.data.size(); ++j) {
            double saved = work[li].second.data[j];
            work[li].second.data[j] = saved + eps;
            double fp = f(work);
            work[li].second.data[j] = saved - eps;
            double fm = f(work);
            work[li].second.data[j] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw std::runtime_error("finite_diff_check: non-finite value at layer '" +
                                         work[li].first + "' coordinate " + std::to_string(j));
            double num = (fp - fm) / (2.0 * eps);
            double ana = analytic[li].second.data[j];
            double rel = std::abs(num - ana) / (std::abs(ana) + 1e-12);
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace emo
