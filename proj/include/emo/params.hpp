// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "emo/tensor.hpp"

namespace emo {

using LayerSchema = std::vector<std::pair<std::string, std::vector<size_t>>>;

/// Ordered collection of named layer tensors. Layer order is fixed at
/// construction; names are unique; shapes do not change after insertion.
class ParamSet {
public:
    void add(std::string name, Tensor t);

    bool has(const std::string& name) const;
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;

    size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

    std::pair<std::string, Tensor>& operator[](size_t i) { return items_[i]; }
    const std::pair<std::string, Tensor>& operator[](size_t i) const { return items_[i]; }

    auto begin() { return items_.begin(); }
    auto end() { return items_.end(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    LayerSchema schema() const;
    bool congruent(const ParamSet& o) const;
    size_t total_numel() const;
    bool all_finite() const;

private:
    std::vector<std::pair<std::string, Tensor>> items_;
};

/// Per-layer gradients; structurally identical to the owning ParamSet.
using GradSet = ParamSet;

GradSet zeros_like(const ParamSet& p);
ParamSet clone(const ParamSet& p);
void axpy_params(ParamSet& p, double c, const ParamSet& g);
ParamSet scale_params(const ParamSet& p, double c);
double max_abs_diff(const ParamSet& a, const ParamSet& b);
double norm2_params(const ParamSet& p);

/// Max relative error between the analytic gradient of f at `params` and a
/// central finite difference with step eps, over every coordinate.
/// f must return a finite scalar at each perturbed point.
double finite_diff_check(const std::function<double(const ParamSet&)>& f, const ParamSet& params,
                         const GradSet& analytic, double eps);

} // namespace emo
