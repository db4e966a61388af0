// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace emo {

/// Dense row-major tensor of 64-bit floats. Rank 1 or 2 is all the library
/// needs; shape is carried explicitly and checked by every consumer.
struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<size_t> s, std::vector<double> d);

    static Tensor zeros(std::vector<size_t> shape);
    static Tensor full(std::vector<size_t> shape, double v);
    static Tensor vector(std::vector<double> v);
    static Tensor matrix(size_t rows, size_t cols, std::vector<double> v);

    size_t numel() const { return data.size(); }
    size_t rows() const;
    size_t cols() const;

    double& at(size_t i, size_t j);
    double at(size_t i, size_t j) const;

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
};

std::string shape_str(const std::vector<size_t>& s);
size_t shape_numel(const std::vector<size_t>& s);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
double dot(const Tensor& a, const Tensor& b);
double sum(const Tensor& a);
double norm2(const Tensor& a);

/// Accumulate a += c*b in place (shapes must match).
void axpy(Tensor& a, double c, const Tensor& b);

/// Sum of a multiset of doubles that does not depend on the order the values
/// arrive in: the buffer is sorted before accumulation. Used where exact
/// permutation invariance is part of the contract.
double set_sum(std::vector<double>& scratch);

} // namespace emo
