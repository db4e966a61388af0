// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "emo/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emo {

Tensor::Tensor(std::vector<size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
    if (shape_numel(shape) != data.size()) {
        throw std::invalid_argument("tensor: shape " + shape_str(shape) + " does not match " +
                                    std::to_string(data.size()) + " values");
    }
}

Tensor Tensor::zeros(std::vector<size_t> shape) {
    size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<size_t> shape, double v) {
    size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::vector(std::vector<double> v) {
    size_t n = v.size();
    return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(size_t rows, size_t cols, std::vector<double> v) {
    return Tensor({rows, cols}, std::move(v));
}

size_t Tensor::rows() const { return shape.empty() ? 1 : shape[0]; }

size_t Tensor::cols() const {
    if (shape.size() >= 2) return shape[1];
    return 1;
}

double& Tensor::at(size_t i, size_t j) { return data[i * cols() + j]; }
double Tensor::at(size_t i, size_t j) const { return data[i * cols() + j]; }

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

size_t shape_numel(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
}

std::string shape_str(const std::vector<size_t>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

static void require_same(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape) +
                                    " vs " + shape_str(b.shape));
    }
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same(a, b, "add");
    Tensor out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same(a, b, "sub");
    Tensor out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same(a, b, "mul");
    Tensor out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    return out;
}

Tensor scale(const Tensor& a, double c) {
    Tensor out = a;
    for (double& v : out.data) v *= c;
    return out;
}

double dot(const Tensor& a, const Tensor& b) {
    require_same(a, b, "dot");
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

double sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data) s += v;
    return s;
}

double norm2(const Tensor& a) { return std::sqrt(dot(a, a)); }

void axpy(Tensor& a, double c, const Tensor& b) {
    require_same(a, b, "axpy");
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += c * b.data[i];
}

double set_sum(std::vector<double>& scratch) {
    std::sort(scratch.begin(), scratch.end());
    double s = 0.0;
    for (double v : scratch) s += v;
    return s;
}

} // namespace emo
