// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "emo/rng.hpp"
#include "emo/spectral.hpp"
#include "emo/tensor.hpp"

namespace emo::taskgen {

/// One few-shot episode: N*K support pairs and N*M query pairs. Labels are
/// class indices for classification families and real targets for regression.
struct Task {
    std::vector<std::pair<Tensor, double>> support;
    std::vector<std::pair<Tensor, double>> query;
    uint64_t family_id = 0;
    size_t mode_id = 0;
};

/// Quadratic bowl f(theta) = 0.5 (theta - opt)^T H (theta - opt) with H
/// eigenvalues inside [mu, lipschitz]. Gradient noise is injected explicitly
/// as N(0, sigma^2 I) on top of the exact gradient, so sigma is known.
struct QuadraticTask {
    SmallMatrix hessian;
    Tensor optimum;
    double mu = 1.0;
    double lipschitz = 1.0;
    double sigma = 0.0;

    size_t dim() const { return optimum.numel(); }
    double objective(const Tensor& theta) const;
    Tensor exact_grad(const Tensor& theta) const;
    Tensor noisy_grad(const Tensor& theta, RngStream& rng) const;
};

struct QuadraticConfig {
    size_t dim = 2;
    double mu = 1.0;
    double lipschitz = 10.0;
    double sigma = 0.0;
    /// Optimum drawn uniformly from [-spread, spread]^dim.
    double optimum_spread = 1.0;
};

struct ModeConfig {
    double prototype_scale = 1.0;
    double noise_std = 0.1;
    /// Per-task jitter of the fixed class anchors; 0 makes every task of a
    /// mode reuse identical prototypes.
    double prototype_jitter = 0.3;
};

struct FamilyConfig {
    size_t n_way = 5;
    size_t k_shot = 1;
    size_t m_query = 15;
    size_t input_dim = 20;
    std::vector<ModeConfig> modes{ModeConfig{}, ModeConfig{}, ModeConfig{}, ModeConfig{}};
    uint64_t seed = 0;

    // Sinusoid family ranges: y = A sin(x + phase), x uniform in [-x_range, x_range].
    double amp_lo = 0.1, amp_hi = 5.0;
    double phase_lo = 0.0, phase_hi = 3.14159265358979323846;
    double x_range = 5.0;

    void validate() const;
};

QuadraticTask sample_quadratic_task(const QuadraticConfig& cfg, RngStream& rng);

/// Gaussian-cluster N-way K-shot classification. Class prototypes are fixed
/// per (mode, label) anchors scaled by prototype_scale, jittered per task;
/// inputs are prototype + noise.
Task sample_cluster_task(const FamilyConfig& cfg, size_t mode_id, RngStream& rng);

/// Picks one of the configured modes uniformly, then samples a cluster task
/// from it; mode_id is recorded on the task.
Task sample_multimode_task(const FamilyConfig& cfg, RngStream& rng);

/// A sin(x + phase) regression; support/query x uniform, scalar targets.
Task sample_sinusoid_task(const FamilyConfig& cfg, RngStream& rng);

/// Disjoint seed ranges for meta-train and meta-test task streams.
RngStream train_stream(const FamilyConfig& cfg, uint64_t index);
RngStream test_stream(const FamilyConfig& cfg, uint64_t index);

} // namespace emo::taskgen
