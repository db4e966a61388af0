// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "emo/rng.hpp"
#include "emo/spectral.hpp"
#include "emo/taskgen.hpp"
#include "emo/tensor.hpp"

namespace emo::convlab {

/// Linear multi-step system: theta_{t+1} = theta_t - alpha * sum_s w_s g_{t-s}
/// with per-step weights in [0,1]. While fewer than S past gradients exist,
/// the weights are rescaled so their sum matches the full-window sum.
struct MultiStepSpec {
    size_t steps = 1;
    std::vector<double> weights{1.0};
    double alpha = 0.01;
    double sigma = 0.0;

    void validate() const;
    static MultiStepSpec uniform(size_t steps, double alpha, double sigma);
};

/// Block companion matrix of the recursion and its scalar surrogate.
struct SystemMatrix {
    SmallMatrix block;    // (S*d) x (S*d)
    SmallMatrix reduced;  // S x S, rate matrices replaced by scalar taus
    double lambda_t;      // largest singular value of the reduced matrix
};

/// Assemble the block system matrix from per-step rate matrices
/// (r_list[s] multiplies the gradient taken s steps back; each must be
/// symmetric). The reduced matrix uses each rate's largest eigenvalue.
SystemMatrix build_system_matrix(const MultiStepSpec& spec,
                                 const std::vector<SmallMatrix>& r_list);

/// S x S reduced matrix with explicit scalar taus (taus[s] for lag s).
SmallMatrix build_reduced_matrix(const MultiStepSpec& spec, const std::vector<double>& taus);

/// 64 log-spaced curvatures in [mu, lipschitz] plus both endpoints.
std::vector<double> tau_grid(double mu, double lipschitz);

/// Largest singular value of the reduced matrix, maximized over the grid
/// (all lags share the grid value). For S >= 2 this exceeds 1 for every
/// positive step size: the sub-diagonal identity block alone gives a column
/// of norm > 1.
double lambda_max_bound(const MultiStepSpec& spec, const std::vector<double>& grid);

/// Spectral radius of the reduced matrix at a single curvature, from the
/// roots of its characteristic polynomial.
double contraction_factor(const MultiStepSpec& spec, double tau);

/// Asymptotic contraction rate: max spectral radius over the grid. This is
/// the quantity that decides whether the recursion converges, and the rate
/// the bound verifier uses.
double contraction_max(const MultiStepSpec& spec, const std::vector<double>& grid);

struct Trajectory {
    std::vector<double> gap;        // f(theta_{t+1}) - f*, t = 1..iterations
    std::vector<double> delta_norm; // ||theta_t - opt||, t = 1..iterations+1
    std::vector<Tensor> iterates;   // theta_t, t = 1..iterations+1
};

/// Run the recursion on a quadratic task with exact gradients plus injected
/// N(0, sigma^2 I) noise. Throws when the gap exceeds 1e12.
Trajectory run_multistep_recursion(const taskgen::QuadraticTask& task, const MultiStepSpec& spec,
                                   const Tensor& theta1, size_t iterations, RngStream& rng);

struct TheoremRow {
    size_t t;
    double empirical;
    double bound;
};

struct TheoremReport {
    bool applicable = false; // contraction rate < 1
    bool satisfied = false;
    double lambda_max = 0.0; // contraction rate used by the bound
    double tolerance = 0.05;
    std::vector<TheoremRow> rows;
};

/// Check empirical E[f(theta_{t+1}) - f*] over n_seeds noise draws against
/// (L/2) (lambda^{2t} ||dtheta_1||^2 + alpha^2 sigma^2 S / (1 - lambda^2))
/// at every t. Reports "inapplicable" instead of failing when the
/// contraction rate is >= 1.
TheoremReport verify_theorem1(const taskgen::QuadraticTask& task, const MultiStepSpec& spec,
                              const Tensor& theta1, size_t horizon, size_t n_seeds,
                              uint64_t seed, double tol = 0.05);

} // namespace emo::convlab
