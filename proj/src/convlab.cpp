// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "emo/convlab.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace emo::convlab {

void MultiStepSpec::validate() const {
    if (steps < 1) throw std::invalid_argument("multistep spec: steps must be >= 1");
    if (weights.size() != steps)
        throw std::invalid_argument("multistep spec: " + std::to_string(weights.size()) +
                                    " weights for " + std::to_string(steps) + " steps");
    for (double w : weights)
        if (w < 0.0 || w > 1.0)
            throw std::invalid_argument("multistep spec: weights must lie in [0,1]");
    if (alpha <= 0.0) throw std::invalid_argument("multistep spec: alpha must be positive");
    if (sigma < 0.0) throw std::invalid_argument("multistep spec: sigma must be >= 0");
}

MultiStepSpec MultiStepSpec::uniform(size_t steps, double alpha, double sigma) {
    MultiStepSpec s;
    s.steps = steps;
    s.weights.assign(steps, 1.0 / double(steps));
    s.alpha = alpha;
    s.sigma = sigma;
    return s;
}

SmallMatrix build_reduced_matrix(const MultiStepSpec& spec, const std::vector<double>& taus) {
    spec.validate();
    if (taus.size() != spec.steps)
        throw std::invalid_argument("build_reduced_matrix: need one tau per step");
    const size_t s = spec.steps;
    SmallMatrix m(s, s);
    m.at(0, 0) = 1.0 - spec.alpha * spec.weights[0] * taus[0];
    for (size_t j = 1; j < s; ++j) m.at(0, j) = -spec.alpha * spec.weights[j] * taus[j];
    for (size_t i = 1; i < s; ++i) m.at(i, i - 1) = 1.0;
    return m;
}

SystemMatrix build_system_matrix(const MultiStepSpec& spec,
                                 const std::vector<SmallMatrix>& r_list) {
    spec.validate();
    if (r_list.size() != spec.steps)
        throw std::invalid_argument("build_system_matrix: need one rate matrix per step");
    const size_t d = r_list[0].rows;
    for (const SmallMatrix& r : r_list) {
        if (r.rows != d || r.cols != d)
            throw std::invalid_argument("build_system_matrix: rate matrix dimension mismatch");
        for (size_t i = 0; i < d; ++i)
            for (size_t j = i + 1; j < d; ++j)
                if (std::abs(r.at(i, j) - r.at(j, i)) > 1e-9)
                    throw std::invalid_argument("build_system_matrix: rate matrix not symmetric");
    }

    const size_t s = spec.steps;
    SystemMatrix out;
    out.block = SmallMatrix(s * d, s * d);
    for (size_t bi = 0; bi < d; ++bi) {
        for (size_t col = 0; col < s; ++col) {
            for (size_t bj = 0; bj < d; ++bj) {
                double v = -spec.alpha * spec.weights[col] * r_list[col].at(bi, bj);
                if (col == 0 && bi == bj) v += 1.0;
                out.block.at(bi, col * d + bj) = v;
            }
        }
    }
    for (size_t row = 1; row < s; ++row)
        for (size_t bi = 0; bi < d; ++bi) out.block.at(row * d + bi, (row - 1) * d + bi) = 1.0;

    std::vector<double> taus;
    taus.reserve(s);
    for (const SmallMatrix& r : r_list) taus.push_back(sym_eig_max(r));
    out.reduced = build_reduced_matrix(spec, taus);
    out.lambda_t = spectral_norm(out.reduced);
    return out;
}

std::vector<double> tau_grid(double mu, double lipschitz) {
    if (mu <= 0.0 || mu > lipschitz) throw std::invalid_argument("tau_grid: need 0 < mu <= L");
    std::vector<double> grid;
    grid.push_back(mu);
    const size_t n = 64;
    for (size_t i = 1; i + 1 < n; ++i) {
        double f = double(i) / double(n - 1);
        grid.push_back(mu * std::pow(lipschitz / mu, f));
    }
    grid.push_back(lipschitz);
    return grid;
}

double lambda_max_bound(const MultiStepSpec& spec, const std::vector<double>& grid) {
    spec.validate();
    if (grid.empty()) throw std::invalid_argument("lambda_max_bound: empty grid");
    double best = 0.0;
    for (double tau : grid) {
        std::vector<double> taus(spec.steps, tau);
        best = std::max(best, spectral_norm(build_reduced_matrix(spec, taus)));
    }
    return best;
}

double contraction_factor(const MultiStepSpec& spec, double tau) {
    spec.validate();
    // Characteristic polynomial of the reduced companion matrix:
    // z^S - (1 - a w0 tau) z^{S-1} + a w1 tau z^{S-2} + ... + a w_{S-1} tau.
    std::vector<double> c(spec.steps);
    c[0] = -(1.0 - spec.alpha * spec.weights[0] * tau);
    for (size_t s = 1; s < spec.steps; ++s) c[s] = spec.alpha * spec.weights[s] * tau;
    return poly_spectral_radius(c);
}

double contraction_max(const MultiStepSpec& spec, const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("contraction_max: empty grid");
    double best = 0.0;
    for (double tau : grid) best = std::max(best, contraction_factor(spec, tau));
    return best;
}

Trajectory run_multistep_recursion(const taskgen::QuadraticTask& task, const MultiStepSpec& spec,
                                   const Tensor& theta1, size_t iterations, RngStream& rng) {
    spec.validate();
    if (theta1.numel() != task.dim())
        throw std::invalid_argument("run_multistep_recursion: theta1 dimension mismatch");

    const double w_total = [&] {
        double s = 0.0;
        for (double w : spec.weights) s += w;
        return s;
    }();

    Trajectory traj;
    Tensor theta = theta1;
    traj.delta_norm.push_back(norm2(sub(theta, task.optimum)));
    traj.iterates.push_back(theta);
    std::deque<Tensor> history; // most recent gradient in front

    for (size_t t = 1; t <= iterations; ++t) {
        Tensor g = task.exact_grad(theta);
        if (spec.sigma > 0.0)
            for (double& v : g.data) v += rng.gauss(0.0, spec.sigma);
        history.push_front(g);
        if (history.size() > spec.steps) history.pop_back();

        double w_avail = 0.0;
        for (size_t s = 0; s < history.size(); ++s) w_avail += spec.weights[s];
        double renorm = w_total / w_avail;

        Tensor update = Tensor::zeros({task.dim()});
        for (size_t s = 0; s < history.size(); ++s)
            axpy(update, spec.weights[s] * renorm, history[s]);
        axpy(theta, -spec.alpha, update);

        double gap = task.objective(theta);
        if (!std::isfinite(gap) || gap > 1e12)
            throw std::runtime_error("run_multistep_recursion: diverged at t=" +
                                     std::to_string(t));
        traj.gap.push_back(gap);
        traj.delta_norm.push_back(norm2(sub(theta, task.optimum)));
        traj.iterates.push_back(theta);
    }
    return traj;
}

TheoremReport verify_theorem1(const taskgen::QuadraticTask& task, const MultiStepSpec& spec,
                              const Tensor& theta1, size_t horizon, size_t n_seeds,
                              uint64_t seed, double tol) {
    spec.validate();
    TheoremReport report;
    report.tolerance = tol;

    MultiStepSpec sim = spec;
    sim.sigma = task.sigma;
    report.lambda_max = contraction_max(sim, tau_grid(task.mu, task.lipschitz));
    if (report.lambda_max >= 1.0) {
        report.applicable = false;
        report.satisfied = false;
        return report;
    }
    report.applicable = true;

    std::vector<double> mean_gap(horizon, 0.0);
    RngStream base(seed);
    for (size_t s = 0; s < n_seeds; ++s) {
        RngStream stream = base.split(s);
        Trajectory traj = run_multistep_recursion(task, sim, theta1, horizon, stream);
        for (size_t t = 0; t < horizon; ++t) mean_gap[t] += traj.gap[t];
    }
    for (double& v : mean_gap) v /= double(n_seeds);

    const double lam2 = report.lambda_max * report.lambda_max;
    const double d1 = dot(sub(theta1, task.optimum), sub(theta1, task.optimum));
    const double noise_floor = sim.alpha * sim.alpha * task.sigma * task.sigma *
                               double(sim.steps) / (1.0 - lam2);

    report.satisfied = true;
    report.rows.reserve(horizon);
    for (size_t t = 1; t <= horizon; ++t) {
        double bound =
            0.5 * task.lipschitz * (std::pow(lam2, double(t)) * d1 + noise_floor);
        double emp = mean_gap[t - 1];
        report.rows.push_back({t, emp, bound});
        if (emp > bound * (1.0 + tol)) report.satisfied = false;
    }
    return report;
}

} // namespace emo::convlab
