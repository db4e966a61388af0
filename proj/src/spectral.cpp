// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "emo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emo {

SmallMatrix SmallMatrix::identity(size_t n) {
    SmallMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

SmallMatrix matmul(const SmallMatrix& x, const SmallMatrix& y) {
    if (x.cols != y.rows) throw std::invalid_argument("matmul: inner dimensions differ");
    SmallMatrix out(x.rows, y.cols);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t k = 0; k < x.cols; ++k) {
            double v = x.at(i, k);
            if (v == 0.0) continue;
            for (size_t j = 0; j < y.cols; ++j) out.at(i, j) += v * y.at(k, j);
        }
    return out;
}

SmallMatrix transpose(const SmallMatrix& x) {
    SmallMatrix out(x.cols, x.rows);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t j = 0; j < x.cols; ++j) out.at(j, i) = x.at(i, j);
    return out;
}

namespace {

double offdiag_norm(const SmallMatrix& m) {
    double s = 0.0;
    for (size_t i = 0; i < m.rows; ++i)
        for (size_t j = 0; j < m.cols; ++j)
            if (i != j) s += m.at(i, j) * m.at(i, j);
    return std::sqrt(s);
}

std::vector<double> jacobi_eigenvalues(SmallMatrix m) {
    const size_t n = m.rows;
    const double tol = 1e-10;
    for (int sweep = 0; sweep < 100 && offdiag_norm(m) > tol; ++sweep) {
        for (size_t p = 0; p + 1 < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                double apq = m.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double app = m.at(p, p), aqq = m.at(q, q);
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    double mkp = m.at(k, p), mkq = m.at(k, q);
                    m.at(k, p) = c * mkp - s * mkq;
                    m.at(k, q) = s * mkp + c * mkq;
                }
                for (size_t k = 0; k < n; ++k) {
                    double mpk = m.at(p, k), mqk = m.at(q, k);
                    m.at(p, k) = c * mpk - s * mqk;
                    m.at(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (size_t i = 0; i < n; ++i) eig[i] = m.at(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<double>());
    return eig;
}

// Power iteration for the dominant eigenpair of a symmetric matrix, with a
// deterministic start vector. Rayleigh-quotient drift tolerance 1e-10.
double power_iteration(const SmallMatrix& m, std::vector<double>* vec_out) {
    const size_t n = m.rows;
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = 1.0 / std::sqrt(double(n)) + 1e-3 * double(i % 7);
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        std::vector<double> w(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) w[i] += m.at(i, j) * v[j];
        double nrm = 0.0;
        for (double x : w) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) { lambda = 0.0; break; }
        for (size_t i = 0; i < n; ++i) w[i] /= nrm;
        double rq = 0.0;
        {
            std::vector<double> mw(n, 0.0);
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) mw[i] += m.at(i, j) * w[j];
            for (size_t i = 0; i < n; ++i) rq += w[i] * mw[i];
        }
        if (it > 2 && std::abs(rq - lambda) < 1e-10 * std::max(1.0, std::abs(rq))) {
            lambda = rq;
            v = w;
            break;
        }
        lambda = rq;
        v = w;
    }
    if (vec_out) *vec_out = v;
    return lambda;
}

} // namespace

std::vector<double> sym_eigenvalues(const SmallMatrix& m, size_t want) {
    if (m.rows != m.cols) throw std::invalid_argument("sym_eigenvalues: matrix not square");
    if (m.rows <= 64) {
        auto eig = jacobi_eigenvalues(m);
        if (want && want < eig.size()) eig.resize(want);
        return eig;
    }
    // Deflated power iteration for the few leading eigenvalues.
    size_t k = want ? want : 1;
    SmallMatrix work = m;
    std::vector<double> out;
    for (size_t d = 0; d < k; ++d) {
        std::vector<double> vec;
        double lam = power_iteration(work, &vec);
        out.push_back(lam);
        for (size_t i = 0; i < work.rows; ++i)
            for (size_t j = 0; j < work.cols; ++j) work.at(i, j) -= lam * vec[i] * vec[j];
    }
    return out;
}

double sym_eig_max(const SmallMatrix& m) { return sym_eigenvalues(m, 1)[0]; }

double spectral_norm(const SmallMatrix& m) {
    if (m.rows == 0 || m.cols == 0) return 0.0;
    SmallMatrix mtm = matmul(transpose(m), m);
    double lam = sym_eig_max(mtm);
    return std::sqrt(std::max(0.0, lam));
}

std::vector<std::complex<double>> poly_roots_monic(const std::vector<double>& c) {
    using cd = std::complex<double>;
    const size_t n = c.size();
    if (n == 0) return {};
    auto eval = [&](cd z) {
        cd v(1.0, 0.0);
        for (size_t i = 0; i < n; ++i) v = v * z + c[i];
        return v;
    };
    // Durand-Kerner from a spread of points off the real axis.
    std::vector<cd> r(n);
    cd seed(0.4, 0.9);
    r[0] = seed;
    for (size_t i = 1; i < n; ++i) r[i] = r[i - 1] * seed;
    for (int it = 0; it < 500; ++it) {
        double moved = 0.0;
        for (size_t i = 0; i < n; ++i) {
            cd denom(1.0, 0.0);
            for (size_t j = 0; j < n; ++j)
                if (j != i) denom *= (r[i] - r[j]);
            if (std::abs(denom) < 1e-300) denom = cd(1e-300, 0.0);
            cd delta = eval(r[i]) / denom;
            r[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-13) break;
    }
    return r;
}

double poly_spectral_radius(const std::vector<double>& c) {
    double best = 0.0;
    for (const auto& z : poly_roots_monic(c)) best = std::max(best, std::abs(z));
    return best;
}

} // namespace emo
