// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace emo {

/// Dense small matrix (at most a few hundred rows) used by the convergence
/// lab; kept separate from Tensor so matrix algebra stays explicit.
struct SmallMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> a;

    SmallMatrix() = default;
    SmallMatrix(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(size_t i, size_t j) { return a[i * cols + j]; }
    double at(size_t i, size_t j) const { return a[i * cols + j]; }

    static SmallMatrix identity(size_t n);
};

SmallMatrix matmul(const SmallMatrix& x, const SmallMatrix& y);
SmallMatrix transpose(const SmallMatrix& x);

/// Eigenvalues of a symmetric matrix. Cyclic Jacobi for n <= 64 (off-diagonal
/// norm tolerance 1e-10), power iteration with deflation above that.
std::vector<double> sym_eigenvalues(const SmallMatrix& m, size_t want = 0);

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
double sym_eig_max(const SmallMatrix& m);

/// Largest singular value: sqrt of the largest eigenvalue of m^T m.
double spectral_norm(const SmallMatrix& m);

/// All roots of a monic polynomial z^n + c[0] z^{n-1} + ... + c[n-1]
/// (Durand-Kerner iteration; n is small).
std::vector<std::complex<double>> poly_roots_monic(const std::vector<double>& c);

/// Largest root magnitude of the monic polynomial above.
double poly_spectral_radius(const std::vector<double>& c);

} // namespace emo
