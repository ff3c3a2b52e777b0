#pragma once

#include <Eigen/Dense>

namespace compsim {

// Hermitian PSD square root via eigendecomposition. Eigenvalues in
// [-tol*max(1,lambda_max), 0) are clamped to zero; anything more negative is
// rejected as non-PSD (std::invalid_argument).
Eigen::MatrixXcd psdSqrt(const Eigen::MatrixXcd& m, double tol = 1e-12);

// Moore-Penrose pseudo-inverse of a full-row-rank matrix via SVD.
// Throws std::runtime_error if sigma_min < rankTol * sigma_max.
Eigen::MatrixXcd pinvFullRowRank(const Eigen::MatrixXcd& m,
                                 double rankTol = 1e-9);

// p-th percentile (0..100) with linear interpolation between order statistics.
double percentile(std::vector<double> values, double p);

}  // namespace compsim
