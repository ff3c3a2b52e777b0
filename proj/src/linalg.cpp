#include "compsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace compsim {

Eigen::MatrixXcd psdSqrt(const Eigen::MatrixXcd& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("psdSqrt: eigendecomposition failed");
  Eigen::VectorXd lam = es.eigenvalues();
  const double floor = -tol * std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < floor)
      throw std::invalid_argument("psdSqrt: matrix is not positive semidefinite");
    lam(i) = std::max(lam(i), 0.0);
  }
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

Eigen::MatrixXcd pinvFullRowRank(const Eigen::MatrixXcd& m, double rankTol) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (smax <= 0.0 || sv(sv.size() - 1) < rankTol * smax)
    throw std::runtime_error("pinvFullRowRank: rank deficient matrix");
  return svd.matrixV() * sv.cwiseInverse().asDiagonal() *
         svd.matrixU().adjoint();
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty input");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  if (lo == hi) return values[lo];
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace compsim
