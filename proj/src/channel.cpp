#include "compsim/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "compsim/linalg.hpp"
#include "compsim/rng.hpp"

namespace compsim {

CorrelationModel CorrelationModel::identity(int nUe, int mBs) {
  return {Eigen::MatrixXcd::Identity(mBs, mBs),
          Eigen::MatrixXcd::Identity(nUe, nUe)};
}

CorrelationModel CorrelationModel::toeplitzUe(double beta, int nUe, int mBs) {
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("toeplitzUe: beta must be in [0, 1)");
  Eigen::MatrixXcd rUe(nUe, nUe);
  for (int i = 0; i < nUe; ++i)
    for (int j = 0; j < nUe; ++j)
      rUe(i, j) = std::pow(beta, std::abs(i - j));
  return {Eigen::MatrixXcd::Identity(mBs, mBs), rUe};
}

long blockSize(double dopplerHz, double delaySpreadSec) {
  if (dopplerHz <= 0.0 || delaySpreadSec <= 0.0)
    throw std::invalid_argument("blockSize: inputs must be positive");
  return static_cast<long>(std::floor(0.423 / (dopplerHz * delaySpreadSec)));
}

double pilotNoiseVar(int nUeAntennas, long nT, double pUe, double noisePower) {
  if (nT <= 0) throw std::invalid_argument("pilotNoiseVar: nT must be positive");
  return static_cast<double>(nUeAntennas) * noisePower /
         (static_cast<double>(nT) * pUe);
}

FadingBlock drawFading(const Drop& drop, int nUeAntennas,
                       const CorrelationModel& corr, std::uint64_t seed,
                       int t) {
  const int K = drop.K();
  const int J = drop.J();
  const int N = nUeAntennas;
  const int M = static_cast<int>(corr.rBs.rows());
  if (corr.rUe.rows() != N)
    throw std::invalid_argument("drawFading: rUe size does not match N");

  const bool ueWhite = corr.rUe.isIdentity(1e-14);
  const bool bsWhite = corr.rBs.isIdentity(1e-14);
  Eigen::MatrixXcd ueSqrt, bsSqrtAdj;
  if (!ueWhite) ueSqrt = psdSqrt(corr.rUe);
  if (!bsWhite) bsSqrtAdj = psdSqrt(corr.rBs).adjoint();

  FadingBlock block;
  block.t = t;
  block.N = N;
  block.M = M;
  block.K = K;
  block.J = J;
  block.H.resize(static_cast<std::size_t>(K) * J);
  Rng rng(deriveSeed(seed, seedtag::kFading, static_cast<std::uint64_t>(t)));
  Eigen::MatrixXcd white(N, M);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < J; ++j) {
      rng.fillComplexGaussian(white, drop.gain(k, j));
      Eigen::MatrixXcd& h = block.h(k, j);
      if (ueWhite && bsWhite)
        h = white;
      else if (ueWhite)
        h = white * bsSqrtAdj;
      else if (bsWhite)
        h = ueSqrt * white;
      else
        h = ueSqrt * white * bsSqrtAdj;
    }
  }
  block.Hhat = block.H;
  return block;
}

std::vector<Eigen::MatrixXcd> observePilots(const FadingBlock& block, long nT,
                                            double noiseVar,
                                            std::uint64_t seed) {
  if (nT < static_cast<long>(block.N) * block.K)
    throw std::invalid_argument(
        "observePilots: nT < N*K violates pilot orthogonality");
  Rng rng(deriveSeed(seed, seedtag::kPilot, static_cast<std::uint64_t>(block.t)));
  std::vector<Eigen::MatrixXcd> obs(block.H.size());
  Eigen::MatrixXcd noise(block.N, block.M);
  for (std::size_t i = 0; i < block.H.size(); ++i) {
    rng.fillComplexGaussian(noise, noiseVar);
    obs[i] = block.H[i] + noise;
  }
  return obs;
}

Eigen::MatrixXcd mmseEstimate(const Eigen::MatrixXcd& obs,
                              const Eigen::MatrixXcd& cov, double noiseVar) {
  if (noiseVar <= 0.0)
    throw std::invalid_argument("mmseEstimate: noiseVar must be positive");
  const Eigen::Index mn = obs.size();
  if (cov.rows() != mn || cov.cols() != mn)
    throw std::invalid_argument("mmseEstimate: covariance size mismatch");
  Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(obs.data(), mn);
  Eigen::MatrixXcd a = cov;
  a.diagonal().array() += noiseVar;
  Eigen::VectorXcd est = cov * a.llt().solve(v);
  return Eigen::Map<Eigen::MatrixXcd>(est.data(), obs.rows(), obs.cols());
}

Eigen::MatrixXcd kroneckerCovariance(double sigma2,
                                     const CorrelationModel& corr) {
  const Eigen::MatrixXcd a = corr.rBs.transpose();
  const Eigen::MatrixXcd& b = corr.rUe;
  const Eigen::Index m = a.rows(), n = b.rows();
  Eigen::MatrixXcd out(m * n, m * n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      out.block(i * n, j * n, n, n) = sigma2 * a(i, j) * b;
  return out;
}

KroneckerMmse::KroneckerMmse(const CorrelationModel& corr, double noiseVar)
    : noiseVar_(noiseVar) {
  if (noiseVar <= 0.0)
    throw std::invalid_argument("KroneckerMmse: noiseVar must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esUe(corr.rUe);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esBs(
      corr.rBs.transpose().eval());
  uUe_ = esUe.eigenvectors();
  lamUe_ = esUe.eigenvalues().cwiseMax(0.0);
  uBsT_ = esBs.eigenvectors();
  lamBsT_ = esBs.eigenvalues().cwiseMax(0.0);
}

Eigen::MatrixXcd KroneckerMmse::estimate(const Eigen::MatrixXcd& obs,
                                         double sigma2) const {
  // Eigen-domain shrinkage: identical to mmseEstimate with the Kronecker
  // covariance sigma^2 (R_BS^T kron R_UE), column-major vectorization.
  Eigen::MatrixXcd m = uUe_.adjoint() * obs * uBsT_.conjugate();
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double lam = sigma2 * lamUe_(r) * lamBsT_(c);
      m(r, c) *= lam / (lam + noiseVar_);
    }
  return uUe_ * m * uBsT_.transpose();
}

void estimateChannels(FadingBlock& block, const Drop& drop,
                      const CorrelationModel& corr, long nT, double pUe,
                      double noisePower, std::uint64_t seed) {
  const double v = pilotNoiseVar(block.N, nT, pUe, noisePower);
  const auto obs = observePilots(block, nT, v, seed);
  const KroneckerMmse est(corr, v);
  for (int k = 0; k < block.K; ++k)
    for (int j = 0; j < block.J; ++j)
      block.hhat(k, j) = est.estimate(obs[k * block.J + j], drop.gain(k, j));
  block.estNoiseVar = v;
}

}  // namespace compsim
