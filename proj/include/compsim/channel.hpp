#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "compsim/topology.hpp"

namespace compsim {

// Kronecker antenna correlation. Both matrices are Hermitian PSD with
// trace(R_BS) = M and trace(R_UE) = N.
struct CorrelationModel {
  Eigen::MatrixXcd rBs;
  Eigen::MatrixXcd rUe;

  static CorrelationModel identity(int nUe, int mBs);
  // Identity at the BS, symmetric Toeplitz [1, beta, ..., beta^(N-1)] at the
  // UE side.
  static CorrelationModel toeplitzUe(double beta, int nUe, int mBs);
};

// Block structure of the fading process.
struct CoherenceSpec {
  double dopplerHz = 5.0;
  double delaySpreadSec = 991e-9;
  long nE = 0;  // resource elements per block
  long nT = 0;  // pilot resource elements per block (0 = perfect-CSI phase)
};

// N_E = floor(W_C * T_C) with W_C = 1/delaySpread and T_C = 0.423/doppler.
long blockSize(double dopplerHz, double delaySpreadSec);

// Per-entry pilot observation noise variance N*sigma_n^2 / (N_T * P_UE).
double pilotNoiseVar(int nUeAntennas, long nT, double pUe, double noisePower);

// One fading block: true channels and, after estimation, their estimates.
struct FadingBlock {
  int t = 0;
  int N = 1;
  int M = 1;
  int K = 0;
  int J = 0;
  std::vector<Eigen::MatrixXcd> H;     // K*J entries, N x M
  std::vector<Eigen::MatrixXcd> Hhat;  // same layout; equals H in perfect CSI
  double estNoiseVar = 0.0;            // per-entry variance of the pilot noise

  const Eigen::MatrixXcd& h(int k, int j) const { return H[k * J + j]; }
  const Eigen::MatrixXcd& hhat(int k, int j) const { return Hhat[k * J + j]; }
  Eigen::MatrixXcd& h(int k, int j) { return H[k * J + j]; }
  Eigen::MatrixXcd& hhat(int k, int j) { return Hhat[k * J + j]; }
};

// Draws the true channels for block t. Entries of the white inner matrix are
// i.i.d. CN(0, sigma^2_{k,j}); correlation applied as
// R_UE^(1/2) Hbar (R_BS^(1/2))^H. Deterministic in (seed, t). Hhat is left
// equal to H (perfect-CSI default).
FadingBlock drawFading(const Drop& drop, int nUeAntennas,
                       const CorrelationModel& corr, std::uint64_t seed,
                       int t);

// Uplink pilot observations: H entry + CN(0, noiseVar) per entry.
// Requires nT >= N*K (orthogonal pilots).
std::vector<Eigen::MatrixXcd> observePilots(const FadingBlock& block, long nT,
                                            double noiseVar,
                                            std::uint64_t seed);

// Generic MMSE estimate from one observation matrix:
// vec(Hhat) = cov (cov + noiseVar I)^-1 vec(obs), column-major vec.
Eigen::MatrixXcd mmseEstimate(const Eigen::MatrixXcd& obs,
                              const Eigen::MatrixXcd& cov, double noiseVar);

// Channel covariance of vec(H) under the Kronecker model:
// sigma^2 * (R_BS^T kron R_UE).
Eigen::MatrixXcd kroneckerCovariance(double sigma2,
                                     const CorrelationModel& corr);

// Precomputed eigenbasis of the Kronecker covariance for the fast per-pair
// MMSE path used in the simulation loop (identical to mmseEstimate).
class KroneckerMmse {
 public:
  KroneckerMmse(const CorrelationModel& corr, double noiseVar);
  Eigen::MatrixXcd estimate(const Eigen::MatrixXcd& obs, double sigma2) const;

 private:
  Eigen::MatrixXcd uUe_, uBsT_;
  Eigen::VectorXd lamUe_, lamBsT_;
  double noiseVar_;
};

// Fills block.Hhat from pilot observations of every (k, j) pair, using the
// MMSE estimator with the Kronecker covariance. Sets block.estNoiseVar.
void estimateChannels(FadingBlock& block, const Drop& drop,
                      const CorrelationModel& corr, long nT, double pUe,
                      double noisePower, std::uint64_t seed);

}  // namespace compsim
