#pragma once

#include <vector>

#include <Eigen/Dense>

#include "compsim/channel.hpp"
#include "compsim/clustering.hpp"
#include "compsim/mumimo.hpp"

namespace compsim {

// Proportional-fair scheduler state. alpha_k = 1 / avgRate_k.
struct PfState {
  Eigen::VectorXd avgRate;  // strictly positive
  double gamma = 0.1;
  int t = 0;

  Eigen::VectorXd alpha() const { return avgRate.cwiseInverse(); }
};

// avgRate_k(1) = log2(1 + pBar * sigma^2_{k,anchor} / sigma_n^2).
// pBar defaults to the BS power when <= 0.
PfState pfInit(const Drop& drop, const Scenario& sc, double gamma = 0.1,
               double pBar = 0.0);

// avgRate <- (1-gamma) avgRate + gamma * blockRate (zero for unscheduled).
void pfUpdate(PfState& state, const Eigen::VectorXd& blockRates);

// Interference plus noise covariance at a UE with true channels; every
// selected cluster's transmission interferes.
Eigen::MatrixXcd interferenceCovariance(int ue, const GlobalSchedule& sched,
                                        const FadingBlock& block,
                                        double noisePower);

// Effective spectral efficiency of a scheduled UE (true channels, IRC+SIC):
// overhead * log2 det(I + H G P G^H H^H Psi^-1).
double achievedRate(int ue, const GlobalSchedule& sched,
                    const FadingBlock& block, double noisePower,
                    double overheadFactor);

struct BlockResult {
  std::vector<int> scheduled;  // S, ascending
  Eigen::VectorXd rates;       // K entries, zero for unscheduled
};

BlockResult evaluateBlock(const GlobalSchedule& sched, const FadingBlock& block,
                          double noisePower, double overheadFactor);

struct Metrics {
  Eigen::VectorXd ueRate;  // time-averaged rate per UE (last T/2 blocks)
  double cellRate = 0.0;
  double p5 = 0.0, p50 = 0.0, p95 = 0.0;
};

// Averages the last T/2 blocks of per-block rates; T must be even.
Metrics computeMetrics(const std::vector<Eigen::VectorXd>& blockRates, int J);

}  // namespace compsim
