#include "compsim/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "compsim/linalg.hpp"

namespace compsim {

namespace {

double log2detPd(const Eigen::MatrixXcd& m) {
  Eigen::LLT<Eigen::MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log2detPd: matrix not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    acc += std::log2(l(i, i).real());
  return 2.0 * acc;
}

// True-channel effective matrix H_k G_m for a plan's scheduled entry.
Eigen::MatrixXcd effectiveChannel(int ue, const ClusterPlan& plan,
                                  int schedIdx, const FadingBlock& block) {
  const Eigen::MatrixXcd& g = plan.precoder[schedIdx];
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(block.N, g.cols());
  for (std::size_t b = 0; b < plan.bsSet.size(); ++b)
    e.noalias() += block.h(ue, plan.bsSet[b]) *
                   g.middleRows(static_cast<Eigen::Index>(b) * block.M,
                                block.M);
  return e;
}

}  // namespace

PfState pfInit(const Drop& drop, const Scenario& sc, double gamma,
               double pBar) {
  const double p = pBar > 0.0 ? pBar : sc.pBs();
  PfState st;
  st.gamma = gamma;
  st.t = 0;
  st.avgRate.resize(drop.K());
  for (int k = 0; k < drop.K(); ++k)
    st.avgRate(k) =
        std::log2(1.0 + p * drop.gain(k, drop.anchor[k]) / sc.noisePower());
  return st;
}

void pfUpdate(PfState& state, const Eigen::VectorXd& blockRates) {
  if (blockRates.size() != state.avgRate.size())
    throw std::invalid_argument("pfUpdate: rate vector size mismatch");
  state.avgRate = (1.0 - state.gamma) * state.avgRate +
                  state.gamma * blockRates;
  state.t += 1;
}

Eigen::MatrixXcd interferenceCovariance(int ue, const GlobalSchedule& sched,
                                        const FadingBlock& block,
                                        double noisePower) {
  Eigen::MatrixXcd psi =
      noisePower * Eigen::MatrixXcd::Identity(block.N, block.N);
  for (const ClusterPlan* plan : sched.plans) {
    for (std::size_t m = 0; m < plan->scheduledUes.size(); ++m) {
      if (plan->scheduledUes[m] == ue) continue;
      const Eigen::MatrixXcd e =
          effectiveChannel(ue, *plan, static_cast<int>(m), block);
      psi.noalias() += plan->streamPower * e * e.adjoint();
    }
  }
  return psi;
}

double achievedRate(int ue, const GlobalSchedule& sched,
                    const FadingBlock& block, double noisePower,
                    double overheadFactor) {
  const ClusterPlan* serving = nullptr;
  int schedIdx = -1;
  for (std::size_t i = 0; i < sched.ues.size(); ++i) {
    if (sched.ues[i] != ue) continue;
    serving = sched.plans[sched.servingPlan[i]];
    for (std::size_t m = 0; m < serving->scheduledUes.size(); ++m)
      if (serving->scheduledUes[m] == ue) schedIdx = static_cast<int>(m);
    break;
  }
  if (!serving || schedIdx < 0)
    throw std::invalid_argument("achievedRate: UE is not scheduled");

  const Eigen::MatrixXcd psi =
      interferenceCovariance(ue, sched, block, noisePower);
  const Eigen::MatrixXcd e = effectiveChannel(ue, *serving, schedIdx, block);
  Eigen::MatrixXcd sig = psi;
  sig.noalias() += serving->streamPower * e * e.adjoint();
  return overheadFactor * (log2detPd(sig) - log2detPd(psi));
}

BlockResult evaluateBlock(const GlobalSchedule& sched, const FadingBlock& block,
                          double noisePower, double overheadFactor) {
  BlockResult res;
  res.scheduled = sched.ues;
  res.rates = Eigen::VectorXd::Zero(block.K);
  for (int ue : sched.ues)
    res.rates(ue) = achievedRate(ue, sched, block, noisePower, overheadFactor);
  return res;
}

Metrics computeMetrics(const std::vector<Eigen::VectorXd>& blockRates, int J) {
  const int T = static_cast<int>(blockRates.size());
  if (T < 2 || T % 2 != 0)
    throw std::invalid_argument("computeMetrics: block count must be even");
  const int K = static_cast<int>(blockRates.front().size());

  Metrics m;
  m.ueRate = Eigen::VectorXd::Zero(K);
  for (int t = T / 2; t < T; ++t) m.ueRate += blockRates[t];
  m.ueRate *= 2.0 / static_cast<double>(T);
  m.cellRate = m.ueRate.sum() / static_cast<double>(J);

  std::vector<double> rates(m.ueRate.data(), m.ueRate.data() + K);
  m.p5 = percentile(rates, 5.0);
  m.p50 = percentile(rates, 50.0);
  m.p95 = percentile(rates, 95.0);
  return m;
}

}  // namespace compsim
