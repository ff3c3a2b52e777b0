#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <iostream>

#include "compsim/eval.hpp"
#include "compsim/rng.hpp"

using namespace compsim;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

Scenario smallScenario(int uesPerBs = 2) {
  ScenarioParams p;
  p.siteCount = 1;
  p.uesPerBs = uesPerBs;
  return buildScenario(p);
}

// Test-side effective channel H_k G_m, assembled independently of eval.cpp.
MatrixXcd effChannel(int ue, const ClusterPlan& plan, int schedIdx,
                     const FadingBlock& block) {
  const MatrixXcd& g = plan.precoder[schedIdx];
  MatrixXcd e = MatrixXcd::Zero(block.N, g.cols());
  for (std::size_t b = 0; b < plan.bsSet.size(); ++b)
    e += block.h(ue, plan.bsSet[b]) *
         g.middleRows(static_cast<Eigen::Index>(b) * block.M, block.M);
  return e;
}

// Sequential MMSE-SIC: decode stream i treating streams > i as interference,
// then subtract. Chain rule makes the sum equal the determinant rate.
double sicStreamSum(const MatrixXcd& e, double p, const MatrixXcd& psi) {
  const Eigen::Index l = e.cols();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < l; ++i) {
    MatrixXcd cov = psi;
    for (Eigen::Index j = i + 1; j < l; ++j)
      cov += p * e.col(j) * e.col(j).adjoint();
    const double sinr = p * (e.col(i).adjoint() * cov.inverse() * e.col(i))(0, 0)
                            .real();
    sum += std::log2(1.0 + sinr);
  }
  return sum;
}

struct Pipeline {
  Scenario sc;
  Drop drop;
  FadingBlock block;
  std::vector<ClusterPlan> plans;
  GlobalSchedule sched;
};

// Plans every anchor singleton and schedules all of them (SCP-style), giving
// schedules with genuine inter-cluster interference.
Pipeline makePipeline(int uesPerBs, int nUe, std::uint64_t seed, int t,
                      int lMax = 0) {
  Pipeline p{smallScenario(uesPerBs), {}, {}, {}, {}};
  p.drop = dropUes(p.sc, seed);
  const auto corr = CorrelationModel::identity(nUe, p.sc.M());
  p.block = drawFading(p.drop, nUe, corr, seed, t);
  const CandidateSet cands = staticCandidates(p.drop, scpClusters(p.drop));
  const VectorXd alpha = VectorXd::Ones(p.drop.K());
  std::vector<int> selection;
  for (const Candidate& c : cands.clusters) {
    const ClusterContext ctx =
        makeClusterContext(c.id, c.bs, c.ues, p.drop, p.sc, p.block);
    p.plans.push_back(greedyEigenmodeSelect(ctx, alpha, lMax, 1.0));
    selection.push_back(c.id);
  }
  p.sched = scheduledUeSet(selection, p.plans);
  return p;
}

}  // namespace

TEST_CASE("interferenceCovariance: single scheduled UE sees only noise") {
  ClusterPlan plan;
  plan.clusterId = 0;
  plan.bsSet = {0};
  plan.scheduledUes = {0};
  plan.rank = {1};
  plan.precoder = {MatrixXcd::Ones(1, 1)};
  plan.streamPower = 3.0;
  std::vector<ClusterPlan> plans{plan};
  const GlobalSchedule sched = scheduledUeSet({0}, plans);

  FadingBlock block;
  block.N = 2;
  block.M = 1;
  block.K = 1;
  block.J = 1;
  block.H = {MatrixXcd::Ones(2, 1)};
  block.Hhat = block.H;

  const MatrixXcd psi = interferenceCovariance(0, sched, block, 0.7);
  CHECK((psi - 0.7 * MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("interferenceCovariance: zero-power interferer adds nothing") {
  Pipeline p = makePipeline(2, 2, 5, 0);
  // Zero out every plan's power: covariance must collapse to noise.
  for (ClusterPlan& plan : p.plans) plan.streamPower = 0.0;
  const GlobalSchedule sched = scheduledUeSet(p.sched.selected, p.plans);
  const int ue = sched.ues.front();
  const MatrixXcd psi =
      interferenceCovariance(ue, sched, p.block, p.sc.noisePower());
  CHECK((psi - p.sc.noisePower() * MatrixXcd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-18);
}

TEST_CASE("interferenceCovariance: Hermitian PD, matches independent sum") {
  Pipeline p = makePipeline(2, 2, 7, 1);
  for (int ue : p.sched.ues) {
    const MatrixXcd psi =
        interferenceCovariance(ue, p.sched, p.block, p.sc.noisePower());
    CHECK((psi - psi.adjoint()).cwiseAbs().maxCoeff() < 1e-18);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(psi);
    CHECK(es.eigenvalues().minCoeff() >= p.sc.noisePower() - 1e-12);

    // Independent accumulation in reverse plan/stream order.
    MatrixXcd ref = p.sc.noisePower() * MatrixXcd::Identity(2, 2);
    for (auto it = p.sched.plans.rbegin(); it != p.sched.plans.rend(); ++it) {
      const ClusterPlan* plan = *it;
      for (int m = static_cast<int>(plan->scheduledUes.size()) - 1; m >= 0;
           --m) {
        if (plan->scheduledUes[m] == ue) continue;
        const MatrixXcd e = effChannel(ue, *plan, m, p.block);
        for (Eigen::Index col = e.cols() - 1; col >= 0; --col)
          ref += plan->streamPower * e.col(col) * e.col(col).adjoint();
      }
    }
    CHECK((psi - ref).cwiseAbs().maxCoeff() <
          1e-12 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("achievedRate: scalar case log2(4) = 2 bit/s/Hz") {
  // N=1, no interference, P |h g|^2 / noise = 3.
  ClusterPlan plan;
  plan.clusterId = 0;
  plan.bsSet = {0};
  plan.scheduledUes = {0};
  plan.rank = {1};
  plan.precoder = {MatrixXcd::Ones(1, 1)};
  plan.streamPower = 3.0;
  std::vector<ClusterPlan> plans{plan};
  const GlobalSchedule sched = scheduledUeSet({0}, plans);

  FadingBlock block;
  block.N = 1;
  block.M = 1;
  block.K = 1;
  block.J = 1;
  block.H = {MatrixXcd::Ones(1, 1)};
  block.Hhat = block.H;

  const double oh = 0.8;
  CHECK(achievedRate(0, sched, block, 1.0, oh) ==
        doctest::Approx(oh * 2.0).epsilon(1e-12));

  plans[0].streamPower = 0.0;
  const GlobalSchedule sched0 = scheduledUeSet({0}, plans);
  CHECK(achievedRate(0, sched0, block, 1.0, oh) == doctest::Approx(0.0));
}

TEST_CASE("rate identity: determinant rate equals MMSE-SIC stream sum") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Pipeline p = makePipeline(3, 2, seed, static_cast<int>(seed));
    for (std::size_t i = 0; i < p.sched.ues.size(); ++i) {
      const int ue = p.sched.ues[i];
      const ClusterPlan& plan = *p.sched.plans[p.sched.servingPlan[i]];
      int idx = 0;
      while (plan.scheduledUes[idx] != ue) ++idx;
      const MatrixXcd psi =
          interferenceCovariance(ue, p.sched, p.block, p.sc.noisePower());
      const MatrixXcd e = effChannel(ue, plan, idx, p.block);
      const double det = achievedRate(ue, p.sched, p.block,
                                      p.sc.noisePower(), 1.0);
      const double sic = sicStreamSum(e, plan.streamPower, psi);
      CHECK(det == doctest::Approx(sic).epsilon(1e-9));
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("evaluateBlock: unscheduled UEs get exactly zero") {
  Pipeline p = makePipeline(2, 1, 9, 2);
  const BlockResult r =
      evaluateBlock(p.sched, p.block, p.sc.noisePower(), 1.0);
  CHECK(r.rates.size() == p.drop.K());
  for (int k = 0; k < p.drop.K(); ++k) {
    const bool scheduled =
        std::find(r.scheduled.begin(), r.scheduled.end(), k) !=
        r.scheduled.end();
    if (scheduled)
      CHECK(r.rates(k) > 0.0);
    else
      CHECK(r.rates(k) == 0.0);
  }
}

TEST_CASE("pfUpdate: paper's exponential average") {
  PfState st;
  st.avgRate = VectorXd::Ones(1);
  st.gamma = 0.1;
  VectorXd r(1);
  r << 2.0;
  pfUpdate(st, r);
  CHECK(st.avgRate(0) == doctest::Approx(1.1));
  CHECK(st.t == 1);

  // Fixed point.
  st.avgRate(0) = 3.0;
  r << 3.0;
  pfUpdate(st, r);
  CHECK(st.avgRate(0) == doctest::Approx(3.0));

  // gamma = 0 freezes the average.
  st.gamma = 0.0;
  r << 100.0;
  pfUpdate(st, r);
  CHECK(st.avgRate(0) == doctest::Approx(3.0));
}

TEST_CASE("pfInit: anchor-gain initialization and alpha identity") {
  Drop drop;
  drop.uePos = {{0, 0}, {0, 0}};
  drop.gain.resize(2, 3);
  drop.gain << 4.0, 1.0, 0.5, 0.25, 8.0, 2.0;
  drop.bsOrder = {{0, 1, 2}, {1, 2, 0}};
  drop.anchor = {0, 1};
  const Scenario sc = smallScenario();

  // pBar chosen so pBar * gain / noise = 1 for UE 0.
  const double pBar = sc.noisePower() / 4.0;
  const PfState st = pfInit(drop, sc, 0.1, pBar);
  CHECK(st.avgRate(0) == doctest::Approx(1.0));
  // Stronger anchor -> larger initial average rate.
  CHECK(st.avgRate(1) > st.avgRate(0));
  const VectorXd alpha = st.alpha();
  for (int k = 0; k < 2; ++k)
    CHECK(alpha(k) * st.avgRate(k) == doctest::Approx(1.0).epsilon(1e-15));

  // Default pBar is the BS power.
  const PfState def = pfInit(drop, sc, 0.1);
  CHECK(def.avgRate(0) ==
        doctest::Approx(std::log2(1.0 + sc.pBs() * 4.0 / sc.noisePower())));
}

TEST_CASE("computeMetrics: constant rates, zeros, and a hand-built trace") {
  std::vector<VectorXd> blocks(4, VectorXd::Constant(2, 1.5));
  const Metrics m = computeMetrics(blocks, 3);
  CHECK(m.ueRate(0) == doctest::Approx(1.5));
  CHECK(m.cellRate == doctest::Approx(2.0 * 1.5 / 3.0));

  std::vector<VectorXd> zero(6, VectorXd::Zero(4));
  CHECK(computeMetrics(zero, 2).cellRate == 0.0);

  // Hand-built 4-block trace: only blocks 3 and 4 count.
  // UE0: (0.0, 9.0, 1.0, 3.0) -> mean of last two = 2.0
  // UE1: (5.0, 5.0, 4.0, 0.0) -> 2.0
  std::vector<VectorXd> trace(4, VectorXd::Zero(2));
  trace[0] << 0.0, 5.0;
  trace[1] << 9.0, 5.0;
  trace[2] << 1.0, 4.0;
  trace[3] << 3.0, 0.0;
  const Metrics t = computeMetrics(trace, 2);
  CHECK(t.ueRate(0) == doctest::Approx(2.0));
  CHECK(t.ueRate(1) == doctest::Approx(2.0));
  CHECK(t.cellRate == doctest::Approx(2.0));

  std::vector<VectorXd> odd(3, VectorXd::Zero(1));
  CHECK_THROWS_AS(computeMetrics(odd, 1), std::invalid_argument);
}

TEST_CASE("tiny-instance sanity anchor: pipeline matches grid brute force") {
  // J=2 single-antenna BSs, K=2 single-antenna UEs, perfect CSI, the full
  // network as one cluster. Exhaustive eigenmode selection through the public
  // ops must match a fine grid search over unit precoders within 2%.
  Rng rng(31);
  const double noise = 1.0;
  const double pBs = 25.0;

  ClusterContext ctx;
  ctx.clusterId = 0;
  ctx.bsSet = {0, 1};
  ctx.ues = {0, 1};
  ctx.noisePower = noise;
  ctx.pBs = pBs;
  ctx.mPerBs = 1;
  ctx.nUe = 1;
  for (int u = 0; u < 2; ++u) {
    MatrixXcd h(1, 2);
    rng.fillComplexGaussian(h, 1.0);
    ctx.hhat.push_back(h);
    ctx.xi.push_back(0.0);  // cluster covers the whole network
  }
  const VectorXd alpha = VectorXd::Ones(2);

  // Pipeline side: exhaustive subset search over the (two) eigenmodes.
  std::vector<Eigenmode> pool;
  for (int u = 0; u < 2; ++u)
    pool.push_back(eigenmodes(ctx.hhat[u], 0, u)[0]);
  double pipeline = 0.0;
  for (int mask = 1; mask < 4; ++mask) {
    std::vector<Eigenmode> sel;
    for (int i = 0; i < 2; ++i)
      if (mask & (1 << i)) sel.push_back(pool[i]);
    try {
      auto pre = metPrecoder(sel);
      const double p = equalPower(pre, 1, pBs);
      // Perfect CSI + full-network cluster: the estimate is the achieved rate.
      pipeline = std::max(pipeline,
                          estimatedClusterRate(ctx, pre, p, alpha, 1.0));
    } catch (const std::runtime_error&) {
    }
  }

  // Brute force over schedules and a precoder grid.
  const int nT = 48, nP = 96;
  auto gridVec = [&](int it, int ip) {
    const double th = it * (M_PI / 2.0) / (nT - 1);
    const double ph = ip * (2.0 * M_PI) / nP;
    VectorXcd g(2);
    g << std::cos(th),
        std::sin(th) * std::exp(std::complex<double>(0.0, ph));
    return g;
  };
  auto singleRate = [&](int u, const VectorXcd& g) {
    const double load = std::max(std::norm(g(0)), std::norm(g(1)));
    const double p = pBs / load;
    const std::complex<double> hg = (ctx.hhat[u] * g)(0, 0);
    return std::log2(1.0 + p * std::norm(hg) / noise);
  };
  double brute = 0.0;
  for (int u = 0; u < 2; ++u)
    for (int it = 0; it < nT; ++it)
      for (int ip = 0; ip < nP; ++ip)
        brute = std::max(brute, singleRate(u, gridVec(it, ip)));
  for (int it1 = 0; it1 < nT; ++it1)
    for (int ip1 = 0; ip1 < nP; ++ip1) {
      const VectorXcd g1 = gridVec(it1, ip1);
      for (int it2 = 0; it2 < nT; ++it2)
        for (int ip2 = 0; ip2 < nP; ++ip2) {
          const VectorXcd g2 = gridVec(it2, ip2);
          const double l0 = std::norm(g1(0)) + std::norm(g2(0));
          const double l1 = std::norm(g1(1)) + std::norm(g2(1));
          const double p = pBs / std::max(l0, l1);
          const std::complex<double> h00 = (ctx.hhat[0] * g1)(0, 0);
          const std::complex<double> h01 = (ctx.hhat[0] * g2)(0, 0);
          const std::complex<double> h11 = (ctx.hhat[1] * g2)(0, 0);
          const std::complex<double> h10 = (ctx.hhat[1] * g1)(0, 0);
          const double r0 = std::log2(
              1.0 + p * std::norm(h00) / (noise + p * std::norm(h01)));
          const double r1 = std::log2(
              1.0 + p * std::norm(h11) / (noise + p * std::norm(h10)));
          brute = std::max(brute, r0 + r1);
        }
    }

  CHECK(pipeline == doctest::Approx(brute).epsilon(0.02));

  // The actual greedy lands in the same place on this instance.
  const ClusterPlan plan = greedyEigenmodeSelect(ctx, alpha, 0, 1.0);
  CHECK(plan.estRate == doctest::Approx(pipeline).epsilon(1e-9));
}

TEST_CASE("PF reduces the rate spread versus max-rate weights") {
  const Scenario sc = smallScenario(2);  // K = 6
  const Drop drop = dropUes(sc, 77);
  const auto corr = CorrelationModel::identity(1, sc.M());
  const CandidateSet cands = staticCandidates(drop, scpClusters(drop));
  const int T = 300;

  auto run = [&](bool pfWeights) {
    PfState pf = pfInit(drop, sc, 0.1);
    VectorXd accum = VectorXd::Zero(drop.K());
    std::vector<int> selection(cands.clusters.size());
    for (std::size_t i = 0; i < selection.size(); ++i)
      selection[i] = static_cast<int>(i);
    for (int t = 0; t < T; ++t) {
      const FadingBlock block = drawFading(drop, 1, corr, drop.seed, t);
      const VectorXd alpha =
          pfWeights ? pf.alpha() : VectorXd::Ones(drop.K()).eval();
      std::vector<ClusterPlan> plans;
      for (const Candidate& c : cands.clusters) {
        const ClusterContext ctx =
            makeClusterContext(c.id, c.bs, c.ues, drop, sc, block);
        plans.push_back(greedyEigenmodeSelect(ctx, alpha, 0, 1.0));
      }
      const GlobalSchedule sched = scheduledUeSet(selection, plans);
      const BlockResult r = evaluateBlock(sched, block, sc.noisePower(), 1.0);
      pfUpdate(pf, r.rates);
      if (t >= T / 2) accum += r.rates;
    }
    accum *= 2.0 / T;
    const double mean = accum.mean();
    const double sd =
        std::sqrt((accum.array() - mean).square().sum() / accum.size());
    return sd / mean;
  };

  const double covPf = run(true);
  const double covMax = run(false);
  std::cout << "coefficient of variation: pf=" << covPf
            << " maxrate=" << covMax << "\n";
  CHECK(covPf < covMax);
}
