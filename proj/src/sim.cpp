#include "compsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "compsim/channel.hpp"
#include "compsim/clustering.hpp"
#include "compsim/eval.hpp"
#include "compsim/linalg.hpp"
#include "compsim/mumimo.hpp"
#include "compsim/rng.hpp"

namespace compsim {

namespace {

void formatDouble(std::ostream& os, double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  os << ss.str();
}

struct TraceSink {
  std::ofstream out;
  explicit TraceSink(const std::string& path) {
    if (path.empty()) return;
    out.open(path);
    if (!out) throw std::runtime_error("cannot open trace file " + path);
  }
  bool enabled() const { return out.is_open(); }
};

void tracePlans(TraceSink& sink, int drop, int t,
                const std::vector<ClusterPlan>& plans,
                const std::vector<int>& selection) {
  std::vector<char> sel;
  for (int id : selection) {
    if (id >= static_cast<int>(sel.size())) sel.resize(id + 1, 0);
    sel[id] = 1;
  }
  for (const ClusterPlan& p : plans) {
    sink.out << "drop=" << drop << " block=" << t << " cluster=" << p.clusterId
             << " bs=";
    for (std::size_t i = 0; i < p.bsSet.size(); ++i)
      sink.out << (i ? "," : "") << p.bsSet[i];
    sink.out << " rate=" << p.estRate << " selected="
             << (p.clusterId < static_cast<int>(sel.size()) &&
                         sel[p.clusterId]
                     ? 1
                     : 0)
             << " ues=";
    for (std::size_t i = 0; i < p.scheduledUes.size(); ++i)
      sink.out << (i ? "," : "") << p.scheduledUes[i] << ':' << p.rank[i];
    sink.out << '\n';
  }
}

}  // namespace

RunResult runExperiment(const SimConfig& cfg) {
  validateConfig(cfg);

  const Scenario sc = buildScenario(cfg.scenario);
  const int N = cfg.ueAntennas;
  const int J = sc.J();
  const CorrelationModel corr =
      cfg.beta > 0.0 ? CorrelationModel::toeplitzUe(cfg.beta, N, sc.M())
                     : CorrelationModel::identity(N, sc.M());
  const double overhead = cfg.overheadFactor();
  const double noise = sc.noisePower();
  const int effLMax = cfg.lMax > 0 ? cfg.lMax : N;

  TraceSink trace(cfg.traceFile);
  std::ofstream dropMetricsOut;
  if (!cfg.dropMetricsFile.empty()) {
    dropMetricsOut.open(cfg.dropMetricsFile);
    if (!dropMetricsOut)
      throw std::runtime_error("cannot open drop metrics file " +
                               cfg.dropMetricsFile);
    dropMetricsOut << "drop,cell_rate,p5,p50,p95\n";
  }

  RunResult res;
  res.scheme = toString(cfg.scheme);
  res.nUe = N;
  res.mBs = sc.M();
  res.jMax = cfg.jMax;
  res.lMax = effLMax;
  res.beta = cfg.beta;
  res.ntOverNe = cfg.nT > 0 ? static_cast<double>(cfg.nT) /
                                  static_cast<double>(cfg.blockLength())
                            : 0.0;
  res.drops = cfg.drops;
  res.blocks = cfg.blocks;
  res.seed = cfg.masterSeed;
  res.rankHistPct.assign(8, 0.0);

  std::vector<std::int64_t> rankCounts(8, 0);

  for (int d = 0; d < cfg.drops; ++d) {
    const std::uint64_t dropSeed =
        deriveSeed(cfg.masterSeed, seedtag::kDrop, static_cast<std::uint64_t>(d));
    const Drop drop = dropUes(sc, dropSeed);
    if (!cfg.dropDumpPrefix.empty())
      writeDrop(drop, cfg.dropDumpPrefix + std::to_string(d) + ".txt");

    CandidateSet candidates;
    switch (cfg.scheme) {
      case Scheme::Dc:
        candidates = enumerateCandidates(drop, cfg.jMax);
        break;
      case Scheme::Scp:
        candidates = staticCandidates(drop, scpClusters(drop));
        break;
      case Scheme::Isc:
        candidates = staticCandidates(drop, iscClusters(sc));
        break;
      case Scheme::Sc:
        candidates = staticCandidates(
            drop, cfg.clusterMapFile.empty()
                      ? scClusters(sc)
                      : loadClusterMap(cfg.clusterMapFile, J));
        break;
    }
    res.candCounts.push_back(static_cast<int>(candidates.clusters.size()));

    PfState pf = pfInit(drop, sc, cfg.pfGamma,
                        std::isnan(cfg.pfInitPowerDbm)
                            ? 0.0
                            : std::pow(10.0, cfg.pfInitPowerDbm / 10.0));

    std::vector<Eigen::VectorXd> blockRates;
    blockRates.reserve(cfg.blocks);

    std::vector<ClusterPlan> plans(candidates.clusters.size());
    for (int t = 0; t < cfg.blocks; ++t) {
      FadingBlock block = drawFading(drop, N, corr, dropSeed, t);
      if (cfg.csi == CsiMode::Estimated)
        estimateChannels(block, drop, corr, cfg.nT, sc.pUe(), noise, dropSeed);

      const Eigen::VectorXd alpha = pf.alpha();

      const int nCand = static_cast<int>(candidates.clusters.size());
#pragma omp parallel for schedule(dynamic)
      for (int c = 0; c < nCand; ++c) {
        const Candidate& cand = candidates.clusters[c];
        const ClusterContext ctx =
            makeClusterContext(cand.id, cand.bs, cand.ues, drop, sc, block);
        plans[c] = greedyEigenmodeSelect(ctx, alpha, effLMax, overhead);
      }

      std::vector<int> selection;
      if (cfg.scheme == Scheme::Dc) {
        PackingInstance inst;
        inst.J = J;
        inst.clusterBs.reserve(plans.size());
        inst.weight.reserve(plans.size());
        for (const ClusterPlan& p : plans) {
          inst.clusterBs.push_back(p.bsSet);
          inst.weight.push_back(p.estRate);
        }
        selection = greedySetPacking(inst);
      } else {
        selection.resize(plans.size());
        for (std::size_t i = 0; i < plans.size(); ++i)
          selection[i] = static_cast<int>(i);
      }

      const GlobalSchedule sched = scheduledUeSet(selection, plans);
      const BlockResult result = evaluateBlock(sched, block, noise, overhead);
      pfUpdate(pf, result.rates);

      if (t >= cfg.blocks / 2) {
        for (const ClusterPlan* p : sched.plans)
          for (int r : p->rank)
            if (r >= 1 && r <= 8) ++rankCounts[r - 1];
      }
      if (trace.enabled()) tracePlans(trace, d, t, plans, selection);
      blockRates.push_back(result.rates);
    }

    const Metrics m = computeMetrics(blockRates, J);
    for (int k = 0; k < m.ueRate.size(); ++k)
      res.pooledUeRates.push_back(m.ueRate(k));
    if (dropMetricsOut) {
      dropMetricsOut << d << ',';
      formatDouble(dropMetricsOut, m.cellRate);
      dropMetricsOut << ',';
      formatDouble(dropMetricsOut, m.p5);
      dropMetricsOut << ',';
      formatDouble(dropMetricsOut, m.p50);
      dropMetricsOut << ',';
      formatDouble(dropMetricsOut, m.p95);
      dropMetricsOut << '\n';
    }
  }

  const double cellDen = static_cast<double>(J) * cfg.drops;
  double total = 0.0;
  for (double r : res.pooledUeRates) total += r;
  res.cellRate = total / cellDen;
  res.p5 = percentile(res.pooledUeRates, 5.0);
  res.p50 = percentile(res.pooledUeRates, 50.0);
  res.p95 = percentile(res.pooledUeRates, 95.0);

  std::int64_t rankTotal = 0;
  for (std::int64_t c : rankCounts) rankTotal += c;
  if (rankTotal > 0)
    for (int i = 0; i < 8; ++i)
      res.rankHistPct[i] =
          100.0 * static_cast<double>(rankCounts[i]) / rankTotal;

  std::vector<double> cc(res.candCounts.begin(), res.candCounts.end());
  res.candP5 = percentile(cc, 5.0);
  res.candMedian = percentile(cc, 50.0);
  res.candP95 = percentile(cc, 95.0);
  return res;
}

std::string formatResults(const ResultsTable& table) {
  std::ostringstream os;
  os << "scheme,N,M,jmax,lmax,beta,nt_over_ne,cell_rate,p5,p50,p95";
  for (int i = 1; i <= 8; ++i) os << ",rank" << i << "_pct";
  os << ",cand_p5,cand_median,cand_p95,drops,blocks,seed\n";
  for (const RunResult& r : table.rows) {
    os << r.scheme << ',' << r.nUe << ',' << r.mBs << ',' << r.jMax << ','
       << r.lMax << ',';
    formatDouble(os, r.beta);
    os << ',';
    formatDouble(os, r.ntOverNe);
    os << ',';
    formatDouble(os, r.cellRate);
    os << ',';
    formatDouble(os, r.p5);
    os << ',';
    formatDouble(os, r.p50);
    os << ',';
    formatDouble(os, r.p95);
    for (double h : r.rankHistPct) {
      os << ',';
      formatDouble(os, h);
    }
    os << ',';
    formatDouble(os, r.candP5);
    os << ',';
    formatDouble(os, r.candMedian);
    os << ',';
    formatDouble(os, r.candP95);
    os << ',' << r.drops << ',' << r.blocks << ',' << r.seed << '\n';
  }
  return os.str();
}

void emitResults(const ResultsTable& table, const std::string& path) {
  if (table.rows.empty())
    throw std::invalid_argument("emitResults: empty table");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emitResults: cannot open " + path);
  out << formatResults(table);
  if (!out) throw std::runtime_error("emitResults: write failed for " + path);
}

}  // namespace compsim
