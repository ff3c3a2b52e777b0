#pragma once

#include <string>
#include <vector>

#include "compsim/config.hpp"

namespace compsim {

// Aggregated outcome of one experiment (one ResultsTable row).
struct RunResult {
  std::string scheme;
  int nUe = 0;
  int mBs = 0;
  int jMax = 0;
  int lMax = 0;  // effective cap (= N when unbounded)
  double beta = 0.0;
  double ntOverNe = 0.0;
  double cellRate = 0.0;
  double p5 = 0.0, p50 = 0.0, p95 = 0.0;
  std::vector<double> rankHistPct;  // 8 bins, l_k = 1..8, sums to 100
  double candP5 = 0.0, candMedian = 0.0, candP95 = 0.0;
  int drops = 0;
  int blocks = 0;
  std::uint64_t seed = 0;

  // Not emitted; kept for analysis (pooled UE rates across drops, per-drop
  // candidate counts).
  std::vector<double> pooledUeRates;
  std::vector<int> candCounts;
};

struct ResultsTable {
  std::vector<RunResult> rows;
};

// Full Monte-Carlo experiment: drops -> blocks -> plan/schedule/evaluate,
// deterministic in (cfg, masterSeed).
RunResult runExperiment(const SimConfig& cfg);

// Comma-separated output with a fixed header; floats at 6 significant digits.
void emitResults(const ResultsTable& table, const std::string& path);
std::string formatResults(const ResultsTable& table);

}  // namespace compsim
