#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "compsim/mumimo.hpp"
#include "compsim/topology.hpp"

namespace compsim {

struct Candidate {
  int id = -1;
  std::vector<int> bs;   // sorted ascending
  std::vector<int> ues;  // schedulable UEs, ascending
};

struct CandidateSet {
  std::vector<Candidate> clusters;
  int jMax = 0;
};

// All distinct sets {f_k(1), ..., f_k(u)} for u <= jMax, with the anchored
// UE sets attached. Pure function of (drop.bsOrder, jMax).
CandidateSet enumerateCandidates(const Drop& drop, int jMax);

// sum_{j=1}^{jMax} C(J, j); throws std::overflow_error if the exact count
// does not fit in 64 bits.
std::uint64_t exhaustiveClusterCount(int J, int jMax);

struct PackingInstance {
  int J = 0;
  std::vector<std::vector<int>> clusterBs;
  std::vector<double> weight;
};

// Greedy cluster selection: repeatedly pick the cluster maximizing
// weight/|J_c| (ties to the lowest id), drop everything overlapping it, until
// no candidates remain. Returns selected ids ascending.
std::vector<int> greedySetPacking(const PackingInstance& inst);

// Provably optimal selection by branch and bound; instances limited to
// |C| <= 25. Equal-objective ties prefer selecting.
std::vector<int> exactSetPacking(const PackingInstance& inst);

double packingObjective(const PackingInstance& inst,
                        const std::vector<int>& selection);
bool packingFeasible(const PackingInstance& inst,
                     const std::vector<int>& selection);

// Static baseline cluster maps.
std::vector<std::vector<int>> scpClusters(const Drop& drop);
std::vector<std::vector<int>> iscClusters(const Scenario& sc);
// Default cross-site map: for each inter-site gap, the three mutually-facing
// sectors of the three adjacent sites around it.
std::vector<std::vector<int>> scClusters(const Scenario& sc);

// Plain text map: one cluster per line, comma-separated BS indices (0-based).
// Must form a partition of {0..J-1}.
std::vector<std::vector<int>> loadClusterMap(const std::string& path, int J);

// Wraps a static (disjoint) cluster map as a CandidateSet, attaching every UE
// to its best cluster by total long-term gain.
CandidateSet staticCandidates(const Drop& drop,
                              const std::vector<std::vector<int>>& clusters);

// CU decision for one block.
struct GlobalSchedule {
  std::vector<int> selected;              // candidate ids, ascending
  std::vector<const ClusterPlan*> plans;  // aligned with `selected`
  std::vector<int> ues;                   // global scheduled set S, ascending
  std::vector<int> servingPlan;           // per entry of `ues`: index in plans
};

// Union of the selected clusters' scheduled sets. Throws std::logic_error if
// a UE appears in two selected clusters.
GlobalSchedule scheduledUeSet(const std::vector<int>& selection,
                              const std::vector<ClusterPlan>& plans);

}  // namespace compsim
