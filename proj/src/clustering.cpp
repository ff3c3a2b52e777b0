#include "compsim/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace compsim {

namespace {

// Multi-word BS membership masks keep overlap tests cheap for any J.
std::vector<std::uint64_t> bsMask(const std::vector<int>& bs, int J) {
  std::vector<std::uint64_t> mask((J + 63) / 64, 0);
  for (int j : bs) {
    if (j < 0 || j >= J)
      throw std::invalid_argument("set packing: BS index out of range");
    mask[j / 64] |= 1ULL << (j % 64);
  }
  return mask;
}

bool overlaps(const std::vector<std::uint64_t>& a,
              const std::vector<std::uint64_t>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] & b[i]) return true;
  return false;
}

double wrappedAngle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a - M_PI;
}

}  // namespace

CandidateSet enumerateCandidates(const Drop& drop, int jMax) {
  const int J = drop.J();
  if (jMax < 1 || jMax > J)
    throw std::invalid_argument("enumerateCandidates: jMax out of range");

  CandidateSet set;
  set.jMax = jMax;
  // Stable ids: order of first appearance over (k, u).
  std::map<std::vector<int>, int> seen;
  for (int k = 0; k < drop.K(); ++k) {
    std::vector<int> bs;
    for (int u = 1; u <= jMax; ++u) {
      bs.push_back(drop.bsOrder[k][u - 1]);
      std::vector<int> key = bs;
      std::sort(key.begin(), key.end());
      if (seen.find(key) != seen.end()) continue;
      const int id = static_cast<int>(set.clusters.size());
      seen.emplace(key, id);
      set.clusters.push_back({id, std::move(key), {}});
    }
  }

  // Anchored UE sets.
  std::vector<std::vector<int>> anchored(J);
  for (int k = 0; k < drop.K(); ++k) anchored[drop.anchor[k]].push_back(k);
  for (Candidate& c : set.clusters) {
    for (int j : c.bs)
      c.ues.insert(c.ues.end(), anchored[j].begin(), anchored[j].end());
    std::sort(c.ues.begin(), c.ues.end());
  }
  return set;
}

std::uint64_t exhaustiveClusterCount(int J, int jMax) {
  if (J < 1 || jMax < 1 || jMax > J)
    throw std::invalid_argument("exhaustiveClusterCount: bad arguments");
  using U128 = unsigned __int128;
  constexpr U128 kMax64 = std::numeric_limits<std::uint64_t>::max();
  U128 total = 0;
  U128 binom = 1;  // C(J, 0)
  for (int j = 1; j <= jMax; ++j) {
    // C(J, j) = C(J, j-1) * (J - j + 1) / j, exact at every step.
    if (binom > kMax64 * 2)
      throw std::overflow_error("exhaustiveClusterCount: count exceeds 64 bits");
    binom = binom * static_cast<U128>(J - j + 1) / static_cast<U128>(j);
    total += binom;
    if (total > kMax64)
      throw std::overflow_error("exhaustiveClusterCount: count exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(total);
}

std::vector<int> greedySetPacking(const PackingInstance& inst) {
  const std::size_t n = inst.clusterBs.size();
  if (inst.weight.size() != n)
    throw std::invalid_argument("greedySetPacking: weight size mismatch");
  for (double w : inst.weight)
    if (w < 0.0 || !std::isfinite(w))
      throw std::invalid_argument("greedySetPacking: weights must be >= 0");

  std::vector<std::vector<std::uint64_t>> masks(n);
  std::vector<double> perBs(n);
  for (std::size_t c = 0; c < n; ++c) {
    if (inst.clusterBs[c].empty())
      throw std::invalid_argument("greedySetPacking: empty cluster");
    masks[c] = bsMask(inst.clusterBs[c], inst.J);
    perBs[c] = inst.weight[c] / static_cast<double>(inst.clusterBs[c].size());
  }

  std::vector<char> active(n, 1);
  std::vector<int> selected;
  for (;;) {
    int best = -1;
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c]) continue;
      if (best < 0 ||
          perBs[c] > perBs[best] + 1e-12 * std::max(1.0, std::abs(perBs[best])))
        best = static_cast<int>(c);
    }
    if (best < 0) break;
    selected.push_back(best);
    for (std::size_t c = 0; c < n; ++c)
      if (active[c] && overlaps(masks[c], masks[best])) active[c] = 0;
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

namespace {

struct BnB {
  const PackingInstance& inst;
  std::vector<std::vector<std::uint64_t>> masks;
  std::vector<double> suffixSum;
  std::vector<int> current, best;
  double currentW = 0.0;
  double bestW = -std::numeric_limits<double>::infinity();

  explicit BnB(const PackingInstance& i) : inst(i) {
    const std::size_t n = inst.clusterBs.size();
    masks.resize(n);
    for (std::size_t c = 0; c < n; ++c) masks[c] = bsMask(inst.clusterBs[c], inst.J);
    suffixSum.assign(n + 1, 0.0);
    for (std::size_t c = n; c-- > 0;)
      suffixSum[c] = suffixSum[c + 1] + inst.weight[c];
  }

  void run(std::size_t c, std::vector<std::uint64_t>& usedMask) {
    if (c == inst.clusterBs.size()) {
      if (currentW > bestW) {
        bestW = currentW;
        best = current;
      }
      return;
    }
    if (currentW + suffixSum[c] <= bestW) return;  // cannot strictly improve
    // Include first so that equal-objective ties keep the selection.
    if (!overlaps(usedMask, masks[c])) {
      for (std::size_t i = 0; i < usedMask.size(); ++i) usedMask[i] |= masks[c][i];
      current.push_back(static_cast<int>(c));
      currentW += inst.weight[c];
      run(c + 1, usedMask);
      currentW -= inst.weight[c];
      current.pop_back();
      for (std::size_t i = 0; i < usedMask.size(); ++i) usedMask[i] &= ~masks[c][i];
    }
    run(c + 1, usedMask);
  }
};

}  // namespace

std::vector<int> exactSetPacking(const PackingInstance& inst) {
  const std::size_t n = inst.clusterBs.size();
  if (inst.weight.size() != n)
    throw std::invalid_argument("exactSetPacking: weight size mismatch");
  if (n > 25)
    throw std::invalid_argument("exactSetPacking: instance above search bound");
  for (double w : inst.weight)
    if (w < 0.0 || !std::isfinite(w))
      throw std::invalid_argument("exactSetPacking: weights must be >= 0");
  BnB bnb(inst);
  std::vector<std::uint64_t> used((inst.J + 63) / 64, 0);
  bnb.run(0, used);
  std::sort(bnb.best.begin(), bnb.best.end());
  return bnb.best;
}

double packingObjective(const PackingInstance& inst,
                        const std::vector<int>& selection) {
  double sum = 0.0;
  for (int c : selection) sum += inst.weight.at(c);
  return sum;
}

bool packingFeasible(const PackingInstance& inst,
                     const std::vector<int>& selection) {
  std::vector<int> count(inst.J, 0);
  for (int c : selection)
    for (int j : inst.clusterBs.at(c))
      if (++count.at(j) > 1) return false;
  return true;
}

std::vector<std::vector<int>> scpClusters(const Drop& drop) {
  std::vector<char> hasUe(drop.J(), 0);
  for (int a : drop.anchor) hasUe[a] = 1;
  std::vector<std::vector<int>> out;
  for (int j = 0; j < drop.J(); ++j)
    if (hasUe[j]) out.push_back({j});
  return out;
}

std::vector<std::vector<int>> iscClusters(const Scenario& sc) {
  std::vector<std::vector<int>> out;
  for (int s = 0; s < static_cast<int>(sc.sitePos.size()); ++s) {
    std::vector<int> cluster;
    for (int j = 0; j < sc.J(); ++j)
      if (sc.bs[j].site == s) cluster.push_back(j);
    out.push_back(std::move(cluster));
  }
  return out;
}

std::vector<std::vector<int>> scClusters(const Scenario& sc) {
  if (sc.sitePos.size() != 7)
    throw std::invalid_argument(
        "scClusters: default map requires the 7-site layout; provide a "
        "cluster-map file otherwise");
  const double d = sc.params.interSiteDistance;

  // Minimal-image location of the site adjacent to `from` in direction `a`.
  auto neighborAt = [&](int from, double a) -> std::pair<int, Vec2> {
    const Vec2 target{sc.sitePos[from].x + d * std::cos(a),
                      sc.sitePos[from].y + d * std::sin(a)};
    for (int s = 0; s < static_cast<int>(sc.sitePos.size()); ++s)
      for (const Vec2& t : sc.wrapTranslations) {
        const Vec2 img = sc.sitePos[s] + t;
        if (norm(img - target) < 1e-6 * d) return {s, img};
      }
    throw std::logic_error("scClusters: wraparound neighbor not found");
  };

  std::map<std::vector<int>, std::vector<int>> clusters;  // site triple -> BSs
  for (int s = 0; s < 7; ++s) {
    for (int g = 0; g < 3; ++g) {
      // Gap centroids at 30, 150, 270 degrees; the two sites flanking the gap.
      const double gap = M_PI / 6.0 + g * 2.0 * M_PI / 3.0;
      const auto [s1, img1] = neighborAt(s, gap - M_PI / 6.0);
      const auto [s2, img2] = neighborAt(s, gap + M_PI / 6.0);
      const Vec2 centroid{(sc.sitePos[s].x + img1.x + img2.x) / 3.0,
                          (sc.sitePos[s].y + img1.y + img2.y) / 3.0};
      std::vector<int> key{s, s1, s2};
      std::sort(key.begin(), key.end());
      // Sector of site s facing the gap centroid.
      const double dir = std::atan2(centroid.y - sc.sitePos[s].y,
                                    centroid.x - sc.sitePos[s].x);
      int bestBs = -1;
      double bestOff = std::numeric_limits<double>::infinity();
      for (int j = 0; j < sc.J(); ++j) {
        if (sc.bs[j].site != s) continue;
        const double off = std::abs(wrappedAngle(dir - sc.bs[j].boresight));
        if (off < bestOff) {
          bestOff = off;
          bestBs = j;
        }
      }
      clusters[key].push_back(bestBs);
    }
  }

  std::vector<std::vector<int>> out;
  std::vector<char> used(sc.J(), 0);
  for (auto& [key, bs] : clusters) {
    std::sort(bs.begin(), bs.end());
    if (bs.size() != 3)
      throw std::logic_error("scClusters: malformed cross-site triple");
    for (int j : bs) {
      if (used[j]) throw std::logic_error("scClusters: sector assigned twice");
      used[j] = 1;
    }
    out.push_back(bs);
  }
  if (out.size() != 7) throw std::logic_error("scClusters: expected 7 clusters");
  return out;
}

std::vector<std::vector<int>> loadClusterMap(const std::string& path, int J) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("loadClusterMap: cannot open " + path);
  std::vector<std::vector<int>> clusters;
  std::vector<char> used(J, 0);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<int> bs;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t pos = 0;
      const int j = std::stoi(tok, &pos);
      if (tok.find_first_not_of(" \t\r", pos) != std::string::npos)
        throw std::invalid_argument("loadClusterMap: bad token '" + tok + "'");
      if (j < 0 || j >= J)
        throw std::invalid_argument("loadClusterMap: BS index out of range");
      if (used[j])
        throw std::invalid_argument("loadClusterMap: clusters overlap");
      used[j] = 1;
      bs.push_back(j);
    }
    if (bs.empty()) throw std::invalid_argument("loadClusterMap: empty cluster");
    std::sort(bs.begin(), bs.end());
    clusters.push_back(std::move(bs));
  }
  for (int j = 0; j < J; ++j)
    if (!used[j])
      throw std::invalid_argument("loadClusterMap: map does not cover all BSs");
  return clusters;
}

CandidateSet staticCandidates(const Drop& drop,
                              const std::vector<std::vector<int>>& clusters) {
  CandidateSet set;
  set.jMax = 0;
  std::vector<std::vector<int>> ues(clusters.size());
  for (int k = 0; k < drop.K(); ++k) {
    int best = -1;
    double bestGain = -1.0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      double g = 0.0;
      for (int j : clusters[c]) g += drop.gain(k, j);
      if (g > bestGain) {
        bestGain = g;
        best = static_cast<int>(c);
      }
    }
    ues[best].push_back(k);
  }
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (ues[c].empty()) continue;  // idle cluster
    const int id = static_cast<int>(set.clusters.size());
    std::vector<int> bs = clusters[c];
    std::sort(bs.begin(), bs.end());
    set.clusters.push_back({id, std::move(bs), std::move(ues[c])});
    set.jMax = std::max(set.jMax,
                        static_cast<int>(set.clusters.back().bs.size()));
  }
  return set;
}

GlobalSchedule scheduledUeSet(const std::vector<int>& selection,
                              const std::vector<ClusterPlan>& plans) {
  GlobalSchedule out;
  out.selected = selection;
  std::sort(out.selected.begin(), out.selected.end());

  std::vector<char> bsUsed;
  std::vector<std::pair<int, int>> uePlan;  // (ue, plan slot)
  for (int id : out.selected) {
    const ClusterPlan& p = plans.at(id);
    for (int j : p.bsSet) {
      if (j >= static_cast<int>(bsUsed.size())) bsUsed.resize(j + 1, 0);
      if (bsUsed[j])
        throw std::logic_error("scheduledUeSet: selection not BS-disjoint");
      bsUsed[j] = 1;
    }
    const int slot = static_cast<int>(out.plans.size());
    out.plans.push_back(&p);
    for (int ue : p.scheduledUes) uePlan.emplace_back(ue, slot);
  }
  std::sort(uePlan.begin(), uePlan.end());
  for (std::size_t i = 0; i + 1 < uePlan.size(); ++i)
    if (uePlan[i].first == uePlan[i + 1].first)
      throw std::logic_error("scheduledUeSet: UE scheduled by two clusters");
  for (auto& [ue, slot] : uePlan) {
    out.ues.push_back(ue);
    out.servingPlan.push_back(slot);
  }
  return out;
}

}  // namespace compsim
