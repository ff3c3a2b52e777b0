#include "compsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "compsim/rng.hpp"

namespace compsim {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrapAngle(double a) {
  a = std::fmod(a + M_PI, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - M_PI;
}

Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

double dbToLin(double db) { return std::pow(10.0, db / 10.0); }

// Pointy-top hexagon of circumradius r centered at the origin: edge midpoints
// face the 6 neighbor directions k*60deg.
bool insideHexagon(Vec2 p, double r) {
  const double apothem = r * std::sqrt(3.0) / 2.0;
  for (int k = 0; k < 3; ++k) {
    const double a = k * M_PI / 3.0;
    if (std::abs(p.x * std::cos(a) + p.y * std::sin(a)) > apothem) return false;
  }
  return true;
}

}  // namespace

Scenario buildScenario(const ScenarioParams& p) {
  if (p.interSiteDistance <= 0 || p.minBsUeDistance <= 0)
    throw std::invalid_argument("buildScenario: distances must be positive");
  if (p.cellEdgeDistance < 0)
    throw std::invalid_argument("buildScenario: cellEdgeDistance must be >= 0");
  if (p.pathLossExp <= 0 || p.theta3Db <= 0)
    throw std::invalid_argument("buildScenario: exponents must be positive");
  if (p.bsAntennas < 1 || p.uesPerBs < 1)
    throw std::invalid_argument("buildScenario: counts must be positive");
  if (p.bsPerSite != 3)
    throw std::invalid_argument("buildScenario: layout requires 3 BSs per site");
  if (p.siteCount != 1 && p.siteCount != 7)
    throw std::invalid_argument(
        "buildScenario: supported site counts are 1 and 7");

  Scenario sc;
  sc.params = p;

  const double d = p.interSiteDistance;
  sc.sitePos.push_back({0.0, 0.0});
  if (p.siteCount == 7) {
    for (int k = 0; k < 6; ++k) {
      const double a = k * M_PI / 3.0;
      sc.sitePos.push_back({d * std::cos(a), d * std::sin(a)});
    }
  }

  for (int s = 0; s < static_cast<int>(sc.sitePos.size()); ++s)
    for (int b = 0; b < p.bsPerSite; ++b)
      sc.bs.push_back({sc.sitePos[s], b * kTwoPi / p.bsPerSite, s});

  sc.wrapTranslations.push_back({0.0, 0.0});
  if (p.siteCount == 7) {
    // Rhombic supercell of the 7-site cluster: the six images at distance
    // sqrt(7)*d, i.e. (2 a1 + a2) rotated by multiples of 60 degrees.
    const Vec2 t1{2.5 * d, std::sqrt(3.0) / 2.0 * d};
    for (int k = 0; k < 6; ++k)
      sc.wrapTranslations.push_back(rotate(t1, k * M_PI / 3.0));
  }

  sc.pBsLin_ = dbToLin(p.pBsDbm);
  sc.pUeLin_ = dbToLin(p.pUeDbm);
  sc.noiseLin_ = dbToLin(p.noiseDbm);
  sc.cellEdgeDist_ =
      p.cellEdgeDistance > 0 ? p.cellEdgeDistance : d / std::sqrt(3.0);
  // Normalized so that pBs * gain(cell edge) / noise = cellEdgeSnr.
  sc.cellEdgeGain_ = dbToLin(p.cellEdgeSnrDb) * sc.noiseLin_ / sc.pBsLin_;
  return sc;
}

double antennaGainDb(double theta, const ScenarioParams& p) {
  const double t = wrapAngle(theta) / p.theta3Db;
  return -std::min(12.0 * t * t, p.sidelobeFloorDb);
}

std::pair<double, double> wrapDistanceAndAngle(Vec2 uePos, int bsIndex,
                                               const Scenario& sc) {
  if (bsIndex < 0 || bsIndex >= sc.J())
    throw std::out_of_range("wrapDistanceAndAngle: bad BS index");
  const BsRecord& b = sc.bs[bsIndex];
  double bestD = std::numeric_limits<double>::infinity();
  Vec2 bestDelta{};
  for (const Vec2& t : sc.wrapTranslations) {
    const Vec2 delta = uePos - (b.pos + t);
    const double dist = norm(delta);
    if (dist < bestD) {
      bestD = dist;
      bestDelta = delta;
    }
  }
  const double bearing = wrapAngle(std::atan2(bestDelta.y, bestDelta.x) -
                                   b.boresight);
  return {bestD, bearing};
}

double largeScaleGain(double distance, double shadowDb, double thetaGainDb,
                      const Scenario& sc) {
  if (distance < sc.params.minBsUeDistance)
    throw std::invalid_argument("largeScaleGain: distance below minimum");
  const double pathLoss =
      std::pow(sc.cellEdgeDist() / distance, sc.params.pathLossExp);
  return sc.cellEdgeGain() * pathLoss * dbToLin(shadowDb + thetaGainDb);
}

Drop dropUes(const Scenario& sc, std::uint64_t seed) {
  const int J = sc.J();
  const int K = sc.K();
  const double hexR = sc.cellRadius();

  Drop drop;
  drop.seed = seed;
  drop.uePos.reserve(K);

  Rng posRng(deriveSeed(seed, seedtag::kDrop, 0));
  for (int j = 0; j < J; ++j) {
    const BsRecord& b = sc.bs[j];
    for (int u = 0; u < sc.params.uesPerBs; ++u) {
      for (;;) {
        Vec2 local{posRng.uniform(-hexR, hexR), posRng.uniform(-hexR, hexR)};
        if (!insideHexagon(local, hexR)) continue;
        const double bearing =
            wrapAngle(std::atan2(local.y, local.x) - b.boresight);
        if (bearing < -M_PI / 3.0 || bearing >= M_PI / 3.0) continue;
        const Vec2 pos = b.pos + local;
        bool tooClose = false;
        for (int jj = 0; jj < J && !tooClose; ++jj)
          tooClose = wrapDistanceAndAngle(pos, jj, sc).first <
                     sc.params.minBsUeDistance;
        if (tooClose) continue;
        drop.uePos.push_back(pos);
        break;
      }
    }
  }

  Rng shadowRng(deriveSeed(seed, seedtag::kDrop, 1));
  const int sites = static_cast<int>(sc.sitePos.size());
  drop.gain.resize(K, J);
  for (int k = 0; k < K; ++k) {
    std::vector<double> siteShadow(sites);
    if (sc.params.siteCommonShadowing)
      for (double& v : siteShadow) v = shadowRng.gaussian(sc.params.shadowStdDb);
    for (int j = 0; j < J; ++j) {
      const double shadowDb = sc.params.siteCommonShadowing
                                  ? siteShadow[sc.bs[j].site]
                                  : shadowRng.gaussian(sc.params.shadowStdDb);
      const auto [dist, bearing] = wrapDistanceAndAngle(drop.uePos[k], j, sc);
      drop.gain(k, j) = largeScaleGain(
          dist, shadowDb, antennaGainDb(bearing, sc.params), sc);
    }
  }

  drop.bsOrder.resize(K);
  drop.anchor.resize(K);
  for (int k = 0; k < K; ++k) {
    std::vector<int>& order = drop.bsOrder[k];
    order.resize(J);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return drop.gain(k, a) > drop.gain(k, b);
    });
    drop.anchor[k] = order[0];
  }
  return drop;
}

void writeDrop(const Drop& drop, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("writeDrop: cannot open " + path);
  out << "# ue x y anchor gains...\n";
  out.precision(9);
  out << std::scientific;
  for (int k = 0; k < drop.K(); ++k) {
    out << k << ' ' << drop.uePos[k].x << ' ' << drop.uePos[k].y << ' '
        << drop.anchor[k];
    for (int j = 0; j < drop.J(); ++j) out << ' ' << drop.gain(k, j);
    out << '\n';
  }
  if (!out) throw std::runtime_error("writeDrop: write failed for " + path);
}

}  // namespace compsim
