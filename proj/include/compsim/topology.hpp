#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace compsim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

// Deployment parameters. Defaults follow the 21-sector LTE macro layout used
// throughout the experiments.
struct ScenarioParams {
  int siteCount = 7;
  int bsPerSite = 3;
  int bsAntennas = 4;  // M
  double interSiteDistance = 500.0;
  double minBsUeDistance = 35.0;
  double pBsDbm = 46.0;
  double pUeDbm = 23.0;
  double noiseDbm = -101.0;
  double pathLossExp = 3.5;
  double cellEdgeSnrDb = 10.0;
  double shadowStdDb = 8.0;
  double theta3Db = 70.0 * M_PI / 180.0;
  double sidelobeFloorDb = 20.0;  // A_s
  int uesPerBs = 10;
  // Reference distance for the cell-edge SNR normalization; 0 selects the
  // hexagon corner distance interSiteDistance/sqrt(3).
  double cellEdgeDistance = 0.0;
  // If true, the three co-located BSs of a site share one shadowing draw per
  // UE; default is an independent draw per (UE, BS) pair.
  bool siteCommonShadowing = false;
};

struct BsRecord {
  Vec2 pos;
  double boresight = 0.0;  // radians, x-axis reference
  int site = 0;
};

class Scenario {
 public:
  ScenarioParams params;
  std::vector<Vec2> sitePos;
  std::vector<BsRecord> bs;
  std::vector<Vec2> wrapTranslations;  // identity first

  int J() const { return static_cast<int>(bs.size()); }
  int M() const { return params.bsAntennas; }
  int K() const { return J() * params.uesPerBs; }

  double pBs() const { return pBsLin_; }        // mW
  double pUe() const { return pUeLin_; }        // mW
  double noisePower() const { return noiseLin_; }  // mW
  double cellEdgeDist() const { return cellEdgeDist_; }
  // sigma^2 at the cell edge (zeta=0, boresight), normalized so that
  // pBs * gain / noise equals the configured cell-edge SNR.
  double cellEdgeGain() const { return cellEdgeGain_; }
  // Hexagonal cell radius of a site (equals the corner distance).
  double cellRadius() const { return params.interSiteDistance / std::sqrt(3.0); }

  friend Scenario buildScenario(const ScenarioParams& p);

 private:
  double pBsLin_ = 0.0, pUeLin_ = 0.0, noiseLin_ = 0.0;
  double cellEdgeDist_ = 0.0, cellEdgeGain_ = 0.0;
};

// One UE placement with all long-term channel quantities.
struct Drop {
  std::vector<Vec2> uePos;                // K
  Eigen::MatrixXd gain;                   // K x J, sigma^2_{k,j} (linear)
  std::vector<std::vector<int>> bsOrder;  // K x J, descending gain; f_k
  std::vector<int> anchor;                // K, = bsOrder[k][0]
  std::uint64_t seed = 0;

  int K() const { return static_cast<int>(uePos.size()); }
  int J() const { return static_cast<int>(gain.cols()); }
};

Scenario buildScenario(const ScenarioParams& p);

// A(theta) in dB: -min{12 (theta/theta3dB)^2, A_s}. theta is wrapped to
// [-pi, pi] first, so the function is total.
double antennaGainDb(double theta, const ScenarioParams& p);

// Minimum distance over all wraparound images and the bearing from the
// boresight of the winning image.
std::pair<double, double> wrapDistanceAndAngle(Vec2 uePos, int bsIndex,
                                               const Scenario& sc);

// sigma^2 for one (UE, BS) link. shadowDb is the shadowing realization in dB
// (10*log10(e^zeta)), thetaGainDb the antenna gain in dB.
double largeScaleGain(double distance, double shadowDb, double thetaGainDb,
                      const Scenario& sc);

Drop dropUes(const Scenario& sc, std::uint64_t seed);

// Reproducibility audit dump: one line per UE with position, anchor and the
// sigma^2 row.
void writeDrop(const Drop& drop, const std::string& path);

}  // namespace compsim
