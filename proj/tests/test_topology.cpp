#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "compsim/rng.hpp"
#include "compsim/topology.hpp"

using namespace compsim;

namespace {
Scenario defaultScenario() { return buildScenario(ScenarioParams{}); }
}  // namespace

TEST_CASE("default scenario: 21 BSs, 7 sites, 3 orientations each") {
  const Scenario sc = defaultScenario();
  CHECK(sc.J() == 21);
  CHECK(sc.sitePos.size() == 7);

  std::set<std::pair<double, double>> positions;
  for (const BsRecord& b : sc.bs) positions.insert({b.pos.x, b.pos.y});
  CHECK(positions.size() == 7);

  for (int s = 0; s < 7; ++s) {
    std::set<int> boresightsDeg;
    for (const BsRecord& b : sc.bs)
      if (b.site == s)
        boresightsDeg.insert(
            static_cast<int>(std::lround(b.boresight * 180.0 / M_PI)));
    CHECK(boresightsDeg == std::set<int>{0, 120, 240});
  }
}

TEST_CASE("single-site scenario: 3 co-located BSs, identity wraparound") {
  ScenarioParams p;
  p.siteCount = 1;
  const Scenario sc = buildScenario(p);
  CHECK(sc.J() == 3);
  CHECK(sc.wrapTranslations.size() == 1);
  CHECK(sc.wrapTranslations[0].x == 0.0);
  CHECK(sc.wrapTranslations[0].y == 0.0);
  for (const BsRecord& b : sc.bs) {
    CHECK(b.pos.x == 0.0);
    CHECK(b.pos.y == 0.0);
  }
}

TEST_CASE("every BS belongs to exactly one site") {
  const Scenario sc = defaultScenario();
  std::vector<int> count(sc.sitePos.size(), 0);
  for (const BsRecord& b : sc.bs) {
    REQUIRE(b.site >= 0);
    REQUIRE(b.site < static_cast<int>(sc.sitePos.size()));
    ++count[b.site];
  }
  for (int c : count) CHECK(c == 3);
}

TEST_CASE("buildScenario rejects bad parameters") {
  ScenarioParams p;
  p.interSiteDistance = -1.0;
  CHECK_THROWS_AS(buildScenario(p), std::invalid_argument);
  p = ScenarioParams{};
  p.minBsUeDistance = 0.0;
  CHECK_THROWS_AS(buildScenario(p), std::invalid_argument);
  p = ScenarioParams{};
  p.uesPerBs = 0;
  CHECK_THROWS_AS(buildScenario(p), std::invalid_argument);
}

TEST_CASE("antenna gain: boresight, 3dB point, back lobe") {
  const ScenarioParams p;
  CHECK(antennaGainDb(0.0, p) == doctest::Approx(0.0));
  CHECK(antennaGainDb(p.theta3Db, p) == doctest::Approx(-12.0));
  CHECK(antennaGainDb(M_PI, p) == doctest::Approx(-20.0));
}

TEST_CASE("antenna gain: even, non-increasing in |theta|, floored") {
  const ScenarioParams p;
  double prev = 1.0;
  for (int i = 0; i <= 180; ++i) {
    const double th = i * M_PI / 180.0;
    const double g = antennaGainDb(th, p);
    CHECK(g == doctest::Approx(antennaGainDb(-th, p)));
    CHECK(g <= prev + 1e-12);
    CHECK(g >= -p.sidelobeFloorDb);
    prev = g;
  }
}

TEST_CASE("wrap distance: direct neighbor at d_min on boresight") {
  const Scenario sc = defaultScenario();
  // BS 0: site 0 at origin, boresight along +x.
  const Vec2 ue{sc.params.minBsUeDistance, 0.0};
  const auto [d, th] = wrapDistanceAndAngle(ue, 0, sc);
  CHECK(d == doctest::Approx(sc.params.minBsUeDistance));
  CHECK(th == doctest::Approx(0.0));
}

TEST_CASE("wrap distance: beyond the layout edge it beats the direct path") {
  const Scenario sc = defaultScenario();
  // Far along +x: direct distance to BS at origin is large, the wrapped image
  // is closer.
  const Vec2 ue{2.2 * sc.params.interSiteDistance, 0.0};
  const auto [d, th] = wrapDistanceAndAngle(ue, 0, sc);
  CHECK(d < norm(ue));
}

TEST_CASE("wrap distance equals brute force over all translations") {
  const Scenario sc = defaultScenario();
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 ue{rng.uniform(-1500.0, 1500.0), rng.uniform(-1500.0, 1500.0)};
    for (int j = 0; j < sc.J(); ++j) {
      const auto [d, th] = wrapDistanceAndAngle(ue, j, sc);
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& t : sc.wrapTranslations)
        best = std::min(best, norm(ue - (sc.bs[j].pos + t)));
      CHECK(d == doctest::Approx(best));
      // Symmetry of the translation set: the reflected UE sees the same
      // distance to the reflected BS image set.
      const Vec2 ueRefl{-ue.x, -ue.y};
      double bestRefl = std::numeric_limits<double>::infinity();
      for (const Vec2& t : sc.wrapTranslations)
        bestRefl = std::min(
            bestRefl, norm(ueRefl - (Vec2{-sc.bs[j].pos.x, -sc.bs[j].pos.y} + t)));
      CHECK(bestRefl == doctest::Approx(d));
    }
  }
}

TEST_CASE("wraparound distance never exceeds the unwrapped distance") {
  const Scenario sc = defaultScenario();
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec2 ue{rng.uniform(-800.0, 800.0), rng.uniform(-800.0, 800.0)};
    const int j = static_cast<int>(rng.uniform(0.0, sc.J() - 1e-9));
    const auto [d, th] = wrapDistanceAndAngle(ue, j, sc);
    CHECK(d <= norm(ue - sc.bs[j].pos) + 1e-12);
  }
}

TEST_CASE("large scale gain: cell-edge SNR normalization") {
  const Scenario sc = defaultScenario();
  const double g = largeScaleGain(sc.cellEdgeDist(), 0.0, 0.0, sc);
  const double snrDb = 10.0 * std::log10(sc.pBs() * g / sc.noisePower());
  CHECK(snrDb == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("large scale gain: path loss exponent halves gain by 2^3.5") {
  const Scenario sc = defaultScenario();
  const double g1 = largeScaleGain(200.0, -3.1, 1.5, sc);
  const double g2 = largeScaleGain(400.0, -3.1, 1.5, sc);
  CHECK(g1 / g2 == doctest::Approx(std::pow(2.0, 3.5)));
}

TEST_CASE("large scale gain rejects distances below d_min") {
  const Scenario sc = defaultScenario();
  CHECK_THROWS_AS(largeScaleGain(sc.params.minBsUeDistance - 1.0, 0.0, 0.0, sc),
                  std::invalid_argument);
}

TEST_CASE("shadowing parameterization: sample std of 10log10(e^zeta) is 8 dB") {
  // Monte-Carlo check of the lognormal model used by dropUes: the dB-domain
  // draws must come out with the configured standard deviation.
  Rng rng(123);
  const double stdDb = 8.0;
  const int n = 100000;
  double sum = 0.0, sumSq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double db = rng.gaussian(stdDb);  // as drawn in dropUes
    const double zeta = db * std::log(10.0) / 10.0;
    const double back = 10.0 * std::log10(std::exp(zeta));
    sum += back;
    sumSq += back * back;
  }
  const double var = sumSq / n - (sum / n) * (sum / n);
  CHECK(std::sqrt(var) == doctest::Approx(8.0).epsilon(0.02));
}

TEST_CASE("dropUes: K=210, anchors partition the UEs, deterministic") {
  const Scenario sc = defaultScenario();
  const Drop drop = dropUes(sc, 42);
  CHECK(drop.K() == 210);

  int anchoredTotal = 0;
  std::vector<int> perBs(sc.J(), 0);
  for (int a : drop.anchor) {
    ++perBs[a];
    ++anchoredTotal;
  }
  CHECK(anchoredTotal == 210);

  const Drop again = dropUes(sc, 42);
  CHECK(again.gain == drop.gain);
  CHECK(again.anchor == drop.anchor);
  for (int k = 0; k < drop.K(); ++k) {
    CHECK(again.uePos[k].x == drop.uePos[k].x);
    CHECK(again.uePos[k].y == drop.uePos[k].y);
  }

  const Drop other = dropUes(sc, 43);
  CHECK(other.gain != drop.gain);
}

TEST_CASE("dropUes: f_k sorts gains in strictly decreasing order") {
  const Scenario sc = defaultScenario();
  const Drop drop = dropUes(sc, 7);
  for (int k = 0; k < drop.K(); ++k) {
    CHECK(drop.anchor[k] == drop.bsOrder[k][0]);
    double best = -1.0;
    for (int j = 0; j < sc.J(); ++j) best = std::max(best, drop.gain(k, j));
    CHECK(drop.gain(k, drop.anchor[k]) == doctest::Approx(best));
    for (int u = 1; u < sc.J(); ++u)
      CHECK(drop.gain(k, drop.bsOrder[k][u - 1]) >
            drop.gain(k, drop.bsOrder[k][u]));
  }
}

TEST_CASE("dropUes: all gains positive and finite, min distance respected") {
  const Scenario sc = defaultScenario();
  const Drop drop = dropUes(sc, 99);
  for (int k = 0; k < drop.K(); ++k) {
    for (int j = 0; j < sc.J(); ++j) {
      CHECK(drop.gain(k, j) > 0.0);
      CHECK(std::isfinite(drop.gain(k, j)));
      CHECK(wrapDistanceAndAngle(drop.uePos[k], j, sc).first >=
            sc.params.minBsUeDistance);
    }
  }
}

TEST_CASE("writeDrop emits one line per UE") {
  const Scenario sc = defaultScenario();
  const Drop drop = dropUes(sc, 5);
  const std::string path = "drop_dump_test.txt";
  writeDrop(drop, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  int lines = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++lines;
  CHECK(lines == drop.K());
  std::remove(path.c_str());
}
