#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "compsim/topology.hpp"

namespace compsim {

enum class Scheme { Scp, Isc, Sc, Dc };
enum class CsiMode { Perfect, Estimated };
enum class ChannelProfile { Epa, Etu, Custom };

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

Scheme parseScheme(const std::string& s);
CsiMode parseCsiMode(const std::string& s);
ChannelProfile parseChannelProfile(const std::string& s);
std::string toString(Scheme s);

struct SimConfig {
  Scheme scheme = Scheme::Dc;
  int drops = 100;
  int blocks = 200;   // T
  int ueAntennas = 1; // N
  int jMax = 3;
  int lMax = 0;       // 0 = unbounded
  CsiMode csi = CsiMode::Perfect;
  ChannelProfile profile = ChannelProfile::Etu;
  double tauRmsSec = 0.0;  // resolved from profile when 0
  double dopplerHz = 5.0;
  long nT = 0;
  double beta = 0.0;
  double pfGamma = 0.1;
  std::uint64_t masterSeed = 1;
  double pfInitPowerDbm = std::numeric_limits<double>::quiet_NaN();  // NaN = BS power
  ScenarioParams scenario;      // scenario.bsAntennas is M
  std::string clusterMapFile;   // optional override for scheme=sc
  std::string outFile;
  std::string traceFile;
  std::string dropDumpPrefix;
  std::string dropMetricsFile;

  double tauRms() const;    // profile-resolved delay spread
  long blockLength() const; // N_E for the resolved profile
  // 1 - N_T/N_E when pilots are configured, else 1.
  double overheadFactor() const;
};

// Throws ConfigError on any violated invariant.
void validateConfig(const SimConfig& cfg);

}  // namespace compsim
