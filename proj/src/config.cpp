#include "compsim/config.hpp"

#include <cmath>

#include "compsim/channel.hpp"

namespace compsim {

Scheme parseScheme(const std::string& s) {
  if (s == "scp") return Scheme::Scp;
  if (s == "isc") return Scheme::Isc;
  if (s == "sc") return Scheme::Sc;
  if (s == "dc") return Scheme::Dc;
  throw ConfigError("unknown scheme '" + s + "' (expected scp|isc|sc|dc)");
}

CsiMode parseCsiMode(const std::string& s) {
  if (s == "perfect") return CsiMode::Perfect;
  if (s == "estimated") return CsiMode::Estimated;
  throw ConfigError("unknown csi mode '" + s + "' (expected perfect|estimated)");
}

ChannelProfile parseChannelProfile(const std::string& s) {
  if (s == "epa") return ChannelProfile::Epa;
  if (s == "etu") return ChannelProfile::Etu;
  if (s == "custom") return ChannelProfile::Custom;
  throw ConfigError("unknown channel profile '" + s +
                    "' (expected epa|etu|custom)");
}

std::string toString(Scheme s) {
  switch (s) {
    case Scheme::Scp: return "scp";
    case Scheme::Isc: return "isc";
    case Scheme::Sc: return "sc";
    case Scheme::Dc: return "dc";
  }
  return "?";
}

double SimConfig::tauRms() const {
  switch (profile) {
    case ChannelProfile::Epa: return 43e-9;
    case ChannelProfile::Etu: return 991e-9;
    case ChannelProfile::Custom: return tauRmsSec;
  }
  return 0.0;
}

long SimConfig::blockLength() const { return blockSize(dopplerHz, tauRms()); }

double SimConfig::overheadFactor() const {
  if (nT <= 0) return 1.0;
  return 1.0 - static_cast<double>(nT) / static_cast<double>(blockLength());
}

void validateConfig(const SimConfig& cfg) {
  if (cfg.drops < 1) throw ConfigError("drops must be >= 1");
  if (cfg.blocks < 2 || cfg.blocks % 2 != 0)
    throw ConfigError("blocks must be even and >= 2");
  if (cfg.ueAntennas < 1 || cfg.ueAntennas > 8)
    throw ConfigError("ue-antennas must be in [1, 8]");
  if (cfg.lMax < 0 || cfg.lMax > cfg.ueAntennas)
    throw ConfigError("lmax must be in [1, N] (or unbounded)");
  if (cfg.beta < 0.0 || cfg.beta >= 1.0)
    throw ConfigError("beta must be in [0, 1)");
  if (cfg.pfGamma < 0.0 || cfg.pfGamma >= 1.0)
    throw ConfigError("gamma must be in [0, 1)");
  if (cfg.nT < 0) throw ConfigError("nt must be >= 0");
  if (cfg.profile == ChannelProfile::Custom &&
      (cfg.tauRmsSec <= 0.0 || cfg.dopplerHz <= 0.0))
    throw ConfigError("custom profile requires positive taurms and doppler");
  if (cfg.dopplerHz <= 0.0) throw ConfigError("doppler must be positive");

  Scenario sc;
  try {
    sc = buildScenario(cfg.scenario);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (cfg.jMax < 1 || cfg.jMax > sc.J())
    throw ConfigError("jmax must be in [1, J]");

  if (cfg.nT > 0 && cfg.nT >= cfg.blockLength())
    throw ConfigError("nt must be smaller than the block size N_E");
  if (cfg.csi == CsiMode::Estimated) {
    if (cfg.nT < static_cast<long>(cfg.ueAntennas) * sc.K())
      throw ConfigError("estimated CSI requires nt >= N*K (orthogonal pilots)");
  }
}

}  // namespace compsim
