// Command line front end: one experiment per invocation, CSV results out.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "compsim/config.hpp"
#include "compsim/sim.hpp"

using namespace compsim;

int main(int argc, char** argv) {
  CLI::App app{"Downlink CoMP-JP system simulator with dynamic BS clustering"};

  SimConfig cfg;
  std::string scheme = "dc", csi = "perfect", channel = "etu";
  std::string lmax = "unbounded";
  double taurms = 0.0;

  app.set_config("--config", "", "Flat key=value config file (flags override)");
  app.add_option("--scheme", scheme, "Scheme: scp|isc|sc|dc")
      ->capture_default_str();
  app.add_option("--drops", cfg.drops, "Number of UE drops")
      ->capture_default_str();
  app.add_option("--blocks", cfg.blocks, "Fading blocks per drop (T, even)")
      ->capture_default_str();
  app.add_option("--ue-antennas", cfg.ueAntennas, "UE antennas N")
      ->capture_default_str();
  app.add_option("--bs-antennas", cfg.scenario.bsAntennas, "BS antennas M")
      ->capture_default_str();
  app.add_option("--jmax", cfg.jMax, "Maximum cluster size")
      ->capture_default_str();
  app.add_option("--lmax", lmax, "Per-UE stream cap (integer or 'unbounded')")
      ->capture_default_str();
  app.add_option("--csi", csi, "CSI mode: perfect|estimated")
      ->capture_default_str();
  app.add_option("--channel", channel, "Channel profile: epa|etu|custom")
      ->capture_default_str();
  app.add_option("--nt", cfg.nT, "Pilot resource elements per block")
      ->capture_default_str();
  app.add_option("--beta", cfg.beta, "UE antenna correlation coefficient")
      ->capture_default_str();
  app.add_option("--gamma", cfg.pfGamma, "PF forgetting factor")
      ->capture_default_str();
  app.add_option("--seed", cfg.masterSeed, "Master seed")
      ->capture_default_str();
  app.add_option("--taurms", taurms, "RMS delay spread [s] (custom profile)");
  app.add_option("--doppler", cfg.dopplerHz, "Maximum Doppler frequency [Hz]")
      ->capture_default_str();
  app.add_option("--out", cfg.outFile, "Results CSV path");
  app.add_option("--trace", cfg.traceFile, "Per-block plan trace path");
  app.add_option("--cluster-map", cfg.clusterMapFile,
                 "Static cluster map file (scheme=sc)");
  app.add_option("--dump-drops", cfg.dropDumpPrefix,
                 "Write each drop to <prefix><d>.txt");
  app.add_option("--drop-metrics", cfg.dropMetricsFile,
                 "Per-drop metrics CSV path");
  app.add_option("--sites", cfg.scenario.siteCount, "Number of sites (1 or 7)")
      ->capture_default_str();
  app.add_option("--ues-per-bs", cfg.scenario.uesPerBs, "UEs dropped per BS")
      ->capture_default_str();
  app.add_option("--isd", cfg.scenario.interSiteDistance,
                 "Inter-site distance [m]")
      ->capture_default_str();
  app.add_option("--min-dist", cfg.scenario.minBsUeDistance,
                 "Minimum BS-UE distance [m]")
      ->capture_default_str();
  app.add_option("--pbs-dbm", cfg.scenario.pBsDbm, "BS power [dBm]")
      ->capture_default_str();
  app.add_option("--pue-dbm", cfg.scenario.pUeDbm, "UE power [dBm]")
      ->capture_default_str();
  app.add_option("--noise-dbm", cfg.scenario.noiseDbm, "Noise power [dBm]")
      ->capture_default_str();
  app.add_option("--pathloss-exp", cfg.scenario.pathLossExp,
                 "Path loss exponent")
      ->capture_default_str();
  app.add_option("--celledge-snr-db", cfg.scenario.cellEdgeSnrDb,
                 "Cell edge SNR [dB]")
      ->capture_default_str();
  app.add_option("--celledge-dist", cfg.scenario.cellEdgeDistance,
                 "Cell edge reference distance [m] (0 = isd/sqrt(3))")
      ->capture_default_str();
  app.add_option("--shadow-std-db", cfg.scenario.shadowStdDb,
                 "Shadowing std [dB]")
      ->capture_default_str();
  app.add_flag("--site-shadowing", cfg.scenario.siteCommonShadowing,
               "Share one shadowing draw across a site's co-located BSs");
  app.add_option("--pf-init-dbm", cfg.pfInitPowerDbm,
                 "PF initialization power [dBm] (default: BS power)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    cfg.scheme = parseScheme(scheme);
    cfg.csi = parseCsiMode(csi);
    cfg.profile = parseChannelProfile(channel);
    if (taurms > 0.0) cfg.tauRmsSec = taurms;
    if (lmax == "unbounded")
      cfg.lMax = 0;
    else
      cfg.lMax = std::stoi(lmax);
    validateConfig(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  try {
    ResultsTable table;
    table.rows.push_back(runExperiment(cfg));
    const std::string text = formatResults(table);
    if (!cfg.outFile.empty())
      emitResults(table, cfg.outFile);
    std::cout << text;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
}
