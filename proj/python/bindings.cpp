#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "compsim/channel.hpp"
#include "compsim/clustering.hpp"
#include "compsim/config.hpp"
#include "compsim/eval.hpp"
#include "compsim/linalg.hpp"
#include "compsim/mumimo.hpp"
#include "compsim/sim.hpp"
#include "compsim/topology.hpp"

namespace py = pybind11;
using namespace compsim;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Downlink CoMP-JP system simulator core";

  py::class_<ScenarioParams>(m, "ScenarioParams")
      .def(py::init<>())
      .def_readwrite("site_count", &ScenarioParams::siteCount)
      .def_readwrite("bs_per_site", &ScenarioParams::bsPerSite)
      .def_readwrite("bs_antennas", &ScenarioParams::bsAntennas)
      .def_readwrite("inter_site_distance", &ScenarioParams::interSiteDistance)
      .def_readwrite("min_bs_ue_distance", &ScenarioParams::minBsUeDistance)
      .def_readwrite("p_bs_dbm", &ScenarioParams::pBsDbm)
      .def_readwrite("p_ue_dbm", &ScenarioParams::pUeDbm)
      .def_readwrite("noise_dbm", &ScenarioParams::noiseDbm)
      .def_readwrite("path_loss_exp", &ScenarioParams::pathLossExp)
      .def_readwrite("cell_edge_snr_db", &ScenarioParams::cellEdgeSnrDb)
      .def_readwrite("shadow_std_db", &ScenarioParams::shadowStdDb)
      .def_readwrite("theta_3db", &ScenarioParams::theta3Db)
      .def_readwrite("sidelobe_floor_db", &ScenarioParams::sidelobeFloorDb)
      .def_readwrite("ues_per_bs", &ScenarioParams::uesPerBs)
      .def_readwrite("cell_edge_distance", &ScenarioParams::cellEdgeDistance)
      .def_readwrite("site_common_shadowing",
                     &ScenarioParams::siteCommonShadowing);

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("J", &Scenario::J)
      .def_property_readonly("M", &Scenario::M)
      .def_property_readonly("K", &Scenario::K)
      .def_property_readonly("p_bs", &Scenario::pBs)
      .def_property_readonly("p_ue", &Scenario::pUe)
      .def_property_readonly("noise_power", &Scenario::noisePower)
      .def_property_readonly("cell_edge_dist", &Scenario::cellEdgeDist)
      .def_property_readonly("cell_edge_gain", &Scenario::cellEdgeGain)
      .def_property_readonly("params",
                             [](const Scenario& s) { return s.params; })
      .def_property_readonly("bs_positions", [](const Scenario& s) {
        Eigen::MatrixXd out(s.J(), 2);
        for (int j = 0; j < s.J(); ++j) {
          out(j, 0) = s.bs[j].pos.x;
          out(j, 1) = s.bs[j].pos.y;
        }
        return out;
      })
      .def_property_readonly("bs_boresights", [](const Scenario& s) {
        Eigen::VectorXd out(s.J());
        for (int j = 0; j < s.J(); ++j) out(j) = s.bs[j].boresight;
        return out;
      });

  py::class_<Drop>(m, "Drop")
      .def_property_readonly("K", &Drop::K)
      .def_property_readonly("J", &Drop::J)
      .def_property_readonly("positions",
                             [](const Drop& d) {
                               Eigen::MatrixXd out(d.K(), 2);
                               for (int k = 0; k < d.K(); ++k) {
                                 out(k, 0) = d.uePos[k].x;
                                 out(k, 1) = d.uePos[k].y;
                               }
                               return out;
                             })
      .def_readonly("gain", &Drop::gain)
      .def_readonly("bs_order", &Drop::bsOrder)
      .def_readonly("anchor", &Drop::anchor)
      .def_readonly("seed", &Drop::seed);

  m.def("build_scenario", &buildScenario, py::arg("params"));
  m.def("antenna_gain_db", &antennaGainDb, py::arg("theta"), py::arg("params"));
  m.def(
      "wrap_distance_angle",
      [](double x, double y, int bs, const Scenario& sc) {
        return wrapDistanceAndAngle({x, y}, bs, sc);
      },
      py::arg("x"), py::arg("y"), py::arg("bs"), py::arg("scenario"));
  m.def("large_scale_gain", &largeScaleGain, py::arg("distance"),
        py::arg("shadow_db"), py::arg("theta_gain_db"), py::arg("scenario"));
  m.def("drop_ues", &dropUes, py::arg("scenario"), py::arg("seed"));
  m.def("write_drop", &writeDrop, py::arg("drop"), py::arg("path"));

  py::class_<CorrelationModel>(m, "CorrelationModel")
      .def_static("identity", &CorrelationModel::identity, py::arg("n_ue"),
                  py::arg("m_bs"))
      .def_static("toeplitz_ue", &CorrelationModel::toeplitzUe, py::arg("beta"),
                  py::arg("n_ue"), py::arg("m_bs"))
      .def_readwrite("r_bs", &CorrelationModel::rBs)
      .def_readwrite("r_ue", &CorrelationModel::rUe);

  py::class_<FadingBlock>(m, "FadingBlock")
      .def_readonly("t", &FadingBlock::t)
      .def_readonly("N", &FadingBlock::N)
      .def_readonly("M", &FadingBlock::M)
      .def_readonly("K", &FadingBlock::K)
      .def_readonly("J", &FadingBlock::J)
      .def_readonly("est_noise_var", &FadingBlock::estNoiseVar)
      .def("h", [](const FadingBlock& b, int k, int j) { return b.h(k, j); })
      .def("hhat",
           [](const FadingBlock& b, int k, int j) { return b.hhat(k, j); });

  m.def("block_size", &blockSize, py::arg("doppler_hz"),
        py::arg("delay_spread_sec"));
  m.def("pilot_noise_var", &pilotNoiseVar, py::arg("n_ue"), py::arg("nt"),
        py::arg("p_ue"), py::arg("noise_power"));
  m.def("draw_fading", &drawFading, py::arg("drop"), py::arg("n_ue"),
        py::arg("corr"), py::arg("seed"), py::arg("t"));
  m.def("observe_pilots", &observePilots, py::arg("block"), py::arg("nt"),
        py::arg("noise_var"), py::arg("seed"));
  m.def("mmse_estimate", &mmseEstimate, py::arg("obs"), py::arg("cov"),
        py::arg("noise_var"));
  m.def("kronecker_covariance", &kroneckerCovariance, py::arg("sigma2"),
        py::arg("corr"));
  m.def("estimate_channels", &estimateChannels, py::arg("block"),
        py::arg("drop"), py::arg("corr"), py::arg("nt"), py::arg("p_ue"),
        py::arg("noise_power"), py::arg("seed"));

  py::class_<Eigenmode>(m, "Eigenmode")
      .def(py::init<>())
      .def_readwrite("ue", &Eigenmode::ue)
      .def_readwrite("index", &Eigenmode::index)
      .def_readwrite("singular_value", &Eigenmode::singularValue)
      .def_readwrite("v", &Eigenmode::v)
      .def("gamma_row", &Eigenmode::gammaRow);

  py::class_<ClusterPlan>(m, "ClusterPlan")
      .def_readonly("cluster_id", &ClusterPlan::clusterId)
      .def_readonly("bs_set", &ClusterPlan::bsSet)
      .def_readonly("scheduled_ues", &ClusterPlan::scheduledUes)
      .def_readonly("precoder", &ClusterPlan::precoder)
      .def_readonly("rank", &ClusterPlan::rank)
      .def_readonly("stream_power", &ClusterPlan::streamPower)
      .def_readonly("est_rate", &ClusterPlan::estRate)
      .def_readonly("selected_modes", &ClusterPlan::selectedModes);

  m.def(
      "ici_power",
      [](int ue, const std::vector<int>& bs, const Drop& d, const Scenario& s) {
        return iciPower(ue, bs, d, s);
      },
      py::arg("ue"), py::arg("cluster_bs"), py::arg("drop"),
      py::arg("scenario"));
  m.def("eigenmodes", &eigenmodes, py::arg("hhat"), py::arg("l_max") = 0,
        py::arg("ue") = -1);
  m.def("met_precoder", &metPrecoder, py::arg("modes"));
  m.def("equal_power", &equalPower, py::arg("precoders"), py::arg("m_per_bs"),
        py::arg("p_bs"));

  py::class_<ClusterContext>(m, "ClusterContext")
      .def_readonly("cluster_id", &ClusterContext::clusterId)
      .def_readonly("bs_set", &ClusterContext::bsSet)
      .def_readonly("ues", &ClusterContext::ues)
      .def_readonly("xi", &ClusterContext::xi);
  m.def("make_cluster_context", &makeClusterContext, py::arg("cluster_id"),
        py::arg("bs_set"), py::arg("ues"), py::arg("drop"), py::arg("scenario"),
        py::arg("block"));
  m.def("estimated_cluster_rate", &estimatedClusterRate, py::arg("ctx"),
        py::arg("precoders"), py::arg("stream_power"), py::arg("alpha"),
        py::arg("overhead_factor"));
  m.def("greedy_eigenmode_select", &greedyEigenmodeSelect, py::arg("ctx"),
        py::arg("alpha"), py::arg("l_max"), py::arg("overhead_factor"));
  m.def("global_precoder", &globalPrecoder, py::arg("plan"),
        py::arg("scheduled_index"), py::arg("J"));

  py::class_<Candidate>(m, "Candidate")
      .def_readonly("id", &Candidate::id)
      .def_readonly("bs", &Candidate::bs)
      .def_readonly("ues", &Candidate::ues);
  py::class_<CandidateSet>(m, "CandidateSet")
      .def_readonly("clusters", &CandidateSet::clusters)
      .def_readonly("j_max", &CandidateSet::jMax);
  m.def("enumerate_candidates", &enumerateCandidates, py::arg("drop"),
        py::arg("j_max"));
  m.def("exhaustive_cluster_count", &exhaustiveClusterCount, py::arg("J"),
        py::arg("j_max"));

  py::class_<PackingInstance>(m, "PackingInstance")
      .def(py::init<>())
      .def_readwrite("J", &PackingInstance::J)
      .def_readwrite("cluster_bs", &PackingInstance::clusterBs)
      .def_readwrite("weight", &PackingInstance::weight);
  m.def("greedy_set_packing", &greedySetPacking, py::arg("instance"));
  m.def("exact_set_packing", &exactSetPacking, py::arg("instance"));
  m.def("packing_objective", &packingObjective, py::arg("instance"),
        py::arg("selection"));
  m.def("packing_feasible", &packingFeasible, py::arg("instance"),
        py::arg("selection"));
  m.def("scp_clusters", &scpClusters, py::arg("drop"));
  m.def("isc_clusters", &iscClusters, py::arg("scenario"));
  m.def("sc_clusters", &scClusters, py::arg("scenario"));
  m.def("load_cluster_map", &loadClusterMap, py::arg("path"), py::arg("J"));
  m.def("static_candidates", &staticCandidates, py::arg("drop"),
        py::arg("clusters"));

  py::class_<PfState>(m, "PfState")
      .def_readonly("avg_rate", &PfState::avgRate)
      .def_readonly("gamma", &PfState::gamma)
      .def_readonly("t", &PfState::t)
      .def("alpha", &PfState::alpha);
  m.def("pf_init", &pfInit, py::arg("drop"), py::arg("scenario"),
        py::arg("gamma") = 0.1, py::arg("p_bar") = 0.0);
  m.def("pf_update", &pfUpdate, py::arg("state"), py::arg("block_rates"));

  m.def(
      "evaluate_schedule",
      [](const std::vector<int>& selection, const std::vector<ClusterPlan>& plans,
         const FadingBlock& block, double noisePower, double overhead) {
        const GlobalSchedule sched = scheduledUeSet(selection, plans);
        const BlockResult r = evaluateBlock(sched, block, noisePower, overhead);
        return py::make_tuple(r.scheduled, r.rates);
      },
      py::arg("selection"), py::arg("plans"), py::arg("block"),
      py::arg("noise_power"), py::arg("overhead_factor"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_property(
          "scheme",
          [](const SimConfig& c) { return toString(c.scheme); },
          [](SimConfig& c, const std::string& s) { c.scheme = parseScheme(s); })
      .def_readwrite("drops", &SimConfig::drops)
      .def_readwrite("blocks", &SimConfig::blocks)
      .def_readwrite("ue_antennas", &SimConfig::ueAntennas)
      .def_readwrite("j_max", &SimConfig::jMax)
      .def_readwrite("l_max", &SimConfig::lMax)
      .def_property(
          "csi",
          [](const SimConfig& c) {
            return c.csi == CsiMode::Perfect ? "perfect" : "estimated";
          },
          [](SimConfig& c, const std::string& s) { c.csi = parseCsiMode(s); })
      .def_property(
          "channel",
          [](const SimConfig& c) {
            switch (c.profile) {
              case ChannelProfile::Epa: return "epa";
              case ChannelProfile::Etu: return "etu";
              default: return "custom";
            }
          },
          [](SimConfig& c, const std::string& s) {
            c.profile = parseChannelProfile(s);
          })
      .def_readwrite("tau_rms_sec", &SimConfig::tauRmsSec)
      .def_readwrite("doppler_hz", &SimConfig::dopplerHz)
      .def_readwrite("nt", &SimConfig::nT)
      .def_readwrite("beta", &SimConfig::beta)
      .def_readwrite("pf_gamma", &SimConfig::pfGamma)
      .def_readwrite("master_seed", &SimConfig::masterSeed)
      .def_readwrite("scenario", &SimConfig::scenario)
      .def_readwrite("cluster_map_file", &SimConfig::clusterMapFile)
      .def_readwrite("out_file", &SimConfig::outFile)
      .def_readwrite("trace_file", &SimConfig::traceFile)
      .def("overhead_factor", &SimConfig::overheadFactor)
      .def("block_length", &SimConfig::blockLength);
  m.def("validate_config", &validateConfig, py::arg("config"));

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("scheme", &RunResult::scheme)
      .def_readonly("n_ue", &RunResult::nUe)
      .def_readonly("m_bs", &RunResult::mBs)
      .def_readonly("j_max", &RunResult::jMax)
      .def_readonly("l_max", &RunResult::lMax)
      .def_readonly("beta", &RunResult::beta)
      .def_readonly("nt_over_ne", &RunResult::ntOverNe)
      .def_readonly("cell_rate", &RunResult::cellRate)
      .def_readonly("p5", &RunResult::p5)
      .def_readonly("p50", &RunResult::p50)
      .def_readonly("p95", &RunResult::p95)
      .def_readonly("rank_hist_pct", &RunResult::rankHistPct)
      .def_readonly("cand_p5", &RunResult::candP5)
      .def_readonly("cand_median", &RunResult::candMedian)
      .def_readonly("cand_p95", &RunResult::candP95)
      .def_readonly("pooled_ue_rates", &RunResult::pooledUeRates)
      .def_readonly("cand_counts", &RunResult::candCounts);
  m.def("run_experiment", &runExperiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("format_results", [](const std::vector<RunResult>& rows) {
    ResultsTable t;
    t.rows = rows;
    return formatResults(t);
  });
  m.def(
      "emit_results",
      [](const std::vector<RunResult>& rows, const std::string& path) {
        ResultsTable t;
        t.rows = rows;
        emitResults(t, path);
      },
      py::arg("rows"), py::arg("path"));

  m.def("percentile", &percentile, py::arg("values"), py::arg("p"));
}
