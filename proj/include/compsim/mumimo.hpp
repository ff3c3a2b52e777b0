#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "compsim/channel.hpp"
#include "compsim/topology.hpp"

namespace compsim {

// One schedulable unit: a (singular value, right singular vector) pair of a
// UE's estimated cluster channel. The stacked row it contributes to the MET
// constraint matrix is singularValue * v^H.
struct Eigenmode {
  int ue = -1;
  int index = 0;
  double singularValue = 0.0;
  Eigen::VectorXcd v;  // unit norm, length M*|J_c|

  Eigen::RowVectorXcd gammaRow() const { return singularValue * v.adjoint(); }
};

// Resource allocation result for one candidate cluster.
struct ClusterPlan {
  int clusterId = -1;
  std::vector<int> bsSet;                   // ordered BS ids (Upsilon map)
  std::vector<int> scheduledUes;            // ascending
  std::vector<Eigen::MatrixXcd> precoder;   // per scheduled UE, M|J_c| x l_k
  std::vector<int> rank;                    // l_k per scheduled UE
  double streamPower = 0.0;                 // P^(c), mW per stream
  double estRate = 0.0;                     // weighted sum rate estimate
  std::vector<Eigenmode> selectedModes;     // in greedy selection order
};

// Average inter-cluster interference power P_BS * sum_{j not in J_c} sigma^2.
double iciPower(int ue, std::span<const int> clusterBs, const Drop& drop,
                const Scenario& sc);

// SVD eigenmodes of an N x M|J_c| estimated cluster channel, strongest first,
// truncated to the strongest lMax when lMax > 0.
std::vector<Eigenmode> eigenmodes(const Eigen::MatrixXcd& hhat, int lMax = 0,
                                  int ue = -1);

// MET zero-forcing precoders: pseudo-inverse of the stacked gamma rows,
// columns sliced by owning UE and normalized to unit norm. Returned in order
// of first appearance of each UE in `modes`. Throws std::runtime_error
// ("infeasible eigenmode set") when the stack is rank deficient.
std::vector<std::pair<int, Eigen::MatrixXcd>> metPrecoder(
    const std::vector<Eigenmode>& modes);

// Equal per-stream power: P_BS divided by the largest per-BS power load.
// Precoders have M*(number of BSs) rows grouped in M-row blocks.
double equalPower(const std::vector<std::pair<int, Eigen::MatrixXcd>>& precoders,
                  int mPerBs, double pBs);

// Shared read-only state for planning one candidate cluster in one block.
struct ClusterContext {
  int clusterId = -1;
  std::vector<int> bsSet;
  std::vector<int> ues;                    // U_c
  std::vector<Eigen::MatrixXcd> hhat;      // per UE of `ues`: N x M|J_c|
  std::vector<double> xi;                  // per UE of `ues`: ICI power
  double noisePower = 0.0;
  double pBs = 0.0;
  int mPerBs = 0;
  int nUe = 0;
};

ClusterContext makeClusterContext(int clusterId, const std::vector<int>& bsSet,
                                  const std::vector<int>& ues, const Drop& drop,
                                  const Scenario& sc, const FadingBlock& block);

// Estimated weighted sum rate of a precoder assignment within one cluster:
// sum_k alpha_k * overhead * log2 det(I + Hhat G P G^H Hhat^H Psihat^-1),
// with Psihat = (sigma_n^2 + xi_k) I + intra-cluster terms.
double estimatedClusterRate(
    const ClusterContext& ctx,
    const std::vector<std::pair<int, Eigen::MatrixXcd>>& precoders,
    double streamPower, const Eigen::VectorXd& alpha, double overheadFactor);

// Greedy eigenmode selection: starts empty, adds at each iteration the
// eigenmode with the largest weighted sum rate after full recomputation of
// precoders and power, stops when no addition improves the rate. Rank
// deficient additions (sigma_min < 1e-9 sigma_max of the stacked rows) are
// skipped permanently. At most M|J_c| modes are selected.
ClusterPlan greedyEigenmodeSelect(const ClusterContext& ctx,
                                  const Eigen::VectorXd& alpha, int lMax,
                                  double overheadFactor);

// Embeds a scheduled UE's in-cluster precoder into the JM-row global matrix
// (zero rows for BSs outside the serving cluster).
Eigen::MatrixXcd globalPrecoder(const ClusterPlan& plan, int scheduledIndex,
                                int J);

}  // namespace compsim
