#include "compsim/mumimo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace compsim {

namespace {

constexpr double kRankTol = 1e-9;

double log2detPd(const Eigen::MatrixXcd& m) {
  Eigen::LLT<Eigen::MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log2detPd: matrix not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    acc += std::log2(l(i, i).real());
  return 2.0 * acc;
}

}  // namespace

double iciPower(int ue, std::span<const int> clusterBs, const Drop& drop,
                const Scenario& sc) {
  std::vector<char> inCluster(drop.J(), 0);
  for (int j : clusterBs) {
    if (j < 0 || j >= drop.J())
      throw std::out_of_range("iciPower: BS index outside deployment");
    inCluster[j] = 1;
  }
  double sum = 0.0;
  for (int j = 0; j < drop.J(); ++j)
    if (!inCluster[j]) sum += drop.gain(ue, j);
  return sc.pBs() * sum;
}

std::vector<Eigenmode> eigenmodes(const Eigen::MatrixXcd& hhat, int lMax,
                                  int ue) {
  if (!hhat.allFinite())
    throw std::invalid_argument("eigenmodes: non-finite channel matrix");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      hhat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  int count = static_cast<int>(svd.singularValues().size());
  if (lMax > 0) count = std::min(count, lMax);
  std::vector<Eigenmode> modes(count);
  for (int i = 0; i < count; ++i) {
    modes[i].ue = ue;
    modes[i].index = i;
    modes[i].singularValue = svd.singularValues()(i);
    modes[i].v = svd.matrixV().col(i);
  }
  return modes;
}

std::vector<std::pair<int, Eigen::MatrixXcd>> metPrecoder(
    const std::vector<Eigenmode>& modes) {
  if (modes.empty())
    throw std::invalid_argument("metPrecoder: no eigenmodes selected");
  const Eigen::Index mTot = modes.front().v.size();
  const Eigen::Index L = static_cast<Eigen::Index>(modes.size());
  if (L > mTot)
    throw std::invalid_argument("metPrecoder: more modes than array antennas");

  Eigen::MatrixXcd gamma(L, mTot);
  for (Eigen::Index i = 0; i < L; ++i) {
    if (modes[i].v.size() != mTot)
      throw std::invalid_argument("metPrecoder: inconsistent mode dimensions");
    gamma.row(i) = modes[i].gammaRow();
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      gamma, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(L - 1) < kRankTol * sv(0))
    throw std::runtime_error("metPrecoder: infeasible eigenmode set");
  Eigen::MatrixXcd pinv =
      svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();

  std::vector<std::pair<int, Eigen::MatrixXcd>> out;
  std::vector<int> colsOf;
  for (Eigen::Index i = 0; i < L; ++i) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& p) { return p.first == modes[i].ue; });
    if (it == out.end()) {
      out.emplace_back(modes[i].ue, Eigen::MatrixXcd());
      it = std::prev(out.end());
    }
    Eigen::MatrixXcd& g = it->second;
    g.conservativeResize(mTot, g.cols() + 1);
    g.col(g.cols() - 1) = pinv.col(i).normalized();
  }
  return out;
}

double equalPower(const std::vector<std::pair<int, Eigen::MatrixXcd>>& precoders,
                  int mPerBs, double pBs) {
  if (precoders.empty())
    throw std::invalid_argument("equalPower: no streams");
  const Eigen::Index mTot = precoders.front().second.rows();
  const Eigen::Index nBs = mTot / mPerBs;
  double maxLoad = 0.0;
  for (Eigen::Index b = 0; b < nBs; ++b) {
    double load = 0.0;
    for (const auto& [ue, g] : precoders)
      load += g.middleRows(b * mPerBs, mPerBs).squaredNorm();
    maxLoad = std::max(maxLoad, load);
  }
  if (maxLoad <= 0.0) throw std::invalid_argument("equalPower: zero load");
  return pBs / maxLoad;
}

ClusterContext makeClusterContext(int clusterId, const std::vector<int>& bsSet,
                                  const std::vector<int>& ues, const Drop& drop,
                                  const Scenario& sc,
                                  const FadingBlock& block) {
  ClusterContext ctx;
  ctx.clusterId = clusterId;
  ctx.bsSet = bsSet;
  ctx.ues = ues;
  ctx.noisePower = sc.noisePower();
  ctx.pBs = sc.pBs();
  ctx.mPerBs = block.M;
  ctx.nUe = block.N;
  const int nBs = static_cast<int>(bsSet.size());
  ctx.hhat.reserve(ues.size());
  ctx.xi.reserve(ues.size());
  for (int ue : ues) {
    Eigen::MatrixXcd h(block.N, static_cast<Eigen::Index>(nBs) * block.M);
    for (int b = 0; b < nBs; ++b)
      h.middleCols(static_cast<Eigen::Index>(b) * block.M, block.M) =
          block.hhat(ue, bsSet[b]);
    ctx.hhat.push_back(std::move(h));
    ctx.xi.push_back(iciPower(ue, bsSet, drop, sc));
  }
  return ctx;
}

double estimatedClusterRate(
    const ClusterContext& ctx,
    const std::vector<std::pair<int, Eigen::MatrixXcd>>& precoders,
    double streamPower, const Eigen::VectorXd& alpha, double overheadFactor) {
  double total = 0.0;
  for (const auto& [ue, g] : precoders) {
    const auto it = std::find(ctx.ues.begin(), ctx.ues.end(), ue);
    if (it == ctx.ues.end())
      throw std::invalid_argument("estimatedClusterRate: UE not in cluster");
    const std::size_t i = static_cast<std::size_t>(it - ctx.ues.begin());
    const Eigen::MatrixXcd& h = ctx.hhat[i];
    Eigen::MatrixXcd psi = (ctx.noisePower + ctx.xi[i]) *
                           Eigen::MatrixXcd::Identity(ctx.nUe, ctx.nUe);
    for (const auto& [m, gm] : precoders) {
      if (m == ue) continue;
      const Eigen::MatrixXcd t = h * gm;
      psi.noalias() += streamPower * t * t.adjoint();
    }
    const Eigen::MatrixXcd e = h * g;
    Eigen::MatrixXcd sig = psi;
    sig.noalias() += streamPower * e * e.adjoint();
    total += alpha(ue) * (log2detPd(sig) - log2detPd(psi));
  }
  return overheadFactor * total;
}

namespace {

// Hot-loop scratch space for the greedy planner: everything sized once so a
// trial allocates nothing. Gamma^H = Q R with Q orthonormal; appending a
// trial row costs one orthogonalization pass and small triangular work, and
// the pseudo-inverse comes from a triangular inversion. Identical results to
// the SVD-based reference construction (the pseudo-inverse is unique).
struct PlannerWork {
  Eigen::Index mTot = 0;
  int nAnt = 0;
  Eigen::Index nUes = 0;

  Eigen::MatrixXcd q;      // mTot x mTot, first L columns valid
  Eigen::MatrixXcd r;      // mTot x mTot, L x L upper block valid
  Eigen::MatrixXcd f;      // (nUes*N) x mTot: stacked Hhat_u * Q
  Eigen::MatrixXcd candCols;  // mTot x nCands: gamma rows as columns
  Eigen::MatrixXcd proj;      // L x nCands: Q^H * candCols, per iteration
  Eigen::MatrixXcd rp;     // (L+1) x (L+1) trial triangular factor
  Eigen::MatrixXcd wsc;    // (L+1) x (L+1): inv(rp^H) with unit-norm columns
  Eigen::MatrixXcd gRaw;   // mTot x (L+1)
  Eigen::MatrixXcd eAll;   // N x (L+1)
  Eigen::MatrixXcd psi, sig, chol;  // N x N
  Eigen::VectorXcd w, reorth;
  Eigen::VectorXcd px, py;  // sigma iteration buffers
  std::vector<double> colNorm;
  std::vector<int> owners;
  std::vector<std::uint32_t> ownerStamp;
  std::uint32_t stamp = 0;

  void init(Eigen::Index mTotIn, int nAntIn, Eigen::Index nUesIn,
            Eigen::Index nCands) {
    mTot = mTotIn;
    nAnt = nAntIn;
    nUes = nUesIn;
    q.resize(mTot, mTot);
    r.resize(mTot, mTot);
    f.resize(nUes * nAnt, mTot);
    candCols.resize(mTot, nCands);
    proj.resize(mTot, nCands);
    rp.resize(mTot, mTot);
    wsc.resize(mTot, mTot);
    gRaw.resize(mTot, mTot);
    eAll.resize(nAnt, mTot);
    psi.resize(nAnt, nAnt);
    sig.resize(nAnt, nAnt);
    chol.resize(nAnt, nAnt);
    w.resize(mTot);
    reorth.resize(mTot);
    px.resize(mTot);
    py.resize(mTot);
    colNorm.resize(mTot);
    owners.reserve(mTot + 1);
    ownerStamp.assign(nUes, 0);
    stamp = 0;
  }
};

// In-place lower Cholesky of the n x n top-left block; returns the
// determinant (product of the pivots) or throws if not positive definite.
double detCholInPlace(Eigen::MatrixXcd& a, int n) {
  double det = 1.0;
  for (int j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (int k = 0; k < j; ++k) d -= std::norm(a(j, k));
    if (d <= 0.0)
      throw std::runtime_error("log2detPd: matrix not positive definite");
    const double root = std::sqrt(d);
    a(j, j) = root;
    det *= d;
    for (int i = j + 1; i < n; ++i) {
      std::complex<double> s = a(i, j);
      for (int k = 0; k < j; ++k) s -= a(i, k) * std::conj(a(j, k));
      a(i, j) = s / root;
    }
  }
  return det;
}

// sigma_max / sigma_min of the n x n upper-triangular block of t, via power
// and inverse iteration on preallocated buffers; serves the 1e-9 veto.
std::pair<double, double> triSigmaExtremes(const Eigen::MatrixXcd& t, int n,
                                           Eigen::VectorXcd& x,
                                           Eigen::VectorXcd& y) {
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(t(i, i));
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  const auto tri = t.topLeftCorner(n, n).triangularView<Eigen::Upper>();
  x.head(n).setConstant(1.0 / std::sqrt(double(n)));
  double smax = 0.0;
  for (int it = 0; it < 4; ++it) {
    y.head(n).noalias() = tri * x.head(n);
    x.head(n).noalias() = tri.adjoint() * y.head(n);
    const double nx = x.head(n).norm();
    if (nx == 0.0) break;
    smax = std::sqrt(nx);
    x.head(n) /= nx;
  }
  smax = std::max(smax, dmax);
  if (dmin == 0.0 || smax == 0.0) return {smax, 0.0};
  x.head(n).setConstant(1.0 / std::sqrt(double(n)));
  double inv = 0.0;
  for (int it = 0; it < 4; ++it) {
    y.head(n) = x.head(n);
    tri.solveInPlace(y.head(n));
    x.head(n) = y.head(n);
    tri.adjoint().solveInPlace(x.head(n));
    const double nx = x.head(n).norm();
    if (!std::isfinite(nx) || nx == 0.0) return {smax, 0.0};
    inv = std::sqrt(nx);
    x.head(n) /= nx;
  }
  return {smax, inv > 0.0 ? 1.0 / inv : 0.0};
}

}  // namespace

ClusterPlan greedyEigenmodeSelect(const ClusterContext& ctx,
                                  const Eigen::VectorXd& alpha, int lMax,
                                  double overheadFactor) {
  ClusterPlan plan;
  plan.clusterId = ctx.clusterId;
  plan.bsSet = ctx.bsSet;
  if (ctx.ues.empty()) return plan;

  const Eigen::Index mTot = ctx.hhat.front().cols();
  const int nAnt = ctx.nUe;
  const Eigen::Index nUes = static_cast<Eigen::Index>(ctx.ues.size());

  struct Cand {
    Eigenmode mode;
    int ctxIdx = 0;
    bool used = false;
    bool banned = false;  // permanently infeasible (rank deficient)
  };
  std::vector<Cand> cands;
  for (std::size_t u = 0; u < ctx.ues.size(); ++u) {
    for (Eigenmode& m : eigenmodes(ctx.hhat[u], lMax, ctx.ues[u]))
      cands.push_back({std::move(m), static_cast<int>(u), false, false});
  }

  thread_local PlannerWork work;
  work.init(mTot, nAnt, nUes, static_cast<Eigen::Index>(cands.size()));
  std::vector<double> candNorm(cands.size());
  for (std::size_t ci = 0; ci < cands.size(); ++ci) {
    work.candCols.col(ci) = cands[ci].mode.singularValue * cands[ci].mode.v;
    candNorm[ci] = work.candCols.col(ci).norm();
  }
  Eigen::MatrixXcd hAll(nUes * nAnt, mTot);
  for (Eigen::Index u = 0; u < nUes; ++u)
    hAll.middleRows(u * nAnt, nAnt) = ctx.hhat[u];

  std::vector<Eigenmode> selected;
  std::vector<int> selectedCtxIdx;
  double bestRate = 0.0;

  const int nBs = static_cast<int>(mTot) / ctx.mPerBs;
  double frobR2 = 0.0;  // squared Frobenius norm of the committed R

  while (static_cast<Eigen::Index>(selected.size()) < mTot) {
    const int l = static_cast<int>(selected.size());
    int bestCand = -1;
    double bestTrial = bestRate;

    const auto qL = work.q.leftCols(l);
    if (l > 0)
      work.proj.topRows(l).noalias() = qL.adjoint() * work.candCols;

    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      Cand& cand = cands[ci];
      if (cand.used || cand.banned) continue;
      const auto cCol = work.candCols.col(ci);

      // Orthogonalize the appended column of Gamma^H against Q. A
      // reorthogonalization pass is needed only when cancellation is severe
      // (small residual), which is also the rank-deficiency territory.
      auto rCol = work.rp.col(l).head(l);
      rCol = work.proj.col(ci).head(l);
      work.w = cCol;
      work.w.noalias() -= qL * rCol;
      double rho = work.w.norm();
      if (rho < 0.1 * candNorm[ci] && l > 0) {
        work.reorth.head(l).noalias() = qL.adjoint() * work.w;
        work.w.noalias() -= qL * work.reorth.head(l);
        rCol += work.reorth.head(l);
        rho = work.w.norm();
      }
      work.rp(l, l) = rho;

      // wsc = inv(rp^H) (lower triangular, forward substitution), then its
      // columns normalized; colNorm keeps the raw pseudo-inverse column
      // norms for the rank bounds.
      double frobW2 = 0.0;
      for (int jj = 0; jj <= l; ++jj) {
        work.wsc(jj, jj) = 1.0 / std::conj(work.rp(jj, jj));
        for (int ii = jj + 1; ii <= l; ++ii) {
          std::complex<double> s = 0.0;
          for (int kk = jj; kk < ii; ++kk)
            s += std::conj(work.rp(kk, ii)) * work.wsc(kk, jj);
          work.wsc(ii, jj) = -s / std::conj(work.rp(ii, ii));
        }
        double n2 = 0.0;
        for (int ii = jj; ii <= l; ++ii) n2 += std::norm(work.wsc(ii, jj));
        work.colNorm[jj] = std::sqrt(n2);
        frobW2 += n2;
        const double inv = 1.0 / work.colNorm[jj];
        for (int ii = jj; ii <= l; ++ii) work.wsc(ii, jj) *= inv;
      }

      // Rank-deficiency veto, sigma_min < 1e-9 sigma_max. Rigorous Frobenius
      // bounds certify the common case; the iterative estimate settles the
      // rest.
      const double frobRp2 =
          frobR2 + work.rp.col(l).head(l + 1).squaredNorm();
      const bool certainlyOk =
          std::isfinite(frobW2) &&
          1.0 >= kRankTol * std::sqrt(frobW2) * std::sqrt(frobRp2);
      if (!certainlyOk) {
        const auto [smax, smin] =
            triSigmaExtremes(work.rp, l + 1, work.px, work.py);
        if (smax <= 0.0 || smin < kRankTol * smax) {
          cand.banned = true;  // row space only grows; never feasible again
          continue;
        }
      }
      // Stage qNew in the free column of Q so [Q, qNew] is one contiguous
      // block (the commit step rebuilds Q anyway).
      work.q.col(l) = work.w / rho;

      // Per-BS power load of the unit-norm precoder columns:
      // G = [Q, qNew] * wsc. A single-BS cluster loads exactly one unit per
      // stream.
      double maxLoad;
      if (nBs == 1) {
        maxLoad = static_cast<double>(l + 1);
      } else {
        work.gRaw.leftCols(l + 1).noalias() =
            work.q.leftCols(l + 1) *
            work.wsc.topLeftCorner(l + 1, l + 1)
                .triangularView<Eigen::Lower>();
        maxLoad = 0.0;
        for (int b = 0; b < nBs; ++b) {
          const double load = work.gRaw.block(b * ctx.mPerBs, 0, ctx.mPerBs,
                                              l + 1)
                                  .squaredNorm();
          maxLoad = std::max(maxLoad, load);
        }
      }
      const double p = ctx.pBs / maxLoad;

      // Weighted sum rate with the tentative mode included.
      work.owners.assign(selectedCtxIdx.begin(), selectedCtxIdx.end());
      work.owners.push_back(cand.ctxIdx);
      ++work.stamp;
      double rate = 0.0;
      for (int oi = 0; oi <= l; ++oi) {
        const int u = work.owners[oi];
        if (work.ownerStamp[u] == work.stamp) continue;
        work.ownerStamp[u] = work.stamp;

        // E = [F_u, Hhat_u qNew] * wsc: unit-precoder effective channels.
        // The trial column of F_u is staged in its free slot, mirroring Q.
        auto fu = work.f.middleRows(static_cast<Eigen::Index>(u) * nAnt, nAnt);
        fu.col(l).noalias() = ctx.hhat[u] * work.q.col(l);
        const double floor = ctx.noisePower + ctx.xi[u];
        const std::complex<double>* fp = fu.data();
        const Eigen::Index fStride = work.f.rows();
        const std::complex<double>* wp = work.wsc.data();
        const Eigen::Index wStride = work.wsc.rows();

        if (nAnt == 1) {
          double own = 0.0, other = 0.0;
          for (int j = 0; j <= l; ++j) {
            const std::complex<double>* wcol = wp + j * wStride;
            std::complex<double> e = 0.0;
            for (int kk = j; kk <= l; ++kk)
              e += fp[kk * fStride] * wcol[kk];
            (work.owners[j] == u ? own : other) += std::norm(e);
          }
          rate += alpha(ctx.ues[u]) *
                  std::log2((floor + p * (own + other)) /
                            (floor + p * other));
          continue;
        }

        // Fused raw kernel: per column j compute e = F' wsc(:,j) and
        // accumulate the lower triangle of psi (interference) or sig-part
        // (own signal).
        std::complex<double>* psiP = work.psi.data();
        std::complex<double>* sigP = work.sig.data();
        const Eigen::Index nn = work.psi.rows();
        for (int i = 0; i < nAnt; ++i)
          for (int jj = 0; jj <= i; ++jj) {
            psiP[i + jj * nn] = (i == jj) ? floor : 0.0;
            sigP[i + jj * nn] = 0.0;
          }
        std::complex<double> e[8];
        for (int j = 0; j <= l; ++j) {
          const std::complex<double>* wcol = wp + j * wStride;
          for (int i = 0; i < nAnt; ++i) e[i] = 0.0;
          for (int kk = j; kk <= l; ++kk) {
            const std::complex<double> wk = wcol[kk];
            const std::complex<double>* fcol = fp + kk * fStride;
            for (int i = 0; i < nAnt; ++i) e[i] += fcol[i] * wk;
          }
          std::complex<double>* target =
              work.owners[j] == u ? sigP : psiP;
          for (int i = 0; i < nAnt; ++i) {
            const std::complex<double> ei = p * e[i];
            for (int jj = 0; jj <= i; ++jj)
              target[i + jj * nn] += ei * std::conj(e[jj]);
          }
        }
        for (int i = 0; i < nAnt; ++i)
          for (int jj = 0; jj <= i; ++jj)
            sigP[i + jj * nn] += psiP[i + jj * nn];

        work.chol = work.psi;
        const double detPsi = detCholInPlace(work.chol, nAnt);
        work.chol = work.sig;
        const double detSig = detCholInPlace(work.chol, nAnt);
        rate += alpha(ctx.ues[u]) * std::log2(detSig / detPsi);
      }
      rate *= overheadFactor;

      const double tol = 1e-12 * std::max(1.0, std::abs(bestTrial));
      if (rate > bestTrial + tol) {
        bestTrial = rate;
        bestCand = static_cast<int>(ci);
      }
    }

    if (bestCand < 0) break;  // no improving addition
    cands[bestCand].used = true;
    selected.push_back(cands[bestCand].mode);
    selectedCtxIdx.push_back(cands[bestCand].ctxIdx);
    bestRate = bestTrial;

    // Refresh Q, R from scratch (stable) and the cached Hhat_u * Q products.
    const int lNew = static_cast<int>(selected.size());
    Eigen::MatrixXcd gh(mTot, lNew);
    for (int i = 0; i < lNew; ++i)
      gh.col(i) = selected[i].singularValue * selected[i].v;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gh);
    work.q.leftCols(lNew) =
        qr.householderQ() * Eigen::MatrixXcd::Identity(mTot, lNew);
    work.r.topLeftCorner(lNew, lNew) =
        qr.matrixQR().topLeftCorner(lNew, lNew).triangularView<Eigen::Upper>();
    work.rp.topLeftCorner(lNew, lNew) = work.r.topLeftCorner(lNew, lNew);
    frobR2 = work.r.topLeftCorner(lNew, lNew).squaredNorm();
    work.f.leftCols(lNew).noalias() = hAll * work.q.leftCols(lNew);
  }

  if (selected.empty()) return plan;

  // Final plan through the reference construction.
  plan.selectedModes = selected;
  auto precoders = metPrecoder(selected);
  std::sort(precoders.begin(), precoders.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  plan.streamPower = equalPower(precoders, ctx.mPerBs, ctx.pBs);
  plan.estRate = estimatedClusterRate(ctx, precoders, plan.streamPower, alpha,
                                      overheadFactor);
  for (auto& [ue, g] : precoders) {
    plan.scheduledUes.push_back(ue);
    plan.rank.push_back(static_cast<int>(g.cols()));
    plan.precoder.push_back(std::move(g));
  }
  return plan;
}

Eigen::MatrixXcd globalPrecoder(const ClusterPlan& plan, int scheduledIndex,
                                int J) {
  const Eigen::MatrixXcd& g = plan.precoder.at(scheduledIndex);
  const int nBs = static_cast<int>(plan.bsSet.size());
  const Eigen::Index m = g.rows() / nBs;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(J) * m, g.cols());
  for (int b = 0; b < nBs; ++b)
    out.middleRows(static_cast<Eigen::Index>(plan.bsSet[b]) * m, m) =
        g.middleRows(static_cast<Eigen::Index>(b) * m, m);
  return out;
}

}  // namespace compsim
