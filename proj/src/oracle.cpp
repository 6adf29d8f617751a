#include "ucv/oracle.hpp"

#include <string>

#include "ucv/errors.hpp"
#include "ucv/estimators.hpp"
#include "ucv/linalg.hpp"

namespace ucv::oracle {

namespace {

void check_cap(int n, int cap) {
  if (n > cap)
    fail(ErrorCode::TooLargeForOracle,
         "n=" + std::to_string(n) + " exceeds the oracle cap " +
             std::to_string(cap));
}

// Column j of (M⊗M)D is vec(M · mat(d_j) · M).
Eigen::MatrixXd mm_times(const Eigen::MatrixXd& m, const Eigen::MatrixXd& d) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd out(d.rows(), d.cols());
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    const Eigen::Map<const Eigen::MatrixXd> dj(d.col(j).data(), n, n);
    const Eigen::MatrixXd mdm = m * dj * m;
    out.col(j) = Eigen::Map<const Eigen::VectorXd>(mdm.data(), n * n);
  }
  return out;
}

Eigen::VectorXd resid_outer_vec(const Eigen::VectorXd& resid) {
  const int n = static_cast<int>(resid.size());
  const Eigen::MatrixXd outer = resid * resid.transpose();
  return Eigen::Map<const Eigen::VectorXd>(outer.data(), n * n);
}

// v̂ = vec[(X'X)⁻¹X' mat(Dπ) X(X'X)⁻¹] without forming R explicitly.
Eigen::VectorXd sandwich_of(const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& vec_sigma) {
  const int n = static_cast<int>(x.rows());
  const int k = static_cast<int>(x.cols());
  const Eigen::MatrixXd ginv = (x.transpose() * x).inverse();
  const Eigen::Map<const Eigen::MatrixXd> s(vec_sigma.data(), n, n);
  const Eigen::MatrixXd v = ginv * x.transpose() * s * x * ginv;
  return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), k * k));
}

}  // namespace

DenseDesign build_design(Structure structure,
                         const std::vector<std::vector<int>>& cluster_rows,
                         int n, int cap) {
  check_cap(n, cap);
  const int num_clusters = static_cast<int>(cluster_rows.size());
  DenseDesign design;
  design.structure = structure;

  switch (structure) {
    case Structure::Equicorrelated: {
      design.d.setZero(static_cast<Eigen::Index>(n) * n, 2);
      for (int i = 0; i < n; ++i)
        design.d(static_cast<Eigen::Index>(i) * n + i, 0) = 1.0;  // vec I
      for (const auto& rows : cluster_rows)
        for (int i : rows)
          for (int j : rows)
            design.d(static_cast<Eigen::Index>(j) * n + i, 1) = 1.0;  // vec BB'
      break;
    }
    case Structure::ClusterSpecific: {
      design.d.setZero(static_cast<Eigen::Index>(n) * n, 2 * num_clusters);
      for (int c = 0; c < num_clusters; ++c) {
        for (int i : cluster_rows[c])
          design.d(static_cast<Eigen::Index>(i) * n + i, c) = 1.0;
        for (int i : cluster_rows[c])
          for (int j : cluster_rows[c])
            design.d(static_cast<Eigen::Index>(j) * n + i,
                     num_clusters + c) = 1.0;
      }
      break;
    }
    case Structure::Unrestricted: {
      Eigen::Index r = 0;
      for (const auto& rows : cluster_rows)
        r += static_cast<Eigen::Index>(rows.size()) * rows.size();
      design.d.setZero(static_cast<Eigen::Index>(n) * n, r);
      Eigen::Index col = 0;
      for (const auto& rows : cluster_rows) {
        const int nc = static_cast<int>(rows.size());
        // Block = G_c ⊗ G_c: column (v·n_c + u) selects entry (rows[u], rows[v]).
        for (int v = 0; v < nc; ++v)
          for (int u = 0; u < nc; ++u)
            design.d(static_cast<Eigen::Index>(rows[v]) * n + rows[u],
                     col + static_cast<Eigen::Index>(v) * nc + u) = 1.0;
        col += static_cast<Eigen::Index>(nc) * nc;
      }
      break;
    }
    case Structure::Panel:
      fail(ErrorCode::ShapeMismatch, "use build_panel_design");
  }
  return design;
}

DenseDesign build_panel_design(int num_units, int num_waves, int cap) {
  const int n = num_units * num_waves;
  check_cap(n, cap);
  DenseDesign design;
  design.structure = Structure::Panel;
  design.d.setZero(static_cast<Eigen::Index>(n) * n,
                   static_cast<Eigen::Index>(num_waves) * num_waves);
  // D = Σ_i G_i ⊗ G_i with G_i = e_i ⊗ I_T the unit selector.
  for (int i = 0; i < num_units; ++i) {
    const int base = i * num_waves;
    for (int s = 0; s < num_waves; ++s)
      for (int t = 0; t < num_waves; ++t)
        design.d(static_cast<Eigen::Index>(base + s) * n + base + t,
                 static_cast<Eigen::Index>(s) * num_waves + t) += 1.0;
  }
  return design;
}

Eigen::MatrixXd annihilator(const Eigen::MatrixXd& x) {
  return Eigen::MatrixXd::Identity(x.rows(), x.rows()) -
         x * (x.transpose() * x).inverse() * x.transpose();
}

Eigen::VectorXd dense_hrk(const DenseDesign& design, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& resid) {
  const Eigen::MatrixXd m = annihilator(x);
  const Eigen::MatrixXd mmd = mm_times(m, design.d);
  const Eigen::MatrixXd core = design.d.transpose() * mmd;
  const auto lu = lu_checked(core, ErrorCode::SingularCore,
                             "D'(M⊗M)D singular");
  const Eigen::VectorXd rhs = design.d.transpose() * resid_outer_vec(resid);
  return sandwich_of(x, design.d * lu.solve(rhs));
}

Eigen::VectorXd dense_hrk_woodbury(const DenseDesign& design,
                                   const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& resid) {
  const int n = static_cast<int>(x.rows());
  const int k = static_cast<int>(x.cols());
  const Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::MatrixXd p =
      Eigen::MatrixXd::Identity(n, n) - annihilator(x);

  // A = D'D - D'(I⊗P)D - D'(P⊗I)D, applied column-wise:
  // (I⊗P)vec Z = vec(PZ), (P⊗I)vec Z = vec(ZP).
  Eigen::MatrixXd ipd(design.d.rows(), design.d.cols());
  Eigen::MatrixXd pid(design.d.rows(), design.d.cols());
  for (Eigen::Index j = 0; j < design.d.cols(); ++j) {
    const Eigen::Map<const Eigen::MatrixXd> dj(design.d.col(j).data(), n, n);
    const Eigen::MatrixXd pz = p * dj;
    const Eigen::MatrixXd zp = dj * p;
    ipd.col(j) = Eigen::Map<const Eigen::VectorXd>(pz.data(), n * n);
    pid.col(j) = Eigen::Map<const Eigen::VectorXd>(zp.data(), n * n);
  }
  const Eigen::MatrixXd a =
      design.d.transpose() * (design.d - ipd - pid);
  const auto a_lu = lu_checked(a, ErrorCode::SingularA, "A singular");

  const Eigen::MatrixXd f = design.d.transpose() * kron(x, x);
  const Eigen::MatrixXd w = kron(gram, gram);
  const Eigen::MatrixXd core = w + f.transpose() * a_lu.solve(f);
  const auto core_lu =
      lu_checked(core, ErrorCode::SingularCore, "W + F'A⁻¹F singular");

  const Eigen::VectorXd q = design.d.transpose() * resid_outer_vec(resid);
  const Eigen::VectorXd v = core_lu.solve(f.transpose() * a_lu.solve(q));
  (void)k;
  return v;
}

Projection dense_projection(const DenseDesign& design, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& resid) {
  const Eigen::MatrixXd dtd = design.d.transpose() * design.d;
  const auto lu = lu_checked(dtd, ErrorCode::SingularCore, "D'D singular");
  Projection out;
  out.pi = lu.solve(design.d.transpose() * resid_outer_vec(resid));
  out.v = sandwich_of(x, design.d * out.pi);
  return out;
}

double expectation_check(const OlsFit& fit, EstimatorKind kind,
                         const Eigen::MatrixXd& sigma, int cap) {
  const int n = fit.n();
  const int k = fit.k();
  const int num_clusters = fit.num_clusters();
  check_cap(n, cap);

  const ClusteredDataset& data = *fit.data;
  const Eigen::MatrixXd m = annihilator(data.x());
  const Eigen::MatrixXd qbar = m * sigma * m;  // mat of (M⊗M)vec Σ

  // Expected residual aggregates, replacing ε̂ε̂' by its exact mean.
  const auto block = [&](int c) {
    const auto& rows = data.cluster_rows()[c];
    Eigen::MatrixXd b(rows.size(), rows.size());
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < rows.size(); ++j)
        b(i, j) = qbar(rows[i], rows[j]);
    return b;
  };

  Eigen::VectorXd v_exp;
  switch (kind) {
    case EstimatorKind::UV1: {
      double rss = qbar.trace();
      double rss_cluster = 0.0;
      for (int c = 0; c < num_clusters; ++c) rss_cluster += block(c).sum();
      const VarianceEstimate est =
          Uv1Solver(fit, scalar_stats(fit)).estimate(rss, rss_cluster);
      v_exp = Eigen::Map<const Eigen::VectorXd>(est.v.data(), k * k);
      break;
    }
    case EstimatorKind::UV2: {
      Eigen::VectorXd rhs(2 * num_clusters);
      for (int c = 0; c < num_clusters; ++c) {
        const Eigen::MatrixXd b = block(c);
        rhs[c] = b.trace();
        rhs[num_clusters + c] = b.sum();
      }
      const VarianceEstimate est =
          Uv2Solver(fit, scalar_stats(fit)).estimate(rhs);
      v_exp = Eigen::Map<const Eigen::VectorXd>(est.v.data(), k * k);
      break;
    }
    case EstimatorKind::UV3: {
      std::vector<Eigen::MatrixXd> outer(num_clusters);
      for (int c = 0; c < num_clusters; ++c) {
        const Eigen::MatrixXd xc = data.cluster_x(c);
        outer[c] = xc.transpose() * block(c) * xc;
      }
      const VarianceEstimate est = Uv3Solver(fit).estimate(outer);
      v_exp = Eigen::Map<const Eigen::VectorXd>(est.v.data(), k * k);
      break;
    }
    case EstimatorKind::PluginRE: {
      const double nddot = data.sum_sq_sizes();
      if (!(nddot > n)) fail(ErrorCode::AllSingletons, "expectation check");
      double rss = qbar.trace();
      double rss_cluster = 0.0;
      for (int c = 0; c < num_clusters; ++c) rss_cluster += block(c).sum();
      const double tau2 = (rss_cluster - rss) / (nddot - n);
      const double sigma2 = rss / n - tau2;
      const Eigen::MatrixXd xtx_til = fit.xtil.transpose() * fit.xtil;
      const Eigen::MatrixXd v = sigma2 * fit.gram_inv +
                                tau2 * fit.gram_inv * xtx_til * fit.gram_inv;
      v_exp = Eigen::Map<const Eigen::VectorXd>(v.data(), k * k);
      break;
    }
    case EstimatorKind::PluginClusterRE: {
      Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(k, k);
      for (int c = 0; c < num_clusters; ++c) {
        const double nc = data.cluster_sizes()[c];
        if (nc < 2) fail(ErrorCode::SingletonCluster, "expectation check");
        const Eigen::MatrixXd b = block(c);
        const double tau2 = (b.sum() - b.trace()) / (nc * nc - nc);
        const double sigma2 = b.trace() / nc - tau2;
        const Eigen::VectorXd xt = fit.xtil.row(c).transpose();
        inner += sigma2 * fit.per_cluster_gram[c] + tau2 * xt * xt.transpose();
      }
      const Eigen::MatrixXd v = fit.gram_inv * inner * fit.gram_inv;
      v_exp = Eigen::Map<const Eigen::VectorXd>(v.data(), k * k);
      break;
    }
    case EstimatorKind::PluginUnrestricted: {
      Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
      for (int c = 0; c < num_clusters; ++c) {
        const Eigen::MatrixXd xc = data.cluster_x(c);
        meat += xc.transpose() * block(c) * xc;
      }
      const Eigen::MatrixXd v = fit.gram_inv * meat * fit.gram_inv;
      v_exp = Eigen::Map<const Eigen::VectorXd>(v.data(), k * k);
      break;
    }
  }

  const Eigen::MatrixXd v_true_mat =
      fit.gram_inv * data.x().transpose() * sigma * data.x() * fit.gram_inv;
  const Eigen::Map<const Eigen::VectorXd> v_true(v_true_mat.data(), k * k);
  const double scale = v_true.cwiseAbs().maxCoeff();
  const double err = (v_exp - v_true).cwiseAbs().maxCoeff();
  return scale > 0.0 ? err / scale : err;
}

double expectation_check_panel(const PanelFit& pf, const Eigen::MatrixXd& sigma,
                               int cap) {
  const int n = pf.fit.n();
  check_cap(n, cap);
  const int t = pf.num_waves();
  const ClusteredDataset& data = *pf.fit.data;

  const Eigen::MatrixXd m = annihilator(data.x());
  const Eigen::MatrixXd qbar = m * sigma * m;

  std::vector<Eigen::MatrixXd> outer(pf.num_units());
  for (int i = 0; i < pf.num_units(); ++i)
    outer[i] = qbar.block(i * t, i * t, t, t);
  const PanelEstimate est = PanelSolver(pf).estimate(outer);

  const Eigen::MatrixXd v_true = pf.fit.gram_inv * data.x().transpose() *
                                 sigma * data.x() * pf.fit.gram_inv;
  const double scale = v_true.cwiseAbs().maxCoeff();
  const double err = (est.v.v - v_true).cwiseAbs().maxCoeff();
  return scale > 0.0 ? err / scale : err;
}

}  // namespace ucv::oracle
