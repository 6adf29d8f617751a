#include "ucv/ols.hpp"

#include <Eigen/Eigenvalues>
#include <utility>

#include "ucv/errors.hpp"

namespace ucv {

namespace {

constexpr double kRankTol = 1e-10;

// Residual-dependent aggregates; the design-side fields of `fit` must
// already be populated.
void fill_residual_aggregates(OlsFit& fit) {
  const ClusteredDataset& data = *fit.data;
  const int num_clusters = data.num_clusters();
  const int k = data.k();

  fit.beta_hat = fit.gram_inv * (data.x().transpose() * fit.y);
  fit.resid = fit.y - data.x() * fit.beta_hat;
  fit.rss = fit.resid.squaredNorm();

  fit.resid_cluster_sum.resize(num_clusters);
  fit.cluster_rss.resize(num_clusters);
  fit.cluster_sum_sq.resize(num_clusters);
  fit.xte.resize(k, num_clusters);
  for (int c = 0; c < num_clusters; ++c) {
    double sum = 0.0, ss = 0.0;
    Eigen::VectorXd xe = Eigen::VectorXd::Zero(k);
    for (int i : data.cluster_rows()[c]) {
      const double e = fit.resid[i];
      sum += e;
      ss += e * e;
      xe.noalias() += data.x().row(i).transpose() * e;
    }
    fit.resid_cluster_sum[c] = sum;
    fit.cluster_rss[c] = ss;
    fit.cluster_sum_sq[c] = sum * sum;
    fit.xte.col(c) = xe;
  }
  fit.rss_cluster = fit.resid_cluster_sum.squaredNorm();
}

}  // namespace

Eigen::VectorXd OlsFit::cluster_resid(int c) const {
  const auto& rows = data->cluster_rows()[c];
  Eigen::VectorXd out(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) out[i] = resid[rows[i]];
  return out;
}

OlsFit fit_ols(ClusteredDataset data) {
  const int n = data.n();
  const int k = data.k();
  if (n <= k)
    fail(ErrorCode::RankDeficient,
         "need n > k, got n=" + std::to_string(n) + ", k=" + std::to_string(k));

  OlsFit fit;
  fit.data = std::make_shared<const ClusteredDataset>(std::move(data));
  fit.y = fit.data->y();

  const ClusteredDataset& d = *fit.data;
  fit.gram = d.x().transpose() * d.x();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.gram);
  const double scale = fit.gram.diagonal().maxCoeff();
  if (!(scale > 0.0) || eig.eigenvalues().minCoeff() <= kRankTol * scale)
    fail(ErrorCode::RankDeficient, "Gram matrix singular beyond tolerance");
  fit.gram_inv = eig.eigenvectors() *
                 eig.eigenvalues().cwiseInverse().asDiagonal() *
                 eig.eigenvectors().transpose();

  const int num_clusters = d.num_clusters();
  fit.xtil.setZero(num_clusters, k);
  fit.per_cluster_gram.assign(num_clusters, Eigen::MatrixXd::Zero(k, k));
  for (int c = 0; c < num_clusters; ++c) {
    for (int i : d.cluster_rows()[c]) {
      fit.xtil.row(c) += d.x().row(i);
      fit.per_cluster_gram[c].noalias() +=
          d.x().row(i).transpose() * d.x().row(i);
    }
  }

  fill_residual_aggregates(fit);
  return fit;
}

OlsFit refit_ols(const OlsFit& base, Eigen::VectorXd y) {
  if (y.size() != base.n())
    fail(ErrorCode::ShapeMismatch, "refit outcome length mismatch");
  OlsFit fit;
  fit.data = base.data;
  fit.y = std::move(y);
  fit.gram = base.gram;
  fit.gram_inv = base.gram_inv;
  fit.xtil = base.xtil;
  fit.per_cluster_gram = base.per_cluster_gram;
  fill_residual_aggregates(fit);
  return fit;
}

ScalarStats scalar_stats(const OlsFit& fit) {
  const int num_clusters = fit.num_clusters();
  ScalarStats st;

  const Eigen::MatrixXd xtx_til = fit.xtil.transpose() * fit.xtil;
  const Eigen::MatrixXd z = fit.gram_inv * xtx_til;
  st.s = z.trace();
  st.s_dot = (z * z).trace();

  Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(fit.k(), fit.k());
  st.s_c.resize(num_clusters);
  st.s_tilde.resize(num_clusters);
  for (int c = 0; c < num_clusters; ++c) {
    const Eigen::VectorXd xt = fit.xtil.row(c).transpose();
    weighted.noalias() +=
        static_cast<double>(fit.data->cluster_sizes()[c]) * xt * xt.transpose();
    st.s_c[c] = (fit.gram_inv * fit.per_cluster_gram[c]).trace();
    st.s_tilde[c] = xt.dot(fit.gram_inv * xt);
  }
  st.s_breve = (fit.gram_inv * weighted).trace();
  return st;
}

}  // namespace ucv
