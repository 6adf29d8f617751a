#include "ucv/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "ucv/errors.hpp"
#include "ucv/linalg.hpp"

namespace ucv {

namespace {

// |det| of a 2×2 relative to its max-norm squared.
bool singular2(const Eigen::Matrix2d& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return true;
  return std::abs(m.determinant()) <= kSingularTol * scale * scale;
}

}  // namespace

// ---------------------------------------------------------------- UV1

Uv1Solver::Uv1Solver(const OlsFit& fit, const ScalarStats& stats) {
  const int n = fit.n();
  const int k = fit.k();
  const double nddot = fit.data->sum_sq_sizes();

  base1_ = fit.gram_inv;
  const Eigen::MatrixXd xtx_til = fit.xtil.transpose() * fit.xtil;
  base2_ = fit.gram_inv * xtx_til * fit.gram_inv;

  psi_ << n - k, n - stats.s,
          n - stats.s, nddot - 2.0 * stats.s_breve + stats.s_dot;
  if (singular2(psi_))
    fail(ErrorCode::SingularPsi,
         "two-parameter normal matrix singular (all clusters singletons?)");
  psi_inv_ = psi_.inverse();
}

VarianceEstimate Uv1Solver::estimate(double rss, double rss_cluster) const {
  const Eigen::Vector2d w = psi_inv_ * Eigen::Vector2d(rss, rss_cluster);
  return make_variance_estimate(w[0] * base1_ + w[1] * base2_,
                                VarianceMethod::UV1);
}

Eigen::Vector2d Uv1Solver::quad_weights(int ell) const {
  // f_ℓ applied to the two sandwich bases, then through Ψ⁻¹ (symmetric).
  const Eigen::Vector2d t(base1_(ell, ell), base2_(ell, ell));
  return psi_inv_ * t;
}

VarianceEstimate uv1(const OlsFit& fit, const ScalarStats& stats) {
  return Uv1Solver(fit, stats).estimate(fit.rss, fit.rss_cluster);
}

// ---------------------------------------------------------------- UV2

Uv2Solver::Uv2Solver(const OlsFit& fit, const ScalarStats& stats)
    : num_clusters_(fit.num_clusters()) {
  const int C = num_clusters_;

  base1_.resize(C);
  base2_.resize(C);
  std::vector<Eigen::MatrixXd> gh(C);      // (X'X)⁻¹X_c'X_c
  std::vector<Eigen::VectorXd> u(C);       // (X'X)⁻¹x̃_c
  for (int c = 0; c < C; ++c) {
    gh[c] = fit.gram_inv * fit.per_cluster_gram[c];
    u[c] = fit.gram_inv * fit.xtil.row(c).transpose();
    base1_[c] = gh[c] * fit.gram_inv;
    base2_[c] = u[c] * u[c].transpose();
  }

  // Φ = D'(M⊗M)D in the four C×C blocks.
  phi_.setZero(2 * C, 2 * C);
  for (int c = 0; c < C; ++c) {
    const double nc = fit.data->cluster_sizes()[c];
    phi_(c, c) += nc - 2.0 * stats.s_c[c];
    phi_(c, C + c) += nc - 2.0 * stats.s_tilde[c];
    phi_(C + c, c) += nc - 2.0 * stats.s_tilde[c];
    phi_(C + c, C + c) += nc * nc - 2.0 * nc * stats.s_tilde[c];
    for (int dd = 0; dd < C; ++dd) {
      const double a_cd = (gh[c] * gh[dd]).trace();
      const double l_cd = u[dd].dot(fit.per_cluster_gram[c] * u[dd]);
      const double q_cd = std::pow(fit.xtil.row(c).dot(u[dd]), 2);
      phi_(c, dd) += a_cd;
      phi_(c, C + dd) += l_cd;
      phi_(C + dd, c) += l_cd;
      phi_(C + c, C + dd) += q_cd;
    }
  }
  phi_lu_ = lu_checked(phi_, ErrorCode::SingularPhi,
                       "cluster-specific normal matrix singular");
}

VarianceEstimate Uv2Solver::estimate(const Eigen::VectorXd& rhs) const {
  const Eigen::VectorXd w = phi_lu_.solve(rhs);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(base1_[0].rows(), base1_[0].cols());
  for (int c = 0; c < num_clusters_; ++c)
    v += w[c] * base1_[c] + w[num_clusters_ + c] * base2_[c];
  return make_variance_estimate(std::move(v), VarianceMethod::UV2);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> Uv2Solver::quad_weights(
    int ell) const {
  Eigen::VectorXd t(2 * num_clusters_);
  for (int c = 0; c < num_clusters_; ++c) {
    t[c] = base1_[c](ell, ell);
    t[num_clusters_ + c] = base2_[c](ell, ell);
  }
  const Eigen::VectorXd r = phi_lu_.solve(t);  // Φ symmetric
  return {r.head(num_clusters_), r.tail(num_clusters_)};
}

VarianceEstimate uv2(const OlsFit& fit, const ScalarStats& stats) {
  Eigen::VectorXd rhs(2 * fit.num_clusters());
  rhs << fit.cluster_rss, fit.cluster_sum_sq;
  return Uv2Solver(fit, stats).estimate(rhs);
}

// ---------------------------------------------------------------- UV3

Uv3Solver::Uv3Solver(const OlsFit& fit)
    : k_(fit.k()), num_clusters_(fit.num_clusters()) {
  const int k2 = k_ * k_;
  const Eigen::MatrixXd eye_k = Eigen::MatrixXd::Identity(k_, k_);

  Eigen::MatrixXd outer = kron(fit.gram, fit.gram);
  sc_lu_.reserve(num_clusters_);
  for (int c = 0; c < num_clusters_; ++c) {
    const Eigen::MatrixXd hg = fit.per_cluster_gram[c] * fit.gram_inv;
    const Eigen::MatrixXd sc = Eigen::MatrixXd::Identity(k2, k2) -
                               kron(eye_k, hg) - kron(hg, eye_k);
    sc_lu_.push_back(lu_checked(sc, ErrorCode::SingularSc,
                                "S_" + std::to_string(c) + " singular"));
    outer += sc_lu_.back().solve(
        kron(fit.per_cluster_gram[c], fit.per_cluster_gram[c]));
  }
  outer_lu_ = lu_checked(outer, ErrorCode::SingularOuter,
                         "outer k²×k² system singular");
}

VarianceEstimate Uv3Solver::estimate(
    const std::vector<Eigen::MatrixXd>& outer) const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k_ * k_);
  for (int c = 0; c < num_clusters_; ++c) {
    const Eigen::Map<const Eigen::VectorXd> vec_outer(outer[c].data(),
                                                      k_ * k_);
    rhs += sc_lu_[c].solve(vec_outer);
  }
  const Eigen::VectorXd v = outer_lu_.solve(rhs);
  return make_variance_estimate(
      Eigen::Map<const Eigen::MatrixXd>(v.data(), k_, k_),
      VarianceMethod::UV3);
}

VarianceEstimate Uv3Solver::estimate(const OlsFit& fit) const {
  std::vector<Eigen::MatrixXd> outer(num_clusters_);
  for (int c = 0; c < num_clusters_; ++c) {
    const Eigen::VectorXd m = fit.xte.col(c);
    outer[c] = m * m.transpose();
  }
  return estimate(outer);
}

std::vector<Eigen::MatrixXd> Uv3Solver::quad_weights(int ell) const {
  // (vec Q_c)' = f_ℓ' K⁻¹ S_c⁻¹, solved through the transposes.
  Eigen::VectorXd f = Eigen::VectorXd::Zero(k_ * k_);
  f[ell * k_ + ell] = 1.0;
  const Eigen::VectorXd z = outer_lu_.transpose().solve(f);
  std::vector<Eigen::MatrixXd> q(num_clusters_);
  for (int c = 0; c < num_clusters_; ++c) {
    const Eigen::VectorXd vq = sc_lu_[c].transpose().solve(z);
    const Eigen::MatrixXd qc = Eigen::Map<const Eigen::MatrixXd>(vq.data(), k_, k_);
    q[c] = 0.5 * (qc + qc.transpose());  // quadratic form unchanged
  }
  return q;
}

VarianceEstimate uv3(const OlsFit& fit) { return Uv3Solver(fit).estimate(fit); }

// ----------------------------------------------------------- benchmarks

double stata_factor(int n, int k, int num_clusters) {
  return (static_cast<double>(num_clusters) / (num_clusters - 1)) *
         (static_cast<double>(n - 1) / (n - k));
}

VarianceEstimate plugin_unrestricted(const OlsFit& fit) {
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(fit.k(), fit.k());
  for (int c = 0; c < fit.num_clusters(); ++c) {
    const Eigen::VectorXd m = fit.xte.col(c);
    meat.noalias() += m * m.transpose();
  }
  return make_variance_estimate(fit.gram_inv * meat * fit.gram_inv,
                                VarianceMethod::PluginUnrestricted);
}

VarianceEstimate lz1_stata(const OlsFit& fit) {
  if (fit.num_clusters() < 2)
    fail(ErrorCode::TooFewClusters, "need at least 2 clusters");
  VarianceEstimate base = plugin_unrestricted(fit);
  return make_variance_estimate(
      stata_factor(fit.n(), fit.k(), fit.num_clusters()) * base.v,
      VarianceMethod::LZ1);
}

// ---------------------------------------------------------------- HC2

Hc2Solver::Hc2Solver(const OlsFit& fit) : ginv_(fit.gram_inv) {
  constexpr double kLeverageFloor = 1e-10;
  const int C = fit.num_clusters();
  w_.resize(C);
  xw_.resize(C);
  for (int c = 0; c < C; ++c) {
    const Eigen::MatrixXd xc = fit.data->cluster_x(c);
    const Eigen::MatrixXd residual_maker =
        Eigen::MatrixXd::Identity(xc.rows(), xc.rows()) -
        xc * fit.gram_inv * xc.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(residual_maker);
    if (eig.eigenvalues().minCoeff() <= kLeverageFloor)
      fail(ErrorCode::DegenerateLeverage,
           "I - P_cc near-singular in cluster " + std::to_string(c));
    w_[c] = eig.eigenvectors() *
            eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
            eig.eigenvectors().transpose();
    xw_[c] = xc.transpose() * w_[c];
  }
}

VarianceEstimate Hc2Solver::estimate(const OlsFit& fit) const {
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(ginv_.rows(), ginv_.cols());
  for (int c = 0; c < fit.num_clusters(); ++c) {
    const Eigen::VectorXd m = xw_[c] * fit.cluster_resid(c);
    meat.noalias() += m * m.transpose();
  }
  return make_variance_estimate(ginv_ * meat * ginv_, VarianceMethod::LZ2);
}

std::vector<Eigen::VectorXd> Hc2Solver::quad_factors(int ell) const {
  std::vector<Eigen::VectorXd> a(w_.size());
  for (size_t c = 0; c < w_.size(); ++c)
    a[c] = xw_[c].transpose() * ginv_.col(ell);
  return a;
}

VarianceEstimate lz2_hc2(const OlsFit& fit) {
  return Hc2Solver(fit).estimate(fit);
}

// -------------------------------------------------------------- plug-ins

std::pair<ReParams, VarianceEstimate> plugin_re(const OlsFit& fit) {
  const double n = fit.n();
  const double nddot = fit.data->sum_sq_sizes();
  if (!(nddot > n))
    fail(ErrorCode::AllSingletons,
         "σ² and τ² not separable when every cluster is a singleton");

  ReParams params;
  params.tau2 = (fit.rss_cluster - fit.rss) / (nddot - n);
  params.sigma2 = fit.rss / n - params.tau2;

  const Eigen::MatrixXd xtx_til = fit.xtil.transpose() * fit.xtil;
  Eigen::MatrixXd v = params.sigma2 * fit.gram_inv +
                      params.tau2 * fit.gram_inv * xtx_til * fit.gram_inv;
  return {params,
          make_variance_estimate(std::move(v), VarianceMethod::PluginRE)};
}

std::pair<ReParams, VarianceEstimate> plugin_cluster_re(const OlsFit& fit) {
  const int C = fit.num_clusters();
  ReParams params;
  params.sigma2_c.resize(C);
  params.tau2_c.resize(C);

  Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(fit.k(), fit.k());
  for (int c = 0; c < C; ++c) {
    const double nc = fit.data->cluster_sizes()[c];
    if (nc < 2)
      fail(ErrorCode::SingletonCluster,
           "cluster " + std::to_string(c) + " has a single observation");
    const double tau2 =
        (fit.cluster_sum_sq[c] - fit.cluster_rss[c]) / (nc * nc - nc);
    const double sigma2 = fit.cluster_rss[c] / nc - tau2;
    params.tau2_c[c] = tau2;
    params.sigma2_c[c] = sigma2;
    const Eigen::VectorXd xt = fit.xtil.row(c).transpose();
    inner.noalias() += sigma2 * fit.per_cluster_gram[c];
    inner.noalias() += tau2 * xt * xt.transpose();
  }
  return {params,
          make_variance_estimate(fit.gram_inv * inner * fit.gram_inv,
                                 VarianceMethod::PluginClusterRE)};
}

}  // namespace ucv
