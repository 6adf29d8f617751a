#include "ucv/dof.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ucv/errors.hpp"
#include "ucv/linalg.hpp"

namespace ucv {

const char* dof_reference_name(DofReference r) {
  return r == DofReference::RV0 ? "rv0" : "rv1";
}

namespace {

// Fills the residual-independent summaries from the per-cluster pieces
// tr A_c, tr A_c², ι'A_cι, ι'A_c²ι, X_c'A_cι, X_c'A_c²ι, X_c'A_cX_c and
// X_c'A_c²X_c that each representation supplies.
struct BlockAccumulator {
  explicit BlockAccumulator(const OlsFit& fit, ABlocks& out)
      : fit_(fit), out_(out) {
    const int k = fit.k();
    const int C = fit.num_clusters();
    out_.lambda_c.setZero(C);
    out_.kappa_c.setZero(C);
    out_.mu.setZero(k, C);
    out_.rho.setZero(k, C);
    out_.xax.setZero(k, k);
    out_.xa2x.setZero(k, k);
  }

  void add(int c, double tr_ac, double tr_ac2, double lambda, double kappa,
           const Eigen::VectorXd& xa_iota, const Eigen::VectorXd& xa2_iota,
           const Eigen::MatrixXd& xax_c, const Eigen::MatrixXd& xa2x_c) {
    out_.tr_a += tr_ac;
    out_.tr_a2 += tr_ac2;
    out_.lambda_c[c] = lambda;
    out_.kappa_c[c] = kappa;
    out_.mu.col(c) = fit_.gram_inv * xa_iota;
    out_.rho.col(c) = xa2_iota;
    out_.xax += xax_c;
    out_.xa2x += xa2x_c;
  }

  const OlsFit& fit_;
  ABlocks& out_;
};

// A_c = r1 I + r2 ιι'  →  A_c² = r1² I + (2 r1 r2 + n_c r2²) ιι'.
void accumulate_re_block(BlockAccumulator& acc, const OlsFit& fit, int c,
                         double r1, double r2) {
  const double nc = fit.data->cluster_sizes()[c];
  const Eigen::VectorXd xt = fit.xtil.row(c).transpose();
  const Eigen::MatrixXd& hc = fit.per_cluster_gram[c];
  const double a2 = 2.0 * r1 * r2 + nc * r2 * r2;
  acc.add(c,
          r1 * nc + r2 * nc,
          r1 * r1 * nc + a2 * nc,
          r1 * nc + r2 * nc * nc,
          r1 * r1 * nc + a2 * nc * nc,
          (r1 + r2 * nc) * xt,
          (r1 * r1 + a2 * nc) * xt,
          r1 * hc + r2 * xt * xt.transpose(),
          r1 * r1 * hc + a2 * xt * xt.transpose());
}

// A_c = X_c Q_c X_c'.
void accumulate_q_block(BlockAccumulator& acc, const OlsFit& fit, int c,
                        const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd& hc = fit.per_cluster_gram[c];
  const Eigen::VectorXd xt = fit.xtil.row(c).transpose();
  const Eigen::MatrixXd qh = q * hc;
  const Eigen::VectorXd qx = q * xt;
  acc.add(c,
          qh.trace(),
          (qh * qh).trace(),
          xt.dot(qx),
          qx.dot(hc * qx),
          hc * qx,
          hc * qh * qx,
          hc * q * hc,
          hc * qh * q * hc);
}

// A_c = a_c a_c'.
void accumulate_rank1_block(BlockAccumulator& acc, const OlsFit& fit, int c,
                            const Eigen::VectorXd& a) {
  const Eigen::MatrixXd xc = fit.data->cluster_x(c);
  const double ss = a.squaredNorm();
  const double isum = a.sum();
  const Eigen::VectorXd xa = xc.transpose() * a;
  acc.add(c,
          ss,
          ss * ss,
          isum * isum,
          ss * isum * isum,
          isum * xa,
          ss * isum * xa,
          xa * xa.transpose(),
          ss * xa * xa.transpose());
}

double clamp_dof(double raw, const OlsFit& fit, bool& clamped) {
  const double hi = static_cast<double>(fit.n() - fit.k());
  const double lo = 1.0;
  const double out = std::clamp(raw, lo, hi);
  clamped = out != raw;
  return out;
}

}  // namespace

Eigen::MatrixXd ABlocks::dense_block(const OlsFit& fit, int c) const {
  const int nc = fit.data->cluster_sizes()[c];
  const Eigen::MatrixXd iota = Eigen::MatrixXd::Ones(nc, nc);
  switch (method) {
    case VarianceMethod::UV1:
      return r1 * Eigen::MatrixXd::Identity(nc, nc) + r2 * iota;
    case VarianceMethod::UV2:
      return r1c[c] * Eigen::MatrixXd::Identity(nc, nc) + r2c[c] * iota;
    case VarianceMethod::UV3: {
      const Eigen::MatrixXd xc = fit.data->cluster_x(c);
      return xc * q_c[c] * xc.transpose();
    }
    case VarianceMethod::LZ2:
      return a_c[c] * a_c[c].transpose();
    default:
      fail(ErrorCode::ShapeMismatch, "no block representation for method");
  }
}

double ABlocks::quad_form(const OlsFit& fit) const {
  double out = 0.0;
  switch (method) {
    case VarianceMethod::UV1:
      return r1 * fit.rss + r2 * fit.rss_cluster;
    case VarianceMethod::UV2:
      for (int c = 0; c < fit.num_clusters(); ++c)
        out += r1c[c] * fit.cluster_rss[c] + r2c[c] * fit.cluster_sum_sq[c];
      return out;
    case VarianceMethod::UV3:
      for (int c = 0; c < fit.num_clusters(); ++c) {
        const Eigen::VectorXd m = fit.xte.col(c);
        out += m.dot(q_c[c] * m);
      }
      return out;
    case VarianceMethod::LZ2:
      for (int c = 0; c < fit.num_clusters(); ++c) {
        const double t = a_c[c].dot(fit.cluster_resid(c));
        out += t * t;
      }
      return out;
    default:
      fail(ErrorCode::ShapeMismatch, "no block representation for method");
  }
}

ABlocks build_a_blocks_uv1(const OlsFit& fit, const Uv1Solver& s, int ell) {
  ABlocks out;
  out.method = VarianceMethod::UV1;
  out.ell = ell;
  const Eigen::Vector2d r = s.quad_weights(ell);
  out.r1 = r[0];
  out.r2 = r[1];
  BlockAccumulator acc(fit, out);
  for (int c = 0; c < fit.num_clusters(); ++c)
    accumulate_re_block(acc, fit, c, out.r1, out.r2);
  return out;
}

ABlocks build_a_blocks_uv2(const OlsFit& fit, const Uv2Solver& s, int ell) {
  ABlocks out;
  out.method = VarianceMethod::UV2;
  out.ell = ell;
  std::tie(out.r1c, out.r2c) = s.quad_weights(ell);
  BlockAccumulator acc(fit, out);
  for (int c = 0; c < fit.num_clusters(); ++c)
    accumulate_re_block(acc, fit, c, out.r1c[c], out.r2c[c]);
  return out;
}

ABlocks build_a_blocks_uv3(const OlsFit& fit, const Uv3Solver& s, int ell) {
  ABlocks out;
  out.method = VarianceMethod::UV3;
  out.ell = ell;
  out.q_c = s.quad_weights(ell);
  BlockAccumulator acc(fit, out);
  for (int c = 0; c < fit.num_clusters(); ++c)
    accumulate_q_block(acc, fit, c, out.q_c[c]);
  return out;
}

ABlocks build_a_blocks_hc2(const OlsFit& fit, const Hc2Solver& s, int ell) {
  ABlocks out;
  out.method = VarianceMethod::LZ2;
  out.ell = ell;
  out.a_c = s.quad_factors(ell);
  BlockAccumulator acc(fit, out);
  for (int c = 0; c < fit.num_clusters(); ++c)
    accumulate_rank1_block(acc, fit, c, out.a_c[c]);
  return out;
}

ABlocks build_a_blocks(const OlsFit& fit, VarianceMethod method, int ell) {
  switch (method) {
    case VarianceMethod::UV1:
      return build_a_blocks_uv1(fit, Uv1Solver(fit, scalar_stats(fit)), ell);
    case VarianceMethod::UV2:
      return build_a_blocks_uv2(fit, Uv2Solver(fit, scalar_stats(fit)), ell);
    case VarianceMethod::UV3:
      return build_a_blocks_uv3(fit, Uv3Solver(fit), ell);
    case VarianceMethod::LZ2:
      return build_a_blocks_hc2(fit, Hc2Solver(fit), ell);
    default:
      fail(ErrorCode::ShapeMismatch,
           "quadratic-form blocks only defined for UV1/UV2/UV3/LZ2");
  }
}

double tramam(const ABlocks& blocks, const OlsFit& fit) {
  const Eigen::MatrixXd gx = fit.gram_inv * blocks.xax;
  return blocks.tr_a2 - 2.0 * (fit.gram_inv * blocks.xa2x).trace() +
         (gx * gx).trace();
}

DofTraces build_dof_traces(const ABlocks& blocks, const OlsFit& fit) {
  const int C = fit.num_clusters();
  const int ell = blocks.ell;
  DofTraces t;

  const Eigen::MatrixXd xtx_til = fit.xtil.transpose() * fit.xtil;
  const Eigen::MatrixXd gxt = fit.gram_inv * xtx_til;  // (X'X)⁻¹X̃'X̃
  t.g1 = fit.gram_inv(ell, ell);
  t.g2 = (gxt * fit.gram_inv)(ell, ell);

  const Eigen::MatrixXd gx = fit.gram_inv * blocks.xax;
  t.tr_am = blocks.tr_a - gx.trace();
  t.tr_amam = tramam(blocks, fit);

  // N(d,c) = x̃_d'μ_c; W = (X'X)⁻¹(X'AX)(X'X)⁻¹.
  const Eigen::MatrixXd nmat = fit.xtil * blocks.mu;
  const Eigen::MatrixXd w = gx * fit.gram_inv;
  const Eigen::MatrixXd wxt = w * xtx_til;

  t.tr_bmamb = blocks.lambda_c.sum() - 2.0 * nmat.trace() + wxt.trace();

  // tr B'MAMAMB = T1 - T2 (block expansion of AMA = ΣG_cA_c²G_c' - ΣΣ…).
  double t1 = blocks.kappa_c.sum() +
              (fit.gram_inv * xtx_til * fit.gram_inv * blocks.xa2x).trace();
  double t2 = (gx * gxt * gx).trace();
  for (int c = 0; c < C; ++c) {
    const Eigen::VectorXd u = fit.gram_inv * fit.xtil.row(c).transpose();
    t1 -= 2.0 * blocks.rho.col(c).dot(u);
    t2 += blocks.mu.col(c).dot(fit.gram * blocks.mu.col(c));
    t2 -= 2.0 * u.dot(blocks.xax * blocks.mu.col(c));
  }
  t.tr_mid = t1 - t2;

  // tr (B'MAMB)² with B'MAMB = S + X̃WX̃'.
  double tr_s2 = blocks.lambda_c.squaredNorm() + 2.0 * (nmat * nmat).trace() +
                 2.0 * nmat.squaredNorm();
  for (int c = 0; c < C; ++c) tr_s2 -= 4.0 * blocks.lambda_c[c] * nmat(c, c);

  const Eigen::MatrixXd j = fit.xtil * w * fit.xtil.transpose();
  double tr_sxwx = -2.0 * (j * nmat).trace();
  for (int c = 0; c < C; ++c) tr_sxwx += blocks.lambda_c[c] * j(c, c);

  t.tr_outer = tr_s2 + 2.0 * tr_sxwx + (wxt * wxt).trace();
  return t;
}

DofEstimate dof_rv0(const DofTraces& traces, const OlsFit& fit) {
  if (!(traces.tr_amam > 0.0) || !std::isfinite(traces.tr_amam))
    fail(ErrorCode::NonpositiveTrace, "tr(AMAM) not positive");
  DofEstimate out;
  out.reference = DofReference::RV0;
  out.d = clamp_dof(traces.g1 * traces.g1 / traces.tr_amam, fit, out.clamped);
  return out;
}

DofEstimate dof_rv0(const ABlocks& blocks, const OlsFit& fit) {
  const double t = tramam(blocks, fit);
  if (!(t > 0.0) || !std::isfinite(t))
    fail(ErrorCode::NonpositiveTrace, "tr(AMAM) not positive");
  const double g1 = fit.gram_inv(blocks.ell, blocks.ell);
  DofEstimate out;
  out.reference = DofReference::RV0;
  out.d = clamp_dof(g1 * g1 / t, fit, out.clamped);
  return out;
}

MomentDesign build_moment_design(const OlsFit& fit) {
  const ClusteredDataset& data = *fit.data;
  const int n = fit.n();
  const int C = data.num_clusters();

  // t_{ic} = x_i'(X'X)⁻¹x̃_c and the C×C pieces R = X̃(X'X)⁻¹X̃',
  // E = Δ_n - R of B'MB; every diagonal below comes from these.
  const Eigen::MatrixXd xg = data.x() * fit.gram_inv;           // n × k
  const Eigen::MatrixXd tmat = xg * fit.xtil.transpose();       // n × C
  const Eigen::MatrixXd r = fit.xtil * fit.gram_inv * fit.xtil.transpose();
  Eigen::MatrixXd e = -r;
  for (int c = 0; c < C; ++c) e(c, c) += data.cluster_sizes()[c];
  const Eigen::MatrixXd te = tmat * e;
  const Eigen::MatrixXd e2 = e * e;

  MomentDesign md;
  md.m10.resize(n);
  md.m11.resize(n);
  md.m21.resize(n);
  md.m12.resize(n);
  md.m22.resize(n);
  md.m23.resize(n);
  for (int i = 0; i < n; ++i) {
    const int c = data.cluster_of()[i];
    const double h = xg.row(i).dot(data.x().row(i));
    md.m10[i] = 1.0 - h;
    md.m11[i] = 1.0 - tmat(i, c);
    md.m21[i] = 1.0 - 2.0 * tmat(i, c) + tmat.row(i).squaredNorm();
    md.m12[i] = e(c, c);
    md.m22[i] = e(c, c) - te(i, c);
    md.m23[i] = e2(c, c);
  }

  const auto dot = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.cwiseProduct(b).sum();
  };
  md.system(0, 0) = 3.0 * dot(md.m10, md.m10);
  md.system(0, 1) = 6.0 * dot(md.m10, md.m21);
  md.system(0, 2) = 3.0 * dot(md.m21, md.m21);
  md.system(1, 0) = dot(md.m10, md.m12) + 2.0 * dot(md.m11, md.m11);
  md.system(1, 1) = dot(md.m10, md.m23) + dot(md.m21, md.m12) +
                    4.0 * dot(md.m22, md.m11);
  md.system(1, 2) = dot(md.m21, md.m23) + 2.0 * dot(md.m22, md.m22);
  md.system(2, 0) = 3.0 * dot(md.m12, md.m12);
  md.system(2, 1) = 6.0 * dot(md.m12, md.m23);
  md.system(2, 2) = 3.0 * dot(md.m23, md.m23);

  const auto lu = lu_checked(md.system, ErrorCode::SingularMomentSystem,
                             "fourth-moment system singular "
                             "(all clusters singletons?)");
  md.system_inv = lu.inverse();
  return md;
}

ReMoments re_moments_from_resid(const MomentDesign& design, const OlsFit& fit) {
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  const auto& cluster_of = fit.data->cluster_of();
  for (int i = 0; i < fit.n(); ++i) {
    const double e = fit.resid[i];
    const double s = fit.resid_cluster_sum[cluster_of[i]];
    rhs[0] += e * e * e * e;
    rhs[1] += e * e * s * s;
    rhs[2] += s * s * s * s;
  }
  const Eigen::Vector3d sol = design.system_inv * rhs;
  return ReMoments{sol[0], sol[1], sol[2]};
}

ReMoments estimate_re_moments(const OlsFit& fit) {
  return re_moments_from_resid(build_moment_design(fit), fit);
}

DofEstimate dof_rv1(const DofTraces& traces, const OlsFit& fit,
                    const ReMoments& m) {
  const double num = m.sigma4 * traces.g1 * traces.g1 +
                     2.0 * m.sigma2tau2 * traces.g1 * traces.g2 +
                     m.tau4 * traces.g2 * traces.g2;
  const double den = m.sigma4 * traces.tr_amam +
                     2.0 * m.sigma2tau2 * traces.tr_mid +
                     m.tau4 * traces.tr_outer;
  if (!(den > 0.0) || !std::isfinite(den))
    fail(ErrorCode::NonpositiveDenominator,
         "plug-in moments make the variance-of-variance nonpositive");
  DofEstimate out;
  out.reference = DofReference::RV1;
  out.d = clamp_dof(num / den, fit, out.clamped);
  out.moments_used = m;
  return out;
}

DofEstimate dof_rv1(const ABlocks& blocks, const OlsFit& fit,
                    const ReMoments& m) {
  return dof_rv1(build_dof_traces(blocks, fit), fit, m);
}

DofEstimate dof_rv1_or_rv0(const DofTraces& traces, const OlsFit& fit,
                           const ReMoments& m) {
  try {
    return dof_rv1(traces, fit, m);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::NonpositiveDenominator) throw;
    DofEstimate out = dof_rv0(traces, fit);
    out.fallback_from_rv1 = true;
    out.moments_used = m;
    return out;
  }
}

DofEstimate dof_satterthwaite_re(const DofTraces& traces, const OlsFit& fit,
                                 double sigma2, double tau2) {
  const double s2 = std::max(sigma2, 0.0);
  const double t2 = std::max(tau2, 0.0);
  const double num = s2 * traces.tr_am + t2 * traces.tr_bmamb;
  const double den = s2 * s2 * traces.tr_amam +
                     2.0 * s2 * t2 * traces.tr_mid + t2 * t2 * traces.tr_outer;
  if (!(den > 0.0) || !std::isfinite(den))
    fail(ErrorCode::NonpositiveDenominator,
         "reference variance-of-variance nonpositive");
  DofEstimate out;
  out.reference = DofReference::RV1;
  out.d = clamp_dof(num * num / den, fit, out.clamped);
  return out;
}

}  // namespace ucv
