#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ucv/estimators.hpp"
#include "ucv/ols.hpp"
#include "ucv/variance.hpp"

namespace ucv {

enum class DofReference { RV0, RV1 };

const char* dof_reference_name(DofReference r);

// Unbiased fourth-moment estimates under the homogeneous random-effects
// structure (σ⁴, σ²τ², τ⁴). Method-of-moments: may be negative.
struct ReMoments {
  double sigma4 = 0.0;
  double sigma2tau2 = 0.0;
  double tau4 = 0.0;
};

struct DofEstimate {
  double d = 0.0;  // degrees of freedom, possibly non-integer
  DofReference reference = DofReference::RV0;
  bool clamped = false;            // raw value fell outside [1, n-k]
  bool fallback_from_rv1 = false;  // RV1 denominator was nonpositive
  std::optional<ReMoments> moments_used;
};

// The variance estimate of a single coefficient is a quadratic form
// ε̂'Aε̂ with A block-diagonal. The blocks are stored structurally:
//   UV1:  A_c = r1 I + r2 ιι'           (one scalar pair)
//   UV2:  A_c = r1_c I + r2_c ιι'       (vectors over clusters)
//   UV3:  A_c = X_c Q_c X_c'            (k×k symmetric Q_c)
//   LZ2:  A_c = a_c a_c'                (rank one, for the HC2 benchmark)
// Alongside the representation we cache every residual-independent
// summary the trace expansions need, so the n_c×n_c blocks never have to
// be materialized on the production path.
struct ABlocks {
  VarianceMethod method;
  int ell = 0;

  double r1 = 0.0, r2 = 0.0;
  Eigen::VectorXd r1c, r2c;
  std::vector<Eigen::MatrixXd> q_c;
  std::vector<Eigen::VectorXd> a_c;

  double tr_a = 0.0;           // Σ_c tr A_c
  double tr_a2 = 0.0;          // Σ_c tr A_c²
  Eigen::VectorXd lambda_c;    // ι'A_c ι
  Eigen::VectorXd kappa_c;     // ι'A_c² ι
  Eigen::MatrixXd mu;          // col c: (X'X)⁻¹ X_c'A_c ι
  Eigen::MatrixXd rho;         // col c: X_c'A_c² ι
  Eigen::MatrixXd xax;         // Σ_c X_c'A_c X_c
  Eigen::MatrixXd xa2x;        // Σ_c X_c'A_c² X_c

  // Dense reconstruction of block c (test support).
  Eigen::MatrixXd dense_block(const OlsFit& fit, int c) const;
  // ε̂'Aε̂ evaluated through cluster aggregates.
  double quad_form(const OlsFit& fit) const;
};

// Convenience entry point: builds the matching solver internally.
ABlocks build_a_blocks(const OlsFit& fit, VarianceMethod method, int ell);

// Solver-reusing variants for study loops.
ABlocks build_a_blocks_uv1(const OlsFit& fit, const Uv1Solver& s, int ell);
ABlocks build_a_blocks_uv2(const OlsFit& fit, const Uv2Solver& s, int ell);
ABlocks build_a_blocks_uv3(const OlsFit& fit, const Uv3Solver& s, int ell);
ABlocks build_a_blocks_hc2(const OlsFit& fit, const Hc2Solver& s, int ell);

// tr(AMAM) expanded through k×k pieces only.
double tramam(const ABlocks& blocks, const OlsFit& fit);

// Residual-independent traces entering the reference-distribution moment
// matching. Cache once per (design, method, coefficient).
struct DofTraces {
  double g1 = 0.0;        // e_ℓ'(X'X)⁻¹e_ℓ
  double g2 = 0.0;        // e_ℓ'(X'X)⁻¹X̃'X̃(X'X)⁻¹e_ℓ
  double tr_am = 0.0;     // tr AM
  double tr_bmamb = 0.0;  // tr B'MAMB
  double tr_amam = 0.0;   // tr AMAM
  double tr_mid = 0.0;    // tr B'MAMAMB
  double tr_outer = 0.0;  // tr (B'MAMB)²
};

DofTraces build_dof_traces(const ABlocks& blocks, const OlsFit& fit);

// Independence reference: d = (e_ℓ'(X'X)⁻¹e_ℓ)² / tr(AMAM).
DofEstimate dof_rv0(const ABlocks& blocks, const OlsFit& fit);
DofEstimate dof_rv0(const DofTraces& traces, const OlsFit& fit);

// Diagonals of M, BB'M, MBB'M, BB'MBB', BB'MBB'M, BB'MBB'MBB' and the
// 3×3 expectation map of the squared-residual fourth moments.
struct MomentDesign {
  Eigen::VectorXd m10, m11, m21, m12, m22, m23;
  Eigen::Matrix3d system;
  Eigen::Matrix3d system_inv;
};

MomentDesign build_moment_design(const OlsFit& fit);  // throws SingularMomentSystem
ReMoments re_moments_from_resid(const MomentDesign& design, const OlsFit& fit);
ReMoments estimate_re_moments(const OlsFit& fit);

// Random-effects reference with the unbiased moment plug-ins. Throws
// NonpositiveDenominator when the plug-ins produce a nonpositive
// denominator; dof_rv1_or_rv0 converts that into a recorded RV0 fallback.
DofEstimate dof_rv1(const ABlocks& blocks, const OlsFit& fit, const ReMoments& m);
DofEstimate dof_rv1(const DofTraces& traces, const OlsFit& fit, const ReMoments& m);
DofEstimate dof_rv1_or_rv0(const DofTraces& traces, const OlsFit& fit, const ReMoments& m);

// Satterthwaite d.f. under the plug-in RE reference,
// d = (tr AMΣ̂M)² / tr(AMΣ̂MAMΣ̂M) with Σ̂ = σ̂²I + τ̂²BB'.
// Used for the HC2 benchmark, whose estimator is not unbiased; τ̂² (and
// σ̂²) are floored at zero to keep the reference a covariance matrix.
DofEstimate dof_satterthwaite_re(const DofTraces& traces, const OlsFit& fit,
                                 double sigma2, double tau2);

}  // namespace ucv
