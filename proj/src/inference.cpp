#include "ucv/inference.hpp"

#include <cmath>
#include <string>

#include "ucv/errors.hpp"

namespace ucv {

namespace {

constexpr double kBetaEps = 1e-15;
constexpr int kBetaMaxIter = 500;

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cont_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kBetaEps) return h;
  }
  return h;  // converged to working precision in practice
}

// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_cont_fraction(a, b, x) / a;
  return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_cdf(double x, double nu) {
  if (!(nu > 0.0))
    fail(ErrorCode::InvalidNu, "degrees of freedom must be positive");
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return 0.5;
  const double tail = 0.5 * reg_inc_beta(nu / 2.0, 0.5, nu / (nu + x * x));
  return x > 0.0 ? 1.0 - tail : tail;
}

double student_t_two_sided_p(double t, double nu) {
  if (!(nu > 0.0))
    fail(ErrorCode::InvalidNu, "degrees of freedom must be positive");
  // Equals 2(1 - F(|t|)) without cancellation in the tail.
  return reg_inc_beta(nu / 2.0, 0.5, nu / (nu + t * t));
}

TestResult t_test(const OlsFit& fit, const VarianceEstimate& v, double dof,
                  const std::string& dof_label, int ell, double null_value,
                  const std::vector<double>& levels) {
  const double vll = v.v(ell, ell);
  if (!(vll > 0.0))
    fail(ErrorCode::NonpositiveVariance,
         "variance entry for coefficient " + std::to_string(ell) +
             " is not positive");
  TestResult out;
  out.coefficient = ell;
  out.estimate = fit.beta_hat[ell];
  out.std_error = std::sqrt(vll);
  out.t_stat = (out.estimate - null_value) / out.std_error;
  out.dof = dof;
  out.p_value = student_t_two_sided_p(out.t_stat, dof);
  out.variance_method = v.method;
  out.dof_label = dof_label;
  out.reject_at.reserve(levels.size());
  for (double level : levels)
    out.reject_at.emplace_back(level, out.p_value < level);  // strict
  return out;
}

TestResult t_test(const OlsFit& fit, const VarianceEstimate& v,
                  const DofEstimate& d, int ell, double null_value,
                  const std::vector<double>& levels) {
  return t_test(fit, v, d.d, dof_reference_name(d.reference), ell, null_value,
                levels);
}

}  // namespace ucv
