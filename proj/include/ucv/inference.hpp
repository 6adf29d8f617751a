#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ucv/dof.hpp"
#include "ucv/ols.hpp"
#include "ucv/variance.hpp"

namespace ucv {

// CDF of Student's t with (possibly non-integer) nu > 0, via the
// regularized incomplete beta function. Absolute accuracy ~1e-13.
double student_t_cdf(double x, double nu);

// Two-sided p-value, p = 2(1 - F_t(|t|, nu)).
double student_t_two_sided_p(double t, double nu);

struct TestResult {
  int coefficient = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::vector<std::pair<double, bool>> reject_at;  // level -> decision (p < level)
  VarianceMethod variance_method;
  std::string dof_label;
};

// Two-sided t test of H0: β_ell = null_value. Throws NonpositiveVariance
// when V[ell,ell] ≤ 0.
TestResult t_test(const OlsFit& fit, const VarianceEstimate& v,
                  const DofEstimate& d, int ell, double null_value,
                  const std::vector<double>& levels);

// Same with a fixed reference, e.g. dof = C-1 labeled "t(C-1)".
TestResult t_test(const OlsFit& fit, const VarianceEstimate& v, double dof,
                  const std::string& dof_label, int ell, double null_value,
                  const std::vector<double>& levels);

}  // namespace ucv
