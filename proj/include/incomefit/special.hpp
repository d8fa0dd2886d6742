#pragma once

#include <cstddef>

// Special functions backing the closed-form CDFs and CCDFs of the model
// families. All functions are pure and reentrant.

namespace incomefit::special {

struct PrecisionBudget
{
  double abs_tol = 1e-12;
  std::size_t max_series_terms = 10000;
  std::size_t max_cf_iterations = 10000;
};

/// Budget used by every public entry point. Throws DomainError if `budget`
/// violates abs_tol in (0, 1e-8] or caps below 100.
void validate(const PrecisionBudget& budget);
inline constexpr PrecisionBudget kDefaultBudget{};

/// Largest argument for which gamma_fn is finite in double precision.
inline constexpr double kGammaOverflowThreshold = 171.62437695630272;

/// Γ(a) for a > 0. Throws DomainError for a <= 0 (or NaN) and OverflowError
/// once a exceeds kGammaOverflowThreshold.
double gamma_fn(double a);

/// ln Γ(a) for a > 0.
double log_gamma(double a);

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
double reg_lower_incomplete_gamma(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), evaluated
/// without cancellation in the right tail.
double reg_upper_incomplete_gamma(double a, double x);

double erf_fn(double x);
double erfc_fn(double x);

/// Φ(z), the standard normal CDF. The lower tail is evaluated directly.
double std_normal_cdf(double z);

/// 1 - Φ(z) without cancellation for large z.
double std_normal_ccdf(double z);

namespace detail {

// Test hooks: the same kernels with an explicit budget.
double reg_lower_incomplete_gamma(double a, double x, const PrecisionBudget& budget);
double reg_upper_incomplete_gamma(double a, double x, const PrecisionBudget& budget);

} // namespace detail

} // namespace incomefit::special
