#include "incomefit/special.hpp"

#include "incomefit/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace incomefit::special {

namespace {

// Lanczos approximation, g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoef{
  0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
  771.32342877765313,      -176.61502916214059,   12.507343278686905,
  -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

constexpr double kTiny = 1e-300;

// Lanczos series A_g(z) for Γ(z + 1), z >= -0.5.
double lanczos_sum(double z)
{
  double sum = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i)
    sum += kLanczosCoef[i] / (z + static_cast<double>(i));
  return sum;
}

void require_positive(double a, const char* fn)
{
  if (!(a > 0.0))
    throw DomainError(std::string(fn) + ": argument must be > 0, got " + std::to_string(a));
}

// ln Γ(a) for a >= 0.5.
double log_gamma_lanczos(double a)
{
  const double z = a - 1.0;
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t +
         std::log(lanczos_sum(z));
}

double stop_tolerance(const PrecisionBudget& budget)
{
  return std::max(std::numeric_limits<double>::epsilon(), budget.abs_tol * 1e-4);
}

// e^{-x} x^a / Γ(a)
double incgamma_prefactor(double a, double x)
{
  return std::exp(a * std::log(x) - x - log_gamma(a));
}

// P(a, x) by the power series, valid for x < a + 1.
double lower_series(double a, double x, const PrecisionBudget& budget)
{
  const double tol = stop_tolerance(budget);
  double term = 1.0 / a;
  double sum = term;
  for (std::size_t n = 1; n <= budget.max_series_terms; ++n) {
    term *= x / (a + static_cast<double>(n));
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * tol)
      return std::min(1.0, sum * incgamma_prefactor(a, x));
  }
  throw NumericError("incomplete gamma series did not converge for a=" + std::to_string(a) +
                       ", x=" + std::to_string(x),
                     budget.max_series_terms);
}

// Q(a, x) by the Legendre continued fraction (modified Lentz), valid for x >= a + 1.
double upper_continued_fraction(double a, double x, const PrecisionBudget& budget)
{
  const double tol = stop_tolerance(budget);
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (std::size_t i = 1; i <= budget.max_cf_iterations; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny)
      d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < tol)
      return std::min(1.0, incgamma_prefactor(a, x) * h);
  }
  throw NumericError("incomplete gamma continued fraction did not converge for a=" +
                       std::to_string(a) + ", x=" + std::to_string(x),
                     budget.max_cf_iterations);
}

void check_incgamma_domain(double a, double x)
{
  if (!(a > 0.0))
    throw DomainError("incomplete gamma: shape must be > 0, got " + std::to_string(a));
  if (!(x >= 0.0))
    throw DomainError("incomplete gamma: x must be >= 0, got " + std::to_string(x));
}

} // namespace

void validate(const PrecisionBudget& budget)
{
  if (!(budget.abs_tol > 0.0 && budget.abs_tol <= 1e-8))
    throw DomainError("precision budget: abs_tol must lie in (0, 1e-8]");
  if (budget.max_series_terms < 100 || budget.max_cf_iterations < 100)
    throw DomainError("precision budget: iteration caps must be >= 100");
}

double log_gamma(double a)
{
  require_positive(a, "log_gamma");
  if (std::isinf(a))
    return a;
  if (a < 0.5)
    return log_gamma_lanczos(a + 1.0) - std::log(a);
  return log_gamma_lanczos(a);
}

double gamma_fn(double a)
{
  require_positive(a, "gamma_fn");
  if (a > kGammaOverflowThreshold)
    throw OverflowError("gamma_fn: result overflows for a=" + std::to_string(a) +
                        " (threshold " + std::to_string(kGammaOverflowThreshold) + ")");
  if (a < 0.5)
    return gamma_fn(a + 1.0) / a;
  if (a > 30.0) {
    const double g = std::exp(log_gamma_lanczos(a));
    if (!std::isfinite(g))
      throw OverflowError("gamma_fn: result overflows for a=" + std::to_string(a));
    return g;
  }
  const double z = a - 1.0;
  const double t = z + kLanczosG + 0.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) *
         lanczos_sum(z);
}

namespace detail {

double reg_lower_incomplete_gamma(double a, double x, const PrecisionBudget& budget)
{
  validate(budget);
  check_incgamma_domain(a, x);
  if (x == 0.0)
    return 0.0;
  if (std::isinf(x))
    return 1.0;
  if (x < a + 1.0)
    return lower_series(a, x, budget);
  return 1.0 - upper_continued_fraction(a, x, budget);
}

double reg_upper_incomplete_gamma(double a, double x, const PrecisionBudget& budget)
{
  validate(budget);
  check_incgamma_domain(a, x);
  if (x == 0.0)
    return 1.0;
  if (std::isinf(x))
    return 0.0;
  if (x < a + 1.0)
    return 1.0 - lower_series(a, x, budget);
  return upper_continued_fraction(a, x, budget);
}

} // namespace detail

double reg_lower_incomplete_gamma(double a, double x)
{
  return detail::reg_lower_incomplete_gamma(a, x, kDefaultBudget);
}

double reg_upper_incomplete_gamma(double a, double x)
{
  return detail::reg_upper_incomplete_gamma(a, x, kDefaultBudget);
}

// erf(x) = sign(x) P(1/2, x^2); erfc(x) = Q(1/2, x^2) for x >= 0.
double erf_fn(double x)
{
  if (std::isnan(x))
    return x;
  const double p = reg_lower_incomplete_gamma(0.5, x * x);
  return x < 0.0 ? -p : p;
}

double erfc_fn(double x)
{
  if (std::isnan(x))
    return x;
  if (x >= 0.0)
    return reg_upper_incomplete_gamma(0.5, x * x);
  return 1.0 + reg_lower_incomplete_gamma(0.5, x * x);
}

double std_normal_cdf(double z)
{
  if (std::isnan(z))
    return z;
  if (z < 0.0)
    return 0.5 * erfc_fn(-z / std::numbers::sqrt2);
  return 1.0 - 0.5 * erfc_fn(z / std::numbers::sqrt2);
}

double std_normal_ccdf(double z)
{
  return std_normal_cdf(-z);
}

} // namespace incomefit::special
