#pragma once

#include "incomefit/empirical.hpp"
#include "incomefit/models.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace incomefit {

enum class Weighting
{
  Uniform,
  Relative, // w = 1/y², for CCDF tails spanning decades
};

enum class InitStrategy
{
  Moments,
  ValleySplit, // bimodal families; unimodal families fall back to moments
  Explicit,
};

enum class Termination
{
  StepTolerance,
  ResidualTolerance,
  ZeroResidual,
  DampingLimit,
  MaxIterations,
};

std::string_view to_string(Weighting w);
std::string_view to_string(InitStrategy s);
std::string_view to_string(Termination t);
Weighting parse_weighting(std::string_view s);
InitStrategy parse_init_strategy(std::string_view s);

struct FitConfig
{
  CurveKind target = CurveKind::Pdf;
  std::size_t max_iterations = 500;
  double step_tol = 1e-10;
  double residual_tol = 1e-12;
  double damping_init = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
  Weighting weighting = Weighting::Uniform;
  InitStrategy init_strategy = InitStrategy::ValleySplit;
  std::optional<ModelSpec> init_model; // required when init_strategy == Explicit
  double finite_diff_rel_step = 1e-6;
  std::size_t multistart_count = 8;
  std::uint64_t seed = 0;

  /// Throws PreconditionError on non-positive tolerances or zero counts.
  void validate() const;
};

struct FitResult
{
  ModelSpec model;
  double r_squared = 0.0;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  std::vector<double> residuals; // observed - predicted, unweighted
  std::size_t iterations = 0;
  bool converged = false;
  ModelSpec init_used;
  InitStrategy init_strategy = InitStrategy::Moments;
  Termination termination = Termination::MaxIterations;
  std::vector<double> ss_trace; // objective after each accepted step of the winning run
};

/// 1 - Σw(o-p)² / Σw(o-ō_w)². Throws PreconditionError on bad lengths or
/// weights, DomainError when all observations are equal.
double r_squared(std::span<const double> observed,
                 std::span<const double> predicted,
                 std::span<const double> weights);

std::vector<double> curve_weights(const EmpiricalCurve& curve, Weighting weighting);

/// Model ordinate comparable with `curve`: pdf, x·pdf for per-log-income
/// curves, or ccdf.
double model_ordinate(const ModelSpec& model, const EmpiricalCurve& curve, double x);

/// Starting point for `family` on `curve`. Never throws for valid curves.
ModelSpec initialize(const EmpiricalCurve& curve,
                     Family family,
                     InitStrategy strategy,
                     const std::optional<ModelSpec>& explicit_model = std::nullopt);

/// Levenberg-Marquardt fit in log-parameter space, best of
/// config.multistart_count jittered starts.
FitResult fit(const EmpiricalCurve& curve, Family family, const FitConfig& config);

/// Bimodal refinement seeded from a unimodal optimum. The returned ss_res never
/// exceeds unimodal.ss_res + 1e-12.
FitResult refit_nested(const EmpiricalCurve& curve,
                       const FitResult& unimodal,
                       const FitConfig& config);

/// What the CLI runs: plain fit for unimodal families; for bimodal families
/// the better of a direct fit and the nested refinement of the unimodal fit.
FitResult fit_family(const EmpiricalCurve& curve, Family family, const FitConfig& config);

struct Valley
{
  double x = 0.0;
  double low_peak_x = 0.0;
  double high_peak_x = 0.0;
};

/// Deepest local minimum of the 5-point moving average of `y` between its two
/// highest local maxima, if there is one.
std::optional<Valley> locate_valley(std::span<const double> x, std::span<const double> y);

namespace detail {

using ResidualFn = std::function<bool(std::span<const double> theta, std::span<double> out)>;

/// Unconstrained coordinates: log of A, n, m, σ; μ as is.
std::vector<double> to_theta(const ModelSpec& model);
/// Returns nullopt when the mapped parameters would leave the valid domain
/// (σ, n or m not strictly positive and finite).
std::optional<ModelSpec> from_theta(Family family, std::span<const double> theta);

/// Forward differences with a step of rel_step in every θ coordinate, which is
/// a relative step in A, n, m, σ and in the median income e^μ.
/// Row-major, residuals × parameters.
std::vector<double> forward_jacobian(const ResidualFn& fn,
                                     std::span<const double> theta,
                                     std::span<const double> r0,
                                     double rel_step);

ResidualFn make_residual_fn(const EmpiricalCurve& curve,
                            Family family,
                            std::span<const double> weights);

} // namespace detail

} // namespace incomefit
