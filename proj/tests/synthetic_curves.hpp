#pragma once

#include "incomefit/empirical.hpp"
#include "incomefit/fitter.hpp"
#include "incomefit/models.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace incomefit::testing {

inline std::vector<double> log_grid(double lo, double hi, std::size_t n)
{
  std::vector<double> x(n);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = lo * std::exp(step * static_cast<double>(i));
  x.back() = hi;
  return x;
}

inline EmpiricalCurve model_curve(const ModelSpec& m, CurveKind kind, std::vector<double> x)
{
  EmpiricalCurve c;
  c.kind = kind;
  c.x = std::move(x);
  c.y.resize(c.x.size());
  for (std::size_t i = 0; i < c.x.size(); ++i)
    c.y[i] = kind == CurveKind::Pdf ? pdf(m, c.x[i]) : ccdf(m, c.x[i]);
  return c;
}

struct RecoveryCase
{
  ModelSpec truth;
  CurveKind kind;
};

inline std::vector<ModelSpec> recovery_models()
{
  return {
    ModelSpec(GammaParams{1.0, 2.5, 1200.0}),
    ModelSpec(LogNormalParams{1.0, std::log(3000.0), 0.7}),
    ModelSpec(BiGammaParams{{0.6, 3.0, 300.0}, {0.4, 6.0, 2000.0}}),
    ModelSpec(BiLogNormalParams{{0.55, std::log(900.0), 0.5}, {0.45, std::log(9000.0), 0.45}}),
  };
}

inline std::vector<RecoveryCase> recovery_cases()
{
  std::vector<RecoveryCase> out;
  for (const auto& m : recovery_models())
    for (auto kind : {CurveKind::Pdf, CurveKind::Ccdf})
      out.push_back({m, kind});
  return out;
}

inline FitConfig recovery_config(CurveKind kind)
{
  FitConfig cfg;
  cfg.target = kind;
  cfg.step_tol = 1e-15;
  cfg.residual_tol = 1e-30;
  cfg.max_iterations = 2000;
  return cfg;
}

inline double max_relative_error(const ModelSpec& fitted, const ModelSpec& truth)
{
  const auto a = param_pack(canonical(fitted));
  const auto b = param_pack(canonical(truth));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::fabs(a[i] - b[i]) / std::fabs(b[i]));
  return worst;
}

/// Equal-mass bi-log-normal with components three σ apart.
inline ModelSpec separated_bilognormal()
{
  const double sigma = 0.5, mu1 = std::log(1000.0);
  return ModelSpec(BiLogNormalParams{{0.5, mu1, sigma}, {0.5, mu1 + 3.0 * sigma, sigma}});
}

inline EmpiricalCurve noisy_bilognormal(std::uint64_t seed, double noise = 0.01)
{
  const double mu1 = std::log(1000.0), mu2 = mu1 + 1.5;
  auto c = model_curve(separated_bilognormal(), CurveKind::Pdf,
                       log_grid(std::exp(mu1 - 2.0), std::exp(mu2 + 2.0), 100));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, noise);
  for (auto& y : c.y)
    y *= 1.0 + n(rng);
  return c;
}

} // namespace incomefit::testing
