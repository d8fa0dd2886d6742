#include "incomefit/fitter.hpp"

#include "incomefit/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace incomefit {

namespace {

constexpr double kNestedSlack = 1e-12;
constexpr double kMultistartJitter = 0.3;
constexpr double kDampingLimit = 1e20;

struct MassPoint
{
  double x = 0.0;
  double density = 0.0; // per USD
  double mass = 0.0;
};

// Rebuilds bin edges around geometric midpoints.
std::vector<double> edges_around(std::span<const double> mids)
{
  const std::size_t n = mids.size();
  std::vector<double> e(n + 1);
  if (n == 1) {
    e[0] = mids[0] / std::numbers::sqrt2;
    e[1] = mids[0] * std::numbers::sqrt2;
    return e;
  }
  for (std::size_t i = 1; i < n; ++i)
    e[i] = std::sqrt(mids[i - 1] * mids[i]);
  e[0] = mids[0] * mids[0] / e[1];
  e[n] = mids[n - 1] * mids[n - 1] / e[n - 1];
  return e;
}

// Per-USD density and mass attributed to each curve point, whatever the curve kind.
std::vector<MassPoint> mass_points(const EmpiricalCurve& c)
{
  std::vector<MassPoint> pts;
  const std::size_t n = c.x.size();
  if (c.kind == CurveKind::Pdf) {
    const auto e = edges_around(c.x);
    for (std::size_t i = 0; i < n; ++i) {
      MassPoint p;
      p.x = c.x[i];
      if (c.scale == DensityScale::PerUsd) {
        p.density = c.y[i];
        p.mass = c.y[i] * (e[i + 1] - e[i]);
      } else {
        p.density = c.y[i] / c.x[i];
        p.mass = c.y[i] * std::log(e[i + 1] / e[i]);
      }
      pts.push_back(p);
    }
    return pts;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::max(c.x[i], 1e-300);
    double hi = 0.0;
    double mass = 0.0;
    if (i + 1 < n) {
      hi = c.x[i + 1];
      mass = std::max(0.0, c.y[i] - c.y[i + 1]);
    } else {
      const double ratio = n > 1 && c.x[n - 2] > 0.0 ? c.x[n - 1] / c.x[n - 2] : 2.0;
      hi = lo * std::max(ratio, 1.0 + 1e-6);
      mass = std::max(0.0, c.y[i]);
    }
    MassPoint p;
    p.x = std::sqrt(lo * hi);
    p.mass = mass;
    p.density = mass / (hi - lo);
    pts.push_back(p);
  }
  return pts;
}

double trapezoidal_mass(const EmpiricalCurve& c)
{
  if (c.kind == CurveKind::Ccdf)
    return c.y.empty() ? 0.0 : c.y.front();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < c.x.size(); ++i) {
    const double dx = c.scale == DensityScale::PerUsd ? c.x[i + 1] - c.x[i]
                                                      : std::log(c.x[i + 1] / c.x[i]);
    total += 0.5 * (c.y[i] + c.y[i + 1]) * dx;
  }
  return total;
}

double positive_or(double value, double fallback)
{
  return std::isfinite(value) && value > 0.0 ? value : fallback;
}

ModelSpec moments(std::span<const MassPoint> pts, Family family, double amplitude)
{
  double total = 0.0, sx = 0.0, slog = 0.0;
  for (const auto& p : pts) {
    total += p.mass;
    sx += p.mass * p.x;
    slog += p.mass * std::log(p.x);
  }
  double mean = 0.0, log_mean = 0.0, var = 0.0, log_var = 0.0;
  if (total > 0.0) {
    mean = sx / total;
    log_mean = slog / total;
    for (const auto& p : pts) {
      var += p.mass * (p.x - mean) * (p.x - mean);
      const double d = std::log(p.x) - log_mean;
      log_var += p.mass * d * d;
    }
    var /= total;
    log_var /= total;
  } else if (!pts.empty()) {
    // No mass at all: centre on the middle point.
    mean = pts[pts.size() / 2].x;
    log_mean = std::log(mean);
  } else {
    mean = 1.0;
  }
  amplitude = positive_or(amplitude, 1e-12);
  mean = positive_or(mean, 1.0);
  var = positive_or(var, 0.25 * mean * mean);
  if (family == Family::Gamma)
    return ModelSpec(GammaParams{amplitude, mean * mean / var, var / mean});
  return ModelSpec(LogNormalParams{amplitude, log_mean, std::sqrt(positive_or(log_var, 0.25))});
}

std::vector<double> moving_average(std::span<const double> y, std::size_t half = 2)
{
  std::vector<double> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(y.size() - 1, i + half);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j)
      sum += y[j];
    s[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return s;
}

bool better_run(double ss_a, std::size_t it_a, std::span<const double> pa,
                double ss_b, std::size_t it_b, std::span<const double> pb)
{
  if (ss_a != ss_b)
    return ss_a < ss_b;
  if (it_a != it_b)
    return it_a < it_b;
  return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
}

struct LmRun
{
  std::vector<double> theta;
  double ss = 0.0;
  std::size_t iterations = 0;
  Termination termination = Termination::MaxIterations;
  std::vector<double> trace;
};

double sum_sq(std::span<const double> r)
{
  double s = 0.0;
  for (double v : r)
    s += v * v;
  return s;
}

std::optional<LmRun> levenberg_marquardt(const detail::ResidualFn& fn,
                                         std::vector<double> theta,
                                         std::size_t points,
                                         const FitConfig& cfg)
{
  const std::size_t np = theta.size();
  std::vector<double> r(points), r_trial(points);
  if (!fn(theta, r))
    return std::nullopt;

  LmRun run;
  double ss = sum_sq(r);
  run.trace.push_back(ss);
  double lambda = cfg.damping_init;

  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  std::vector<double> trial(np);

  auto finish = [&](Termination t) {
    run.theta = theta;
    run.ss = ss;
    run.termination = t;
    return run;
  };

  if (ss == 0.0)
    return finish(Termination::ZeroResidual);

  while (run.iterations < cfg.max_iterations) {
    ++run.iterations;
    const auto jac = detail::forward_jacobian(fn, theta, r, cfg.finite_diff_rel_step);
    const Eigen::Map<const Matrix> J(jac.data(), static_cast<Eigen::Index>(points),
                                     static_cast<Eigen::Index>(np));
    const Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(points));
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::VectorXd grad = J.transpose() * rv;
    const double max_diag = jtj.diagonal().maxCoeff();
    if (!(max_diag > 0.0) || !std::isfinite(max_diag))
      return finish(Termination::DampingLimit);
    Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-12 * max_diag);

    while (true) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal() += lambda * scale;
      const Eigen::VectorXd step = lhs.ldlt().solve(-grad);
      bool accepted = false;
      double step_norm = 0.0, theta_norm = 0.0;
      if (step.allFinite()) {
        for (std::size_t j = 0; j < np; ++j) {
          trial[j] = theta[j] + step[static_cast<Eigen::Index>(j)];
          step_norm += step[static_cast<Eigen::Index>(j)] * step[static_cast<Eigen::Index>(j)];
          theta_norm += theta[j] * theta[j];
        }
        if (fn(trial, r_trial)) {
          const double ss_trial = sum_sq(r_trial);
          if (ss_trial < ss) {
            const double rel_drop = (ss - ss_trial) / ss;
            theta.swap(trial);
            r.swap(r_trial);
            ss = ss_trial;
            run.trace.push_back(ss);
            lambda = std::max(lambda * cfg.damping_down, 1e-300);
            accepted = true;
            if (ss == 0.0)
              return finish(Termination::ZeroResidual);
            if (std::sqrt(step_norm) < cfg.step_tol * (std::sqrt(theta_norm) + cfg.step_tol))
              return finish(Termination::StepTolerance);
            if (rel_drop < cfg.residual_tol)
              return finish(Termination::ResidualTolerance);
          }
        }
      }
      if (accepted)
        break;
      lambda *= cfg.damping_up;
      if (lambda > kDampingLimit)
        return finish(Termination::DampingLimit);
    }
  }
  return finish(Termination::MaxIterations);
}

FitResult build_result(const EmpiricalCurve& curve,
                       const ModelSpec& model,
                       std::span<const double> weights)
{
  std::vector<double> predicted(curve.x.size());
  for (std::size_t i = 0; i < curve.x.size(); ++i)
    predicted[i] = model_ordinate(model, curve, curve.x[i]);

  FitResult res{.model = model, .residuals = {}, .init_used = model, .ss_trace = {}};
  res.residuals.resize(predicted.size());
  double wsum = 0.0, wy = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    res.residuals[i] = curve.y[i] - predicted[i];
    res.ss_res += weights[i] * res.residuals[i] * res.residuals[i];
    wsum += weights[i];
    wy += weights[i] * curve.y[i];
  }
  const double mean = wy / wsum;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    res.ss_tot += weights[i] * (curve.y[i] - mean) * (curve.y[i] - mean);
  res.r_squared = 1.0 - res.ss_res / res.ss_tot;
  return res;
}

void check_curve(const EmpiricalCurve& curve, Family family, const FitConfig& config)
{
  config.validate();
  if (curve.kind != config.target)
    throw PreconditionError("curve kind does not match the fit target");
  if (curve.x.size() != curve.y.size())
    throw PreconditionError("curve x and y lengths differ");
  const std::size_t needed = 2 * param_count(family);
  if (curve.x.size() < needed)
    throw PreconditionError("family " + std::string(family_name(family)) + " needs at least " +
                            std::to_string(needed) + " curve points, got " +
                            std::to_string(curve.x.size()));
  const double first = curve.y.front();
  if (std::all_of(curve.y.begin(), curve.y.end(), [first](double v) { return v == first; }))
    throw PreconditionError("curve ordinates are all equal; R² is undefined");
}

} // namespace

std::string_view to_string(Weighting w)
{
  return w == Weighting::Uniform ? "uniform" : "relative";
}

std::string_view to_string(InitStrategy s)
{
  switch (s) {
    case InitStrategy::Moments: return "moments";
    case InitStrategy::ValleySplit: return "valley-split";
    case InitStrategy::Explicit: return "explicit";
  }
  return "unknown";
}

std::string_view to_string(Termination t)
{
  switch (t) {
    case Termination::StepTolerance: return "step_tolerance";
    case Termination::ResidualTolerance: return "residual_tolerance";
    case Termination::ZeroResidual: return "zero_residual";
    case Termination::DampingLimit: return "damping_limit";
    case Termination::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

Weighting parse_weighting(std::string_view s)
{
  if (s == "uniform")
    return Weighting::Uniform;
  if (s == "relative")
    return Weighting::Relative;
  throw PreconditionError("unknown weighting '" + std::string(s) + "'");
}

InitStrategy parse_init_strategy(std::string_view s)
{
  for (auto v : {InitStrategy::Moments, InitStrategy::ValleySplit, InitStrategy::Explicit})
    if (to_string(v) == s)
      return v;
  throw PreconditionError("unknown init strategy '" + std::string(s) + "'");
}

void FitConfig::validate() const
{
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw PreconditionError(std::string("fit config: ") + name + " must be > 0");
  };
  positive(step_tol, "step_tol");
  positive(residual_tol, "residual_tol");
  positive(damping_init, "damping_init");
  positive(finite_diff_rel_step, "finite_diff_rel_step");
  if (!(damping_up > 1.0))
    throw PreconditionError("fit config: damping_up must be > 1");
  if (!(damping_down > 0.0 && damping_down < 1.0))
    throw PreconditionError("fit config: damping_down must lie in (0, 1)");
  if (max_iterations < 1)
    throw PreconditionError("fit config: max_iterations must be >= 1");
  if (multistart_count < 1)
    throw PreconditionError("fit config: multistart_count must be >= 1");
  if (init_strategy == InitStrategy::Explicit && !init_model)
    throw PreconditionError("fit config: explicit init strategy needs an init model");
}

double r_squared(std::span<const double> observed,
                 std::span<const double> predicted,
                 std::span<const double> weights)
{
  if (observed.size() != predicted.size() || observed.size() != weights.size())
    throw PreconditionError("r_squared: length mismatch");
  if (observed.size() < 2)
    throw PreconditionError("r_squared: need at least 2 observations");
  double wsum = 0.0, wo = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(weights[i] > 0.0))
      throw PreconditionError("r_squared: weights must be > 0");
    wsum += weights[i];
    wo += weights[i] * observed[i];
  }
  const double mean = wo / wsum;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ss_res += weights[i] * (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
    ss_tot += weights[i] * (observed[i] - mean) * (observed[i] - mean);
  }
  if (!(ss_tot > 0.0))
    throw DomainError("r_squared: observations are all equal");
  return 1.0 - ss_res / ss_tot;
}

std::vector<double> curve_weights(const EmpiricalCurve& curve, Weighting weighting)
{
  std::vector<double> w(curve.y.size(), 1.0);
  if (weighting == Weighting::Relative) {
    double ymax = 0.0;
    for (double v : curve.y)
      ymax = std::max(ymax, std::fabs(v));
    const double floor = std::max(1e-12 * ymax, std::numeric_limits<double>::min());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double y = std::max(std::fabs(curve.y[i]), floor);
      w[i] = 1.0 / (y * y);
    }
  }
  return w;
}

double model_ordinate(const ModelSpec& model, const EmpiricalCurve& curve, double x)
{
  if (curve.kind == CurveKind::Ccdf)
    return ccdf(model, x);
  if (curve.scale == DensityScale::PerLogIncome)
    return x * pdf(model, x);
  return pdf(model, x);
}

std::optional<Valley> locate_valley(std::span<const double> x, std::span<const double> y)
{
  const std::size_t n = y.size();
  if (n < 3 || x.size() != n)
    return std::nullopt;
  const auto s = moving_average(y);
  std::vector<std::size_t> maxima;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || s[i] > s[i - 1];
    const bool right = i + 1 == n || s[i] >= s[i + 1];
    if (left && right && s[i] > 0.0)
      maxima.push_back(i);
  }
  if (maxima.size() < 2)
    return std::nullopt;
  std::stable_sort(maxima.begin(), maxima.end(),
                   [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  const std::size_t a = std::min(maxima[0], maxima[1]);
  const std::size_t b = std::max(maxima[0], maxima[1]);
  if (b - a < 2)
    return std::nullopt;
  std::size_t best = a + 1;
  for (std::size_t i = a + 1; i < b; ++i)
    if (s[i] < s[best])
      best = i;
  if (!(s[best] < std::min(s[a], s[b])))
    return std::nullopt;
  return Valley{x[best], x[a], x[b]};
}

ModelSpec initialize(const EmpiricalCurve& curve,
                     Family family,
                     InitStrategy strategy,
                     const std::optional<ModelSpec>& explicit_model)
{
  if (strategy == InitStrategy::Explicit) {
    if (!explicit_model || explicit_model->family() != family)
      throw PreconditionError("explicit initialization needs a model of family " +
                              std::string(family_name(family)));
    return *explicit_model;
  }

  const auto pts = mass_points(curve);
  const double amplitude = trapezoidal_mass(curve);
  if (!is_bimodal(family))
    return moments(pts, family, amplitude);

  const Family uni = unimodal_of(family);
  std::vector<double> px, py, plog;
  for (const auto& p : pts) {
    px.push_back(p.x);
    py.push_back(p.density);
    plog.push_back(p.density * p.x);
  }

  // Split at the density valley, else at the log-density valley, else at the median mass.
  double split = 0.0;
  std::optional<Valley> valley;
  if (strategy == InitStrategy::ValleySplit) {
    if (curve.kind == CurveKind::Pdf)
      valley = locate_valley(curve.x, curve.y);
    if (!valley)
      valley = locate_valley(px, py);
    if (!valley)
      valley = locate_valley(px, plog);
  }
  if (valley) {
    split = valley->x;
  } else {
    double total = 0.0;
    for (const auto& p : pts)
      total += p.mass;
    double acc = 0.0;
    split = pts.empty() ? 1.0 : pts.back().x;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      acc += pts[i].mass;
      if (acc >= 0.5 * total) {
        split = i + 1 < pts.size() ? pts[i + 1].x : pts[i].x;
        break;
      }
    }
  }

  std::vector<MassPoint> left, right;
  for (const auto& p : pts)
    (p.x < split ? left : right).push_back(p);
  if (left.empty() && !right.empty()) {
    left.push_back(right.front());
    right.erase(right.begin());
  }
  if (right.empty() && !left.empty()) {
    right.push_back(left.back());
    left.pop_back();
  }

  const double total_mass = [&] {
    double t = 0.0;
    for (const auto& p : pts)
      t += p.mass;
    return t;
  }();
  const double mass_scale = total_mass > 0.0 ? amplitude / total_mass : 1.0;

  auto side_model = [&](const std::vector<MassPoint>& side) {
    double m = 0.0;
    for (const auto& p : side)
      m += p.mass;
    ModelSpec guess = moments(side, uni, m * mass_scale);
    if (side.size() < 2 * param_count(uni))
      return guess;
    // Short unimodal fit of the side's density points.
    EmpiricalCurve sub;
    sub.kind = CurveKind::Pdf;
    bool any_positive = false;
    for (const auto& p : side) {
      sub.x.push_back(p.x);
      sub.y.push_back(p.density * mass_scale);
      any_positive = any_positive || p.density > 0.0;
    }
    if (!any_positive)
      return guess;
    FitConfig side_cfg;
    side_cfg.max_iterations = 100;
    side_cfg.multistart_count = 1;
    side_cfg.init_strategy = InitStrategy::Explicit;
    side_cfg.init_model = guess;
    try {
      const auto r = fit(sub, uni, side_cfg);
      return r.model;
    } catch (const Error&) {
      return guess;
    }
  };

  const ModelSpec a = side_model(left);
  const ModelSpec b = side_model(right);
  if (family == Family::BiGamma)
    return canonical(ModelSpec(BiGammaParams{a.as<GammaParams>(), b.as<GammaParams>()}));
  return canonical(
    ModelSpec(BiLogNormalParams{a.as<LogNormalParams>(), b.as<LogNormalParams>()}));
}

FitResult fit(const EmpiricalCurve& curve, Family family, const FitConfig& config)
{
  check_curve(curve, family, config);
  const auto weights = curve_weights(curve, config.weighting);
  const auto residual_fn = detail::make_residual_fn(curve, family, weights);

  const ModelSpec init = initialize(curve, family, config.init_strategy, config.init_model);
  const auto theta0 = detail::to_theta(init);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> jitter(0.0, kMultistartJitter);

  std::optional<LmRun> best;
  std::vector<double> best_pack;
  std::size_t diverged = 0;
  for (std::size_t s = 0; s < config.multistart_count; ++s) {
    auto theta = theta0;
    if (s > 0)
      for (double& t : theta)
        t += jitter(rng);
    auto run = levenberg_marquardt(residual_fn, theta, curve.x.size(), config);
    if (!run || !std::isfinite(run->ss)) {
      ++diverged;
      continue;
    }
    const auto model = detail::from_theta(family, run->theta);
    if (!model) {
      ++diverged;
      continue;
    }
    auto pack = param_pack(*model);
    if (!best || better_run(run->ss, run->iterations, pack, best->ss, best->iterations, best_pack)) {
      best = std::move(run);
      best_pack = std::move(pack);
    }
  }
  if (!best)
    throw FitFailure("all " + std::to_string(config.multistart_count) + " starts of the " +
                     std::string(family_name(family)) + " fit produced non-finite residuals (" +
                     std::to_string(diverged) + " diverged)");

  FitResult res = build_result(curve, canonical(*detail::from_theta(family, best->theta)), weights);
  res.iterations = best->iterations;
  res.termination = best->termination;
  res.converged = best->termination != Termination::MaxIterations;
  res.init_used = init;
  res.init_strategy = config.init_strategy;
  res.ss_trace = std::move(best->trace);
  return res;
}

FitResult refit_nested(const EmpiricalCurve& curve,
                       const FitResult& unimodal,
                       const FitConfig& config)
{
  const Family uni = unimodal.model.family();
  if (is_bimodal(uni))
    throw PreconditionError("refit_nested needs a gamma or log-normal seed");
  const Family bi = bimodal_of(uni);

  auto seed_with = [&](double second_amplitude, double shift) -> ModelSpec {
    if (uni == Family::Gamma) {
      const auto& p = unimodal.model.as<GammaParams>();
      return ModelSpec(BiGammaParams{
        p, {second_amplitude, p.shape, p.scale * std::exp(shift)}});
    }
    const auto& p = unimodal.model.as<LogNormalParams>();
    return ModelSpec(BiLogNormalParams{p, {second_amplitude, p.mu + shift, p.sigma}});
  };

  const double amp = total_amplitude(unimodal.model);
  const ModelSpec start = seed_with(0.05 * amp, 1.0);

  FitConfig cfg = config;
  cfg.init_strategy = InitStrategy::Explicit;
  cfg.init_model = start;
  try {
    FitResult res = fit(curve, bi, cfg);
    if (res.ss_res <= unimodal.ss_res + kNestedSlack)
      return res;
  } catch (const FitFailure&) {
  }

  // Degenerate embedding: the unimodal optimum plus an empty second component.
  const auto weights = curve_weights(curve, config.weighting);
  FitResult res = build_result(curve, seed_with(0.0, 1.0), weights);
  res.iterations = unimodal.iterations;
  res.converged = unimodal.converged;
  res.termination = unimodal.termination;
  res.init_used = start;
  res.init_strategy = InitStrategy::Explicit;
  res.ss_trace = unimodal.ss_trace;
  return res;
}

FitResult fit_family(const EmpiricalCurve& curve, Family family, const FitConfig& config)
{
  if (!is_bimodal(family) || config.init_strategy == InitStrategy::Explicit)
    return fit(curve, family, config);

  check_curve(curve, family, config);
  std::optional<FitResult> direct;
  try {
    direct = fit(curve, family, config);
  } catch (const FitFailure&) {
  }

  FitConfig uni_cfg = config;
  uni_cfg.init_strategy = InitStrategy::Moments;
  std::optional<FitResult> nested;
  try {
    const FitResult uni = fit(curve, unimodal_of(family), uni_cfg);
    nested = refit_nested(curve, uni, config);
  } catch (const FitFailure&) {
  }

  if (!direct && !nested)
    throw FitFailure("both the direct and the nested " + std::string(family_name(family)) +
                     " fits failed");
  if (!nested)
    return *direct;
  if (!direct)
    return *nested;
  return nested->ss_res < direct->ss_res ? *nested : *direct;
}

namespace detail {

namespace {

bool is_location_slot(Family family, std::size_t j)
{
  return (family == Family::LogNormal || family == Family::BiLogNormal) && j % 3 == 1;
}

} // namespace

std::vector<double> to_theta(const ModelSpec& model)
{
  const Family family = model.family();
  auto p = param_pack(model);
  for (std::size_t j = 0; j < p.size(); ++j)
    if (!is_location_slot(family, j))
      p[j] = std::log(std::max(p[j], std::numeric_limits<double>::min()));
  return p;
}

std::optional<ModelSpec> from_theta(Family family, std::span<const double> theta)
{
  if (theta.size() != param_count(family))
    return std::nullopt;
  std::vector<double> p(theta.begin(), theta.end());
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!std::isfinite(p[j]))
      return std::nullopt;
    if (is_location_slot(family, j))
      continue;
    p[j] = std::exp(p[j]);
    const bool amplitude = j % 3 == 0;
    // Shim: shapes, scales and spreads must stay strictly positive and finite.
    if (!std::isfinite(p[j]) || (!amplitude && !(p[j] > 0.0)) || p[j] < 0.0)
      return std::nullopt;
  }
  return param_unpack(family, p);
}

std::vector<double> forward_jacobian(const ResidualFn& fn,
                                     std::span<const double> theta,
                                     std::span<const double> r0,
                                     double rel_step)
{
  const std::size_t m = r0.size();
  const std::size_t n = theta.size();
  std::vector<double> jac(m * n, 0.0);
  std::vector<double> t(theta.begin(), theta.end());
  std::vector<double> r(m);
  for (std::size_t j = 0; j < n; ++j) {
    double h = rel_step;
    t[j] = theta[j] + h;
    bool ok = fn(t, r);
    if (!ok) {
      h = -h;
      t[j] = theta[j] + h;
      ok = fn(t, r);
    }
    const double actual = t[j] - theta[j];
    if (ok && actual != 0.0)
      for (std::size_t i = 0; i < m; ++i)
        jac[i * n + j] = (r[i] - r0[i]) / actual;
    t[j] = theta[j];
  }
  return jac;
}

ResidualFn make_residual_fn(const EmpiricalCurve& curve,
                            Family family,
                            std::span<const double> weights)
{
  std::vector<double> sqrt_w(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    sqrt_w[i] = std::sqrt(weights[i]);
  return [&curve, family, sqrt_w = std::move(sqrt_w)](std::span<const double> theta,
                                                      std::span<double> out) {
    const auto model = from_theta(family, theta);
    if (!model)
      return false;
    try {
      for (std::size_t i = 0; i < curve.x.size(); ++i) {
        const double r = sqrt_w[i] * (curve.y[i] - model_ordinate(*model, curve, curve.x[i]));
        if (!std::isfinite(r))
          return false;
        out[i] = r;
      }
    } catch (const Error&) {
      return false;
    }
    return true;
  };
}

} // namespace detail

} // namespace incomefit
