#include "incomefit/models.hpp"

#include "incomefit/errors.hpp"
#include "incomefit/special.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

namespace incomefit {

namespace {

template <class... Ts>
struct Overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const GammaParams& p)
{
  if (!(p.amplitude >= 0.0) || !std::isfinite(p.amplitude))
    throw DomainError("gamma component: amplitude must be finite and >= 0");
  if (!(p.shape > 0.0) || !std::isfinite(p.shape))
    throw DomainError("gamma component: shape must be finite and > 0");
  if (!(p.scale > 0.0) || !std::isfinite(p.scale))
    throw DomainError("gamma component: scale must be finite and > 0");
}

void validate(const LogNormalParams& p)
{
  if (!(p.amplitude >= 0.0) || !std::isfinite(p.amplitude))
    throw DomainError("log-normal component: amplitude must be finite and >= 0");
  if (!std::isfinite(p.mu))
    throw DomainError("log-normal component: mu must be finite");
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
    throw DomainError("log-normal component: sigma must be finite and > 0");
}

void require_income(double x, bool allow_zero)
{
  if (allow_zero ? !(x >= 0.0) : !(x > 0.0))
    throw DomainError(std::string("income must be ") + (allow_zero ? ">= 0" : "> 0") +
                      ", got " + std::to_string(x));
}

// Applies `f` to every component and sums the results.
template <class F>
double sum_components(const ModelSpec& model, F&& f)
{
  return std::visit(Overloaded{
                      [&](const GammaParams& p) { return f(p); },
                      [&](const LogNormalParams& p) { return f(p); },
                      [&](const BiGammaParams& p) { return f(p.first) + f(p.second); },
                      [&](const BiLogNormalParams& p) { return f(p.first) + f(p.second); },
                    },
                    model.params());
}

} // namespace

std::string_view family_name(Family family)
{
  switch (family) {
    case Family::Gamma: return "gamma";
    case Family::LogNormal: return "lognormal";
    case Family::BiGamma: return "bigamma";
    case Family::BiLogNormal: return "bilognormal";
  }
  return "unknown";
}

Family parse_family(std::string_view name)
{
  for (auto f : {Family::Gamma, Family::LogNormal, Family::BiGamma, Family::BiLogNormal})
    if (family_name(f) == name)
      return f;
  throw PreconditionError("unknown family '" + std::string(name) +
                          "' (expected gamma, lognormal, bigamma or bilognormal)");
}

std::size_t param_count(Family family)
{
  return is_bimodal(family) ? 6 : 3;
}

bool is_bimodal(Family family)
{
  return family == Family::BiGamma || family == Family::BiLogNormal;
}

Family unimodal_of(Family family)
{
  switch (family) {
    case Family::BiGamma: return Family::Gamma;
    case Family::BiLogNormal: return Family::LogNormal;
    default: return family;
  }
}

Family bimodal_of(Family family)
{
  switch (family) {
    case Family::Gamma: return Family::BiGamma;
    case Family::LogNormal: return Family::BiLogNormal;
    default: return family;
  }
}

ModelSpec::ModelSpec(GammaParams p)
  : params_(p)
{
  validate(p);
}

ModelSpec::ModelSpec(LogNormalParams p)
  : params_(p)
{
  validate(p);
}

ModelSpec::ModelSpec(BiGammaParams p)
  : params_(p)
{
  validate(p.first);
  validate(p.second);
}

ModelSpec::ModelSpec(BiLogNormalParams p)
  : params_(p)
{
  validate(p.first);
  validate(p.second);
}

double total_amplitude(const ModelSpec& model)
{
  return sum_components(model, [](const auto& p) { return p.amplitude; });
}

double pdf(const GammaParams& p, double x)
{
  require_income(x, false);
  if (p.amplitude == 0.0)
    return 0.0;
  const double log_density = (p.shape - 1.0) * std::log(x) - x / p.scale -
                             special::log_gamma(p.shape) - p.shape * std::log(p.scale);
  return p.amplitude * std::exp(log_density);
}

double pdf(const LogNormalParams& p, double x)
{
  require_income(x, false);
  if (p.amplitude == 0.0)
    return 0.0;
  const double z = (std::log(x) - p.mu) / p.sigma;
  return p.amplitude * std::exp(-0.5 * z * z) /
         (x * p.sigma * std::sqrt(2.0 * std::numbers::pi));
}

double cdf(const GammaParams& p, double x)
{
  require_income(x, true);
  return p.amplitude * special::reg_lower_incomplete_gamma(p.shape, x / p.scale);
}

double cdf(const LogNormalParams& p, double x)
{
  require_income(x, true);
  if (x == 0.0)
    return 0.0;
  return p.amplitude * special::std_normal_cdf((std::log(x) - p.mu) / p.sigma);
}

double ccdf(const GammaParams& p, double x)
{
  require_income(x, true);
  return p.amplitude * special::reg_upper_incomplete_gamma(p.shape, x / p.scale);
}

double ccdf(const LogNormalParams& p, double x)
{
  require_income(x, true);
  if (x == 0.0)
    return p.amplitude;
  return p.amplitude * special::std_normal_ccdf((std::log(x) - p.mu) / p.sigma);
}

double pdf(const ModelSpec& model, double x)
{
  require_income(x, false);
  return sum_components(model, [x](const auto& p) { return pdf(p, x); });
}

double cdf(const ModelSpec& model, double x)
{
  require_income(x, true);
  return sum_components(model, [x](const auto& p) { return cdf(p, x); });
}

double ccdf(const ModelSpec& model, double x)
{
  require_income(x, true);
  return sum_components(model, [x](const auto& p) { return ccdf(p, x); });
}

ModelSpec canonical(const ModelSpec& model)
{
  return std::visit(Overloaded{
                      [](const GammaParams& p) { return ModelSpec(p); },
                      [](const LogNormalParams& p) { return ModelSpec(p); },
                      [](BiGammaParams p) {
                        if (p.second.scale < p.first.scale)
                          std::swap(p.first, p.second);
                        return ModelSpec(p);
                      },
                      [](BiLogNormalParams p) {
                        if (p.second.mu < p.first.mu)
                          std::swap(p.first, p.second);
                        return ModelSpec(p);
                      },
                    },
                    model.params());
}

std::vector<double> param_pack(const ModelSpec& model)
{
  const ModelSpec c = canonical(model);
  return std::visit(Overloaded{
                      [](const GammaParams& p) {
                        return std::vector<double>{p.amplitude, p.shape, p.scale};
                      },
                      [](const LogNormalParams& p) {
                        return std::vector<double>{p.amplitude, p.mu, p.sigma};
                      },
                      [](const BiGammaParams& p) {
                        return std::vector<double>{p.first.amplitude,  p.first.shape,
                                                   p.first.scale,      p.second.amplitude,
                                                   p.second.shape,     p.second.scale};
                      },
                      [](const BiLogNormalParams& p) {
                        return std::vector<double>{p.first.amplitude,  p.first.mu,
                                                   p.first.sigma,      p.second.amplitude,
                                                   p.second.mu,        p.second.sigma};
                      },
                    },
                    c.params());
}

ModelSpec param_unpack(Family family, std::span<const double> v)
{
  if (v.size() != param_count(family))
    throw PreconditionError("family " + std::string(family_name(family)) + " takes " +
                            std::to_string(param_count(family)) + " parameters, got " +
                            std::to_string(v.size()));
  switch (family) {
    case Family::Gamma: return ModelSpec(GammaParams{v[0], v[1], v[2]});
    case Family::LogNormal: return ModelSpec(LogNormalParams{v[0], v[1], v[2]});
    case Family::BiGamma:
      return ModelSpec(BiGammaParams{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}});
    case Family::BiLogNormal:
      return ModelSpec(BiLogNormalParams{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}});
  }
  throw PreconditionError("unknown family");
}

std::vector<std::string> param_names(Family family)
{
  switch (family) {
    case Family::Gamma: return {"A1", "n1", "m1"};
    case Family::LogNormal: return {"A1", "mu1", "sigma1"};
    case Family::BiGamma: return {"A1", "n1", "m1", "A2", "n2", "m2"};
    case Family::BiLogNormal: return {"A1", "mu1", "sigma1", "A2", "mu2", "sigma2"};
  }
  return {};
}

std::vector<double> sample(const ModelSpec& model, std::size_t count, std::uint64_t seed)
{
  if (count == 0)
    throw PreconditionError("sample: count must be >= 1");
  const double total = total_amplitude(model);
  if (std::fabs(total - 1.0) > 1e-9)
    throw PreconditionError("sample: amplitudes must sum to 1, got " + std::to_string(total));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  auto draw_lognormal = [&](const LogNormalParams& p) {
    return std::exp(p.mu + p.sigma * normal(rng));
  };
  auto draw_gamma = [&](const GammaParams& p) {
    std::gamma_distribution<double> g(p.shape, p.scale);
    return g(rng);
  };

  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = std::visit(
      Overloaded{
        [&](const GammaParams& p) { return draw_gamma(p); },
        [&](const LogNormalParams& p) { return draw_lognormal(p); },
        [&](const BiGammaParams& p) {
          return uniform(rng) < p.first.amplitude / total ? draw_gamma(p.first)
                                                          : draw_gamma(p.second);
        },
        [&](const BiLogNormalParams& p) {
          return uniform(rng) < p.first.amplitude / total ? draw_lognormal(p.first)
                                                          : draw_lognormal(p.second);
        },
      },
      model.params());
    out.push_back(x);
  }
  return out;
}

} // namespace incomefit
