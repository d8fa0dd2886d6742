#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace incomefit {

enum class Family
{
  Gamma,
  LogNormal,
  BiGamma,
  BiLogNormal,
};

/// CLI spelling: gamma, lognormal, bigamma, bilognormal.
std::string_view family_name(Family family);
/// Inverse of family_name; throws PreconditionError on unknown names.
Family parse_family(std::string_view name);
std::size_t param_count(Family family);
bool is_bimodal(Family family);
Family unimodal_of(Family family);
Family bimodal_of(Family family);

/// Log-normal component, A/(x σ √(2π)) exp(-(ln x - μ)² / 2σ²). A is the component mass.
struct LogNormalParams
{
  double amplitude = 1.0;
  double mu = 0.0;
  double sigma = 1.0;

  bool operator==(const LogNormalParams&) const = default;
};

/// Gamma component, A/(Γ(n) mⁿ) x^(n-1) e^(-x/m). A is the component mass.
struct GammaParams
{
  double amplitude = 1.0;
  double shape = 1.0;
  double scale = 1.0;

  bool operator==(const GammaParams&) const = default;
};

struct BiGammaParams
{
  GammaParams first;
  GammaParams second;

  bool operator==(const BiGammaParams&) const = default;
};

struct BiLogNormalParams
{
  LogNormalParams first;
  LogNormalParams second;

  bool operator==(const BiLogNormalParams&) const = default;
};

/// A distribution family together with its parameters. The family is derived
/// from the stored alternative, so the two can never disagree. Construction
/// validates A >= 0 and σ, n, m > 0 (DomainError otherwise).
class ModelSpec
{
public:
  using Params = std::variant<GammaParams, LogNormalParams, BiGammaParams, BiLogNormalParams>;

  ModelSpec(GammaParams p);
  ModelSpec(LogNormalParams p);
  ModelSpec(BiGammaParams p);
  ModelSpec(BiLogNormalParams p);

  Family family() const { return static_cast<Family>(params_.index()); }
  const Params& params() const { return params_; }

  template <class T>
  const T& as() const { return std::get<T>(params_); }

  bool operator==(const ModelSpec&) const = default;

private:
  Params params_;
};

/// Sum of component amplitudes, the limit of cdf as x → ∞.
double total_amplitude(const ModelSpec& model);

/// Density per USD. Throws DomainError for x <= 0.
double pdf(const ModelSpec& model, double x);
/// Mass below x, in [0, total_amplitude]. Throws DomainError for x < 0.
double cdf(const ModelSpec& model, double x);
/// Mass above x. Closed-form upper tails, never total - cdf.
double ccdf(const ModelSpec& model, double x);

double pdf(const GammaParams& p, double x);
double pdf(const LogNormalParams& p, double x);
double cdf(const GammaParams& p, double x);
double cdf(const LogNormalParams& p, double x);
double ccdf(const GammaParams& p, double x);
double ccdf(const LogNormalParams& p, double x);

/// Swaps bimodal components so that m1 <= m2 (bi-gamma) or μ1 <= μ2
/// (bi-log-normal). Unimodal models are returned unchanged.
ModelSpec canonical(const ModelSpec& model);

/// Canonical parameter vector:
///   gamma        [A, n, m]
///   lognormal    [A, mu, sigma]
///   bigamma      [A1, n1, m1, A2, n2, m2]
///   bilognormal  [A1, mu1, sigma1, A2, mu2, sigma2]
/// Bimodal models are canonicalized before packing.
std::vector<double> param_pack(const ModelSpec& model);
/// Throws PreconditionError when the length does not match the family.
ModelSpec param_unpack(Family family, std::span<const double> values);

/// Document key for each packed slot, e.g. {"A1", "mu1", "sigma1"}.
std::vector<std::string> param_names(Family family);

/// Draws `count` incomes. The amplitudes must sum to 1 within 1e-9.
std::vector<double> sample(const ModelSpec& model, std::size_t count, std::uint64_t seed);

} // namespace incomefit
