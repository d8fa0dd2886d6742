#pragma once

// Synthetic populations behind the shipped data/ fixtures. Masses are exact
// CDF differences over log-spaced bins between 100 and 60000 PPP USD.

#include "incomefit/empirical.hpp"
#include "incomefit/models.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace incomefit::fixtures {

inline std::vector<double> log_edges(double lo, double hi, std::size_t bins)
{
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    e[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(bins));
  e.front() = lo;
  e.back() = hi;
  return e;
}

inline std::vector<double> standard_edges()
{
  return log_edges(100.0, 60000.0, 48);
}

inline IncomeHistogram bin_model(const ModelSpec& model,
                                 const std::vector<double>& edges,
                                 std::string label,
                                 std::string currency = "2011 PPP USD")
{
  std::vector<double> mass(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    mass[i] = cdf(model, edges[i + 1]) - cdf(model, edges[i]);
  return IncomeHistogram(edges, std::move(mass), std::move(label), std::move(currency));
}

/// Two well separated log-normal bumps.
inline ModelSpec bimodal_population()
{
  return ModelSpec(BiLogNormalParams{{0.55, std::log(900.0), 0.5}, {0.45, std::log(9000.0), 0.45}});
}

inline LogNormalParams world_poor() { return {0.375, std::log(700.0), 0.4}; }
inline LogNormalParams world_bridge() { return {0.25, std::log(2500.0), 0.4}; }
inline LogNormalParams world_rich() { return {0.375, std::log(4000.0), 0.35}; }

/// Poor, bridging ("China+India") and rich sub-populations summed bin by bin.
inline IncomeHistogram world_three_component(const std::vector<double>& edges)
{
  const auto poor = bin_model(ModelSpec(world_poor()), edges, "p");
  const auto bridge = bin_model(ModelSpec(world_bridge()), edges, "b");
  const auto rich = bin_model(ModelSpec(world_rich()), edges, "r");
  std::vector<double> mass(edges.size() - 1);
  for (std::size_t i = 0; i < mass.size(); ++i)
    mass[i] = poor.mass()[i] + bridge.mass()[i] + rich.mass()[i];
  return IncomeHistogram(edges, std::move(mass), "world-1988-synthetic", "2011 PPP USD");
}

inline IncomeHistogram bridge_component(const std::vector<double>& edges)
{
  return bin_model(ModelSpec(world_bridge()), edges, "china-india-1988-synthetic");
}

/// Near-unimodal later-year population.
inline ModelSpec late_population()
{
  return ModelSpec(BiGammaParams{{0.9, 1.6, 2000.0}, {0.1, 1.8, 2600.0}});
}

} // namespace incomefit::fixtures
