// Regenerates the synthetic histograms under data/.

#include "fixture_models.hpp"

#include "incomefit/text.hpp"

#include <filesystem>
#include <iostream>

using namespace incomefit;

int main(int argc, char** argv)
{
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);
  const auto edges = fixtures::standard_edges();

  auto write = [&](const std::string& name, const IncomeHistogram& h) {
    text::write_file_atomic(dir / name, render_histogram(h));
    std::cout << (dir / name).string() << ": " << h.bins() << " bins, mass "
              << text::format_double(h.total_mass()) << "\n";
  };

  write("synthetic_bimodal.csv",
        fixtures::bin_model(fixtures::bimodal_population(), edges, "synthetic-bimodal"));
  write("world_1988_synthetic.csv", fixtures::world_three_component(edges));
  write("china_india_1988_synthetic.csv", fixtures::bridge_component(edges));
  write("world_2018_synthetic.csv",
        fixtures::bin_model(fixtures::late_population(), edges, "world-2018-synthetic"));

  // 84% coverage: masses sum to 0.84 without normalization.
  const IncomeHistogram coverage({100.0, 1000.0, 10000.0, 60000.0}, {0.2, 0.44, 0.2},
                                 "coverage-84", "2011 PPP USD");
  write("coverage_84.csv", coverage);
  return 0;
}
