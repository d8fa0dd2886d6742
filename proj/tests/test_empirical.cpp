#include "incomefit/empirical.hpp"
#include "incomefit/errors.hpp"
#include "incomefit/models.hpp"
#include "incomefit/text.hpp"

#include "fixture_models.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace incomefit;

namespace {

const char* kThreeRows = "bin_low,bin_high,mass\n"
                         "100,1000,0.2\n"
                         "1000,10000,0.5\n"
                         "10000,60000,0.3\n";

IncomeHistogram random_histogram(std::mt19937_64& rng)
{
  std::uniform_int_distribution<int> nb(2, 40);
  std::uniform_real_distribution<double> step(0.01, 1.0), m(0.0, 1.0), start(1.0, 500.0);
  const int bins = nb(rng);
  std::vector<double> edges{start(rng)};
  std::vector<double> mass;
  for (int i = 0; i < bins; ++i) {
    edges.push_back(edges.back() * std::exp(step(rng)));
    mass.push_back(m(rng) < 0.2 ? 0.0 : m(rng));
  }
  mass[0] += 1e-3;
  return IncomeHistogram(edges, mass, "random");
}

} // namespace

TEST_CASE("load the three-row fixture")
{
  const auto h = load_histogram(std::string(kThreeRows));
  CHECK(h.bins() == 3);
  CHECK(h.bin_edges() == std::vector<double>{100, 1000, 10000, 60000});
  CHECK(h.mass() == std::vector<double>{0.2, 0.5, 0.3});
}

TEST_CASE("negative mass is a parse error naming the row")
{
  try {
    (void)load_histogram(std::string("bin_low,bin_high,mass\n100,1000,0.2\n1000,10000,-0.1\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
}

TEST_CASE("shuffled rows load identically")
{
  const std::string shuffled = "# label: shuffled\n"
                               "bin_low,bin_high,mass\n"
                               "10000,60000,0.3\n"
                               "100,1000,0.2\n"
                               "1000,10000,0.5\n";
  const auto a = load_histogram(shuffled);
  const auto b = load_histogram(std::string(kThreeRows));
  CHECK(a.bin_edges() == b.bin_edges());
  CHECK(a.mass() == b.mass());
  CHECK(a.label() == "shuffled");
}

TEST_CASE("alternative layouts")
{
  SUBCASE("whitespace and tab delimiters, comments, metadata")
  {
    const auto h = load_histogram(std::string("# label: world-1988\n# currency: 2011 PPP USD\n"
                                              "# free comment\n"
                                              "bin_low  bin_high   mass\n"
                                              "100 1000 0.2\n\n1000\t10000 0.5\n"));
    CHECK(h.bins() == 2);
    CHECK(h.label() == "world-1988");
    CHECK(h.currency_note() == "2011 PPP USD");
    const auto t = load_histogram(std::string("mass\tbin_low\tbin_high\n0.2\t100\t1000\n0.5\t1000\t10000\n"));
    CHECK(t.mass() == h.mass());
  }
  SUBCASE("bin midpoints rebuild geometric edges")
  {
    const auto h = load_histogram(std::string("bin_mid,mass\n100,0.5\n1000,0.3\n10000,0.2\n"));
    CHECK(h.bins() == 3);
    const auto& e = h.bin_edges();
    CHECK(e[1] == doctest::Approx(std::sqrt(100.0 * 1000.0)));
    CHECK(e[2] == doctest::Approx(std::sqrt(1000.0 * 10000.0)));
    CHECK(std::sqrt(e[0] * e[1]) == doctest::Approx(100.0));
    CHECK(std::sqrt(e[2] * e[3]) == doctest::Approx(10000.0));
  }
}

TEST_CASE("malformed input")
{
  auto row_of = [](const std::string& s) {
    try {
      (void)load_histogram(s);
    } catch (const ParseError& e) {
      return e.row();
    }
    return std::size_t{9999};
  };
  CHECK(row_of("bin_low,bin_high,mass\n100,1000,0.2\n1000,10000\n") == 3);
  CHECK(row_of("bin_low,bin_high,mass\n100,1000,abc\n1000,10000,1\n") == 2);
  CHECK(row_of("bin_low,bin_high,mass\n100,1000,1,000\n") == 2);
  CHECK(row_of("bin_low,bin_high,mass\n100,1000,0.2\n1500,10000,0.5\n") == 2);
  CHECK(row_of("bin_low,bin_high,mass\n100,90,0.2\n1000,10000,0.5\n") == 2);
  CHECK(row_of("low,high,mass\n100,1000,0.2\n") == 1);
  CHECK(row_of("bin_low,bin_high,mass\n100,1000,0.2\n100,1000,0.5\n") == 3);
  CHECK_THROWS_AS(load_histogram(std::string("# only comments\n")), ParseError);
  CHECK_THROWS_AS(load_histogram(std::string("bin_low,bin_high,mass\n100,1000,0.2\n")), ParseError);
  CHECK_THROWS_AS(load_histogram(std::string("bin_low,bin_high,mass\n100,1000,0\n1000,2000,0\n")),
                  ParseError);
}

TEST_CASE("rendering round-trips bit-exactly")
{
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const auto h = random_histogram(rng);
    const auto text = render_histogram(h);
    const auto back = load_histogram(text);
    CHECK(back == h);
    CHECK(render_histogram(back) == text);
  }
}

TEST_CASE("histogram invariants")
{
  CHECK_THROWS_AS(IncomeHistogram({1.0, 2.0}, {1.0}), PreconditionError);
  CHECK_THROWS_AS(IncomeHistogram({1.0, 3.0, 2.0}, {1.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(IncomeHistogram({0.0, 1.0, 2.0}, {1.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(IncomeHistogram({1.0, 2.0, 3.0}, {1.0, -1.0}), PreconditionError);
  CHECK_THROWS_AS(IncomeHistogram({1.0, 2.0, 3.0}, {0.0, 0.0}), PreconditionError);
  CHECK_THROWS_AS(IncomeHistogram({1.0, 2.0, 3.0, 4.0}, {0.0, 1.0}), PreconditionError);
}

TEST_CASE("pdf curve")
{
  const IncomeHistogram h({1000.0, 2000.0, 3000.0}, {1.0, 0.0});
  const auto c = to_pdf_curve(h, false);
  CHECK(c.kind == CurveKind::Pdf);
  CHECK(c.x[0] == doctest::Approx(1414.2135623730951));
  CHECK(c.y[0] == doctest::Approx(1.0 / 1000.0));
  CHECK(c.y[1] == 0.0);

  const auto log_curve = to_pdf_curve(h, false, DensityScale::PerLogIncome);
  CHECK(log_curve.y[0] == doctest::Approx(1.0 / std::log(2.0)));

  const auto three = load_histogram(std::string(kThreeRows));
  const IncomeHistogram doubled(three.bin_edges(), {0.4, 1.0, 0.6});
  CHECK(to_pdf_curve(doubled, true).y == to_pdf_curve(three, true).y);
}

TEST_CASE("synthetic 1988 world is bimodal with a valley between its peaks")
{
  const auto h = load_histogram(text::read_file(INCOMEFIT_DATA_DIR "/world_1988_synthetic.csv"));
  const auto c = to_pdf_curve(h, true);
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < c.y.size(); ++i)
    if (c.y[i] > c.y[i - 1] && c.y[i] >= c.y[i + 1])
      maxima.push_back(i);
  REQUIRE(maxima.size() == 2);
  const auto lo = std::min_element(c.y.begin() + static_cast<long>(maxima[0]),
                                   c.y.begin() + static_cast<long>(maxima[1]));
  CHECK(*lo < c.y[maxima[1]]);
  CHECK(c.x[maxima[0]] < c.x[static_cast<std::size_t>(lo - c.y.begin())]);
  CHECK(c.x[static_cast<std::size_t>(lo - c.y.begin())] < c.x[maxima[1]]);
}

TEST_CASE("pdf re-integrates to the normalized mass on log-uniform bins")
{
  const ModelSpec m(LogNormalParams{1.0, std::log(3000.0), 0.8});
  const auto edges = fixtures::log_edges(20.0, 500000.0, 120);
  const auto c = to_pdf_curve(fixtures::bin_model(m, edges, "ln"), true);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < c.x.size(); ++i)
    total += 0.5 * (c.y[i] + c.y[i + 1]) * (c.x[i + 1] - c.x[i]);
  CHECK(std::fabs(total - 1.0) <= 0.02);
}

TEST_CASE("ccdf curve")
{
  const auto h = load_histogram(std::string(kThreeRows));
  const auto c = to_ccdf_curve(h, true);
  CHECK(c.kind == CurveKind::Ccdf);
  CHECK(c.x == std::vector<double>{100, 1000, 10000});
  CHECK(c.y[0] == 1.0);
  CHECK(c.y[1] == doctest::Approx(0.8));
  CHECK(c.y[2] == doctest::Approx(0.3));
  CHECK(c.y.back() >= h.mass().back() - 1e-15);

  const IncomeHistogram partial({100.0, 1000.0, 10000.0, 60000.0}, {0.2, 0.44, 0.2});
  CHECK(to_ccdf_curve(partial, false).y[0] == doctest::Approx(0.84).epsilon(1e-15));

  std::mt19937_64 rng(33);
  for (int i = 0; i < 200; ++i) {
    const auto r = random_histogram(rng);
    for (bool norm : {false, true}) {
      const auto cc = to_ccdf_curve(r, norm);
      for (std::size_t j = 1; j < cc.y.size(); ++j)
        CHECK(cc.y[j] <= cc.y[j - 1]);
      CHECK(cc.y[0] <= r.total_mass() * (1 + 1e-15) + (norm ? 1.0 : 0.0));
      if (norm)
        CHECK(cc.y[0] == 1.0);
    }
  }
}

TEST_CASE("subtract")
{
  const auto edges = fixtures::standard_edges();
  const LogNormalParams c1{0.6, std::log(900.0), 0.5}, c2{0.4, std::log(9000.0), 0.45};
  const auto world = fixtures::bin_model(ModelSpec(BiLogNormalParams{c1, c2}), edges, "w");
  const auto first = fixtures::bin_model(ModelSpec(c1), edges, "c1");
  const auto second = fixtures::bin_model(ModelSpec(c2), edges, "c2");

  SUBCASE("empty subtraction")
  {
    CHECK(subtract(world, {}, false) == world);
  }
  SUBCASE("removing everything leaves zero mass")
  {
    const std::vector<IncomeHistogram> parts{world};
    try {
      (void)subtract(world, parts, true);
      FAIL("expected zero total mass");
    } catch (const PreconditionError& e) {
      CHECK(std::string(e.what()) == "zero total mass");
    }
  }
  SUBCASE("residual recovers the other component")
  {
    const std::vector<IncomeHistogram> parts{first};
    const auto r = subtract(world, parts, false);
    for (std::size_t i = 0; i < r.bins(); ++i)
      CHECK(std::fabs(r.mass()[i] - second.mass()[i]) <= 1e-9);
  }
  SUBCASE("sequential subtraction is linear")
  {
    const auto a = fixtures::bin_model(ModelSpec(LogNormalParams{0.2, std::log(900.0), 0.5}), edges, "a");
    const auto b = fixtures::bin_model(ModelSpec(LogNormalParams{0.1, std::log(9000.0), 0.4}), edges, "b");
    const std::vector<IncomeHistogram> ab{a, b}, only_a{a}, only_b{b};
    CHECK(subtract(world, ab, false).mass() == subtract(subtract(world, only_a, false), only_b, false).mass());
  }
  SUBCASE("renormalize")
  {
    const std::vector<IncomeHistogram> parts{first};
    CHECK(subtract(world, parts, true).total_mass() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("tiny negatives are clamped, larger ones rejected")
  {
    const IncomeHistogram w({1.0, 2.0, 3.0}, {0.5, 0.5});
    const IncomeHistogram tiny({1.0, 2.0, 3.0}, {0.5 + 5e-13, 0.1});
    const std::vector<IncomeHistogram> t{tiny};
    CHECK(subtract(w, t, false).mass()[0] == 0.0);
    const IncomeHistogram big({1.0, 2.0, 3.0}, {0.1, 0.6});
    const std::vector<IncomeHistogram> bparts{big};
    try {
      (void)subtract(w, bparts, false);
      FAIL("expected ConsistencyError");
    } catch (const ConsistencyError& e) {
      CHECK(e.bin() == 1);
    }
  }
  SUBCASE("mismatched edges")
  {
    const IncomeHistogram other(fixtures::log_edges(100.0, 60000.0, 24), std::vector<double>(24, 0.01));
    const std::vector<IncomeHistogram> parts{other};
    CHECK_THROWS_AS(subtract(world, parts, false), AlignmentError);
  }
}

TEST_CASE("rebin")
{
  const IncomeHistogram h({100.0, 1000.0, 10000.0}, {0.4, 0.6});
  CHECK(rebin(h, h.bin_edges()) == h);

  const std::vector<double> halves{100.0, std::sqrt(100.0 * 1000.0), 1000.0, 10000.0};
  const auto split = rebin(h, halves);
  CHECK(split.mass()[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(split.mass()[1] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(split.mass()[2] == doctest::Approx(0.6).epsilon(1e-14));

  const std::vector<double> wider{50.0, 1000.0, 10000.0};
  CHECK_THROWS_AS(rebin(h, wider), DomainError);
  const std::vector<double> beyond{100.0, 1000.0, 20000.0};
  CHECK_THROWS_AS(rebin(h, beyond), DomainError);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto r = random_histogram(rng);
    const double lo = r.bin_edges().front(), hi = r.bin_edges().back();
    std::uniform_int_distribution<int> nb(2, 60);
    const auto edges = fixtures::log_edges(lo, hi, static_cast<std::size_t>(nb(rng)));
    CHECK(std::fabs(rebin(r, edges).total_mass() - r.total_mass()) <= 1e-12);
  }
}

TEST_CASE("curve rendering")
{
  const std::vector<double> x{1.5, 2.0}, y{0.25, 1e-20};
  CHECK(render_curve(x, y) == "x,y\n1.5,0.25\n2,1e-20\n");
}
