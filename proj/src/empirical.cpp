#include "incomefit/empirical.hpp"

#include "incomefit/errors.hpp"
#include "incomefit/text.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>

namespace incomefit {

namespace {

constexpr double kClampTolerance = 1e-12;
constexpr double kEdgeRelTolerance = 1e-9;

struct Row
{
  std::size_t line = 0;
  double key = 0.0; // bin_low or bin_mid
  double high = 0.0;
  double mass = 0.0;
};

std::vector<std::string_view> split(std::string_view line, char delim)
{
  std::vector<std::string_view> out;
  if (delim == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
        ++i;
      if (i == line.size())
        break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t')
        ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(text::trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

std::vector<double> scaled(std::span<const double> mass, bool normalize)
{
  std::vector<double> out(mass.begin(), mass.end());
  if (normalize) {
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& m : out)
      m /= total;
  }
  return out;
}

bool close_edges(double a, double b)
{
  return std::fabs(a - b) <= kEdgeRelTolerance * std::max(std::fabs(a), std::fabs(b));
}

} // namespace

IncomeHistogram::IncomeHistogram(std::vector<double> bin_edges,
                                 std::vector<double> mass,
                                 std::string label,
                                 std::string currency_note)
  : edges_(std::move(bin_edges))
  , mass_(std::move(mass))
  , label_(std::move(label))
  , currency_(std::move(currency_note))
{
  if (mass_.size() < 2)
    throw PreconditionError("histogram needs at least 2 bins, got " +
                            std::to_string(mass_.size()));
  if (edges_.size() != mass_.size() + 1)
    throw PreconditionError("histogram with " + std::to_string(mass_.size()) +
                            " bins needs " + std::to_string(mass_.size() + 1) + " edges");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (!(edges_[i] > 0.0) || !std::isfinite(edges_[i]))
      throw PreconditionError("bin edge " + std::to_string(i) + " must be finite and > 0");
    if (i > 0 && !(edges_[i] > edges_[i - 1]))
      throw PreconditionError("bin edges must be strictly increasing at edge " +
                              std::to_string(i));
  }
  for (std::size_t i = 0; i < mass_.size(); ++i)
    if (!(mass_[i] >= 0.0) || !std::isfinite(mass_[i]))
      throw PreconditionError("mass of bin " + std::to_string(i) + " must be finite and >= 0");
  if (!(total_mass() > 0.0))
    throw PreconditionError("zero total mass");
}

double IncomeHistogram::total_mass() const
{
  return std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

IncomeHistogram load_histogram(std::istream& in)
{
  std::string label;
  std::string currency;
  std::string line;
  std::size_t line_no = 0;
  char delim = ',';
  bool have_header = false;
  bool midpoints = false;
  std::size_t col_low = 0, col_high = 0, col_mid = 0, col_mass = 0, width = 0;
  std::vector<Row> rows;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = text::trim(line);
    if (view.empty())
      continue;
    if (view.front() == '#') {
      view.remove_prefix(1);
      view = text::trim(view);
      const auto colon = view.find(':');
      if (colon != std::string_view::npos) {
        const auto key = text::trim(view.substr(0, colon));
        const auto value = std::string(text::trim(view.substr(colon + 1)));
        if (key == "label")
          label = value;
        else if (key == "currency")
          currency = value;
      }
      continue;
    }

    if (!have_header) {
      delim = view.find(',') != std::string_view::npos    ? ','
              : view.find('\t') != std::string_view::npos ? '\t'
                                                          : ' ';
      const auto cols = split(view, delim);
      width = cols.size();
      auto find_col = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < cols.size(); ++i)
          if (cols[i] == name)
            return i;
        return std::nullopt;
      };
      const auto lo = find_col("bin_low");
      const auto hi = find_col("bin_high");
      const auto mid = find_col("bin_mid");
      const auto m = find_col("mass");
      if (!m)
        throw ParseError("header lacks a 'mass' column", line_no);
      col_mass = *m;
      if (lo && hi) {
        col_low = *lo;
        col_high = *hi;
      } else if (mid) {
        midpoints = true;
        col_mid = *mid;
      } else {
        throw ParseError("header needs 'bin_low' and 'bin_high', or 'bin_mid'", line_no);
      }
      have_header = true;
      continue;
    }

    const auto cols = split(view, delim);
    if (cols.size() != width)
      throw ParseError("expected " + std::to_string(width) + " fields, got " +
                         std::to_string(cols.size()),
                       line_no);
    auto number = [&](std::size_t col, const char* name) {
      auto v = text::parse_double(cols[col]);
      if (!v || !std::isfinite(*v))
        throw ParseError(std::string("malformed ") + name + " '" + std::string(cols[col]) + "'",
                         line_no);
      return *v;
    };
    Row row;
    row.line = line_no;
    row.mass = number(col_mass, "mass");
    if (row.mass < 0.0)
      throw ParseError("negative mass " + std::string(cols[col_mass]), line_no);
    if (midpoints) {
      row.key = number(col_mid, "bin_mid");
      if (!(row.key > 0.0))
        throw ParseError("bin_mid must be > 0", line_no);
    } else {
      row.key = number(col_low, "bin_low");
      row.high = number(col_high, "bin_high");
      if (!(row.key > 0.0))
        throw ParseError("bin_low must be > 0", line_no);
      if (!(row.high > row.key))
        throw ParseError("bin_high must exceed bin_low", line_no);
    }
    rows.push_back(row);
  }

  if (!have_header)
    throw ParseError("missing header row", line_no);
  if (rows.size() < 2)
    throw ParseError("need at least 2 data rows, got " + std::to_string(rows.size()), line_no);

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.key < b.key; });

  std::vector<double> edges;
  std::vector<double> mass;
  edges.reserve(rows.size() + 1);
  mass.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && !(rows[i].key > rows[i - 1].key))
      throw ParseError("duplicate bin (also on line " + std::to_string(rows[i - 1].line) + ")",
                       rows[i].line);
    mass.push_back(rows[i].mass);
  }

  if (midpoints) {
    const std::size_t n = rows.size();
    edges.resize(n + 1);
    for (std::size_t i = 1; i < n; ++i)
      edges[i] = std::sqrt(rows[i - 1].key * rows[i].key);
    edges[0] = rows[0].key * rows[0].key / edges[1];
    edges[n] = rows[n - 1].key * rows[n - 1].key / edges[n - 1];
  } else {
    edges.push_back(rows[0].key);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i + 1 < rows.size()) {
        if (!close_edges(rows[i].high, rows[i + 1].key))
          throw ParseError("bins are not contiguous: bin_high " +
                             text::format_double(rows[i].high) + " vs next bin_low " +
                             text::format_double(rows[i + 1].key),
                           rows[i].line);
        edges.push_back(rows[i + 1].key);
      } else {
        edges.push_back(rows[i].high);
      }
    }
  }

  try {
    return IncomeHistogram(std::move(edges), std::move(mass), label, currency);
  } catch (const PreconditionError& e) {
    throw ParseError(e.what(), 0);
  }
}

IncomeHistogram load_histogram(const std::string& text)
{
  std::istringstream in(text);
  return load_histogram(in);
}

void write_histogram(std::ostream& out, const IncomeHistogram& h)
{
  out << render_histogram(h);
}

std::string render_histogram(const IncomeHistogram& h)
{
  std::string out;
  if (!h.label().empty())
    out += "# label: " + h.label() + "\n";
  if (!h.currency_note().empty())
    out += "# currency: " + h.currency_note() + "\n";
  out += "bin_low,bin_high,mass\n";
  const auto& e = h.bin_edges();
  const auto& m = h.mass();
  for (std::size_t i = 0; i < m.size(); ++i)
    out += text::format_double(e[i]) + "," + text::format_double(e[i + 1]) + "," +
           text::format_double(m[i]) + "\n";
  return out;
}

EmpiricalCurve to_pdf_curve(const IncomeHistogram& h, bool normalize, DensityScale scale)
{
  const auto mass = scaled(h.mass(), normalize);
  const auto& e = h.bin_edges();
  EmpiricalCurve c;
  c.kind = CurveKind::Pdf;
  c.scale = scale;
  c.x.reserve(mass.size());
  c.y.reserve(mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const double lo = e[i];
    const double hi = e[i + 1];
    c.x.push_back(std::sqrt(lo * hi));
    const double width = scale == DensityScale::PerUsd ? hi - lo : std::log(hi / lo);
    c.y.push_back(mass[i] / width);
  }
  return c;
}

EmpiricalCurve to_ccdf_curve(const IncomeHistogram& h, bool normalize)
{
  const auto& mass = h.mass();
  const auto& e = h.bin_edges();
  EmpiricalCurve c;
  c.kind = CurveKind::Ccdf;
  c.x.assign(e.begin(), e.end() - 1);
  c.y.resize(mass.size());
  double tail = 0.0;
  for (std::size_t i = mass.size(); i-- > 0;) {
    tail += mass[i];
    c.y[i] = tail;
  }
  // Dividing by y[0] keeps the ordinates monotone and makes y[0] exactly 1.
  if (normalize) {
    const double total = c.y[0];
    for (double& v : c.y)
      v /= total;
  }
  return c;
}

IncomeHistogram subtract(const IncomeHistogram& world,
                         std::span<const IncomeHistogram> parts,
                         bool renormalize)
{
  const auto& edges = world.bin_edges();
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& pe = parts[p].bin_edges();
    if (pe.size() != edges.size())
      throw AlignmentError("part " + std::to_string(p) + " has " +
                           std::to_string(pe.size()) + " edges, world has " +
                           std::to_string(edges.size()));
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (pe[i] != edges[i])
        throw AlignmentError("part " + std::to_string(p) + " edge " + std::to_string(i) +
                             " is " + text::format_double(pe[i]) + ", world has " +
                             text::format_double(edges[i]));
  }

  std::vector<double> residual = world.mass();
  for (const auto& part : parts)
    for (std::size_t i = 0; i < residual.size(); ++i)
      residual[i] -= part.mass()[i];

  for (std::size_t i = 0; i < residual.size(); ++i) {
    if (residual[i] < -kClampTolerance)
      throw ConsistencyError("parts exceed the world mass in bin " + std::to_string(i) + " [" +
                               text::format_double(edges[i]) + ", " +
                               text::format_double(edges[i + 1]) + ") by " +
                               text::format_double(-residual[i]),
                             i);
    if (residual[i] < 0.0)
      residual[i] = 0.0;
  }

  const double total = std::accumulate(residual.begin(), residual.end(), 0.0);
  if (!(total > 0.0))
    throw PreconditionError("zero total mass");
  if (renormalize)
    for (double& m : residual)
      m /= total;
  return IncomeHistogram(edges, std::move(residual), world.label(), world.currency_note());
}

IncomeHistogram rebin(const IncomeHistogram& h, std::span<const double> new_edges)
{
  const auto& e = h.bin_edges();
  if (new_edges.size() < 3)
    throw DomainError("rebin: need at least 3 new edges");
  for (std::size_t i = 1; i < new_edges.size(); ++i)
    if (!(new_edges[i] > new_edges[i - 1]))
      throw DomainError("rebin: new edges must be strictly increasing");
  const double lo = e.front();
  const double hi = e.back();
  if (new_edges.front() < lo && !close_edges(new_edges.front(), lo))
    throw DomainError("rebin: new span starts at " + text::format_double(new_edges.front()) +
                      ", below source edge " + text::format_double(lo));
  if (new_edges.back() > hi && !close_edges(new_edges.back(), hi))
    throw DomainError("rebin: new span ends at " + text::format_double(new_edges.back()) +
                      ", above source edge " + text::format_double(hi));

  // Cumulative mass below each source edge, then log-linear interpolation.
  const auto& m = h.mass();
  std::vector<double> cum(e.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    cum[i + 1] = cum[i] + m[i];

  auto cumulative = [&](double x) {
    if (x <= lo)
      return 0.0;
    if (x >= hi)
      return cum.back();
    const auto it = std::upper_bound(e.begin(), e.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - e.begin()) - 1;
    if (x == e[j])
      return cum[j];
    const double frac = std::log(x / e[j]) / std::log(e[j + 1] / e[j]);
    return cum[j] + frac * m[j];
  };

  std::vector<double> mass(new_edges.size() - 1);
  double prev = cumulative(new_edges[0]);
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const double next = cumulative(new_edges[i + 1]);
    mass[i] = std::max(0.0, next - prev);
    prev = next;
  }
  return IncomeHistogram(std::vector<double>(new_edges.begin(), new_edges.end()),
                         std::move(mass), h.label(), h.currency_note());
}

std::string render_curve(std::span<const double> x, std::span<const double> y)
{
  std::string out = "x,y\n";
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    out += text::format_double(x[i]) + "," + text::format_double(y[i]) + "\n";
  return out;
}

} // namespace incomefit
