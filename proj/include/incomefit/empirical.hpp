#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace incomefit {

/// Binned population shares over contiguous income bins (PPP USD).
///
/// Invariants, checked on construction (PreconditionError otherwise):
/// edges strictly increasing and positive, B >= 2 bins, masses >= 0 with a
/// positive total.
class IncomeHistogram
{
public:
  IncomeHistogram(std::vector<double> bin_edges,
                  std::vector<double> mass,
                  std::string label = {},
                  std::string currency_note = {});

  const std::vector<double>& bin_edges() const { return edges_; }
  const std::vector<double>& mass() const { return mass_; }
  const std::string& label() const { return label_; }
  const std::string& currency_note() const { return currency_; }
  std::size_t bins() const { return mass_.size(); }
  double total_mass() const;

  void set_label(std::string label) { label_ = std::move(label); }

  bool operator==(const IncomeHistogram&) const = default;

private:
  std::vector<double> edges_;
  std::vector<double> mass_;
  std::string label_;
  std::string currency_;
};

enum class CurveKind
{
  Pdf,
  Ccdf,
};

/// Units of PDF ordinates. Fitting a PerLogIncome curve compares against x·pdf(x).
enum class DensityScale
{
  PerUsd,
  PerLogIncome,
};

struct EmpiricalCurve
{
  CurveKind kind = CurveKind::Pdf;
  DensityScale scale = DensityScale::PerUsd;
  std::vector<double> x;
  std::vector<double> y;
};

/// Reads the tabular histogram format.
///
/// A header row is required. Columns are either `bin_low, bin_high, mass` or
/// `bin_mid, mass` (edges then rebuilt at geometric means of neighbouring
/// midpoints). The delimiter is a comma, a tab, or runs of whitespace,
/// detected from the header. Lines starting with '#' are comments, except
/// `# label: ...` and `# currency: ...`, which set the metadata. Rows may
/// come in any order. Throws ParseError carrying the source line.
IncomeHistogram load_histogram(std::istream& in);
IncomeHistogram load_histogram(const std::string& text);

/// Writes metadata comments, then `bin_low,bin_high,mass` rows with
/// round-trip exact numbers.
void write_histogram(std::ostream& out, const IncomeHistogram& h);
std::string render_histogram(const IncomeHistogram& h);

/// Density points at geometric bin midpoints, mass/width per USD (or
/// mass/ln(hi/lo) with PerLogIncome). `normalize` rescales masses to sum 1.
EmpiricalCurve to_pdf_curve(const IncomeHistogram& h,
                            bool normalize,
                            DensityScale scale = DensityScale::PerUsd);

/// Right-tail sums evaluated at the bin lower edges, so y[0] is the total mass.
EmpiricalCurve to_ccdf_curve(const IncomeHistogram& h, bool normalize);

/// Bin-wise world - Σ parts. Residuals within 1e-12 below zero are clamped.
/// Throws AlignmentError when edges differ, ConsistencyError when a bin goes
/// more negative than that, and PreconditionError ("zero total mass") when
/// nothing is left.
IncomeHistogram subtract(const IncomeHistogram& world,
                         std::span<const IncomeHistogram> parts,
                         bool renormalize);

/// Reapportions mass onto `new_edges`, assuming density uniform in ln(income)
/// inside each source bin. The new span must lie inside the source span.
IncomeHistogram rebin(const IncomeHistogram& h, std::span<const double> new_edges);

/// Two-column `x,y` rendering shared by empirical curves and model plot data.
std::string render_curve(std::span<const double> x, std::span<const double> y);

} // namespace incomefit
