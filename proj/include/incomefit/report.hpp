#pragma once

#include "incomefit/fitter.hpp"
#include "incomefit/models.hpp"
#include "incomefit/text.hpp"

#include <optional>
#include <string>
#include <vector>

namespace incomefit::report {

/// `family` followed by the named parameters (A1, mu1, sigma1, ...).
text::KeyValueDocument model_document(const ModelSpec& model);
/// Throws ParseError on unknown families, missing keys or invalid values.
ModelSpec model_from_document(const text::KeyValueDocument& doc);

/// Model keys plus mass1/mass2, r_squared, ss_res, ss_tot, iterations,
/// converged, termination, target and init_strategy.
text::KeyValueDocument result_document(const FitResult& result, CurveKind target);

text::KeyValueDocument config_document(const FitConfig& config);
/// Overlays the keys present in `doc` onto `base`. Unknown keys are a ParseError.
FitConfig apply_config(const text::KeyValueDocument& doc, FitConfig base);

std::string_view target_name(CurveKind kind);
CurveKind parse_target(std::string_view name);

struct TableColumn
{
  Family family;
  CurveKind target;
};

/// Heading as in the published layout, e.g. "bi-log-normal CCDF".
std::string column_heading(const TableColumn& column);

/// gamma, bi-gamma, bi-gamma CCDF, log-normal, bi-log-normal, bi-log-normal CCDF.
std::vector<TableColumn> default_table_columns();

struct TableRow
{
  std::string label;
  std::vector<std::optional<double>> r_squared; // nullopt when the cell's fit failed
};

/// Fixed-width text, 5 decimals per cell.
std::string render_table_text(const std::vector<TableColumn>& columns,
                              const std::vector<TableRow>& rows);
/// Comma-separated, round-trip exact values.
std::string render_table_csv(const std::vector<TableColumn>& columns,
                             const std::vector<TableRow>& rows);

} // namespace incomefit::report
