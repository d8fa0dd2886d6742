#include "incomefit/report.hpp"

#include "incomefit/errors.hpp"

#include <algorithm>
#include <cstdio>

namespace incomefit::report {

namespace {

std::size_t parse_count(const std::string& key, const std::string& raw)
{
  auto v = text::parse_double(raw);
  if (!v || *v < 0.0 || *v != static_cast<double>(static_cast<std::size_t>(*v)))
    throw ParseError("config key '" + key + "': expected a non-negative integer, got '" + raw +
                       "'",
                     0);
  return static_cast<std::size_t>(*v);
}

std::string display_name(Family family)
{
  switch (family) {
    case Family::Gamma: return "gamma";
    case Family::LogNormal: return "log-normal";
    case Family::BiGamma: return "bi-gamma";
    case Family::BiLogNormal: return "bi-log-normal";
  }
  return "?";
}

} // namespace

std::string_view target_name(CurveKind kind)
{
  return kind == CurveKind::Pdf ? "pdf" : "ccdf";
}

CurveKind parse_target(std::string_view name)
{
  if (name == "pdf")
    return CurveKind::Pdf;
  if (name == "ccdf")
    return CurveKind::Ccdf;
  throw PreconditionError("unknown target '" + std::string(name) + "' (expected pdf or ccdf)");
}

text::KeyValueDocument model_document(const ModelSpec& model)
{
  text::KeyValueDocument doc;
  doc.set("family", std::string(family_name(model.family())));
  const auto names = param_names(model.family());
  const auto values = param_pack(model);
  for (std::size_t i = 0; i < names.size(); ++i)
    doc.set(names[i], values[i]);
  return doc;
}

ModelSpec model_from_document(const text::KeyValueDocument& doc)
{
  try {
    const Family family = parse_family(doc.get("family"));
    std::vector<double> values;
    for (const auto& name : param_names(family))
      values.push_back(doc.get_double(name));
    return param_unpack(family, values);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), 0);
  }
}

text::KeyValueDocument result_document(const FitResult& result, CurveKind target)
{
  auto doc = model_document(result.model);
  const auto values = param_pack(result.model);
  doc.set("mass1", values[0]);
  if (values.size() == 6)
    doc.set("mass2", values[3]);
  doc.set("mass_total", total_amplitude(result.model));
  doc.set("target", std::string(target_name(target)));
  doc.set("r_squared", result.r_squared);
  doc.set("ss_res", result.ss_res);
  doc.set("ss_tot", result.ss_tot);
  doc.set("iterations", std::to_string(result.iterations));
  doc.set("converged", result.converged ? "true" : "false");
  doc.set("termination", std::string(to_string(result.termination)));
  doc.set("init_strategy", std::string(to_string(result.init_strategy)));
  return doc;
}

text::KeyValueDocument config_document(const FitConfig& c)
{
  text::KeyValueDocument doc;
  doc.set("target", std::string(target_name(c.target)));
  doc.set("max_iterations", std::to_string(c.max_iterations));
  doc.set("step_tol", c.step_tol);
  doc.set("residual_tol", c.residual_tol);
  doc.set("damping_init", c.damping_init);
  doc.set("damping_up", c.damping_up);
  doc.set("damping_down", c.damping_down);
  doc.set("weighting", std::string(to_string(c.weighting)));
  doc.set("init_strategy", std::string(to_string(c.init_strategy)));
  doc.set("finite_diff_rel_step", c.finite_diff_rel_step);
  doc.set("multistart_count", std::to_string(c.multistart_count));
  doc.set("seed", std::to_string(c.seed));
  return doc;
}

FitConfig apply_config(const text::KeyValueDocument& doc, FitConfig c)
{
  for (const auto& [key, value] : doc.entries()) {
    auto number = [&] {
      auto v = text::parse_double(value);
      if (!v)
        throw ParseError("config key '" + key + "': not a number: '" + value + "'", 0);
      return *v;
    };
    try {
      if (key == "target")
        c.target = parse_target(value);
      else if (key == "max_iterations")
        c.max_iterations = parse_count(key, value);
      else if (key == "step_tol")
        c.step_tol = number();
      else if (key == "residual_tol")
        c.residual_tol = number();
      else if (key == "damping_init")
        c.damping_init = number();
      else if (key == "damping_up")
        c.damping_up = number();
      else if (key == "damping_down")
        c.damping_down = number();
      else if (key == "weighting")
        c.weighting = parse_weighting(value);
      else if (key == "init_strategy")
        c.init_strategy = parse_init_strategy(value);
      else if (key == "finite_diff_rel_step")
        c.finite_diff_rel_step = number();
      else if (key == "multistart_count")
        c.multistart_count = parse_count(key, value);
      else if (key == "seed")
        c.seed = parse_count(key, value);
      else
        throw ParseError("unknown config key '" + key + "'", 0);
    } catch (const PreconditionError& e) {
      throw ParseError(e.what(), 0);
    }
  }
  return c;
}

std::string column_heading(const TableColumn& column)
{
  return display_name(column.family) + (column.target == CurveKind::Ccdf ? " CCDF" : "");
}

std::vector<TableColumn> default_table_columns()
{
  return {
    {Family::Gamma, CurveKind::Pdf},       {Family::BiGamma, CurveKind::Pdf},
    {Family::BiGamma, CurveKind::Ccdf},    {Family::LogNormal, CurveKind::Pdf},
    {Family::BiLogNormal, CurveKind::Pdf}, {Family::BiLogNormal, CurveKind::Ccdf},
  };
}

std::string render_table_text(const std::vector<TableColumn>& columns,
                              const std::vector<TableRow>& rows)
{
  std::size_t label_width = 4;
  for (const auto& r : rows)
    label_width = std::max(label_width, r.label.size());
  std::vector<std::size_t> widths;
  for (const auto& c : columns)
    widths.push_back(std::max<std::size_t>(column_heading(c).size(), 8));

  auto pad_left = [](const std::string& s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
  };

  std::string out = pad_left("year", label_width);
  for (std::size_t j = 0; j < columns.size(); ++j)
    out += "  " + pad_left(column_heading(columns[j]), widths[j]);
  out += "\n";
  for (const auto& r : rows) {
    out += pad_left(r.label, label_width);
    for (std::size_t j = 0; j < columns.size(); ++j) {
      std::string cell = "n/a";
      if (j < r.r_squared.size() && r.r_squared[j]) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.5f", *r.r_squared[j]);
        cell = buf;
      }
      out += "  " + pad_left(cell, widths[j]);
    }
    out += "\n";
  }
  return out;
}

std::string render_table_csv(const std::vector<TableColumn>& columns,
                             const std::vector<TableRow>& rows)
{
  std::string out = "year";
  for (const auto& c : columns)
    out += "," + column_heading(c);
  out += "\n";
  for (const auto& r : rows) {
    out += r.label;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out += ",";
      if (j < r.r_squared.size() && r.r_squared[j])
        out += text::format_double(*r.r_squared[j]);
      else
        out += "nan";
    }
    out += "\n";
  }
  return out;
}

} // namespace incomefit::report
