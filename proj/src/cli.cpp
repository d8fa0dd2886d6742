#include "incomefit/cli.hpp"

#include "incomefit/empirical.hpp"
#include "incomefit/errors.hpp"
#include "incomefit/fitter.hpp"
#include "incomefit/report.hpp"
#include "incomefit/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>

namespace incomefit::cli {

namespace {

struct Manifest
{
  std::string command;
  std::vector<std::string> inputs;
  std::string config;
};

std::string utc_timestamp()
{
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string render_manifest(const Manifest& m)
{
  std::string inputs;
  for (const auto& in : m.inputs)
    inputs += (inputs.empty() ? "" : " ") + in;
  std::string out;
  out += "# command: " + m.command + "\n";
  out += "# inputs: " + inputs + "\n";
  out += "# config: " + m.config + "\n";
  out += "# tool_version: " + std::string(kToolVersion) + "\n";
  out += "# timestamp: " + utc_timestamp() + "\n";
  return out;
}

std::string one_line(const text::KeyValueDocument& doc)
{
  std::string s;
  for (const auto& [k, v] : doc.entries())
    s += (s.empty() ? "" : "; ") + k + "=" + v;
  return s;
}

IncomeHistogram load_path(const std::string& path)
{
  try {
    return load_histogram(text::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

// Curve x-grid merged with a 10x denser log-spaced grid over the same span.
std::vector<double> plot_grid(const std::vector<double>& xs)
{
  std::vector<double> grid(xs.begin(), xs.end());
  const double lo = std::max(xs.front(), 1e-300);
  const double hi = xs.back();
  const std::size_t n = 10 * xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    grid.push_back(lo * std::pow(hi / lo, t));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

struct FitOptions
{
  std::optional<std::string> target;
  bool normalize = false;
  bool log_density = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config_path;
  std::optional<std::size_t> max_iterations;
  std::optional<std::size_t> multistart;
  std::optional<std::string> weighting;
  std::optional<std::string> init;
  std::optional<std::string> init_model;
};

void add_fit_options(CLI::App* cmd, FitOptions& o)
{
  cmd->add_option("--target", o.target, "Curve to fit")->check(CLI::IsMember({"pdf", "ccdf"}));
  cmd->add_flag("--normalize", o.normalize, "Rescale masses to sum to 1");
  cmd->add_flag("--log-density", o.log_density, "PDF ordinates per unit ln(income)");
  cmd->add_option("--seed", o.seed, "Multistart seed");
  cmd->add_option("--config", o.config_path, "Key-value config file; flags win");
  cmd->add_option("--max-iterations", o.max_iterations);
  cmd->add_option("--multistart", o.multistart, "Number of LM starts");
  cmd->add_option("--weighting", o.weighting)->check(CLI::IsMember({"uniform", "relative"}));
  cmd->add_option("--init", o.init, "moments or valley-split")
    ->check(CLI::IsMember({"moments", "valley-split"}));
  cmd->add_option("--init-model", o.init_model, "Model document used as the explicit start");
}

FitConfig build_config(const FitOptions& o)
{
  FitConfig cfg;
  if (o.config_path)
    cfg = report::apply_config(text::KeyValueDocument::parse(text::read_file(*o.config_path)),
                               cfg);
  if (o.target)
    cfg.target = report::parse_target(*o.target);
  if (o.seed)
    cfg.seed = *o.seed;
  if (o.max_iterations)
    cfg.max_iterations = *o.max_iterations;
  if (o.multistart)
    cfg.multistart_count = *o.multistart;
  if (o.weighting)
    cfg.weighting = parse_weighting(*o.weighting);
  if (o.init)
    cfg.init_strategy = parse_init_strategy(*o.init);
  if (o.init_model) {
    cfg.init_strategy = InitStrategy::Explicit;
    cfg.init_model =
      report::model_from_document(text::KeyValueDocument::parse(text::read_file(*o.init_model)));
  }
  cfg.validate();
  return cfg;
}

EmpiricalCurve make_curve(const IncomeHistogram& h, CurveKind target, const FitOptions& o)
{
  if (target == CurveKind::Ccdf)
    return to_ccdf_curve(h, o.normalize);
  return to_pdf_curve(h, o.normalize,
                      o.log_density ? DensityScale::PerLogIncome : DensityScale::PerUsd);
}

std::string config_line(const FitConfig& cfg, const FitOptions& o)
{
  auto doc = report::config_document(cfg);
  doc.set("normalize", o.normalize ? "true" : "false");
  doc.set("density", o.log_density ? "per_log_income" : "per_usd");
  return one_line(doc);
}

int cmd_fit(const std::string& input,
            const std::string& family_name_arg,
            const FitOptions& o,
            const std::string& out_path,
            std::ostream& out,
            std::ostream& err)
{
  const Family family = parse_family(family_name_arg);
  const FitConfig cfg = build_config(o);
  const IncomeHistogram h = load_path(input);
  const auto curve = make_curve(h, cfg.target, o);
  const FitResult result = fit_family(curve, family, cfg);

  const Manifest manifest{"fit --family " + family_name_arg, {input}, config_line(cfg, o)};
  std::string doc = render_manifest(manifest);
  doc += report::result_document(result, cfg.target).render();
  text::write_file_atomic(out_path, doc);

  const auto grid = plot_grid(curve.x);
  std::vector<double> model_y;
  for (double x : grid)
    model_y.push_back(model_ordinate(result.model, curve, x));
  text::write_file_atomic(out_path + ".plot.csv",
                          render_manifest(manifest) + render_curve(grid, model_y));
  text::write_file_atomic(out_path + ".curve.csv",
                          render_manifest(manifest) + render_curve(curve.x, curve.y));

  out << family_name(family) << " " << report::target_name(cfg.target)
      << " R^2 = " << text::format_double(result.r_squared) << " ("
      << (result.converged ? "converged" : "not converged") << ", " << result.iterations
      << " iterations)\n";
  if (!result.converged) {
    err << "warning: fit did not converge within " << cfg.max_iterations << " iterations\n";
    return kNotConverged;
  }
  return kSuccess;
}

std::optional<std::vector<std::string>> split_list(const std::string& s)
{
  std::vector<std::string> items;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    const auto item = text::trim(s.substr(start, comma == std::string::npos ? comma : comma - start));
    if (item.empty())
      return std::nullopt;
    items.emplace_back(item);
    if (comma == std::string::npos)
      return items;
    start = comma + 1;
  }
}

int cmd_table(const std::vector<std::string>& inputs,
              const std::optional<std::string>& families,
              const std::optional<std::string>& targets,
              const FitOptions& o,
              const std::optional<std::string>& out_path,
              std::ostream& out,
              std::ostream& err)
{
  std::vector<std::string> fam{"gamma", "bigamma", "lognormal", "bilognormal"};
  std::vector<std::string> tgt{"pdf"};
  for (auto [arg, list, name] : {std::tuple{&families, &fam, "--families"},
                                 std::tuple{&targets, &tgt, "--targets"}}) {
    if (!*arg)
      continue;
    const auto items = split_list(**arg);
    if (!items) {
      err << "usage error: " << name << " needs a non-empty comma-separated list\n";
      return kUsage;
    }
    *list = *items;
  }
  for (const auto& f : fam)
    if (f != "gamma" && f != "bigamma" && f != "lognormal" && f != "bilognormal") {
      err << "usage error: unknown family " << f << "\n";
      return kUsage;
    }
  for (const auto& t : tgt)
    if (t != "pdf" && t != "ccdf") {
      err << "usage error: unknown target " << t << "\n";
      return kUsage;
    }

  std::vector<report::TableColumn> columns;
  if (!families && !targets) {
    columns = report::default_table_columns();
  } else {
    for (const auto& f : fam)
      for (const auto& t : tgt)
        columns.push_back({parse_family(f), report::parse_target(t)});
  }

  const FitConfig base = build_config(o);
  std::vector<IncomeHistogram> hists;
  for (const auto& path : inputs)
    hists.push_back(load_path(path));

  std::vector<report::TableRow> rows(hists.size());
  std::vector<std::vector<std::future<FitResult>>> cells(hists.size());
  for (std::size_t i = 0; i < hists.size(); ++i) {
    rows[i].label = hists[i].label().empty() ? inputs[i] : hists[i].label();
    for (const auto& col : columns) {
      FitConfig cfg = base;
      cfg.target = col.target;
      cells[i].push_back(std::async(std::launch::async, [&h = hists[i], cfg, col, &o] {
        const auto curve = make_curve(h, col.target, o);
        return fit_family(curve, col.family, cfg);
      }));
    }
  }

  int code = kSuccess;
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (std::size_t j = 0; j < cells[i].size(); ++j) {
      try {
        const FitResult r = cells[i][j].get();
        rows[i].r_squared.push_back(r.r_squared);
        if (!r.converged && code == kSuccess)
          code = kNotConverged;
      } catch (const FitFailure& e) {
        err << "error: " << rows[i].label << " / " << report::column_heading(columns[j]) << ": "
            << e.what() << "\n";
        rows[i].r_squared.push_back(std::nullopt);
        code = kFitFailure;
      } catch (const PreconditionError& e) {
        err << "error: " << inputs[i] << ": " << e.what() << "\n";
        return kInputError;
      }
    }

  const std::string text_table = report::render_table_text(columns, rows);
  const std::string csv_table = report::render_table_csv(columns, rows);
  if (out_path) {
    const Manifest manifest{"table", inputs, config_line(base, o)};
    text::write_file_atomic(*out_path, render_manifest(manifest) + text_table);
    text::write_file_atomic(*out_path + ".csv", render_manifest(manifest) + csv_table);
  } else {
    out << text_table << "\n" << csv_table;
  }
  if (out_path)
    out << text_table;
  return code;
}

int cmd_subtract(const std::string& world_path,
                 const std::vector<std::string>& part_paths,
                 bool renormalize,
                 bool allow_rebin,
                 const std::string& out_path,
                 std::ostream& out)
{
  const IncomeHistogram world = load_path(world_path);
  std::vector<IncomeHistogram> parts;
  for (const auto& p : part_paths) {
    IncomeHistogram part = load_path(p);
    if (allow_rebin && part.bin_edges() != world.bin_edges()) {
      try {
        part = rebin(part, world.bin_edges());
      } catch (const DomainError& e) {
        throw AlignmentError(p + ": cannot rebin onto the world edges: " + e.what());
      }
    }
    parts.push_back(std::move(part));
  }
  IncomeHistogram residual = [&] {
    try {
      return subtract(world, parts, renormalize);
    } catch (const AlignmentError& e) {
      throw AlignmentError(std::string(e.what()) + " (use --rebin to reapportion)");
    }
  }();
  for (std::size_t i = 0; i < parts.size(); ++i)
    out << "removed mass " << text::format_double(parts[i].total_mass()) << " ("
        << (parts[i].label().empty() ? part_paths[i] : parts[i].label()) << ")\n";

  std::vector<std::string> inputs{world_path};
  inputs.insert(inputs.end(), part_paths.begin(), part_paths.end());
  const Manifest manifest{"subtract", inputs,
                          std::string("renormalize=") + (renormalize ? "true" : "false") +
                            "; rebin=" + (allow_rebin ? "true" : "false")};
  text::write_file_atomic(out_path, render_manifest(manifest) + render_histogram(residual));
  return kSuccess;
}

int cmd_ccdf(const std::string& input,
             bool normalize,
             const std::optional<std::string>& out_path,
             std::ostream& out,
             std::ostream& err)
{
  const IncomeHistogram h = load_path(input);
  const auto curve = to_ccdf_curve(h, normalize);
  for (std::size_t i = 1; i < curve.y.size(); ++i)
    if (curve.y[i] > curve.y[i - 1]) {
      err << "error: CCDF is not nonincreasing at x=" << text::format_double(curve.x[i]) << "\n";
      return kFitFailure;
    }
  const Manifest manifest{"ccdf", {input},
                          std::string("normalize=") + (normalize ? "true" : "false")};
  const std::string body = render_manifest(manifest) + render_curve(curve.x, curve.y);
  if (out_path)
    text::write_file_atomic(*out_path, body);
  else
    out << body;
  return kSuccess;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Fit gamma, log-normal and bimodal mixtures to binned income distributions"};
  app.name("incomefit");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a family to one histogram");
  std::string fit_input, fit_family_arg, fit_out;
  FitOptions fit_opts;
  fit_cmd->add_option("input", fit_input, "Histogram file")->required();
  fit_cmd->add_option("--family", fit_family_arg)
    ->required()
    ->check(CLI::IsMember({"gamma", "lognormal", "bigamma", "bilognormal"}));
  fit_cmd->add_option("--out", fit_out, "Result document; plot data goes to OUT.plot.csv")
    ->required();
  add_fit_options(fit_cmd, fit_opts);

  // table
  auto* table_cmd = app.add_subcommand("table", "R² grid, one row per histogram");
  std::vector<std::string> table_inputs;
  std::optional<std::string> table_families, table_targets;
  std::optional<std::string> table_out;
  FitOptions table_opts;
  table_cmd->add_option("inputs", table_inputs, "Histogram files")->required();
  table_cmd->add_option("--families", table_families, "Comma-separated families");
  table_cmd->add_option("--targets", table_targets, "Comma-separated targets (pdf, ccdf)");
  table_cmd->add_option("--out", table_out, "Aligned table; CSV goes to OUT.csv");
  table_cmd->add_flag("--normalize", table_opts.normalize);
  table_cmd->add_flag("--log-density", table_opts.log_density);
  table_cmd->add_option("--seed", table_opts.seed);
  table_cmd->add_option("--config", table_opts.config_path);
  table_cmd->add_option("--multistart", table_opts.multistart);
  table_cmd->add_option("--weighting", table_opts.weighting)
    ->check(CLI::IsMember({"uniform", "relative"}));

  // subtract
  auto* sub_cmd = app.add_subcommand("subtract", "Remove sub-populations from a total");
  std::string sub_world, sub_out;
  std::vector<std::string> sub_parts;
  bool sub_renorm = false, sub_rebin = false;
  sub_cmd->add_option("world", sub_world, "Total histogram")->required();
  sub_cmd->add_option("--part", sub_parts, "Histogram to subtract (repeatable)");
  sub_cmd->add_flag("--renormalize,--normalize", sub_renorm, "Rescale the residual to sum 1");
  sub_cmd->add_flag("--rebin", sub_rebin, "Reapportion parts onto the world's bins");
  sub_cmd->add_option("--out", sub_out)->required();

  // ccdf
  auto* ccdf_cmd = app.add_subcommand("ccdf", "Empirical CCDF at the bin lower edges");
  std::string ccdf_input;
  std::optional<std::string> ccdf_out;
  bool ccdf_norm = false;
  ccdf_cmd->add_option("input", ccdf_input)->required();
  ccdf_cmd->add_flag("--normalize", ccdf_norm);
  ccdf_cmd->add_option("--out", ccdf_out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    for (auto* sub : app.get_subcommands())
      err << sub->help();
    return kUsage;
  }

  try {
    if (*fit_cmd)
      return cmd_fit(fit_input, fit_family_arg, fit_opts, fit_out, out, err);
    if (*table_cmd)
      return cmd_table(table_inputs, table_families, table_targets, table_opts, table_out, out,
                       err);
    if (*sub_cmd)
      return cmd_subtract(sub_world, sub_parts, sub_renorm, sub_rebin, sub_out, out);
    if (*ccdf_cmd)
      return cmd_ccdf(ccdf_input, ccdf_norm, ccdf_out, out, err);
  } catch (const FitFailure& e) {
    err << "fit failure: " << e.what() << "\n";
    return kFitFailure;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const AlignmentError& e) {
    err << "alignment error: " << e.what() << "\n";
    return kInputError;
  } catch (const ConsistencyError& e) {
    err << "consistency error: " << e.what() << "\n";
    return kInputError;
  } catch (const PreconditionError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFitFailure;
  }
  return kUsage;
}

} // namespace incomefit::cli
