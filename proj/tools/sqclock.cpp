// Command-line front end: single-point evaluations, Ramsey-time
// optimization, 1-D/2-D stability maps, oracle validation, and batch
// processing of experimental squeezing tables.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqclock/bayes.hpp"
#include "sqclock/io.hpp"
#include "sqclock/stability.hpp"
#include "sqclock/sweep.hpp"
#include "sqclock/units.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";

// Exit codes: 0 success, 1 validation error, 2 tolerance failure, 3 I/O.
enum ExitCode { kOk = 0, kBadInput = 1, kToleranceFail = 2, kIoError = 3 };

struct GlobalOpts {
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  unsigned jobs = 0;
  bool canonical = false;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

std::string cell_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return sqclock::format_double(v.get<double>());
  if (v.is_null()) return "";
  return v.dump();
}

nlohmann::json provenance(const sqclock::ConfigMap& config, bool canonical) {
  nlohmann::json p;
  p["tool_version"] = kToolVersion;
  p["config_hash"] = sqclock::config_hash(sqclock::canonical_config(config));
  if (!canonical) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    p["timestamp"] = buf;
  }
  return p;
}

int write_output(const GlobalOpts& g, const sqclock::ConfigMap& config,
                 const Table& table) {
  std::ostringstream body;
  if (g.format == "csv") {
    sqclock::CsvWriter csv(body);
    csv.header(table.columns);
    for (const auto& row : table.rows) {
      std::vector<std::string> cells;
      cells.reserve(row.size());
      for (const auto& v : row) cells.push_back(cell_text(v));
      csv.line(cells);
    }
  } else {
    nlohmann::json rec;
    rec["inputs"] = config;
    rec["provenance"] = provenance(config, g.canonical);
    rec["columns"] = table.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
      nlohmann::json obj;
      for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = row[i];
      rows.push_back(std::move(obj));
    }
    rec["rows"] = std::move(rows);
    body << rec.dump(2) << '\n';
  }
  if (g.out_path.empty()) {
    std::cout << body.str();
    return kOk;
  }
  std::ofstream out(g.out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open output file " << g.out_path << '\n';
    return kIoError;
  }
  out << body.str();
  return out ? kOk : kIoError;
}

sqclock::EnsembleSpec spec_from_config(const sqclock::ConfigMap& c) {
  sqclock::EnsembleSpec spec;
  spec.atom_count = sqclock::get_quantity_or(c, "N", 1e4);
  spec.xi2 = sqclock::get_quantity_or(c, "xi2", 1.0);
  if (const auto a2 = sqclock::get_quantity(c, "area2"))
    spec.chi2 = *a2 / spec.xi2;
  else
    spec.chi2 = sqclock::get_quantity_or(c, "chi2", std::max(1.0, 1.0 / spec.xi2));
  spec.prep_contrast = sqclock::get_quantity_or(c, "C1", 1.0);
  spec.ramsey_contrast = sqclock::get_quantity_or(c, "C2", 1.0);
  const std::string orient = sqclock::get_string_or(c, "orientation", "measurement");
  if (orient == "measurement") {
    spec.orientation = sqclock::SqueezeOrientation::measurement_based;
  } else if (orient == "feedback") {
    spec.orientation = sqclock::SqueezeOrientation::feedback_based;
  } else if (orient == "custom") {
    spec.orientation = sqclock::SqueezeOrientation::custom;
    spec.theta = sqclock::get_quantity_or(c, "theta", 0.0);
  } else {
    throw std::invalid_argument("orientation must be measurement|feedback|custom");
  }
  return sqclock::validate_spec(spec);
}

std::vector<double> parse_list(const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(sqclock::parse_quantity(item));
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1.0);
  return v;
}

int cmd_phase_error(const GlobalOpts& g, const sqclock::ConfigMap& c) {
  const auto spec = spec_from_config(c);
  const double lo = sqclock::get_quantity_or(c, "phi_min_over_pi", -1.0);
  const double hi = sqclock::get_quantity_or(c, "phi_max_over_pi", 1.0);
  const int points = static_cast<int>(sqclock::get_quantity_or(c, "phi_points", 101));
  if (points < 1) throw std::invalid_argument("phi_points must be >= 1");
  const bool with_oracle = sqclock::get_quantity_or(c, "oracle", 0.0) != 0.0;

  const sqclock::PhaseErrorCurve curve(spec);
  const auto grid = linspace(lo, hi, points);

  std::vector<double> oracle_vals;
  if (with_oracle) {
    const int n = static_cast<int>(std::lround(spec.atom_count));
    if (n > 4000)
      throw std::invalid_argument("oracle requires N <= 4000");
    std::vector<double> phis(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) phis[i] = grid[i] * M_PI;
    auto state = sqclock::build_nonunitary_mixture(n, spec.xi2, spec.chi2);
    if (spec.contrast() < 1.0) {
      auto ens = sqclock::apply_contrast_model(state, spec.prep_contrast,
                                               spec.ramsey_contrast, spec.theta);
      oracle_vals = sqclock::oracle_phase_error_curve(ens, phis);
    } else {
      oracle_vals = sqclock::oracle_phase_error_curve(state, phis);
    }
  }

  Table t;
  t.columns = {"phi_over_pi", "dphi_sq_analytic"};
  if (with_oracle) t.columns.push_back("dphi_sq_oracle");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<nlohmann::json> row{grid[i], curve(grid[i] * M_PI)};
    if (with_oracle) row.push_back(oracle_vals[i]);
    t.rows.push_back(std::move(row));
  }
  return write_output(g, c, t);
}

int cmd_stability(const GlobalOpts& g, const sqclock::ConfigMap& c) {
  const auto spec = spec_from_config(c);
  const double gamma = sqclock::get_quantity_or(c, "gamma", 1.0);
  const double total_t = sqclock::get_quantity_or(c, "T", 1.0 / gamma);
  const double lo = sqclock::get_quantity_or(c, "gamma_tau_min", 1e-3);
  const double hi = sqclock::get_quantity_or(c, "gamma_tau_max", 3.0);
  const int points = static_cast<int>(sqclock::get_quantity_or(c, "points", 100));
  if (points < 1 || !(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("need 0 < gamma_tau_min < gamma_tau_max, points >= 1");

  const sqclock::PhaseErrorCurve curve(spec);
  Table t;
  t.columns = {"gamma_tau", "sigma2_phi"};
  for (int i = 0; i < points; ++i) {
    const double gt =
        points == 1 ? lo : lo * std::pow(hi / lo, i / (points - 1.0));
    const double v =
        sqclock::clock_phase_variance(curve, gamma, gt / gamma, total_t);
    t.rows.push_back({gt, v});
  }
  return write_output(g, c, t);
}

int cmd_optimize(const GlobalOpts& g, const sqclock::ConfigMap& c) {
  const auto spec = spec_from_config(c);
  const double gamma = sqclock::get_quantity_or(c, "gamma", 1.0);
  const double total_t = sqclock::get_quantity_or(c, "T", 1.0 / gamma);
  const auto result =
      sqclock::optimize_ramsey_time(sqclock::PhaseErrorCurve(spec), gamma, total_t);
  const auto baseline = sqclock::css_baseline(spec.atom_count, gamma, total_t);
  const double ratio_db = sqclock::compare_to_css(result, baseline);

  if (g.format == "csv") {
    Table t;
    t.columns = {"tau_opt", "gamma_tau_opt", "sigma2_phi", "sigma2_omega",
                 "alpha", "sql_ratio_db"};
    t.rows.push_back({result.ramsey_time, gamma * result.ramsey_time,
                      result.phase_variance, result.frequency_variance,
                      result.regime_alpha, ratio_db});
    return write_output(g, c, t);
  }
  nlohmann::json rec;
  rec["inputs"] = c;
  rec["provenance"] = provenance(c, g.canonical);
  rec["result"] = {{"tau_opt", result.ramsey_time},
                   {"gamma_tau_opt", gamma * result.ramsey_time},
                   {"sigma2_phi", result.phase_variance},
                   {"sigma2_omega", result.frequency_variance},
                   {"alpha", result.regime_alpha},
                   {"sql_ratio_db", ratio_db},
                   {"flat_objective", result.flat_objective}};
  GlobalOpts gj = g;
  std::ostringstream body;
  body << rec.dump(2) << '\n';
  if (gj.out_path.empty()) {
    std::cout << body.str();
    return kOk;
  }
  std::ofstream out(gj.out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open output file " << gj.out_path << '\n';
    return kIoError;
  }
  out << body.str();
  return out ? kOk : kIoError;
}

sqclock::AxisSpec axis_from_config(const sqclock::ConfigMap& c,
                                   const std::string& prefix) {
  sqclock::AxisSpec ax;
  const std::string field = sqclock::get_string_or(c, prefix + ".field", "");
  if (field == "N" || field == "atom_count") ax.field = sqclock::AxisField::atom_count;
  else if (field == "xi2") ax.field = sqclock::AxisField::xi2;
  else if (field == "chi2") ax.field = sqclock::AxisField::chi2;
  else if (field == "area2") ax.field = sqclock::AxisField::area2;
  else if (field == "C1") ax.field = sqclock::AxisField::prep_contrast;
  else if (field == "C2") ax.field = sqclock::AxisField::ramsey_contrast;
  else throw std::invalid_argument(prefix + ".field must be one of N|xi2|chi2|area2|C1|C2");
  const std::string scale = sqclock::get_string_or(c, prefix + ".scale", "linear");
  if (scale == "linear") ax.scale = sqclock::AxisScale::linear;
  else if (scale == "dB" || scale == "db") ax.scale = sqclock::AxisScale::decibel;
  else if (scale == "log") ax.scale = sqclock::AxisScale::log10;
  else throw std::invalid_argument(prefix + ".scale must be linear|dB|log");
  const auto lo = sqclock::get_quantity(c, prefix + ".min");
  const auto hi = sqclock::get_quantity(c, prefix + ".max");
  const int points =
      static_cast<int>(sqclock::get_quantity_or(c, prefix + ".points", 0));
  if (!lo || !hi || points < 1)
    throw std::invalid_argument(prefix + " needs min, max, points");
  ax.samples = linspace(*lo, *hi, points);
  return ax;
}

int cmd_map(const GlobalOpts& g, const sqclock::ConfigMap& c) {
  const auto spec = spec_from_config(c);
  const double gamma = sqclock::get_quantity_or(c, "gamma", 1.0);
  const double total_t = sqclock::get_quantity_or(c, "T", 1.0 / gamma);
  std::vector<sqclock::AxisSpec> axes;
  axes.push_back(axis_from_config(c, "axis1"));
  if (c.count("axis2.field")) axes.push_back(axis_from_config(c, "axis2"));
  const auto grid = sqclock::stability_map(spec, axes, gamma, total_t, g.jobs);

  Table t;
  t.columns = {"axis1", "axis2", "sigma2_phi", "sql_ratio_db",
               "tau_opt", "alpha", "error"};
  for (const auto& cell : grid.cells) {
    std::vector<nlohmann::json> row;
    row.push_back(cell.axis_values.at(0));
    row.push_back(cell.axis_values.size() > 1
                      ? nlohmann::json(cell.axis_values[1])
                      : nlohmann::json());
    if (cell.ok) {
      row.push_back(cell.result.phase_variance);
      row.push_back(cell.result.sql_ratio_db);
      row.push_back(cell.result.ramsey_time);
      row.push_back(cell.result.regime_alpha);
      row.push_back("");
    } else {
      for (int i = 0; i < 4; ++i) row.push_back(nlohmann::json());
      row.push_back(cell.error);
    }
    t.rows.push_back(std::move(row));
  }
  return write_output(g, c, t);
}

int cmd_validate(const GlobalOpts& g, const sqclock::ConfigMap& c) {
  const int n = static_cast<int>(sqclock::get_quantity_or(c, "N", 1000));
  if (n > 4000) throw std::invalid_argument("oracle requires N <= 4000");
  std::vector<double> xi2_db =
      parse_list(sqclock::get_string_or(c, "xi2_list_db", "0,-10,-20"));
  const double phi_max =
      sqclock::get_quantity_or(c, "phi_max_over_pi", 0.2) * M_PI;
  const int points = static_cast<int>(sqclock::get_quantity_or(c, "points", 9));
  const double tol = sqclock::get_quantity_or(c, "tolerance", 0.10);

  Table t;
  t.columns = {"xi2_db", "phi_over_pi", "dphi_sq_analytic", "dphi_sq_oracle",
               "rel_dev", "pass"};
  double worst_dev = 0.0;
  double worst_xi = 0.0, worst_phi = 0.0;
  bool all_pass = true;
  const auto phis = linspace(0.0, phi_max, points);
  for (double xdb : xi2_db) {
    const double xi2 = sqclock::db_to_linear(xdb);
    sqclock::EnsembleSpec spec;
    spec.atom_count = n;
    spec.xi2 = xi2;
    spec.chi2 = 1.0 / xi2;
    spec = sqclock::validate_spec(spec);
    const sqclock::PhaseErrorCurve curve(spec);
    const auto state = xi2 == 1.0
                           ? sqclock::build_css(n)
                           : sqclock::build_nonunitary_mixture(n, xi2, spec.chi2);
    const auto oracle = sqclock::oracle_phase_error_curve(state, phis);
    for (int i = 0; i < points; ++i) {
      const double ana = curve(phis[i]);
      const double dev = std::abs(ana - oracle[i]) / oracle[i];
      const bool pass = dev <= tol;
      all_pass = all_pass && pass;
      if (dev > worst_dev) {
        worst_dev = dev;
        worst_xi = xdb;
        worst_phi = phis[i];
      }
      t.rows.push_back({xdb, phis[i] / M_PI, ana, oracle[i], dev,
                        pass ? "pass" : "fail"});
    }
  }
  const int rc = write_output(g, c, t);
  if (rc != kOk) return rc;
  if (!all_pass) {
    std::cerr << "tolerance breach: worst rel dev " << worst_dev << " at xi2="
              << worst_xi << " dB, phi=" << worst_phi << " rad\n";
    return kToleranceFail;
  }
  return kOk;
}

int cmd_experiments(const GlobalOpts& g, const sqclock::ConfigMap& c,
                    const std::string& table_path) {
  std::string path = table_path.empty()
                         ? sqclock::get_string_or(c, "table", "")
                         : table_path;
  if (path.empty()) throw std::invalid_argument("experiments needs --table or table=");
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open table " << path << '\n';
    return kIoError;
  }
  const double gamma = sqclock::get_quantity_or(c, "gamma", 1.0);
  const double total_t = sqclock::get_quantity_or(c, "T", 1.0 / gamma);

  Table t;
  t.columns = {"label", "N", "xi2_db", "area2_db", "alpha", "gamma_tau_opt",
               "gain_db"};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (sqclock::detail::trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string label, ns, xs, as;
    if (!(std::getline(ss, label, ',') && std::getline(ss, ns, ',') &&
          std::getline(ss, xs, ',') && std::getline(ss, as, ','))) {
      std::cerr << "warning: skipping malformed row " << lineno << '\n';
      continue;
    }
    try {
      sqclock::EnsembleSpec spec;
      spec.atom_count = sqclock::parse_quantity(ns);
      spec.xi2 = sqclock::db_to_linear(sqclock::parse_quantity(xs));
      spec.chi2 = sqclock::db_to_linear(sqclock::parse_quantity(as)) / spec.xi2;
      spec = sqclock::validate_spec(spec);
      const auto result = sqclock::optimize_ramsey_time(
          sqclock::PhaseErrorCurve(spec), gamma, total_t);
      const auto baseline =
          sqclock::css_baseline(spec.atom_count, gamma, total_t);
      t.rows.push_back({std::string(sqclock::detail::trim(label)),
                        spec.atom_count,
                        sqclock::linear_to_db(spec.xi2).value_db,
                        sqclock::linear_to_db(spec.state_area()).value_db,
                        result.regime_alpha, gamma * result.ramsey_time,
                        sqclock::compare_to_css(result, baseline)});
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping row " << lineno << ": " << e.what() << '\n';
    }
  }
  return write_output(g, c, t);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atomic-clock stability with spin-squeezed states"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--out", g.out_path, "output path (default stdout)");
  app.add_option("--format", g.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", g.jobs, "worker thread count (0 = hardware)");
  app.add_flag("--canonical", g.canonical, "omit timestamps for reproducible output");

  std::string table_path;
  auto* sub_phase = app.add_subcommand("phase-error", "phase-estimation error vs LO phase");
  auto* sub_stab = app.add_subcommand("stability", "clock phase variance vs Ramsey time");
  auto* sub_opt = app.add_subcommand("optimize", "optimal Ramsey time and stability");
  auto* sub_map = app.add_subcommand("map", "1-D/2-D optimized stability sweep");
  auto* sub_val = app.add_subcommand("validate", "analytic model vs Bayesian oracle");
  auto* sub_exp = app.add_subcommand("experiments", "evaluate a table of reported states");
  sub_exp->add_option("--table", table_path, "CSV rows: label, N, xi2 dB, A2 dB");
  // let global flags appear after the subcommand as well
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  sqclock::ConfigMap config;
  try {
    if (!g.config_path.empty()) {
      std::ifstream in(g.config_path);
      if (!in) {
        std::cerr << "error: cannot open config " << g.config_path << '\n';
        return kIoError;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      config = sqclock::parse_config(ss.str());
    }
    if (sub_phase->parsed()) return cmd_phase_error(g, config);
    if (sub_stab->parsed()) return cmd_stability(g, config);
    if (sub_opt->parsed()) return cmd_optimize(g, config);
    if (sub_map->parsed()) return cmd_map(g, config);
    if (sub_val->parsed()) return cmd_validate(g, config);
    if (sub_exp->parsed()) return cmd_experiments(g, config, table_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}
