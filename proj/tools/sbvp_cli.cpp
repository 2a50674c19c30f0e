#include "sbvp/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace sbvp;

namespace {

constexpr int kExitMalformed = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::string default_out_dir() {
  const char* env = std::getenv("SBVP_OUT_DIR");
  return env && *env ? env : "sbvp_out";
}

std::pair<double, double> parse_pair(const std::string& s, const char* what) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError(std::string(what) + ": expected a,b");
  try {
    const double a = std::stod(s.substr(0, comma)), b = std::stod(s.substr(comma + 1));
    if (!(a < b)) throw ConfigError(std::string(what) + ": need a < b");
    return {a, b};
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(what) + ": malformed number");
  }
}

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (seed && j.is_object()) j["seed"] = *seed;
  return parse_config(j);
}

int cmd_verify(const std::vector<std::string>& suites, const std::string& config, std::string out,
               std::optional<std::uint64_t> seed) {
  const RunConfig cfg = load_config(config, seed);
  if (out.empty()) out = cfg.output_dir.value_or(default_out_dir());
  const RunResult r = run_suites(cfg, suites);
  for (const json& rep : r.reports) {
    write_file(fs::path(out) / (rep["suite"].get<std::string>() + ".json"), rep.dump(2) + "\n");
    std::cout << (rep["pass"].get<bool>() ? "PASS " : "FAIL ") << rep["suite"].get<std::string>() << " ("
              << rep["passed"] << " passed, " << rep["failed"] << " failed)\n";
    for (const json& c : rep["checks"])
      if (!c["pass"].get<bool>()) std::cout << "  failed: " << c["name"].get<std::string>() << " value " << c["value"]
                                            << " limit " << c["limit"] << "\n";
  }
  write_file(fs::path(out) / "summary.json", r.summary.dump(2) + "\n");
  return r.exit_code;
}

int cmd_index(const std::string& config) {
  const RunConfig cfg = load_config(config, std::nullopt);
  const BuiltOperator op = build_operator(cfg.op);
  const IndexReport r = flow_index(op.sys, cfg.flow.c, cfg.flow.L, cfg.tol.kernel);
  json j = index_json(r);
  j["config_hash"] = config_hash(cfg.source);
  j["c"] = cfg.flow.c;
  j["L"] = cfg.flow.L;
  std::cout << j.dump(2) << "\n";
  return r.tol_stable && r.index == *r.oracle_index ? 0 : 1;
}

int cmd_callias(const std::string& potential, const std::string& k, double lambda, const std::string& range,
                int samples, bool non_differentiable, const std::string& margin_csv) {
  std::vector<double> x, phi;
  if (fs::is_regular_file(potential)) {
    std::ifstream in(potential);
    std::tie(x, phi) = read_potential_csv(in);
  } else {
    const Expression f(potential);
    const auto [a, b] = parse_pair(range, "--x-range");
    x = uniform_grid(a, b, samples);
    for (double xi : x) phi.push_back(f(xi));
  }
  CompactInterval kk;
  if (k != "none" && !k.empty()) kk = parse_pair(k, "--K");
  CalliasSpec spec = kink_callias_spec(x, phi, kk, lambda);
  spec.differentiable = !non_differentiable;
  const CalliasReport r = callias_check(spec);
  json j{{"verdict", r.verdict},
         {"verdict_negated", r.verdict_negated},
         {"classical_verdict", r.classical_verdict},
         {"min_outside", r.min_outside},
         {"min_outside_negated", r.min_outside_negated},
         {"samples_outside", r.samples_outside},
         {"commutator_defect", r.commutator_defect},
         {"grid_spacing", x[1] - x[0]},
         {"differentiable", spec.differentiable},
         {"Lambda", lambda}};
  if (kk) j["K"] = {kk->first, kk->second};
  else j["K"] = nullptr;
  std::cout << j.dump(2) << "\n";
  if (!margin_csv.empty()) {
    json map = json::array();
    for (const auto& [xi, v] : r.margin_map) map.push_back({{"x", xi}, {"min_eigenvalue", v}});
    write_file(margin_csv, emit_plot_data(json{{"data", {{"margin_map", map}}}}, "callias_margin"));
  }
  return r.verdict ? 0 : 1;
}

int cmd_plot(const std::string& report, const std::string& kind, const std::string& out) {
  json j;
  try {
    j = json::parse(read_file(report));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("report: invalid JSON: ") + e.what());
  }
  const std::string csv = emit_plot_data(j, kind);
  if (out.empty()) std::cout << csv;
  else write_file(out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral boundary-value verification toolkit"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "Run verification suites and write JSON reports");
  std::vector<std::string> suites;
  std::string config, out;
  std::optional<std::uint64_t> seed;
  verify->add_option("suites", suites, "Suites: calculus czech bc cylinder callias fredholm (default: config or all)");
  verify->add_option("--config", config, "Run configuration (JSON)")->required();
  verify->add_option("--out", out, "Output directory (default: $SBVP_OUT_DIR or ./sbvp_out)");
  verify->add_option("--seed", seed, "Seed overriding the configuration");

  auto* idx = app.add_subcommand("index", "Index of the linear spectral-flow problem for the configured operator");
  std::string idx_config;
  idx->add_option("--config", idx_config, "Run configuration (JSON)")->required();

  auto* cal = app.add_subcommand("callias", "Pointwise Callias check of a kink potential phi(x) (I (x) sigma3)");
  std::string potential, kset = "none", range = "-8,8", margin_csv;
  double lambda = 0.0;
  int samples = 1601;
  bool nondiff = false;
  cal->add_option("--potential", potential, "CSV file (x,value) or expression in x")->required();
  cal->add_option("--K", kset, "Compact interval a,b or 'none'");
  cal->add_option("--Lambda", lambda, "Required lower bound")->required();
  cal->add_option("--x-range", range, "Sampling interval a,b for expressions");
  cal->add_option("--samples", samples, "Number of samples for expressions");
  cal->add_flag("--non-differentiable", nondiff, "Declare the potential non-differentiable");
  cal->add_option("--margin-csv", margin_csv, "Write the margin map as CSV");

  auto* plot = app.add_subcommand("plot", "Emit plot-ready CSV from a suite report");
  std::string report, kind, plot_out;
  plot->add_option("--report", report, "Suite report (JSON)")->required();
  plot->add_option("--kind", kind,
                   "rellich | h1_embedding | constants | constants_vs_rho | callias_margin | residuals | index_sweep")
      ->required();
  plot->add_option("--out", plot_out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitMalformed;
  }

  try {
    if (*verify) return cmd_verify(suites, config, out, seed);
    if (*idx) return cmd_index(idx_config);
    if (*cal) return cmd_callias(potential, kset, lambda, range, samples, nondiff, margin_csv);
    if (*plot) return cmd_plot(report, kind, plot_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitMalformed;
}
