#include "oracles.hpp"
#include "sbvp/report.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace sbvp;

namespace {

json diag_config(std::vector<std::string> suites) {
  return json{{"schema", 1},
              {"suites", suites},
              {"operator", {{"kind", "diagonal"}, {"data", {-2.0, -1.0, 0.0, 1.0, 3.0}}}},
              {"seed", 11}};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Io, MatrixJsonRoundTrip) {
  oracle::Gen g(61);
  for (auto [r, c] : {std::pair<Index, Index>{3, 3}, {2, 5}, {0, 0}}) {
    const Mat m = g.complex(r, c);
    EXPECT_EQ(matrix_from_json(matrix_to_json(m)), m);
  }
  EXPECT_THROW(matrix_from_json(json{{"rows", 2}, {"cols", 2}, {"re", {1.0}}, {"im", {0.0}}}), InputError);
  EXPECT_THROW(matrix_from_json(json{{"rows", 1}}), InputError);
}

TEST(Io, GridJsonRoundTrip) {
  const CylinderGrid g(2.5, 33);
  const CylinderGrid back = grid_from_json(grid_to_json(g));
  EXPECT_EQ(back.T(), 2.5);
  EXPECT_EQ(back.nt(), 33);
  EXPECT_THROW(grid_from_json(json{{"T", 1.0}, {"nt", 8}, {"h", 0.1}}), InputError);
}

TEST(Io, BoundaryConditionJsonRoundTrip) {
  const EigenSystem a = EigenSystem::diagonal({-1.0, 0.0, 2.0});
  const BoundaryCondition b = aps(a);
  const BoundaryCondition back = bc_from_json(bc_to_json(b));
  EXPECT_EQ(back.kind(), b.kind());
  EXPECT_LE(oracle::subspace_distance(back.basis(), b.basis()), 1e-14);
  EXPECT_THROW(bc_from_json(json{{"kind", "nonsense"}, {"basis", matrix_to_json(Mat::Identity(2, 2))}}), InputError);
}

TEST(Io, SectionCsvRoundTrip) {
  oracle::Gen g(62);
  const CylinderGrid grid(1.0, 8);
  CylinderSection s = CylinderSection::zeros(grid, 3);
  s.values = g.complex(8, 3);
  std::stringstream ss;
  write_section_csv(ss, s);
  EXPECT_EQ(lines(ss.str()).front(), "t_index,eigen_index,re,im");
  const CylinderSection back = read_section_csv(ss, grid, 3);
  EXPECT_EQ(back.values, s.values);
}

TEST(Io, SectionCsvErrors) {
  const CylinderGrid grid(1.0, 8);
  std::stringstream missing("t_index,eigen_index,re,im\n0,0,1,0\n");
  EXPECT_THROW(read_section_csv(missing, grid, 1), InputError);
  std::stringstream header("0,0,1,0\n1,0,1,0\n");
  EXPECT_THROW(read_section_csv(header, grid, 1), InputError);
  std::stringstream range("t_index,eigen_index,re,im\n0,0,1,0\n50,0,1,0\n");
  EXPECT_THROW(read_section_csv(range, grid, 1), InputError);
  std::stringstream number("t_index,eigen_index,re,im\n0,0,x,0\n1,0,1,0\n");
  EXPECT_THROW(read_section_csv(number, grid, 1), InputError);
}

TEST(Io, SectionBinaryRoundTrip) {
  oracle::Gen g(63);
  CylinderSection s = CylinderSection::zeros(CylinderGrid(1.7, 9), 4);
  s.values = g.complex(9, 4);
  std::stringstream ss;
  write_section_binary(ss, s);
  const CylinderSection back = read_section_binary(ss);
  EXPECT_EQ(back.values, s.values);
  EXPECT_EQ(back.grid.T(), 1.7);
  EXPECT_EQ(back.grid.nt(), 9);
}

TEST(Io, SectionBinaryErrors) {
  CylinderSection s = CylinderSection::zeros(CylinderGrid(1.0, 8), 2);
  std::stringstream ss;
  write_section_binary(ss, s);
  std::string bytes = ss.str();
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream b1(bad);
  EXPECT_THROW(read_section_binary(b1), InputError);
  std::stringstream b2(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_section_binary(b2), InputError);
}

TEST(Io, PotentialCsv) {
  std::stringstream ok("x,value\n# comment\n0,1\n1,2\n2,4\n");
  const auto [x, v] = read_potential_csv(ok);
  EXPECT_EQ(x, (std::vector<double>{0, 1, 2}));
  EXPECT_EQ(v, (std::vector<double>{1, 2, 4}));
  std::stringstream short_input("0,1\n1,2\n");
  EXPECT_THROW(read_potential_csv(short_input), InputError);
  std::stringstream bad("0,1\n1,z\n2,3\n");
  EXPECT_THROW(read_potential_csv(bad), InputError);
  std::stringstream one_col("0\n1\n2\n");
  EXPECT_THROW(read_potential_csv(one_col), InputError);
}

TEST(Config, ParsesDefaultsAndFields) {
  const RunConfig c = parse_config(diag_config({"calculus"}));
  EXPECT_EQ(c.suites, (std::vector<std::string>{"calculus"}));
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.op.kind, "diagonal");
  EXPECT_EQ(c.mutation, Mutation::none);
  EXPECT_EQ(c.flow.c, 2.0);
  const BuiltOperator op = build_operator(c.op);
  EXPECT_EQ(op.sys.dim(), 5);
  EXPECT_FALSE(op.circle);
}

TEST(Config, RejectsUnknownFieldsAndBadValues) {
  json j = diag_config({});
  j["extra"] = 1;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = diag_config({});
  j.erase("schema");
  EXPECT_THROW(parse_config(j), ConfigError);
  j = diag_config({});
  j["schema"] = 2;
  EXPECT_THROW(parse_config(j), ConfigError);
  j = diag_config({"nosuch"});
  EXPECT_THROW(parse_config(j), ConfigError);
  j = diag_config({});
  j["tolerances"] = {{"identity", -1.0}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = diag_config({});
  j["grid"] = {{"nt", 8}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = diag_config({});
  j["grid"] = {{"T", 1.0}, {"dt", 0.1}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = diag_config({});
  j["callias"] = {{"K", {2.0, -2.0}}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j = diag_config({});
  j["mutation"] = "bogus";
  EXPECT_THROW(parse_config(j), ConfigError);
  j = diag_config({});
  j["seed"] = "eleven";
  EXPECT_THROW(parse_config(j), ConfigError);
  EXPECT_THROW(parse_config_text("{not json"), ConfigError);
}

TEST(Config, OperatorKinds) {
  json j = diag_config({});
  j["operator"] = {{"kind", "dense"}, {"data", {{1.0, 2.0}, {2.0, -1.0}}}};
  EXPECT_EQ(build_operator(parse_config(j).op).sys.dim(), 2);
  j["operator"] = {{"kind", "dense"}, {"data", {{1.0, 2.0}, {0.0, -1.0}}}};
  EXPECT_THROW(build_operator(parse_config(j).op), ConfigError);
  j["operator"] = {{"kind", "circle_dirac"}, {"data", {{"N", 4}, {"shift", -0.5}}}};
  const BuiltOperator c = build_operator(parse_config(j).op);
  EXPECT_EQ(c.sys.dim(), 9);
  ASSERT_TRUE(c.circle);
  EXPECT_EQ(c.circle->N, 4);
  j["operator"] = {{"kind", "circle_dirac"}, {"data", {{"N", 8}, {"potential", "2*cos(x)"}}}};
  EXPECT_TRUE(build_operator(parse_config(j).op).potential_expr);
  j["operator"] = {{"kind", "triangle"}};
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, HashIsStableAndSensitive) {
  const json a = diag_config({"calculus"});
  json b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b["seed"] = 12;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(json::parse(a.dump(2))), config_hash(a));
}

TEST(Report, CalculusOnDiagonalPasses) {
  const RunResult r = run_suites(parse_config(diag_config({"calculus"})));
  EXPECT_EQ(r.exit_code, 0);
  ASSERT_EQ(r.reports.size(), 1u);
  const json& rep = r.reports.front();
  EXPECT_EQ(rep["suite"], "calculus");
  EXPECT_EQ(rep["schema"], 1);
  EXPECT_EQ(rep["seed"], 11);
  EXPECT_TRUE(rep.contains("config_hash") && rep.contains("epsilon") && rep.contains("tolerances") &&
              rep.contains("truncation"));
  EXPECT_EQ(r.summary["failed"], 0);
}

TEST(Report, ChiMutationFailsCalculus) {
  json j = diag_config({"calculus"});
  j["mutation"] = "chi_plus_excludes_zero";
  const RunResult r = run_suites(parse_config(j));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_GT(r.summary["failed"].get<Index>(), 0);
}

TEST(Report, DeterministicForSeed) {
  const RunConfig c = parse_config(diag_config({"calculus", "czech"}));
  const RunResult a = run_suites(c), b = run_suites(c);
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) EXPECT_EQ(a.reports[i].dump(), b.reports[i].dump());
  EXPECT_EQ(a.summary.dump(), b.summary.dump());
}

TEST(Report, UnknownSuiteRejected) {
  EXPECT_THROW(run_suites(parse_config(diag_config({})), {"nosuch"}), ConfigError);
}

TEST(Plot, RellichRowsMatchFormula) {
  std::vector<double> l;
  for (int j = 1; j <= 6; ++j) l.push_back(j);
  json j = diag_config({"calculus"});
  j["operator"]["data"] = l;
  const RunResult r = run_suites(parse_config(j));
  const auto rows = lines(emit_plot_data(r.reports.front(), "rellich"));
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], "eigenvalue,value");
  for (int k = 1; k <= 6; ++k) {
    std::stringstream ss(rows[k]);
    std::string a, b;
    std::getline(ss, a, ',');
    std::getline(ss, b);
    EXPECT_DOUBLE_EQ(std::stod(a), k);
    EXPECT_DOUBLE_EQ(std::stod(b), 1.0 / (1.0 + k * k));
  }
}

TEST(Plot, EmptyReportGivesHeaderOnly) {
  for (const auto& [kind, table] : plot_kinds()) {
    const auto rows = lines(emit_plot_data(json::object(), kind));
    ASSERT_EQ(rows.size(), 1u) << kind;
    EXPECT_EQ(std::count(rows[0].begin(), rows[0].end(), ',') + 1, static_cast<long>(table.columns.size()));
  }
  EXPECT_EQ(emit_plot_data(json::object(), "callias_margin"), "x,min_eigenvalue\n");
}

TEST(Plot, UnknownKindRejected) {
  EXPECT_THROW(emit_plot_data(json::object(), "histogram"), PlotKindError);
}

TEST(Plot, MarginMapRowsFollowPointwiseOracle) {
  json report{{"data", {{"margin_map", json::array()}}}};
  const double m = 2.0;
  for (double x : {-3.0, 0.0, 1.5}) {
    const double p = m * std::tanh(x), dp = m / (std::cosh(x) * std::cosh(x));
    report["data"]["margin_map"].push_back({{"x", x}, {"min_eigenvalue", p * p - std::abs(dp)}});
  }
  const auto rows = lines(emit_plot_data(report, "callias_margin"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[2], "0,-2");
}
