#pragma once

#include "sbvp/dirac_instances.hpp"
#include "sbvp/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sbvp {

/// Malformed run configuration.
class ConfigError : public InputError {
public:
  using InputError::InputError;
};

inline constexpr int kSchemaVersion = 1;

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s{"calculus", "czech", "bc", "cylinder", "callias", "fredholm"};
  return s;
}

/// Deliberate defects used to show that the suites can fail.
enum class Mutation { none, chi_plus_excludes_zero, eta_no_plateau, adjoint_sigma_identity };

inline std::string to_string(Mutation m) {
  switch (m) {
    case Mutation::none: return "none";
    case Mutation::chi_plus_excludes_zero: return "chi_plus_excludes_zero";
    case Mutation::eta_no_plateau: return "eta_no_plateau";
    case Mutation::adjoint_sigma_identity: return "adjoint_sigma_identity";
  }
  return "none";
}

inline Mutation mutation_from_string(const std::string& s) {
  for (Mutation m : {Mutation::none, Mutation::chi_plus_excludes_zero, Mutation::eta_no_plateau,
                     Mutation::adjoint_sigma_identity})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown mutation '" + s + "'");
}

struct Tolerances {
  double identity = 1e-12;   // exact projector and matrix identities, relative to max(1, spectral radius)
  double quadratic = 1e-3;   // relative error of the quadratic estimate
  double duality = 1e-8;     // sup-pairing recovery of norms
  double angle = 1e-8;       // principal angles between subspaces
  double rellich = 1e-10;    // singular values against a dense SVD
  double kernel = 1e-8;      // singular-value threshold relative to the largest
  double order = 0.2;        // allowed deviation of a measured convergence order from 2
  double drift = 0.1;        // allowed relative change of a constant under refinement
};

struct OperatorSpec {
  std::string kind = "circle_dirac";  // dense | diagonal | circle_dirac
  json data = json::object();
};

struct CylinderParams {
  double T = 1.0;
  Index nt = 64;
  double rho = 1.0;       // cutoff radius T_c of the extension profile
};

struct FlowParams {
  double c = 2.0;
  double L = 1.0;
  bool sweep = true;
};

struct CalliasParams {
  double mass = 2.0;
  std::pair<double, double> K{-2.0, 2.0};
  double Lambda = 3.0;
  std::pair<double, double> x_range{-8.0, 8.0};
  int samples = 1601;
  std::vector<Index> truncations{200, 400};
};

struct RunConfig {
  std::vector<std::string> suites;
  OperatorSpec op;
  double epsilon = kDefaultEps;
  std::uint64_t seed = 0;
  Tolerances tol;
  CylinderParams cylinder;
  FlowParams flow;
  CalliasParams callias;
  std::optional<std::string> output_dir;
  Mutation mutation = Mutation::none;
  json source;  // the parsed document, used for hashing
};

namespace detail {
inline void only_fields(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown field '" + it.key() + "'");
  }
}

template <class T>
T field(const json& j, const char* key, T fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

inline std::pair<double, double> interval_field(const json& j, const char* key, std::pair<double, double> fallback,
                                                const char* where) {
  if (!j.contains(key)) return fallback;
  const auto v = field<std::vector<double>>(j, key, {}, where);
  if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError(std::string(where) + ": '" + key + "' must be [a, b], a < b");
  return {v[0], v[1]};
}

inline void positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
}
}  // namespace detail

inline RunConfig parse_config(const json& j) {
  using detail::field;
  detail::only_fields(j, "config", {"schema", "suites", "operator", "epsilon", "seed", "tolerances", "grid", "flow",
                                    "callias", "output_dir", "mutation"});
  if (!j.contains("schema")) throw ConfigError("config: missing 'schema'");
  if (field<int>(j, "schema", 0, "config") != kSchemaVersion) throw ConfigError("config: unsupported schema version");
  RunConfig c;
  c.source = j;
  c.suites = field<std::vector<std::string>>(j, "suites", {}, "config");
  for (const auto& s : c.suites)
    if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
      throw ConfigError("config: unknown suite '" + s + "'");
  if (!j.contains("operator")) throw ConfigError("config: missing 'operator'");
  const json& op = j.at("operator");
  detail::only_fields(op, "operator", {"kind", "data"});
  c.op.kind = field<std::string>(op, "kind", "", "operator");
  if (c.op.kind != "dense" && c.op.kind != "diagonal" && c.op.kind != "circle_dirac")
    throw ConfigError("operator: kind must be dense, diagonal or circle_dirac");
  c.op.data = op.contains("data") ? op.at("data") : json::object();
  c.epsilon = field<double>(j, "epsilon", kDefaultEps, "config");
  detail::positive(c.epsilon, "epsilon");
  c.seed = field<std::uint64_t>(j, "seed", 0, "config");
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    detail::only_fields(t, "tolerances",
                        {"identity", "quadratic", "duality", "angle", "rellich", "kernel", "order", "drift"});
    auto& tl = c.tol;
    tl.identity = field<double>(t, "identity", tl.identity, "tolerances");
    tl.quadratic = field<double>(t, "quadratic", tl.quadratic, "tolerances");
    tl.duality = field<double>(t, "duality", tl.duality, "tolerances");
    tl.angle = field<double>(t, "angle", tl.angle, "tolerances");
    tl.rellich = field<double>(t, "rellich", tl.rellich, "tolerances");
    tl.kernel = field<double>(t, "kernel", tl.kernel, "tolerances");
    tl.order = field<double>(t, "order", tl.order, "tolerances");
    tl.drift = field<double>(t, "drift", tl.drift, "tolerances");
  }
  for (double v : {c.tol.identity, c.tol.quadratic, c.tol.duality, c.tol.angle, c.tol.rellich, c.tol.kernel,
                   c.tol.order, c.tol.drift})
    detail::positive(v, "tolerances");
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::only_fields(g, "grid", {"T", "nt", "rho"});
    c.cylinder.T = field<double>(g, "T", c.cylinder.T, "grid");
    c.cylinder.nt = field<Index>(g, "nt", c.cylinder.nt, "grid");
    c.cylinder.rho = field<double>(g, "rho", c.cylinder.T, "grid");
  }
  detail::positive(c.cylinder.T, "grid.T");
  if (c.cylinder.nt < 16) throw ConfigError("grid.nt must be at least 16");
  if (!(c.cylinder.rho > 0.0 && c.cylinder.rho <= c.cylinder.T)) throw ConfigError("grid.rho must lie in (0, T]");
  if (j.contains("flow")) {
    const json& f = j.at("flow");
    detail::only_fields(f, "flow", {"c", "L", "sweep"});
    c.flow.c = field<double>(f, "c", c.flow.c, "flow");
    c.flow.L = field<double>(f, "L", c.flow.L, "flow");
    c.flow.sweep = field<bool>(f, "sweep", c.flow.sweep, "flow");
  }
  detail::positive(c.flow.L, "flow.L");
  if (!std::isfinite(c.flow.c)) throw ConfigError("flow.c must be finite");
  if (j.contains("callias")) {
    const json& k = j.at("callias");
    detail::only_fields(k, "callias", {"mass", "K", "Lambda", "x_range", "samples", "truncations"});
    auto& cp = c.callias;
    cp.mass = field<double>(k, "mass", cp.mass, "callias");
    cp.K = detail::interval_field(k, "K", cp.K, "callias");
    cp.Lambda = field<double>(k, "Lambda", cp.Lambda, "callias");
    cp.x_range = detail::interval_field(k, "x_range", cp.x_range, "callias");
    cp.samples = field<int>(k, "samples", cp.samples, "callias");
    cp.truncations = field<std::vector<Index>>(k, "truncations", cp.truncations, "callias");
  }
  detail::positive(c.callias.mass, "callias.mass");
  detail::positive(c.callias.Lambda, "callias.Lambda");
  if (c.callias.samples < 3) throw ConfigError("callias.samples must be at least 3");
  if (c.callias.truncations.size() < 2) throw ConfigError("callias.truncations needs two entries");
  for (std::size_t i = 0; i < c.callias.truncations.size(); ++i)
    if (c.callias.truncations[i] < 12 || (i > 0 && c.callias.truncations[i] <= c.callias.truncations[i - 1]))
      throw ConfigError("callias.truncations must increase and be at least 12");
  if (j.contains("output_dir")) c.output_dir = field<std::string>(j, "output_dir", "", "config");
  if (j.contains("mutation")) c.mutation = mutation_from_string(field<std::string>(j, "mutation", "none", "config"));
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// FNV-1a 64 of the canonical (sorted-key) dump, as 16 hex digits.
inline std::string config_hash(const json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Boundary operator described by the configuration.
struct BuiltOperator {
  EigenSystem sys;
  std::optional<CircleDiracSpec> circle;        // set for circle_dirac
  std::optional<std::string> potential_expr;    // closed-form potential, allows rebuilding at other N
};

inline std::vector<double> json_real_vector(const json& j, const char* where) {
  try {
    return j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + ": expected an array of numbers");
  }
}

inline CircleDiracSpec circle_spec_at(int N, double shift, const std::optional<std::string>& expr) {
  if (!expr) return {N, shift, {}};
  const Expression e(*expr);
  return circle_dirac_spec(N, shift, [&](double th) { return e(th); });
}

inline BuiltOperator build_operator(const OperatorSpec& spec) {
  try {
    if (spec.kind == "diagonal") {
      const auto v = json_real_vector(spec.data, "operator.data");
      if (v.empty()) throw ConfigError("operator.data: empty diagonal");
      return {EigenSystem::diagonal(v), std::nullopt, std::nullopt};
    }
    if (spec.kind == "dense") {
      Mat m;
      if (spec.data.is_array()) {
        const auto rows = spec.data.get<std::vector<std::vector<double>>>();
        const Index n = static_cast<Index>(rows.size());
        if (n == 0) throw ConfigError("operator.data: empty matrix");
        m = Mat::Zero(n, n);
        for (Index i = 0; i < n; ++i) {
          if (static_cast<Index>(rows[i].size()) != n) throw ConfigError("operator.data: matrix must be square");
          for (Index k = 0; k < n; ++k) m(i, k) = rows[i][k];
        }
      } else {
        detail::only_fields(spec.data, "operator.data", {"rows", "cols", "re", "im"});
        m = matrix_from_json(spec.data);
      }
      return {EigenSystem(m), std::nullopt, std::nullopt};
    }
    detail::only_fields(spec.data, "operator.data", {"N", "shift", "potential"});
    const int N = detail::field<int>(spec.data, "N", 8, "operator.data");
    const double shift = detail::field<double>(spec.data, "shift", -0.5, "operator.data");
    BuiltOperator b{EigenSystem::diagonal({0.0}), std::nullopt, std::nullopt};
    CircleDiracSpec cs{N, shift, {}};
    if (spec.data.contains("potential")) {
      const json& p = spec.data.at("potential");
      if (p.is_string()) {
        b.potential_expr = p.get<std::string>();
        cs = circle_spec_at(N, shift, b.potential_expr);
      } else {
        for (double v : json_real_vector(p, "operator.data.potential")) cs.potential.emplace_back(v);
      }
    }
    b.sys = circle_dirac(cs);
    b.circle = cs;
    return b;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("operator: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("operator: ") + e.what());
  }
}

}  // namespace sbvp
