#pragma once

#include "sbvp/boundary_conditions.hpp"
#include "sbvp/cylinder_model.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sbvp {

using json = nlohmann::json;

/// {"rows", "cols", "re", "im"} with column-major data.
inline json matrix_to_json(const Mat& m) {
  std::vector<double> re, im;
  re.reserve(m.size());
  im.reserve(m.size());
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      re.push_back(m(i, j).real());
      im.push_back(m(i, j).imag());
    }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

inline Mat matrix_from_json(const json& j) {
  try {
    const Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    require(r >= 0 && c >= 0 && re.size() == static_cast<std::size_t>(r * c) && im.size() == re.size(),
            "matrix json: size mismatch");
    Mat m(r, c);
    std::size_t k = 0;
    for (Index jj = 0; jj < c; ++jj)
      for (Index i = 0; i < r; ++i, ++k) m(i, jj) = cplx(re[k], im[k]);
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("matrix json: ") + e.what());
  }
}

inline json grid_to_json(const CylinderGrid& g) { return json{{"T", g.T()}, {"nt", g.nt()}}; }

inline CylinderGrid grid_from_json(const json& j) {
  try {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "T" && it.key() != "nt") throw InputError("grid json: unknown field " + it.key());
    return CylinderGrid(j.at("T").get<double>(), j.at("nt").get<Index>());
  } catch (const json::exception& e) {
    throw InputError(std::string("grid json: ") + e.what());
  }
}

inline json bc_to_json(const BoundaryCondition& b) {
  json j{{"kind", to_string(b.kind())}, {"basis", matrix_to_json(b.basis())}};
  if (b.sigma0()) j["sigma0"] = matrix_to_json(*b.sigma0());
  return j;
}

inline BoundaryCondition bc_from_json(const json& j) {
  try {
    BoundaryCondition b = BoundaryCondition::span(matrix_from_json(j.at("basis")), bc_kind_from_string(j.at("kind")));
    if (j.contains("sigma0")) b = b.with_sigma0(matrix_from_json(j.at("sigma0")));
    return b;
  } catch (const json::exception& e) {
    throw InputError(std::string("boundary condition json: ") + e.what());
  }
}

/// CSV with header t_index,eigen_index,re,im; one line per sample and component.
inline void write_section_csv(std::ostream& os, const CylinderSection& s) {
  os << "t_index,eigen_index,re,im\n";
  os.precision(17);
  for (Index i = 0; i < s.values.rows(); ++i)
    for (Index j = 0; j < s.values.cols(); ++j)
      os << i << ',' << j << ',' << s.values(i, j).real() << ',' << s.values(i, j).imag() << '\n';
}

inline CylinderSection read_section_csv(std::istream& is, const CylinderGrid& g, Index dim) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t_index", 0) != 0) throw InputError("section csv: missing header");
  CylinderSection s = CylinderSection::zeros(g, dim);
  std::vector<bool> seen(static_cast<std::size_t>(g.nt() * dim), false);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c, d;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') || !std::getline(ss, d))
      throw InputError("section csv: malformed line");
    Index i = 0, j = 0;
    double re = 0.0, im = 0.0;
    try {
      i = std::stoll(a);
      j = std::stoll(b);
      re = std::stod(c);
      im = std::stod(d);
    } catch (const std::exception&) {
      throw InputError("section csv: malformed number");
    }
    if (i < 0 || i >= g.nt() || j < 0 || j >= dim) throw InputError("section csv: index out of range");
    s.values(i, j) = cplx(re, im);
    seen[static_cast<std::size_t>(i * dim + j)] = true;
  }
  for (bool b : seen)
    if (!b) throw InputError("section csv: missing entries");
  return s;
}

inline constexpr char kSectionMagic[4] = {'S', 'B', 'V', 'S'};
inline constexpr std::uint32_t kSectionVersion = 1;

/// Columnar binary: magic, version, nt, dim, T, then all real parts and all imaginary parts (row-major by t).
inline void write_section_binary(std::ostream& os, const CylinderSection& s) {
  auto put = [&](const void* p, std::size_t n) { os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); };
  put(kSectionMagic, 4);
  put(&kSectionVersion, sizeof kSectionVersion);
  const std::uint64_t nt = static_cast<std::uint64_t>(s.values.rows()), dim = static_cast<std::uint64_t>(s.values.cols());
  const double T = s.grid.T();
  put(&nt, sizeof nt);
  put(&dim, sizeof dim);
  put(&T, sizeof T);
  for (int part = 0; part < 2; ++part)
    for (Index i = 0; i < s.values.rows(); ++i)
      for (Index j = 0; j < s.values.cols(); ++j) {
        const double v = part == 0 ? s.values(i, j).real() : s.values(i, j).imag();
        put(&v, sizeof v);
      }
}

inline CylinderSection read_section_binary(std::istream& is) {
  auto get = [&](void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw InputError("section binary: truncated input");
  };
  char magic[4];
  get(magic, 4);
  if (std::memcmp(magic, kSectionMagic, 4) != 0) throw InputError("section binary: bad magic");
  std::uint32_t ver = 0;
  get(&ver, sizeof ver);
  if (ver != kSectionVersion) throw InputError("section binary: unsupported version");
  std::uint64_t nt = 0, dim = 0;
  double T = 0.0;
  get(&nt, sizeof nt);
  get(&dim, sizeof dim);
  get(&T, sizeof T);
  CylinderSection s = CylinderSection::zeros(CylinderGrid(T, static_cast<Index>(nt)), static_cast<Index>(dim));
  for (int part = 0; part < 2; ++part)
    for (Index i = 0; i < s.values.rows(); ++i)
      for (Index j = 0; j < s.values.cols(); ++j) {
        double v = 0.0;
        get(&v, sizeof v);
        if (part == 0) s.values(i, j) = cplx(v, 0.0);
        else s.values(i, j) += cplx(0.0, v);
      }
  return s;
}

/// Two-column CSV (coordinate, value) with an optional header line.
inline std::pair<std::vector<double>, std::vector<double>> read_potential_csv(std::istream& is) {
  std::vector<double> x, v;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b)) throw InputError("potential csv: need two columns");
    try {
      const double xa = std::stod(a), vb = std::stod(b);
      x.push_back(xa);
      v.push_back(vb);
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw InputError("potential csv: malformed number");
    }
    first = false;
  }
  if (x.size() < 3) throw InputError("potential csv: need at least three rows");
  return {x, v};
}

}  // namespace sbvp
