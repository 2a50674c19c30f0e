#include "oracles.hpp"
#include "sbvp/report.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace sbvp;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Least-squares slope of -log(r) against log(n).
double fitted_order(const std::vector<double>& n, const std::vector<double>& r) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double x = std::log(n[i]), y = -std::log(r[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

/// Orthonormal basis of the Euclidean complement of the span of the columns.
Mat complement(const Mat& b, Index n) {
  if (b.cols() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(b, Eigen::ComputeFullU);
  Index r = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-10 * svd.singularValues()(0)) ++r;
  return svd.matrixU().rightCols(n - r);
}

Mat swap_blocks(Index n) {
  Mat s = Mat::Zero(2 * n, 2 * n);
  s.topRightCorner(n, n).setIdentity();
  s.bottomLeftCorner(n, n).setIdentity();
  return s;
}

Mat eye_i(Index n) { return Mat(cplx(0, 1) * Mat::Identity(n, n)); }

std::vector<double> spread_spectrum(oracle::Gen& g, Index n, bool with_kernel) {
  std::vector<double> l;
  for (Index j = 0; j < n; ++j) {
    const double mag = std::pow(10.0, g.real(-2.0, 2.0));
    l.push_back(g.real(0, 1) < 0.5 ? -mag : mag);
  }
  if (with_kernel) l[0] = 0.0;
  return l;
}

// 1. projector algebra, polar decomposition and the shift identity
Outcome functional_calculus() {
  oracle::Gen g(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = g.dim(1, 64);
    const Mat t = trial % 3 == 0 ? g.with_spectrum(g.integer_spectrum(n, 3)) : g.hermitian(n);
    const EigenSystem sys(t);
    const Mat id = Mat::Identity(n, n);
    const double scale = std::max(1.0, sys.spectral_radius());
    const Mat pp = chi_plus(sys).matrix, pm = chi_minus(sys).matrix;
    worst = std::max(worst, max_abs(pp + pm - id));
    worst = std::max(worst, std::max(max_abs(pp * pp - pp), max_abs(pm * pm - pm)));
    const Mat abs_t = borel_matrix(sys, [](double x) { return std::abs(x); });
    const Mat sgn = borel_matrix(sys, [](double x) { return x >= 0.0 ? 1.0 : -1.0; });
    worst = std::max(worst, max_abs(sys.matrix() - abs_t * sgn) / scale);
    worst = std::max(worst, max_abs(t - abs_t * sgn) / scale);
    // r on an eigenvalue: same eigenvectors, exact shift
    const double r_on = sys.eigenvalue(g.dim(0, n - 1));
    worst = std::max(worst, max_abs(chi_plus(sys.shifted(r_on)).matrix -
                                    spectral_projector(sys, Interval::at_least(r_on)).matrix));
    // r in the widest gap: independent eigensolve of T - r
    const RVec& l = sys.eigenvalues();
    double r_gap = l(n - 1) + 1.0, best = 1.0;
    for (Index j = 0; j + 1 < n; ++j)
      if (l(j + 1) - l(j) > best) {
        best = l(j + 1) - l(j);
        r_gap = 0.5 * (l(j) + l(j + 1));
      }
    const EigenSystem moved(Mat(t - r_gap * id));
    worst = std::max(worst, max_abs(chi_plus(moved).matrix - spectral_projector(sys, Interval::at_least(r_gap)).matrix));
  }
  return {worst <= 1e-12, "max defect " + fmt("%.2e", worst)};
}

// 2. quadratic estimate with psi(z) = z e^{-z}
Outcome quadratic() {
  oracle::Gen g(102);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = g.dim(2, 32);
    const EigenSystem sys(g.with_spectrum(spread_spectrum(g, n, trial % 2 == 0)));
    const Vec u = g.vec(n);
    const QuadraticEstimate q = quadratic_estimate(sys, u);
    // independent non-kernel mass from the eigenbasis
    double mass = 0.0;
    const Vec c = sys.eigenvectors().adjoint() * u;
    for (Index j = 0; j < n; ++j)
      if (sys.eigenvalue(j) != 0.0) mass += std::norm(c(j));
    worst = std::max(worst, std::abs(q.value - 0.25 * mass) / (0.25 * mass));
  }
  return {worst <= 1e-3, "max relative error " + fmt("%.2e", worst)};
}

// 3. sup-pairing recovery of the fractional and Czech norms
Outcome duality() {
  oracle::Gen g(103);
  double worst = 0.0;
  bool bounded = true;
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = g.dim(1, 32);
    const bool with_kernel = trial % 3 == 0;
    const EigenSystem sys(g.with_spectrum(spread_spectrum(g, n, with_kernel)));
    // the kernel carries the dual weight in both hybrid spaces, so the pairing is isometric there only at eps = 1
    const double eps = with_kernel ? 1.0 : g.real(0.2, 2.0), alpha = g.real(0.1, 1.5);
    const Vec u = g.vec(n);
    const Vec c = sys.eigenvectors().adjoint() * u;
    Vec vf(n), vc(n);
    for (Index j = 0; j < n; ++j) {
      const double l = sys.eigenvalue(j), w = std::abs(l) + eps;
      vf(j) = std::pow(w, 2 * alpha) * c(j);
      vc(j) = (l < 0 ? w : 1.0 / w) * c(j);
    }
    const Vec mf = sys.eigenvectors() * vf, mc = sys.eigenvectors() * vc;
    const double fu = frac_norm(sys, alpha, eps, u), cu = czech_norm(sys, u, eps);
    worst = std::max(worst, std::abs(std::abs(pairing(u, mf)) / dual_norm(sys, alpha, eps, mf) - fu) / fu);
    worst = std::max(worst, std::abs(std::abs(pairing(u, mc)) / hat_norm(sys, mc, eps) - cu) / cu);
    worst = std::max(worst, std::abs(pairing_dual_norm(sys, u, eps) - cu) / cu);
    for (int k = 0; k < 20; ++k) {
      const Vec v = g.vec(n);
      bounded = bounded && std::abs(pairing(u, v)) <= fu * dual_norm(sys, alpha, eps, v) * (1 + 1e-12) &&
                std::abs(pairing(u, v)) <= cu * hat_norm(sys, v, eps) * (1 + 1e-12);
    }
  }
  return {worst <= 1e-8 && bounded,
          "max relative error " + fmt("%.2e", worst) + (bounded ? ", sampled pairings bounded" : ", bound violated")};
}

// 4. Rellich embedding singular values
Outcome rellich() {
  oracle::Gen g(104);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = g.dim(2, 32);
    const EigenSystem sys(g.with_spectrum(g.integer_spectrum(n, 6)));
    const Mat t = sys.matrix();
    const Mat id = Mat::Identity(n, n);
    const Mat inv = (id + t * t).inverse();
    for (auto [s, tt, k] : {std::tuple{1.0, 0.0, 1}, {2.0, 1.0, 1}, {2.0, 0.0, 2}, {1.5, -0.5, 2}}) {
      const auto rep = rellich_singular_values(sys, s, tt);
      Mat dense = id;
      for (int p = 0; p < k; ++p) dense = dense * inv;
      Eigen::JacobiSVD<Mat> svd(dense);
      std::vector<double> formula;
      for (Index j = 0; j < n; ++j) formula.push_back(std::pow(1.0 + sys.eigenvalue(j) * sys.eigenvalue(j), tt - s));
      std::sort(formula.rbegin(), formula.rend());
      for (Index j = 0; j < n; ++j) {
        worst = std::max(worst, std::abs(rep.values[j] - svd.singularValues()(j)));
        worst = std::max(worst, std::abs(rep.values[j] - formula[j]));
      }
    }
  }
  bool monotone = true;
  for (int n0 : {4, 8, 16}) {
    const auto coarse = rellich_singular_values(circle_dirac({n0, -0.5, {}}), 1.0, 0.0).values;
    const auto fine = rellich_singular_values(circle_dirac({2 * n0, -0.5, {}}), 1.0, 0.0).values;
    monotone = monotone && rellich_tail_monotone(coarse, fine) && fine.back() < coarse.back();
  }
  return {worst <= 1e-10 && monotone,
          "max deviation " + fmt("%.2e", worst) + (monotone ? ", tail monotone" : ", tail not monotone")};
}

// 5. adjoint boundary conditions against the annihilator oracle
Outcome adjoints() {
  oracle::Gen g(105);
  double aps_err = 0.0, match_err = 0.0, proj_err = 0.0, bidual_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    // A = W (H (+) -H) W^H with sigma0 = W (i swap) W^H anticommuting
    const Index n = g.dim(1, 6);
    const std::vector<double> l = g.integer_spectrum(n, 3);
    const Mat v = g.unitary(n), w = g.unitary(2 * n);
    RVec d(n);
    for (Index j = 0; j < n; ++j) d(j) = l[j];
    const Mat h = v * d.cast<cplx>().asDiagonal() * v.adjoint();
    Mat blk = Mat::Zero(2 * n, 2 * n);
    blk.topLeftCorner(n, n) = h;
    blk.bottomRightCorner(n, n) = -h;
    const EigenSystem a(Mat(w * blk * w.adjoint()));
    const Mat sigma = w * (cplx(0, 1) * swap_blocks(n)) * w.adjoint();
    std::vector<Vec> nonpos;
    for (Index j = 0; j < n; ++j) {
      Vec e = Vec::Zero(2 * n);
      if (l[j] <= 0) {
        e.head(n) = v.col(j);
        nonpos.push_back(w * e);
      }
      e.setZero();
      if (l[j] >= 0) {
        e.tail(n) = v.col(j);
        nonpos.push_back(w * e);
      }
    }
    Mat expected(2 * n, static_cast<Index>(nonpos.size()));
    for (std::size_t k = 0; k < nonpos.size(); ++k) expected.col(k) = nonpos[k];
    aps_err = std::max(aps_err, oracle::subspace_distance(adjoint_bc(aps(a), sigma).basis(), expected));
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = g.dim(1, 8);
    const MatchingData md = matching(EigenSystem(g.hermitian(n)));
    Mat anti(2 * n, n);
    anti.topRows(n) = Mat::Identity(n, n);
    anti.bottomRows(n) = -Mat::Identity(n, n);
    match_err = std::max(match_err, oracle::subspace_distance(
                                        adjoint_bc(md.diagonal, Mat(cplx(0, 1) * swap_blocks(n))).basis(), anti));
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = g.dim(2, 10), r = g.dim(1, n - 1);
    const Mat s = g.complex(n, n) + 3.0 * Mat::Identity(n, n);
    const Mat x = g.complex(n, n) + 3.0 * Mat::Identity(n, n);
    Mat dg = Mat::Zero(n, n);
    for (Index j = 0; j < r; ++j) dg(j, j) = 1.0;
    const Mat p = x * dg * x.inverse();
    const EigenSystem a(g.hermitian(n));
    const BoundaryCondition b = projection_bc(a, p).bc;
    const Mat oracle_ad = complement(Mat(s * x.leftCols(r)), n);
    proj_err = std::max(proj_err, oracle::subspace_distance(adjoint_bc(b, s).basis(), oracle_ad));
    proj_err = std::max(proj_err, oracle::subspace_distance(projection_adjoint_local(p, s).basis(), oracle_ad));
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = g.dim(2, 10), k = g.dim(0, n);
    const Mat s = g.complex(n, n) + 3.0 * Mat::Identity(n, n);
    const BoundaryCondition b = k == 0 ? BoundaryCondition::zero(n) : BoundaryCondition::span(g.complex(n, k));
    const BoundaryCondition ad = adjoint_bc(b, s);
    bidual_err = std::max(bidual_err, oracle::subspace_distance(ad.basis(), complement(Mat(s * b.basis()), n)));
    bidual_err = std::max(bidual_err, oracle::subspace_distance(adjoint_bc(ad, Mat(s.adjoint())).basis(), b.basis()));
  }
  const double worst = std::max({aps_err, match_err, proj_err, bidual_err});
  return {worst < 1e-8, "aps " + fmt("%.1e", aps_err) + ", matching " + fmt("%.1e", match_err) + ", projection " +
                            fmt("%.1e", proj_err) + ", biduality " + fmt("%.1e", bidual_err)};
}

// 6. regularity verdicts on the doubled circle operator
Outcome regularity() {
  bool ok = true;
  std::string detail;
  for (int N : {8, 16}) {
    const MatchingData md = matching(circle_dirac({N, -0.5, {}}));
    const EigenSystem& a2 = md.doubled;
    const Index n = a2.dim() / 2;
    const Mat xi = swap_blocks(n);
    const Mat sigma0 = cplx(0, 1) * xi;
    const ChiralPair ch = chiral(a2, xi);
    const bool v_aps = regularity_check(a2, aps(a2), sigma0).a_regular;
    const bool v_zero = regularity_check(a2, BoundaryCondition::zero(2 * n), sigma0).a_regular;
    const bool v_plus = regularity_check(a2, ch.plus, sigma0).a_regular;
    const bool v_minus = regularity_check(a2, ch.minus, sigma0).a_regular;
    const bool v_match = regularity_check(a2, md.diagonal, sigma0).a_regular;
    ok = ok && v_aps && !v_zero && v_plus && v_minus && v_match;
    detail += "N=" + std::to_string(N) + ": aps " + (v_aps ? "T" : "F") + " zero " + (v_zero ? "T" : "F") +
              " chiral+ " + (v_plus ? "T" : "F") + " chiral- " + (v_minus ? "T" : "F") + " matching " +
              (v_match ? "T" : "F") + (N == 8 ? "; " : "");
  }
  return {ok, detail};
}

// 7. Green's formula and energy identity convergence, closed-form energy instance
Outcome cylinder_identities() {
  oracle::Gen g(107);
  const Index n = 4;
  const EigenSystem a(g.with_spectrum({-2.0, -0.5, 1.0, 3.0}));
  const Mat sigma = g.unitary(n), r0 = 0.3 * g.complex(n, n);
  const Vec a0 = g.vec(n), a1 = g.vec(n), b0 = g.vec(n), b1 = g.vec(n);
  std::vector<double> sizes, green, energy;
  for (Index nt : {64, 128, 256}) {
    const CylinderGrid grid(1.0, nt);
    const auto op = CylinderOperator::with_remainder(grid, a, sigma, [&](double t) { return Mat(t * r0); });
    CylinderSection u = CylinderSection::zeros(grid, n), v = u;
    for (Index i = 0; i < nt; ++i) {
      const double s = grid.time(i);
      const double cut = 1.0 - smoothstep5((s - 0.3) / 0.45);
      u.set(i, cut * (a0 + s * a1 + s * s * a0));
      v.set(i, cut * (b0 + s * s * b1 + s * s * s * b0));
    }
    sizes.push_back(static_cast<double>(nt));
    green.push_back(greens_residual(op, u, v));
    energy.push_back(energy_identity_residual(CylinderOperator::model(grid, a, sigma), u));
  }
  const double og = fitted_order(sizes, green), oe = fitted_order(sizes, energy);
  const CylinderGrid grid(1.0, 256);
  const auto op = CylinderOperator::model(grid, EigenSystem::diagonal({1.0}), Mat::Identity(1, 1));
  CylinderSection u = CylinderSection::zeros(grid, 1);
  for (Index i = 0; i < grid.nt(); ++i) u.set(i, Vec::Constant(1, 1.0 - grid.time(i)));
  const EnergyTerms e = energy_terms(op, u);
  const double h2 = grid.h() * grid.h();
  const double closed = std::max({std::abs(e.lhs - 1.0 / 3.0), std::abs(e.derivative - 1.0),
                                  std::abs(e.potential - 1.0 / 3.0), std::abs(e.boundary - 1.0)});
  const bool ok = std::abs(og - 2.0) <= 0.2 && std::abs(oe - 2.0) <= 0.2 && closed <= h2;
  return {ok, "green order " + fmt("%.3f", og) + ", energy order " + fmt("%.3f", oe) + ", closed form error " +
                  fmt("%.1e", closed) + " (h^2 = " + fmt("%.1e", h2) + ")"};
}

// 8. trace and extension constants under simultaneous N and nt doubling
Outcome constants() {
  const double eps = 1.0;
  std::vector<std::array<double, 4>> vals;
  bool apriori_finite = true;
  std::mt19937_64 rng(108);
  for (int f : {1, 2}) {
    const EigenSystem a = circle_dirac(circle_dirac_spec(8 * f, -0.5, [](double th) { return 0.5 * std::cos(th); }));
    const Index d = a.dim();
    const CylinderGrid g(1.0, 64 * f);
    const auto op = CylinderOperator::with_remainder(g, a, eye_i(d),
                                                     [&](double t) { return Mat(0.5 * t * Mat::Identity(d, d)); });
    const CutoffProfile eta = CutoffProfile::make(g, 1.0, 0.5, 0.75);
    vals.push_back({trace_constant(op, trace_maximizers(op, Which::model, eps), Which::model, eps),
                    trace_constant(op, trace_maximizers(op, Which::full, eps), Which::full, eps),
                    extension_constant(op, eta, eps, Which::model), extension_constant(op, eta, eps, Which::full)});
    const AprioriReport col = apriori_collar(op);
    const auto samples = apriori_samples(op, aps(a), col.td, 10, rng);
    const AprioriReport ap = near_boundary_apriori(op, aps(a), samples, col.td);
    apriori_finite = apriori_finite && std::isfinite(ap.constant) && ap.samples_used > 0;
  }
  double drift = 0.0;
  bool finite = apriori_finite;
  for (int k = 0; k < 4; ++k) {
    finite = finite && std::isfinite(vals[0][k]) && std::isfinite(vals[1][k]) && vals[0][k] > 0.0;
    drift = std::max(drift, std::abs(vals[1][k] - vals[0][k]) / vals[0][k]);
  }
  return {finite && drift < 0.1, "trace " + fmt("%.4f", vals[0][0]) + "/" + fmt("%.4f", vals[0][1]) + ", extension " +
                                     fmt("%.4f", vals[0][2]) + "/" + fmt("%.4f", vals[0][3]) + ", max drift " +
                                     fmt("%.2f%%", 100 * drift)};
}

// 9. index of the linear spectral flow against the eigenvalue-count oracle
Outcome index_sweep() {
  int mismatches = 0, unstable = 0;
  long flagship = -999;
  for (double shift : {-0.5, -0.25, -0.75})
    for (double c : {0.4, 1.0, 2.0})
      for (int N : {3, 5, 7}) {
        const EigenSystem a = circle_dirac({N, shift, {}});
        const IndexReport r = flow_index(a, c, 1.0);
        int count = 0;
        for (int k = -N; k <= N; ++k)
          if (k + shift < 0 && k + shift >= -c) ++count;
        if (r.index != count || *r.oracle_index != count) ++mismatches;
        if (!r.tol_stable) ++unstable;
        if (shift == -0.5 && c == 2.0 && N == 3) flagship = r.index;
      }
  return {mismatches == 0 && unstable == 0 && flagship == 2,
          std::to_string(27 - mismatches) + "/27 match, " + std::to_string(unstable) + " unstable, flagship index " +
              std::to_string(flagship)};
}

// 10. Callias verdicts, sign symmetry and discreteness
Outcome callias() {
  bool ok = true;
  std::string detail;
  const double m = 2.0;
  const auto x = uniform_grid(-8.0, 8.0, 1601);
  const double h = x[1] - x[0];
  std::vector<double> phi;
  for (double xi : x) phi.push_back(m * std::tanh(xi));

  int consistent = 0, total = 0, classical = 0;
  bool symmetric = true;
  for (const CompactInterval& k : {CompactInterval{{-2.0, 2.0}}, CompactInterval{{-1.0, 1.0}}, CompactInterval{}})
    for (double lambda : {0.5, 1.0, 2.0, 3.0, 3.9}) {
      const CalliasReport r = callias_check(kink_callias_spec(x, phi, k, lambda));
      double oracle_min = INFINITY, classical_min = INFINITY;
      for (double xi : x)
        if (outside(k, xi)) {
          const double p = m * std::tanh(xi), dp = m / (std::cosh(xi) * std::cosh(xi));
          Eigen::Matrix2d blk;
          blk << p * p, dp, dp, p * p;
          oracle_min = std::min(oracle_min, Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(blk).eigenvalues()(0));
          classical_min = std::min(classical_min, p * p - std::abs(dp));
        }
      ++total;
      const bool margin_ok = std::abs(r.min_outside - oracle_min) <= 10.0 * h * h * m;
      const bool decisive = std::abs(oracle_min - lambda) > 10.0 * h * h * m;
      if (margin_ok && (!decisive || r.verdict == (oracle_min >= lambda))) ++consistent;
      if (r.classical_verdict) {
        ++classical;
        symmetric = symmetric && r.verdict && r.verdict_negated;
      }
      if (decisive && std::abs(classical_min - lambda) > 10.0 * h * h * m)
        ok = ok && r.classical_verdict == (classical_min >= lambda);
    }
  ok = ok && consistent == total && symmetric && classical > 0;
  detail += "kink " + std::to_string(consistent) + "/" + std::to_string(total) + " vs 2x2 oracle, sign symmetry " +
            (symmetric ? "holds" : "fails") + " on " + std::to_string(classical) + " classical passes";

  CalliasSpec s;
  s.phi.x = x;
  for (std::size_t i = 0; i < x.size(); ++i) s.phi.values.push_back(m * Mat::Identity(2, 2));
  s.symbol = pauli(1);
  s.Lambda = m * m;
  const bool at = callias_check(s).verdict;
  s.Lambda = m * m * 1.01;
  const bool above = callias_check(s).verdict;
  ok = ok && at && !above;
  detail += std::string("; constant mass ") + (at && !above ? "passes at m^2 only" : "wrong");

  const std::vector<Index> truncations{200, 400};
  const auto lin = discreteness_proxy([](Index k) { return line_dirac_hermite(k, [](double t) { return t; }); },
                                      truncations);
  const auto neg = discreteness_proxy(
      [](Index k) { return line_dirac_hermite(k, [](double t) { return std::tanh(t); }); }, truncations);
  std::vector<double> reference{0.0, 0.0};
  for (int k = 1; k <= 4; ++k) {
    reference.push_back(std::sqrt(2.0 * k));
    reference.push_back(-std::sqrt(2.0 * k));
  }
  std::sort(reference.begin(), reference.end());
  double ref_err = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) ref_err = std::max(ref_err, std::abs(lin.lowest.back()[i] - reference[i]));
  ok = ok && lin.max_change.back() < 1e-6 && lin.stabilized && !neg.stabilized && ref_err < 1e-6;
  detail += "; strongly para change " + fmt("%.1e", lin.max_change.back()) + ", bounded control " +
            (neg.stabilized ? "not flagged" : "flagged");
  return {ok, detail};
}

// 11. each deliberate defect makes at least one suite fail
Outcome mutations() {
  json base{{"schema", 1},
            {"operator", {{"kind", "circle_dirac"}, {"data", {{"N", 8}, {"shift", -0.5}}}}},
            {"seed", 1},
            {"flow", {{"sweep", false}}},
            {"callias", {{"samples", 801}, {"truncations", {100, 200}}}}};
  bool ok = true;
  std::string detail;
  for (const char* mut : {"none", "chi_plus_excludes_zero", "eta_no_plateau", "adjoint_sigma_identity"}) {
    json j = base;
    j["mutation"] = mut;
    const RunResult r = run_suites(parse_config(j));
    std::vector<std::string> failing;
    for (const auto& [name, s] : r.summary["suites"].items())
      if (!s["pass"].get<bool>()) failing.push_back(name);
    const bool baseline = std::string(mut) == "none";
    ok = ok && (baseline ? failing.empty() : !failing.empty());
    std::string list;
    for (const auto& f : failing) list += (list.empty() ? "" : "+") + f;
    detail += std::string(detail.empty() ? "" : "; ") + mut + ": " + (failing.empty() ? "all pass" : list + " fail");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "functional-calculus algebra", 5, functional_calculus},
      {2, "quadratic estimate", 10, quadratic},
      {3, "duality", 5, duality},
      {4, "Rellich embedding", 5, rellich},
      {5, "boundary-condition adjoints", 10, adjoints},
      {6, "regularity verdicts", 10, regularity},
      {7, "cylinder identities", 30, cylinder_identities},
      {8, "trace/extension constants", 60, constants},
      {9, "index vs oracle", 120, index_sweep},
      {10, "Callias suite", 120, callias},
      {11, "mutation sensitivity", 60, mutations},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.ok && in_time;
    if (!pass) ++failed;
    std::printf("criterion %2d %s  %-28s %s [%.2f s / %.0f s%s]\n", c.id, pass ? "PASS" : "FAIL", c.title,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
