#pragma once

#include "sbvp/config.hpp"
#include "sbvp/fredholm.hpp"

#include <cstdio>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace sbvp {

/// One hard assertion: pass iff the measured value is within the limit.
struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
};

inline json to_json(const Check& c) {
  return json{{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}};
}

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  json data = json::object();

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  Index failed() const {
    return static_cast<Index>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.pass; }));
  }

  void at_most(const std::string& name, double value, double limit) {
    checks.push_back({name, std::isfinite(value) && value <= limit, value, limit});
  }
  void at_least(const std::string& name, double value, double limit) {
    checks.push_back({name, std::isfinite(value) && value >= limit, value, limit});
  }
  void holds(const std::string& name, bool ok) { checks.push_back({name, ok, ok ? 1.0 : 0.0, 1.0}); }
  void equal(const std::string& name, long value, long expected) {
    checks.push_back({name, value == expected, static_cast<double>(value), static_cast<double>(expected)});
  }
};

struct SuiteContext {
  const RunConfig& cfg;
  const BuiltOperator& op;
  std::mt19937_64 rng;
};

namespace detail {

inline SpectralProjector suite_chi_plus(const EigenSystem& sys, Mutation m) {
  return m == Mutation::chi_plus_excludes_zero ? spectral_projector(sys, Interval::above(0.0)) : chi_plus(sys);
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Midpoint of the widest gap between consecutive distinct eigenvalues (or beyond the top one).
inline double mid_gap(const EigenSystem& sys) {
  const RVec& l = sys.eigenvalues();
  double best = -1.0, r = l(l.size() - 1) + 1.0;
  for (Index j = 0; j + 1 < l.size(); ++j)
    if (l(j + 1) - l(j) > best) {
      best = l(j + 1) - l(j);
      r = 0.5 * (l(j) + l(j + 1));
    }
  return r;
}

/// Least-squares slope of -log(r) against log(n).
inline double convergence_order(const std::vector<double>& n, const std::vector<double>& r) {
  const std::size_t k = n.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(n[i]) / k;
    my += std::log(r[i]) / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxy += (std::log(n[i]) - mx) * (std::log(r[i]) - my);
    sxx += std::pow(std::log(n[i]) - mx, 2);
  }
  return -sxy / sxx;
}

/// Block swap [[0, I], [I, 0]] on C^n (+) C^n.
inline Mat block_swap(Index n) {
  Mat x = Mat::Zero(2 * n, 2 * n);
  x.topRightCorner(n, n) = Mat::Identity(n, n);
  x.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return x;
}

inline Mat random_idempotent(std::mt19937_64& rng, Index n, Index rank) {
  const Mat s = random_complex(rng, n, n) + 3.0 * Mat::Identity(n, n);
  RVec d = RVec::Zero(n);
  d.head(rank).setOnes();
  return s * d.cast<cplx>().asDiagonal() * s.inverse();
}

inline Mat random_invertible(std::mt19937_64& rng, Index n) {
  return random_complex(rng, n, n) + 3.0 * std::sqrt(static_cast<double>(n)) * Mat::Identity(n, n);
}

}  // namespace detail

inline SuiteReport calculus_suite(SuiteContext& ctx) {
  SuiteReport rep{"calculus", {}, json::object()};
  const auto& tol = ctx.cfg.tol;
  const Mutation mut = ctx.cfg.mutation;
  const double eps = ctx.cfg.epsilon;
  std::vector<std::pair<std::string, EigenSystem>> inst{{"configured", ctx.op.sys},
                                                        {"with_kernel", EigenSystem::diagonal({-1.0, 0.0, 2.0})}};
  for (int k = 0; k < 4; ++k)
    inst.emplace_back("random" + std::to_string(k), EigenSystem(random_hermitian(ctx.rng, 8)));
  for (const auto& [name, sys] : inst) {
    const Index n = sys.dim();
    const Mat id = Mat::Identity(n, n);
    const double scale = std::max(1.0, sys.spectral_radius());
    const Mat pp = detail::suite_chi_plus(sys, mut).matrix, pm = chi_minus(sys).matrix;
    rep.at_most("partition[" + name + "]", detail::max_abs(pp + pm - id), tol.identity);
    rep.at_most("idempotent[" + name + "]",
                std::max(detail::max_abs(pp * pp - pp), detail::max_abs(pm * pm - pm)), tol.identity);
    const Mat abs_t = borel_matrix(sys, [](double x) { return std::abs(x); });
    rep.at_most("polar[" + name + "]", detail::max_abs(sys.matrix() - abs_t * (pp - pm)) / scale, tol.identity);
    const double r = detail::mid_gap(sys);
    const EigenSystem moved(Mat(sys.matrix() - r * id));
    const Mat lhs = detail::suite_chi_plus(moved, mut).matrix;
    const Mat rhs = spectral_projector(sys, Interval::at_least(r)).matrix;
    rep.at_most("shift_identity[" + name + "]", detail::max_abs(lhs - rhs), tol.identity * scale);
  }

  const auto& sys = ctx.op.sys;
  double qe = 0.0;
  for (int k = 0; k < 5; ++k) {
    const QuadraticEstimate q = quadratic_estimate(sys, random_vector(ctx.rng, sys.dim()));
    if (q.nonkernel_norm_sq > 0.0) qe = std::max(qe, std::abs(q.normalized - 0.25) / 0.25);
  }
  rep.at_most("quadratic_estimate", qe, tol.quadratic);
  const QuadraticEstimate spread = quadratic_estimate(EigenSystem::diagonal({1.0, 10.0, 100.0}),
                                                      Vec::Constant(3, 1.0 / std::sqrt(3.0)));
  rep.at_most("quadratic_estimate[spread]", std::abs(spread.value - 0.25) / 0.25, tol.quadratic);

  double dual_err = 0.0, dual_bound = 0.0;
  for (double alpha : {0.5, 1.0}) {
    for (int k = 0; k < 5; ++k) {
      const Vec u = random_vector(ctx.rng, sys.dim()), w = random_vector(ctx.rng, sys.dim());
      const Vec vstar = borel_apply(sys, [&](double x) { return std::pow(std::abs(x) + eps, 2 * alpha); }, u);
      const double fu = frac_norm(sys, alpha, eps, u);
      dual_err = std::max(dual_err, std::abs(std::abs(pairing(u, vstar)) / dual_norm(sys, alpha, eps, vstar) - fu) / fu);
      dual_bound = std::max(dual_bound, std::abs(pairing(u, w)) / (fu * dual_norm(sys, alpha, eps, w)));
    }
  }
  rep.at_most("frac_duality", dual_err, tol.duality);
  rep.at_most("frac_pairing_bound", dual_bound, 1.0 + tol.duality);

  const RellichReport rel = rellich_singular_values(sys, 1.0, 0.0);
  const Mat t = sys.matrix();
  const Mat inv = (Mat::Identity(sys.dim(), sys.dim()) + t * t).inverse();
  Eigen::JacobiSVD<Mat> svd(inv);
  double rel_err = 0.0;
  for (Index j = 0; j < sys.dim(); ++j) rel_err = std::max(rel_err, std::abs(svd.singularValues()(j) - rel.values[j]));
  rep.at_most("rellich_dense_svd", rel_err, tol.rellich);
  const double shift = ctx.op.circle ? ctx.op.circle->shift : -0.5;
  const int n0 = ctx.op.circle ? ctx.op.circle->N : 8;
  const auto coarse = rellich_singular_values(circle_dirac({n0, shift, {}}), 1.0, 0.0).values;
  const auto fine = rellich_singular_values(circle_dirac({2 * n0, shift, {}}), 1.0, 0.0).values;
  rep.holds("rellich_tail_monotone", rellich_tail_monotone(coarse, fine));
  json rows = json::array();
  {
    std::vector<double> lam(sys.eigenvalues().data(), sys.eigenvalues().data() + sys.dim());
    std::sort(lam.begin(), lam.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    for (std::size_t j = 0; j < lam.size(); ++j)
      rows.push_back({{"eigenvalue", lam[j]}, {"value", 1.0 / (1.0 + lam[j] * lam[j])}});
  }
  rep.data["rellich"] = rows;

  double law = 0.0, contraction = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Vec v = random_vector(ctx.rng, sys.dim());
    const Vec a = semigroup(sys, 0.3, eps, semigroup(sys, 0.2, eps, v)), b = semigroup(sys, 0.5, eps, v);
    law = std::max(law, (a - b).norm() / v.norm());
    contraction = std::max(contraction, b.norm() / (std::exp(-0.5 * eps) * v.norm()));
  }
  rep.at_most("semigroup_law", law, tol.identity * 10.0);
  rep.at_most("semigroup_contraction", contraction, 1.0 + tol.identity);

  std::vector<Vec> vs;
  for (int k = 0; k < 10; ++k) vs.push_back(random_vector(ctx.rng, sys.dim()));
  double ratio = 0.0;
  for (const auto& s : bounded_set_smoothing_check(sys, Interval::closed(-1.0, 1.0), 0.5, eps, 3, vs))
    ratio = std::max(ratio, s.max_ratio);
  rep.at_most("bounded_set_smoothing", ratio, 1.0 + 1e-8);
  return rep;
}

inline SuiteReport czech_suite(SuiteContext& ctx) {
  SuiteReport rep{"czech", {}, json::object()};
  const auto& tol = ctx.cfg.tol;
  const double eps = ctx.cfg.epsilon;
  const Vec one = Vec::Ones(1);
  rep.at_most("czech_negative_mode", std::abs(czech_norm(EigenSystem::diagonal({-3.0}), one, 1.0) - 2.0), 1e-14);
  rep.at_most("czech_positive_mode", std::abs(czech_norm(EigenSystem::diagonal({3.0}), one, 1.0) - 0.5), 1e-14);
  rep.at_most("czech_mixed",
              std::abs(czech_norm(EigenSystem::diagonal({-3.0, 3.0}), Vec::Ones(2), 1.0) - std::sqrt(4.25)), 1e-14);
  rep.at_most("hat_negative_mode", std::abs(hat_norm(EigenSystem::diagonal({-3.0}), one, 1.0) - 0.5), 1e-14);
  rep.at_most("hat_positive_mode", std::abs(hat_norm(EigenSystem::diagonal({3.0}), one, 1.0) - 2.0), 1e-14);
  rep.at_most("hat_kernel_mode", std::abs(hat_norm(EigenSystem::diagonal({0.0}), one, 1.0) - 1.0), 1e-14);

  const auto sys = std::make_shared<const EigenSystem>(ctx.op.sys);
  double err = 0.0, attained = 0.0, bound = 0.0, split = 0.0;
  const double c = pairing_constant(*sys, eps);
  for (int k = 0; k < 20; ++k) {
    const Vec u = random_vector(ctx.rng, sys->dim()), w = random_vector(ctx.rng, sys->dim());
    const double cu = czech_norm(*sys, u, eps);
    err = std::max(err, std::abs(pairing_dual_norm(*sys, u, eps) - cu) / cu);
    const Vec v = pairing_maximizer(*sys, u, eps);
    attained = std::max(attained, std::abs(std::abs(pairing(u, v)) / hat_norm(*sys, v, eps) - cu) / cu);
    const CzechDatum du = CzechDatum::from(sys, u, eps);
    const HatDatum dw = HatDatum::from(sys, w, eps);
    bound = std::max(bound, std::abs(pairing(du, dw)) / (c * du.norm() * dw.norm()));
    split = std::max(split, std::abs(du.neg_part.dot(du.pos_part)) / (u.squaredNorm()));
  }
  rep.at_most("pairing_dual_norm", err, tol.duality);
  rep.at_most("pairing_sup_attained", attained, tol.duality);
  rep.at_most("pairing_bound", bound, 1.0 + tol.duality);
  rep.at_most("pairing_constant_vs_sqrt2", c, std::max(std::sqrt(2.0), eps));
  rep.at_most("sign_split_orthogonal", split, tol.identity);

  std::vector<Vec> samples;
  for (int k = 0; k < 50; ++k) samples.push_back(random_vector(ctx.rng, sys->dim()));
  const double scale = std::max(1.0, sys->spectral_radius());
  for (double r : {2.0, -1.0}) {
    const ShiftReport s = shift_compare(*sys, r, samples, eps);
    const std::string tag = "[r=" + std::to_string(static_cast<int>(r)) + "]";
    rep.at_most("shift_projector" + tag, s.projector_defect, tol.identity * scale);
    rep.at_most("shift_decomposition" + tag, s.decomposition_defect, tol.identity * scale);
    rep.holds("shift_ratio_within_prediction" + tag, s.within_prediction);
    rep.data["shift" + tag] = {{"ratio_min", s.ratio_min}, {"ratio_max", s.ratio_max},
                               {"predicted_min", s.predicted_min}, {"predicted_max", s.predicted_max}};
  }
  const ShiftReport zero = shift_compare(*sys, 0.0, samples, eps);
  rep.at_most("shift_zero_ratio", std::max(std::abs(zero.ratio_min - 1.0), std::abs(zero.ratio_max - 1.0)),
              tol.identity);
  return rep;
}

inline SuiteReport bc_suite(SuiteContext& ctx) {
  SuiteReport rep{"bc", {}, json::object()};
  const auto& tol = ctx.cfg.tol;
  const double eps = ctx.cfg.epsilon;
  const Index n = ctx.op.sys.dim();
  const MatchingData md = matching(ctx.op.sys);
  const EigenSystem& a2 = md.doubled;
  const Mat xi = detail::block_swap(n);
  const Mat sigma0 = cplx(0.0, 1.0) * xi;
  const Mat sigma_adj =
      ctx.cfg.mutation == Mutation::adjoint_sigma_identity ? Mat(Mat::Identity(2 * n, 2 * n)) : sigma0;

  const BoundaryCondition b_aps = aps(a2);
  const BoundaryCondition aps_ad = adjoint_bc(b_aps, sigma_adj);
  const BoundaryCondition aps_ker =
      BoundaryCondition::span(spectral_projector(a2, Interval::at_most(0.0)).basis);
  rep.at_most("aps_adjoint_is_aps_plus_kernel", bc_angle(aps_ad, aps_ker), tol.angle);

  const ChiralPair ch = chiral(a2, xi);
  const BoundaryCondition zero = BoundaryCondition::zero(2 * n);
  std::vector<std::pair<std::string, BoundaryCondition>> conds{
      {"aps", b_aps}, {"chiral_plus", ch.plus}, {"chiral_minus", ch.minus}, {"matching", md.diagonal}};
  for (int k = 0; k < 3; ++k)
    conds.emplace_back("random" + std::to_string(k),
                       BoundaryCondition::span(random_complex(ctx.rng, 2 * n, 1 + k % std::max<Index>(1, 2 * n - 1))));
  double green = 0.0, bidual = 0.0;
  for (const auto& [name, b] : conds) {
    const BoundaryCondition ad = adjoint_bc(b, sigma_adj);
    green = std::max(green, green_defect(b, ad, sigma0));
    bidual = std::max(bidual, bc_angle(adjoint_bc(ad, Mat(sigma_adj.adjoint())), b));
  }
  rep.at_most("green_compatibility", green, tol.angle);
  rep.at_most("biduality", bidual, tol.angle);

  rep.at_most("matching_adjoint_antidiagonal", bc_angle(adjoint_bc(md.diagonal, sigma_adj), md.antidiagonal),
              tol.angle);
  double chiral_err = 0.0;
  for (bool plus : {true, false}) {
    const BoundaryCondition pred = chiral_adjoint_predicted(a2, xi, sigma0, ChiralBranch::sigma_commutes_with_xi, plus);
    chiral_err = std::max(chiral_err, bc_angle(adjoint_bc(plus ? ch.plus : ch.minus, sigma_adj), pred));
  }
  rep.at_most("chiral_adjoint_predicted", chiral_err, tol.angle);

  double loc = 0.0, proj_green = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Index rank = 1 + k % std::max<Index>(1, 2 * n - 1);
    const Mat p = detail::random_idempotent(ctx.rng, 2 * n, rank);
    const Mat s = detail::random_invertible(ctx.rng, 2 * n);
    const Mat s_adj = ctx.cfg.mutation == Mutation::adjoint_sigma_identity ? Mat(Mat::Identity(2 * n, 2 * n)) : s;
    const ProjectionBcReport pr = projection_bc(a2, p, eps);
    const BoundaryCondition ad = adjoint_bc(pr.bc, s_adj);
    loc = std::max(loc, bc_angle(ad, projection_adjoint_local(p, s)));
    proj_green = std::max(proj_green, green_defect(pr.bc, ad, s));
  }
  rep.at_most("projection_adjoint_two_ways", loc, tol.angle);
  rep.at_most("projection_green_compatibility", proj_green, tol.angle);
  rep.at_most("projection_of_chi_minus_is_aps",
              bc_angle(projection_bc(a2, chi_minus(a2).matrix, eps).bc, b_aps), tol.angle);

  const RegularityReport r_aps = regularity_check(a2, b_aps, sigma0, eps);
  const RegularityReport r_zero = regularity_check(a2, zero, sigma0, eps);
  const RegularityReport r_plus = regularity_check(a2, ch.plus, sigma0, eps);
  const RegularityReport r_minus = regularity_check(a2, ch.minus, sigma0, eps);
  const RegularityReport r_match = regularity_check(a2, md.diagonal, sigma0, eps);
  rep.holds("regular[aps]", r_aps.a_regular);
  rep.holds("not_regular[zero]", !r_zero.a_regular);
  rep.holds("regular[chiral_plus]", r_plus.a_regular);
  rep.holds("regular[chiral_minus]", r_minus.a_regular);
  rep.holds("regular[matching]", r_match.a_regular);
  auto summary = [](const RegularityReport& r) {
    return json{{"a_semi_regular", r.a_semi_regular}, {"a_regular", r.a_regular},
                {"semi_growth", r.semi_growth},       {"regular_growth", r.regular_growth},
                {"projection_shortcut", r.projection_shortcut}};
  };
  rep.data["regularity"] = {{"aps", summary(r_aps)},
                            {"zero", summary(r_zero)},
                            {"chiral_plus", summary(r_plus)},
                            {"chiral_minus", summary(r_minus)},
                            {"matching", summary(r_match)}};
  return rep;
}

inline SuiteReport cylinder_suite(SuiteContext& ctx) {
  SuiteReport rep{"cylinder", {}, json::object()};
  const auto& cfg = ctx.cfg;
  const auto& tol = cfg.tol;
  const double eps = cfg.epsilon, T = cfg.cylinder.T;
  const EigenSystem& a = ctx.op.sys;
  const Index n = a.dim();
  const Mat sigma = random_unitary(ctx.rng, n);
  const Mat r0 = 0.3 * random_complex(ctx.rng, n, n);
  const Vec a0 = random_vector(ctx.rng, n), a1 = random_vector(ctx.rng, n);
  const Vec b0 = random_vector(ctx.rng, n), b1 = random_vector(ctx.rng, n);

  std::vector<double> sizes, greens, energies;
  json rows = json::array();
  for (Index f : {1, 2, 4}) {
    const CylinderGrid g(T, f * cfg.cylinder.nt);
    const auto op = CylinderOperator::with_remainder(g, a, sigma, [&](double t) { return Mat(t * r0); });
    CylinderSection u = CylinderSection::zeros(g, n), v = u;
    for (Index i = 0; i < g.nt(); ++i) {
      const double s = g.time(i) / T;
      const double cut = 1.0 - smoothstep5((s - 0.5) / 0.45);
      u.set(i, cut * (a0 + s * a1 + s * s * a0));
      v.set(i, cut * (b0 + s * s * b1 + s * s * s * b0));
    }
    sizes.push_back(static_cast<double>(g.nt()));
    greens.push_back(greens_residual(op, u, v));
    energies.push_back(energy_identity_residual(op, u));
    rows.push_back({{"nt", g.nt()}, {"green", greens.back()}, {"energy", energies.back()}});
  }
  rep.data["residuals"] = rows;
  rep.at_most("green_order", std::abs(detail::convergence_order(sizes, greens) - 2.0), tol.order);
  rep.at_most("energy_order", std::abs(detail::convergence_order(sizes, energies) - 2.0), tol.order);

  {
    const CylinderGrid g(1.0, 4 * cfg.cylinder.nt);
    const auto op = CylinderOperator::model(g, EigenSystem::diagonal({1.0}), Mat::Identity(1, 1));
    CylinderSection u = CylinderSection::zeros(g, 1);
    for (Index i = 0; i < g.nt(); ++i) u.set(i, Vec::Constant(1, 1.0 - g.time(i)));
    const EnergyTerms e = energy_terms(op, u);
    const double h2 = g.h() * g.h();
    rep.at_most("closed_form_lhs", std::abs(e.lhs - 1.0 / 3.0), h2);
    rep.at_most("closed_form_derivative", std::abs(e.derivative - 1.0), h2);
    rep.at_most("closed_form_potential", std::abs(e.potential - 1.0 / 3.0), h2);
    rep.at_most("closed_form_boundary", std::abs(e.boundary - 1.0), h2);
    rep.data["closed_form"] = {{"lhs", e.lhs}, {"derivative", e.derivative}, {"potential", e.potential},
                               {"boundary", e.boundary}, {"nt", g.nt()}};
  }

  const CylinderGrid g0(T, cfg.cylinder.nt);
  const double plateau = cfg.mutation == Mutation::eta_no_plateau ? 0.0 : 0.5;
  const CutoffProfile eta = CutoffProfile::make(g0, cfg.cylinder.rho, plateau, 0.75);
  rep.at_most("cutoff_plateau", eta.plateau_defect(g0), 0.0);
  rep.at_most("cutoff_tail", eta.tail_defect(g0), 0.0);
  {
    const auto op = CylinderOperator::model(g0, a, sigma);
    const Vec u0 = random_vector(ctx.rng, n);
    rep.at_most("extension_trace", (extension(op, eta, eps, u0).trace() - u0).norm(), 0.0);
    const AprioriReport ap = apriori_collar(op);
    const BoundaryCondition b = aps(a).dim() > 0 ? aps(a) : BoundaryCondition::full(n);
    const auto samples = apriori_samples(op, b, ap.td, 10, ctx.rng);
    const AprioriReport nb = near_boundary_apriori(op, b, samples, ap.td);
    rep.holds("apriori_constant_finite", std::isfinite(nb.constant) && nb.samples_used > 0);
    rep.data["apriori"] = {{"constant", nb.constant}, {"td", nb.td}, {"td_shrunk", nb.td_shrunk}};
  }

  // constants on the circle family under simultaneous doubling of N and nt
  const double shift = ctx.op.circle ? ctx.op.circle->shift : -0.5;
  const int n0 = ctx.op.circle ? ctx.op.circle->N : 8;
  const bool refinable = !ctx.op.circle || ctx.op.circle->potential.empty() || ctx.op.potential_expr;
  const std::optional<std::string> expr =
      ctx.op.circle ? ctx.op.potential_expr : std::optional<std::string>("0.5*cos(theta)");
  json consts = json::array();
  std::vector<std::array<double, 4>> vals;
  for (int f : {1, 2}) {
    if (f == 2 && !refinable) break;
    const EigenSystem af = (ctx.op.circle && !refinable) ? a : circle_dirac(circle_spec_at(f * n0, shift, expr));
    const CylinderGrid g(T, f * cfg.cylinder.nt);
    const Index d = af.dim();
    const auto op = CylinderOperator::with_remainder(g, af, Mat(cplx(0, 1) * Mat::Identity(d, d)),
                                                     [&](double t) { return Mat(0.5 * t * Mat::Identity(d, d)); });
    const CutoffProfile ef = CutoffProfile::make(g, cfg.cylinder.rho, plateau, 0.75);
    std::array<double, 4> v{trace_constant(op, trace_maximizers(op, Which::model, eps), Which::model, eps),
                            trace_constant(op, trace_maximizers(op, Which::full, eps), Which::full, eps),
                            extension_constant(op, ef, eps, Which::model), extension_constant(op, ef, eps, Which::full)};
    vals.push_back(v);
    consts.push_back({{"N", f * n0}, {"nt", g.nt()}, {"trace_model", v[0]}, {"trace_full", v[1]},
                      {"extension_model", v[2]}, {"extension_full", v[3]}});
  }
  rep.data["constants"] = consts;
  const char* names[4] = {"trace_model", "trace_full", "extension_model", "extension_full"};
  for (int k = 0; k < 4; ++k) {
    rep.holds(std::string("constant_finite[") + names[k] + "]", std::isfinite(vals[0][k]) && vals[0][k] > 0.0);
    if (vals.size() == 2)
      rep.at_most(std::string("constant_drift[") + names[k] + "]",
                  std::abs(vals[1][k] - vals[0][k]) / vals[0][k], tol.drift);
  }
  json curve = json::array();
  {
    const Index d = a.dim();
    const auto op = CylinderOperator::model(g0, a, Mat(cplx(0, 1) * Mat::Identity(d, d)));
    for (double frac : {0.25, 0.5, 0.75, 1.0}) {
      const CutoffProfile ef = CutoffProfile::make(g0, frac * T, plateau, 0.75);
      curve.push_back({{"rho", frac * T}, {"extension_model", extension_constant(op, ef, eps, Which::model)}});
    }
  }
  rep.data["constants_vs_rho"] = curve;

  const auto sv = h1_embedding_svals(g0, 0.5 * T, a);
  rep.holds("h1_embedding_descending", std::is_sorted(sv.rbegin(), sv.rend()) && sv.front() <= 1.0);
  json h1 = json::array();
  for (std::size_t j = 0; j < sv.size(); ++j) h1.push_back({{"index", j}, {"value", sv[j]}});
  rep.data["h1_embedding"] = h1;
  return rep;
}

inline SuiteReport callias_suite(SuiteContext& ctx) {
  SuiteReport rep{"callias", {}, json::object()};
  const auto& cp = ctx.cfg.callias;
  const double m = cp.mass;
  const auto x = uniform_grid(cp.x_range.first, cp.x_range.second, cp.samples);
  std::vector<double> phi;
  for (double xi : x) phi.push_back(m * std::tanh(xi));
  const CalliasReport kink = callias_check(kink_callias_spec(x, phi, cp.K, cp.Lambda));
  // pointwise 2x2 oracle: in each flavour sector phi^2 I +- phi' sigma1 has smallest eigenvalue phi^2 - |phi'|
  double oracle = INFINITY;
  for (double xi : x)
    if (outside(cp.K, xi)) {
      const double sech = 1.0 / std::cosh(xi);
      Eigen::Matrix2d blk;
      blk << std::pow(m * std::tanh(xi), 2), m * sech * sech, m * sech * sech, std::pow(m * std::tanh(xi), 2);
      oracle = std::min(oracle, Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(blk).eigenvalues()(0));
    }
  const double h = x[1] - x[0];
  rep.at_most("kink_margin_vs_oracle", std::abs(kink.min_outside - oracle), 10.0 * h * h * m);
  rep.holds("kink_verdict_vs_oracle", kink.verdict == (oracle >= cp.Lambda));
  rep.holds("kink_sign_symmetry", !kink.classical_verdict || (kink.verdict && kink.verdict_negated));
  json map = json::array();
  for (const auto& [xi, v] : kink.margin_map) map.push_back({{"x", xi}, {"min_eigenvalue", v}});
  rep.data["margin_map"] = map;
  rep.data["grid_spacing"] = h;

  {
    CalliasSpec s;
    s.phi.x = x;
    for (std::size_t i = 0; i < x.size(); ++i) s.phi.values.push_back(m * Mat::Identity(2, 2));
    s.symbol = pauli(1);
    s.K = std::nullopt;
    s.Lambda = m * m;
    const CalliasReport c1 = callias_check(s);
    s.Lambda = m * m * 1.01;
    const CalliasReport c2 = callias_check(s);
    rep.holds("constant_mass_passes_at_m2", c1.verdict && c1.commutator_defect == 0.0);
    rep.holds("constant_mass_fails_above_m2", !c2.verdict);
    for (auto& p : s.phi.values) p.setZero();
    s.Lambda = 1e-3;
    rep.holds("zero_potential_fails", !callias_check(s).verdict);
  }

  // para-Callias built from the kink: sigma0 = -i sigma2 (x) I, A = -i sigma3 d/dx (x) I, Psi = -sigma0 Phi0
  {
    const Mat sigma0 = cplx(0, -1) * kron(pauli(2), pauli(0));
    const BoundarySymbol sym{x, kron(pauli(3), pauli(0))};
    std::vector<Mat> psi;
    for (double p : phi) psi.push_back(-sigma0 * (p * kron(pauli(0), pauli(3))));
    const ParaCalliasReport pr = para_callias_check(sym, psi, cp.K, cp.Lambda);
    rep.holds("para_consistent_with_callias", pr.verdict == kink.verdict);
    rep.at_most("para_anticommutation", pr.anticommutator_defect, 1e-12);
    std::mt19937_64& rng = ctx.rng;
    const Mat h0 = random_hermitian(rng, 3), f0 = random_hermitian(rng, 3);
    const Mat a = kron(pauli(3), h0), s0 = cplx(0, -1) * kron(pauli(2), Mat::Identity(3, 3));
    const Mat phi0 = kron(pauli(0), f0);
    rep.at_most("para_reduction_identity", para_reduction_defect(a, s0, phi0), 1e-12);
  }

  {
    const auto xs = uniform_grid(-10.0, 10.0, 2001);
    const BoundarySymbol sym{xs, pauli(3)};
    std::vector<Mat> grow, bounded, big;
    for (double xi : xs) {
      grow.push_back(cplx(0, 1) * xi * pauli(2));
      bounded.push_back(cplx(0, 1) * std::tanh(xi) * pauli(2));
      big.push_back(cplx(0, 10) * Mat::Identity(2, 2));
    }
    const std::vector<double> rs{1.0, 4.0, 16.0, 64.0};
    const auto kg = strongly_para_profile(sym, grow, rs);
    bool monotone = true, sqrt_growth = true;
    for (std::size_t i = 0; i < kg.size(); ++i) {
      if (i > 0 && kg[i].half_width < kg[i - 1].half_width) monotone = false;
      if (kg[i].unbounded || std::abs(kg[i].half_width - std::sqrt(rs[i] + 1.0)) > 0.02) sqrt_growth = false;
    }
    rep.holds("profile_monotone", monotone);
    rep.holds("profile_sqrt_growth", sqrt_growth);
    const auto kb = strongly_para_profile(sym, bounded, {4.0});
    rep.holds("profile_bounded_unbounded", kb.front().unbounded);
    const auto kc = strongly_para_profile(sym, big, {100.0});
    rep.holds("profile_constant_empty", kc.front().empty);
  }

  const auto lin = discreteness_proxy([](Index k) { return line_dirac_hermite(k, [](double s) { return s; }); },
                                      cp.truncations);
  const auto neg = discreteness_proxy(
      [](Index k) { return line_dirac_hermite(k, [](double s) { return std::tanh(s); }); }, cp.truncations);
  rep.at_most("discreteness_stabilizes", lin.max_change.back(), 1e-6);
  rep.holds("discreteness_flags_bounded_control", !neg.stabilized);
  rep.data["discreteness"] = {{"linear_change", lin.max_change.back()}, {"bounded_change", neg.max_change.back()},
                              {"linear_counts", lin.counting}, {"bounded_counts", neg.counting}};

  {
    const MultiplierReport one = multiplier_halfnorm_check(8, -0.5, [](double) { return 1.0; }, ctx.cfg.epsilon, 10,
                                                           ctx.rng);
    rep.at_least("multiplier_identity_constant", one.c_prime, 1.0 - 1e-12);
    auto bump = [](double th) { return std::exp(-4.0 * (1.0 - std::cos(th))); };
    const MultiplierReport b1 = multiplier_halfnorm_check(8, -0.5, bump, ctx.cfg.epsilon, 10, ctx.rng);
    const MultiplierReport b2 = multiplier_halfnorm_check(16, -0.5, bump, ctx.cfg.epsilon, 10, ctx.rng);
    rep.holds("multiplier_sampled_below_norm",
              b1.sampled_max <= b1.operator_norm * (1 + 1e-12) && b2.sampled_max <= b2.operator_norm * (1 + 1e-12));
    rep.at_most("multiplier_constant_drift", std::abs(b2.c_prime - b1.c_prime) / b1.c_prime, ctx.cfg.tol.drift);
    rep.data["multiplier"] = {{"c_prime_N8", b1.c_prime}, {"c_prime_N16", b2.c_prime}};
  }
  return rep;
}

inline json index_json(const IndexReport& r) {
  return json{{"kernel_dim", r.kernel_dim},
              {"cokernel_dim", r.cokernel_dim},
              {"index", r.index},
              {"sval_gap", r.sval_gap},
              {"coercivity_margin", r.coercivity_margin},
              {"tol_stability", r.tol_stable},
              {"kernel_dims_by_tol", r.kernel_dims_by_tol},
              {"oracle_index", r.oracle_index ? json(*r.oracle_index) : json(nullptr)}};
}

/// Index of the flow D = sigma0 (d/dt + A + c t) on [0, L] with APS at 0 and the nonnegative condition at L.
inline IndexReport flow_index(const EigenSystem& a, double c, double L, double tol = 1e-8) {
  const Index d = a.dim();
  const auto op = spectral_flow_operator(a, c, L, flow_grid_size(a, c, L), Mat(cplx(0, 1) * Mat::Identity(d, d)));
  IndexReport r = index(op, aps(a), far_end_nonnegative(forward_system(op).generator.back()), tol);
  r.oracle_index = aps_index_oracle(a.eigenvalues(), c, L);
  return r;
}

inline SuiteReport fredholm_suite(SuiteContext& ctx) {
  SuiteReport rep{"fredholm", {}, json::object()};
  const auto& cfg = ctx.cfg;
  const double c = cfg.flow.c, L = cfg.flow.L, tol = cfg.tol.kernel;
  const EigenSystem& a = ctx.op.sys;
  const IndexReport main = flow_index(a, c, L, tol);
  rep.equal("index_vs_oracle", main.index, *main.oracle_index);
  rep.holds("kernel_tol_stable", main.tol_stable);
  rep.at_most("cokernel_range_pairing", main.cokernel_range_pairing, 1e-8);
  rep.data["index"] = index_json(main);

  const IndexReport rev = flow_index(a, -c, L, tol);
  rep.equal("reversed_flow_vs_oracle", rev.index, *rev.oracle_index);

  {
    const Index d = a.dim();
    const auto op = spectral_flow_operator(a, c, L, flow_grid_size(a, c, L), Mat(cplx(0, 1) * Mat::Identity(d, d)));
    const BoundaryCondition b0 = aps(a), b1 = far_end_nonnegative(forward_system(op).generator.back());
    const Index k_fwd = kernel_dim(assemble(forward_system(op), b0, b1), tol);
    const Index k_adj = kernel_dim(
        assemble(adjoint_system(op), adjoint_bc(b0, op.sigma0()), adjoint_bc(b1, op.sigma(op.grid().nt() - 1))), tol);
    rep.equal("adjoint_problem_negates_index", static_cast<long>(k_adj) - static_cast<long>(k_fwd), -main.index);
  }

  if (cfg.flow.sweep) {
    json sweep = json::array();
    long mismatches = 0;
    for (double shift : {-0.5, -0.25, -0.75})
      for (double cc : {0.4, 1.0, 2.0})
        for (int N : {3, 5, 7}) {
          const IndexReport r = flow_index(circle_dirac({N, shift, {}}), cc, 1.0, tol);
          if (r.index != *r.oracle_index || !r.tol_stable) ++mismatches;
          sweep.push_back({{"shift", shift}, {"c", cc}, {"N", N}, {"index", r.index}, {"oracle", *r.oracle_index}});
        }
    rep.equal("sweep_mismatches", mismatches, 0);
    rep.data["index_sweep"] = sweep;
  }

  {
    const double shift = ctx.op.circle ? ctx.op.circle->shift : -0.5;
    json gaps = json::array();
    double gmin = INFINITY, gmax = 0.0;
    bool kernels_ok = true;
    for (int N : {4, 8, 16}) {
      const EigenSystem an = circle_dirac({N, shift, {}});
      const Index d = an.dim();
      const auto op = spectral_flow_operator(an, 2.0, 1.0, flow_grid_size(an, 2.0, 1.0),
                                             Mat(cplx(0, 1) * Mat::Identity(d, d)));
      const auto sys = forward_system(op);
      const SemiFredholmReport sf = semifredholm_report(sys, aps(an), far_end_nonnegative(sys.generator.back()), tol);
      kernels_ok = kernels_ok && static_cast<int>(sf.kernel_dim) == aps_index_oracle(an.eigenvalues(), 2.0, 1.0);
      gmin = std::min(gmin, sf.sval_gap);
      gmax = std::max(gmax, sf.sval_gap);
      gaps.push_back({{"N", N}, {"kernel_dim", sf.kernel_dim}, {"sval_gap", sf.sval_gap},
                      {"b0_semi_regular", sf.b0_semi_regular}, {"h1_tail", sf.h1_tail}});
    }
    rep.holds("semifredholm_kernel_matches_oracle", kernels_ok);
    rep.at_least("semifredholm_gap_ratio", gmin / gmax, 0.25);
    rep.data["semifredholm"] = gaps;

    const EigenSystem a16 = circle_dirac({16, shift, {}});
    Vec heavy = Vec::Zero(a16.dim());
    for (Index j : a16.indices_in(Interval::nonnegative())) heavy += a16.eigenvectors().col(j);
    const BoundaryCondition toy = BoundaryCondition::span(heavy);
    const Index d = a16.dim();
    const auto op = spectral_flow_operator(a16, 2.0, 1.0, flow_grid_size(a16, 2.0, 1.0),
                                           Mat(cplx(0, 1) * Mat::Identity(d, d)));
    const auto sys = forward_system(op);
    const SemiFredholmReport sf = semifredholm_report(sys, toy, far_end_nonnegative(sys.generator.back()), tol);
    rep.holds("non_semi_regular_toy_flagged", !sf.b0_semi_regular);
  }

  {
    const CylinderGrid g(1.0, 24);
    const auto op = CylinderOperator::model(g, EigenSystem::diagonal({-1.0, 1.5}), Mat::Identity(2, 2));
    const BoundaryCondition b = BoundaryCondition::full(2);
    const double m0 = exact_coercivity_margin(op, b, KMask::none(24, 2));
    const double m1 = exact_coercivity_margin(op, b, KMask::modes_until(g, 2, {0}, 0.5));
    const double m2 = exact_coercivity_margin(op, b, KMask::modes_until(g, 2, {0, 1}, 0.5));
    rep.holds("coercivity_monotone_in_mask", m0 <= m1 * (1 + 1e-10) && m1 <= m2 * (1 + 1e-10));
    rep.data["coercivity"] = {{"none", m0}, {"mode0", m1}, {"modes01", m2}};
  }
  return rep;
}

inline SuiteReport run_one_suite(const std::string& name, SuiteContext& ctx) {
  if (name == "calculus") return calculus_suite(ctx);
  if (name == "czech") return czech_suite(ctx);
  if (name == "bc") return bc_suite(ctx);
  if (name == "cylinder") return cylinder_suite(ctx);
  if (name == "callias") return callias_suite(ctx);
  if (name == "fredholm") return fredholm_suite(ctx);
  throw ConfigError("unknown suite '" + name + "'");
}

inline json tolerances_json(const Tolerances& t) {
  return json{{"identity", t.identity}, {"quadratic", t.quadratic}, {"duality", t.duality}, {"angle", t.angle},
              {"rellich", t.rellich},   {"kernel", t.kernel},       {"order", t.order},     {"drift", t.drift}};
}

inline json suite_json(const SuiteReport& r, const RunConfig& cfg, const BuiltOperator& op) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  json trunc{{"dim", op.sys.dim()}, {"nt", cfg.cylinder.nt}, {"hermite", cfg.callias.truncations}};
  if (op.circle) trunc["N"] = op.circle->N;
  return json{{"schema", kSchemaVersion},
              {"suite", r.suite},
              {"config_hash", config_hash(cfg.source)},
              {"seed", cfg.seed},
              {"epsilon", cfg.epsilon},
              {"tolerances", tolerances_json(cfg.tol)},
              {"truncation", trunc},
              {"mutation", to_string(cfg.mutation)},
              {"checks", checks},
              {"passed", static_cast<Index>(r.checks.size()) - r.failed()},
              {"failed", r.failed()},
              {"pass", r.pass()},
              {"data", r.data}};
}

struct RunResult {
  int exit_code = 0;
  std::vector<json> reports;
  json summary;
};

/// Runs the selected suites concurrently; exit code 0 iff every check passes, 1 otherwise.
inline RunResult run_suites(const RunConfig& cfg, std::vector<std::string> names = {}) {
  if (names.empty()) names = cfg.suites;
  if (names.empty()) names = known_suites();
  for (const auto& n : names)
    if (std::find(known_suites().begin(), known_suites().end(), n) == known_suites().end())
      throw ConfigError("unknown suite '" + n + "'");
  const BuiltOperator op = build_operator(cfg.op);
  std::vector<std::future<SuiteReport>> jobs;
  for (const auto& n : names) {
    const auto pos = std::find(known_suites().begin(), known_suites().end(), n) - known_suites().begin();
    const std::uint64_t seed = cfg.seed * 1000003ull + static_cast<std::uint64_t>(pos);
    jobs.push_back(std::async(std::launch::async, [&cfg, &op, n, seed] {
      SuiteContext ctx{cfg, op, std::mt19937_64(seed)};
      try {
        return run_one_suite(n, ctx);
      } catch (const std::exception& e) {
        SuiteReport r{n, {}, json::object()};
        r.holds("completed", false);
        r.data["error"] = e.what();
        return r;
      }
    }));
  }
  RunResult out;
  json per = json::object();
  Index passed = 0, failed = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const SuiteReport r = jobs[i].get();
    out.reports.push_back(suite_json(r, cfg, op));
    const Index f = r.failed();
    passed += static_cast<Index>(r.checks.size()) - f;
    failed += f;
    per[r.suite] = {{"pass", r.pass()}, {"passed", static_cast<Index>(r.checks.size()) - f}, {"failed", f}};
    if (r.suite == "fredholm" && r.data.contains("index")) {
      out.summary["index"] = r.data["index"]["index"];
      out.summary["oracle_index"] = r.data["index"]["oracle_index"];
    }
  }
  out.exit_code = failed == 0 ? 0 : 1;
  out.summary["schema"] = kSchemaVersion;
  out.summary["config_hash"] = config_hash(cfg.source);
  out.summary["seed"] = cfg.seed;
  out.summary["epsilon"] = cfg.epsilon;
  out.summary["mutation"] = to_string(cfg.mutation);
  out.summary["suites"] = per;
  out.summary["passed"] = passed;
  out.summary["failed"] = failed;
  out.summary["exit_code"] = out.exit_code;
  return out;
}

/// Unknown plot kind.
class PlotKindError : public InputError {
public:
  using InputError::InputError;
};

struct PlotTable {
  const char* data_key;
  std::vector<std::string> columns;  // also the field names inside each data row
};

inline const std::map<std::string, PlotTable>& plot_kinds() {
  static const std::map<std::string, PlotTable> k{
      {"rellich", {"rellich", {"eigenvalue", "value"}}},
      {"h1_embedding", {"h1_embedding", {"index", "value"}}},
      {"constants", {"constants", {"N", "nt", "trace_model", "trace_full", "extension_model", "extension_full"}}},
      {"constants_vs_rho", {"constants_vs_rho", {"rho", "extension_model"}}},
      {"callias_margin", {"margin_map", {"x", "min_eigenvalue"}}},
      {"residuals", {"residuals", {"nt", "green", "energy"}}},
      {"index_sweep", {"index_sweep", {"shift", "c", "N", "index", "oracle"}}},
  };
  return k;
}

/// CSV table of one plot kind from a suite report; a report without the data yields the header only.
inline std::string emit_plot_data(const json& report, const std::string& kind) {
  const auto it = plot_kinds().find(kind);
  if (it == plot_kinds().end()) throw PlotKindError("unknown plot kind '" + kind + "'");
  const PlotTable& t = it->second;
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  if (!report.is_object() || !report.contains("data") || !report["data"].contains(t.data_key)) return os.str();
  for (const json& row : report["data"][t.data_key]) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      if (i) os << ',';
      const json& v = row.at(t.columns[i]);
      if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        os << buf;
      } else {
        os << v.dump();
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace sbvp
