#pragma once

#include "sbvp/boundary_conditions.hpp"

#include <vector>

namespace sbvp {

/// Uniform time grid t_i = i h on [0, T], h = T / (nt - 1).
class CylinderGrid {
public:
  CylinderGrid() = default;
  CylinderGrid(double T, Index nt) : T_(T), nt_(nt) {
    require(std::isfinite(T) && T > 0.0, "CylinderGrid: T must be positive");
    require(nt >= 8, "CylinderGrid: need at least 8 samples");
  }
  double T() const { return T_; }
  Index nt() const { return nt_; }
  double h() const { return T_ / static_cast<double>(nt_ - 1); }
  double time(Index i) const { return static_cast<double>(i) * h(); }
  /// Trapezoid weights.
  RVec weights() const {
    RVec w = RVec::Constant(nt_, h());
    w(0) *= 0.5;
    w(nt_ - 1) *= 0.5;
    return w;
  }
  bool operator==(const CylinderGrid& o) const { return T_ == o.T_ && nt_ == o.nt_; }

private:
  double T_ = 1.0;
  Index nt_ = 8;
};

/// Samples of a section u(t) on the grid: row i holds u(t_i).
struct CylinderSection {
  CylinderGrid grid;
  Mat values;

  static CylinderSection zeros(const CylinderGrid& g, Index dim) { return {g, Mat::Zero(g.nt(), dim)}; }
  Index dim() const { return values.cols(); }
  Vec at(Index i) const { return values.row(i).transpose(); }
  void set(Index i, const Vec& v) { values.row(i) = v.transpose(); }
  Vec trace() const { return at(0); }
};

namespace detail {
inline void check_section(const CylinderSection& u, const CylinderGrid& g, Index dim) {
  if (!(u.grid == g)) throw InputError("section grid does not match operator grid");
  if (u.values.rows() != g.nt() || u.values.cols() != dim) throw InputError("section shape mismatch");
}
}  // namespace detail

/// Dense second-order first-derivative matrix: centred inside, one-sided three-point at both ends.
inline Eigen::MatrixXd difference_matrix(Index nt, double h) {
  require(nt >= 3, "difference_matrix: need three samples");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nt, nt);
  const double c = 1.0 / (2.0 * h);
  d(0, 0) = -3.0 * c;
  d(0, 1) = 4.0 * c;
  d(0, 2) = -c;
  for (Index i = 1; i + 1 < nt; ++i) {
    d(i, i - 1) = -c;
    d(i, i + 1) = c;
  }
  d(nt - 1, nt - 1) = 3.0 * c;
  d(nt - 1, nt - 2) = -4.0 * c;
  d(nt - 1, nt - 3) = c;
  return d;
}

/// Time derivative of sampled rows with the stencil of `difference_matrix`.
inline Mat time_derivative(const Mat& rows, double h) {
  const Index n = rows.rows();
  require(n >= 3, "time_derivative: need three samples");
  Mat d(n, rows.cols());
  const double c = 1.0 / (2.0 * h);
  d.row(0) = c * (-3.0 * rows.row(0) + 4.0 * rows.row(1) - rows.row(2));
  for (Index i = 1; i + 1 < n; ++i) d.row(i) = c * (rows.row(i + 1) - rows.row(i - 1));
  d.row(n - 1) = c * (3.0 * rows.row(n - 1) - 4.0 * rows.row(n - 2) + rows.row(n - 3));
  return d;
}

/// Trapezoid L^2 inner product <u, v> = int v(t)^H u(t) dt.
inline cplx l2_inner(const CylinderGrid& g, const Mat& u, const Mat& v) {
  const RVec w = g.weights();
  cplx s = 0.0;
  for (Index i = 0; i < g.nt(); ++i) s += w(i) * v.row(i).dot(u.row(i));
  return s;
}

inline double l2_norm(const CylinderGrid& g, const Mat& u) { return std::sqrt(std::max(0.0, l2_inner(g, u, u).real())); }

/// D = sigma_t (d/dt + A + R_t) sampled on a cylinder grid; the model operator has R = 0 and sigma_t = sigma0.
class CylinderOperator {
public:
  CylinderOperator() = default;

  static CylinderOperator model(const CylinderGrid& g, EigenSystem a, const Mat& sigma0) {
    std::vector<Mat> s(g.nt(), sigma0);
    std::vector<Mat> r(g.nt(), Mat::Zero(a.dim(), a.dim()));
    return CylinderOperator(g, std::move(a), std::move(s), std::move(r));
  }

  static CylinderOperator general(const CylinderGrid& g, EigenSystem a, std::vector<Mat> sigma_t,
                                  std::vector<Mat> remainder_t) {
    return CylinderOperator(g, std::move(a), std::move(sigma_t), std::move(remainder_t));
  }

  /// Model operator plus a remainder R_t = f(t) given per sample.
  template <class F>
  static CylinderOperator with_remainder(const CylinderGrid& g, EigenSystem a, const Mat& sigma0, F&& remainder) {
    std::vector<Mat> s(g.nt(), sigma0), r;
    for (Index i = 0; i < g.nt(); ++i) r.push_back(remainder(g.time(i)));
    return CylinderOperator(g, std::move(a), std::move(s), std::move(r));
  }

  const CylinderGrid& grid() const { return grid_; }
  const EigenSystem& a() const { return a_; }
  Index dim() const { return a_.dim(); }
  const Mat& sigma(Index i) const { return sigma_[i]; }
  const Mat& sigma0() const { return sigma_.front(); }
  const Mat& remainder(Index i) const { return remainder_[i]; }
  const std::vector<Mat>& sigmas() const { return sigma_; }
  const std::vector<Mat>& remainders() const { return remainder_; }
  /// max over t of max(|sigma_t|, |sigma_t^{-1}|).
  double sigma_bound() const { return sigma_bound_; }
  bool has_remainder() const {
    for (const Mat& r : remainder_)
      if (r.cwiseAbs().maxCoeff() != 0.0) return true;
    return false;
  }

private:
  CylinderOperator(const CylinderGrid& g, EigenSystem a, std::vector<Mat> s, std::vector<Mat> r)
      : grid_(g), a_(std::move(a)), sigma_(std::move(s)), remainder_(std::move(r)) {
    const Index n = a_.dim();
    require(static_cast<Index>(sigma_.size()) == g.nt(), "CylinderOperator: one sigma per time sample");
    require(static_cast<Index>(remainder_.size()) == g.nt(), "CylinderOperator: one remainder per time sample");
    for (Index i = 0; i < g.nt(); ++i) {
      require(sigma_[i].rows() == n && sigma_[i].cols() == n, "CylinderOperator: sigma shape");
      require(remainder_[i].rows() == n && remainder_[i].cols() == n, "CylinderOperator: remainder shape");
      const double cn = condition_number(sigma_[i]);
      if (!(cn < kMaxSigmaCondition)) throw DomainError("CylinderOperator: sigma_t not invertible");
      Eigen::JacobiSVD<Mat> svd(sigma_[i]);
      const auto& sv = svd.singularValues();
      sigma_bound_ = std::max({sigma_bound_, sv(0), 1.0 / sv(sv.size() - 1)});
    }
  }

  CylinderGrid grid_;
  EigenSystem a_;
  std::vector<Mat> sigma_;
  std::vector<Mat> remainder_;
  double sigma_bound_ = 0.0;
};

enum class Which { model, full };

namespace detail {
inline Mat apply_generator(const CylinderOperator& op, const Mat& u, Which which) {
  const Mat a_t = op.a().matrix().transpose();
  Mat out = time_derivative(u, op.grid().h()) + u * a_t;
  if (which == Which::full)
    for (Index i = 0; i < op.grid().nt(); ++i) out.row(i) += (op.remainder(i) * u.row(i).transpose()).transpose();
  for (Index i = 0; i < op.grid().nt(); ++i) {
    const Mat& s = which == Which::full ? op.sigma(i) : op.sigma0();
    out.row(i) = (s * out.row(i).transpose()).transpose();
  }
  return out;
}
}  // namespace detail

/// D0 u = sigma0 (u' + A u).
inline CylinderSection apply_model(const CylinderOperator& op, const CylinderSection& u) {
  detail::check_section(u, op.grid(), op.dim());
  return {op.grid(), detail::apply_generator(op, u.values, Which::model)};
}

/// D u = sigma_t (u' + A u + R_t u).
inline CylinderSection apply_full(const CylinderOperator& op, const CylinderSection& u) {
  detail::check_section(u, op.grid(), op.dim());
  return {op.grid(), detail::apply_generator(op, u.values, Which::full)};
}

inline CylinderSection apply(const CylinderOperator& op, const CylinderSection& u, Which which) {
  return which == Which::model ? apply_model(op, u) : apply_full(op, u);
}

/// Formal adjoint D^dagger v = -(sigma_t^H v)' + (A + R_t^H) sigma_t^H v, the time derivative
/// discretised with the same stencil as D.
inline CylinderSection apply_formal_adjoint(const CylinderOperator& op, const CylinderSection& v, Which which) {
  detail::check_section(v, op.grid(), op.dim());
  const Index nt = op.grid().nt();
  Mat w(nt, op.dim());
  for (Index i = 0; i < nt; ++i) {
    const Mat& s = which == Which::full ? op.sigma(i) : op.sigma0();
    w.row(i) = (s.adjoint() * v.values.row(i).transpose()).transpose();
  }
  Mat out = -time_derivative(w, op.grid().h()) + w * op.a().matrix().transpose();
  if (which == Which::full)
    for (Index i = 0; i < nt; ++i) out.row(i) += (op.remainder(i).adjoint() * w.row(i).transpose()).transpose();
  return {op.grid(), out};
}

inline double graph_norm(const CylinderOperator& op, const CylinderSection& u, Which which) {
  const double a = l2_norm(op.grid(), u.values);
  const double b = l2_norm(op.grid(), apply(op, u, which).values);
  return std::sqrt(a * a + b * b);
}

namespace detail {
inline bool rows_vanish(const Mat& m, Index from) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Index i = from; i < m.rows(); ++i)
    if (m.row(i).cwiseAbs().maxCoeff() > 1e-14 * scale) return false;
  return true;
}
}  // namespace detail

/// | <Du, v> - <u, D^dagger v> + <sigma0 u(0), v(0)> | for sections vanishing in the last two samples.
inline double greens_residual(const CylinderOperator& op, const CylinderSection& u, const CylinderSection& v,
                              Which which = Which::full) {
  detail::check_section(u, op.grid(), op.dim());
  detail::check_section(v, op.grid(), op.dim());
  const Index nt = op.grid().nt();
  if (!detail::rows_vanish(u.values, nt - 2) || !detail::rows_vanish(v.values, nt - 2))
    throw InputError("greens_residual: sections must vanish in the last two samples");
  const cplx lhs = l2_inner(op.grid(), apply(op, u, which).values, v.values) -
                   l2_inner(op.grid(), u.values, apply_formal_adjoint(op, v, which).values);
  const cplx bdy = pairing(Vec(op.sigma0() * u.trace()), v.trace());
  return std::abs(lhs + bdy);
}

struct EnergyTerms {
  double lhs = 0.0;        // |u' + Au|^2
  double derivative = 0.0; // |u'|^2
  double potential = 0.0;  // |Au|^2
  double boundary = 0.0;   // <A u(0), u(0)>
  double residual() const { return std::abs(lhs - (derivative + potential - boundary)); }
};

/// Terms of |u' + Au|^2 = |u'|^2 + |Au|^2 - <A u(0), u(0)> for u vanishing at t = T.
inline EnergyTerms energy_terms(const CylinderOperator& op, const CylinderSection& u) {
  detail::check_section(u, op.grid(), op.dim());
  if (!detail::rows_vanish(u.values, op.grid().nt() - 1))
    throw InputError("energy_identity_residual: section must vanish at t = T");
  const Mat du = time_derivative(u.values, op.grid().h());
  const Mat au = u.values * op.a().matrix().transpose();
  const auto& g = op.grid();
  EnergyTerms e;
  e.lhs = std::pow(l2_norm(g, du + au), 2);
  e.derivative = std::pow(l2_norm(g, du), 2);
  e.potential = std::pow(l2_norm(g, au), 2);
  e.boundary = pairing(Vec(op.a().matrix() * u.trace()), u.trace()).real();
  return e;
}

inline double energy_identity_residual(const CylinderOperator& op, const CylinderSection& u) {
  return energy_terms(op, u).residual();
}

inline double smoothstep5(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

/// Time cutoff: 1 on [0, plateau * rho], 0 on [support * rho, T], quintic blend in between.
struct CutoffProfile {
  double rho = 0.0;
  double plateau = 0.5;
  double support = 0.75;
  RVec values;

  static CutoffProfile make(const CylinderGrid& g, double rho, double plateau = 0.5, double support = 0.75) {
    if (!(rho > 0.0) || rho > g.T()) throw InputError("CutoffProfile: need 0 < rho <= T");
    require(plateau >= 0.0 && support > plateau && support <= 1.0, "CutoffProfile: bad plateau/support fractions");
    CutoffProfile c{rho, plateau, support, RVec(g.nt())};
    const double a = plateau * rho, b = support * rho;
    for (Index i = 0; i < g.nt(); ++i) c.values(i) = 1.0 - smoothstep5((g.time(i) - a) / (b - a));
    return c;
  }
  /// Largest deviation from 1 on samples in [0, rho/2].
  double plateau_defect(const CylinderGrid& g) const {
    double d = 0.0;
    for (Index i = 0; i < g.nt(); ++i)
      if (g.time(i) <= 0.5 * rho) d = std::max(d, std::abs(values(i) - 1.0));
    return d;
  }
  /// Largest value on samples in [3 rho / 4, T].
  double tail_defect(const CylinderGrid& g) const {
    double d = 0.0;
    for (Index i = 0; i < g.nt(); ++i)
      if (g.time(i) >= 0.75 * rho) d = std::max(d, std::abs(values(i)));
    return d;
  }
};

/// E u0 (t) = eta(t) exp(-t (|A| + eps)) u0.
inline CylinderSection extension(const CylinderOperator& op, const CutoffProfile& eta, double eps, const Vec& u0) {
  op.a().check_dim(u0.size());
  require(eta.values.size() == op.grid().nt(), "extension: cutoff profile does not match grid");
  detail::check_eps(eps);
  CylinderSection s = CylinderSection::zeros(op.grid(), op.dim());
  const Vec c = op.a().to_eigen(u0);
  const RVec mag = op.a().eigenvalues().cwiseAbs().array() + eps;
  for (Index i = 0; i < op.grid().nt(); ++i) {
    if (eta.values(i) == 0.0) continue;
    const double t = op.grid().time(i);
    if (t == 0.0 && eta.values(i) == 1.0) {
      s.set(i, u0);
      continue;
    }
    Vec ci(c.size());
    for (Index j = 0; j < c.size(); ++j) ci(j) = c(j) * std::exp(-t * mag(j));
    s.set(i, eta.values(i) * op.a().from_eigen(ci));
  }
  return s;
}

/// max over samples of czech_norm(u(0)) / |u|_D.
inline double trace_constant(const CylinderOperator& op, const std::vector<CylinderSection>& samples, Which which,
                             double eps = kDefaultEps) {
  require(!samples.empty(), "trace_constant: no samples");
  double c = 0.0;
  for (const auto& u : samples) {
    detail::check_section(u, op.grid(), op.dim());
    if (!detail::rows_vanish(u.values, op.grid().nt() - 1))
      throw InputError("trace_constant: samples must vanish at t = T");
    const double g = graph_norm(op, u, which);
    if (g == 0.0) continue;
    c = std::max(c, czech_norm(op.a(), u.trace(), eps) / g);
  }
  return c;
}

namespace detail {
/// Diagonal of R_t in the eigenbasis of A; throws when the operator does not split into modes.
inline Eigen::MatrixXcd mode_remainders(const CylinderOperator& op, Which which) {
  const Index n = op.dim(), nt = op.grid().nt();
  const Mat& u = op.a().eigenvectors();
  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(nt, n);
  for (Index i = 0; i < nt; ++i) {
    const Mat& s = which == Which::full ? op.sigma(i) : op.sigma0();
    if ((s.adjoint() * s - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
      throw InputError("mode decomposition needs unitary sigma_t");
    if (which == Which::model) continue;
    const Mat r = u.adjoint() * op.remainder(i) * u;
    const Mat off = r - Mat(r.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, r.cwiseAbs().maxCoeff()))
      throw InputError("mode decomposition needs R_t diagonal in the eigenbasis of A");
    diag.row(i) = r.diagonal().transpose();
  }
  return diag;
}
}  // namespace detail

/// Per-eigenmode maximisers of czech_norm(u(0)) / |u|_D over sections vanishing at t = T.
/// Requires unitary sigma_t and R_t diagonal in the eigenbasis of A.
inline std::vector<CylinderSection> trace_maximizers(const CylinderOperator& op, Which which,
                                                     double eps = kDefaultEps) {
  const Index n = op.dim(), nt = op.grid().nt();
  const Eigen::MatrixXcd rdiag = detail::mode_remainders(op, which);
  const Eigen::MatrixXd dm = difference_matrix(nt, op.grid().h());
  const RVec w = op.grid().weights();
  std::vector<CylinderSection> out;
  for (Index j = 0; j < n; ++j) {
    Mat d = dm.cast<cplx>();
    for (Index i = 0; i < nt; ++i) d(i, i) += op.a().eigenvalue(j) + rdiag(i, j);
    const Mat gram = Mat(w.cast<cplx>().asDiagonal()) + d.adjoint() * w.cast<cplx>().asDiagonal() * d;
    const Mat red = gram.topLeftCorner(nt - 1, nt - 1);
    Vec e0 = Vec::Zero(nt - 1);
    e0(0) = 1.0;
    const Vec phi = red.ldlt().solve(e0);
    CylinderSection s = CylinderSection::zeros(op.grid(), n);
    const Vec ej = op.a().eigenvectors().col(j);
    for (Index i = 0; i + 1 < nt; ++i) s.set(i, phi(i) * ej);
    out.push_back(std::move(s));
  }
  return out;
}

/// Best constant in |E u0|_D <= C czech_norm(u0), from the generalised eigenproblem over all u0.
inline double extension_constant(const CylinderOperator& op, const CutoffProfile& eta, double eps, Which which) {
  const Index n = op.dim();
  std::vector<CylinderSection> s, ds;
  for (Index k = 0; k < n; ++k) {
    s.push_back(extension(op, eta, eps, Vec::Unit(n, k)));
    ds.push_back(apply(op, s.back(), which));
  }
  Mat gram(n, n);
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l <= k; ++l) {
      gram(k, l) = l2_inner(op.grid(), s[l].values, s[k].values) + l2_inner(op.grid(), ds[l].values, ds[k].values);
      gram(l, k) = std::conj(gram(k, l));
    }
  return std::sqrt(max_generalized_eig(gram, czech_gram(op.a(), eps)));
}

struct RemainderReport {
  double constant = 0.0;           // sup_t C_t
  std::vector<double> per_slice;   // C_t with |R_t u|^2 <= C_t^2 (t^2 |Au|^2 + |u|^2)
};

/// Smallest C with |R_t u|^2 <= C^2 (t^2 |A u|^2 + |u|^2); it also gives |R_t u| <= C t |A u| + C |u|.
inline RemainderReport remainder_constant(const CylinderOperator& op) {
  RemainderReport r;
  const Mat a = op.a().matrix();
  const Index n = op.dim();
  for (Index i = 0; i < op.grid().nt(); ++i) {
    const double t = op.grid().time(i);
    const Mat& rt = op.remainder(i);
    const Mat den = t * t * a.adjoint() * a + Mat::Identity(n, n);
    const double c = std::sqrt(std::max(0.0, max_generalized_eig(rt.adjoint() * rt, den)));
    r.per_slice.push_back(c);
    r.constant = std::max(r.constant, c);
  }
  return r;
}

struct AprioriReport {
  double constant = 0.0;       // max (|u| + |u'| + |Au|) / |u|_D over the samples
  double remainder_c = 0.0;    // remainder constant C
  double c1 = 0.0;             // 2 max |sigma_t^{-1}|^2
  double c2 = 0.0;             // 4 C^2
  double td_bound = 0.0;       // min(T, 1 / sqrt(2 C2))
  double td = 0.0;
  bool td_shrunk = false;      // T_d had to be taken below T
  Index samples_used = 0;
};

/// Collar width for the near-boundary estimate, 0.9 * min(T, 1 / sqrt(2 C2)).
inline AprioriReport apriori_collar(const CylinderOperator& op) {
  AprioriReport r;
  r.remainder_c = remainder_constant(op).constant;
  double inv = 0.0;
  for (const Mat& s : op.sigmas()) {
    Eigen::JacobiSVD<Mat> svd(s);
    inv = std::max(inv, 1.0 / svd.singularValues()(svd.singularValues().size() - 1));
  }
  r.c1 = 2.0 * inv * inv;
  r.c2 = 4.0 * r.remainder_c * r.remainder_c;
  const double T = op.grid().T();
  r.td_bound = r.c2 > 0.0 ? std::min(T, 1.0 / std::sqrt(2.0 * r.c2)) : T;
  r.td = 0.9 * r.td_bound;
  r.td_shrunk = r.td_bound < T;
  return r;
}

/// Random sections with trace in B, supported in [0, td].
inline std::vector<CylinderSection> apriori_samples(const CylinderOperator& op, const BoundaryCondition& b, double td,
                                                    int count, std::mt19937_64& rng) {
  require(b.dim() > 0, "apriori_samples: boundary condition is zero");
  require(td > 0.0 && td <= op.grid().T(), "apriori_samples: bad collar width");
  std::vector<CylinderSection> out;
  const Index n = op.dim();
  for (int k = 0; k < count; ++k) {
    const Vec b0 = b.basis() * random_vector(rng, b.dim());
    const Vec w1 = random_vector(rng, n), w2 = random_vector(rng, n);
    CylinderSection s = CylinderSection::zeros(op.grid(), n);
    for (Index i = 0; i < op.grid().nt(); ++i) {
      const double t = op.grid().time(i);
      if (t >= td) break;
      const double cut = 1.0 - smoothstep5(t / td);
      s.set(i, cut * (b0 + t * w1 + t * t * w2));
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Best constant C in |u| + |u'| + |Au| <= C |u|_D over samples with trace in B supported in [0, td].
inline AprioriReport near_boundary_apriori(const CylinderOperator& op, const BoundaryCondition& b,
                                           const std::vector<CylinderSection>& samples, double td) {
  AprioriReport r = apriori_collar(op);
  require(td > 0.0 && td <= op.grid().T(), "near_boundary_apriori: bad collar width");
  r.td = td;
  const auto& g = op.grid();
  for (const auto& u : samples) {
    detail::check_section(u, g, op.dim());
    if (!b.contains(u.trace())) throw InputError("near_boundary_apriori: sample trace not in B");
    for (Index i = 0; i < g.nt(); ++i)
      if (g.time(i) > td + 1e-12 && u.values.row(i).cwiseAbs().maxCoeff() > 0.0)
        throw InputError("near_boundary_apriori: sample not supported in [0, td]");
    const double lhs = l2_norm(g, u.values) + l2_norm(g, time_derivative(u.values, g.h())) +
                       l2_norm(g, u.values * op.a().matrix().transpose());
    const double gn = graph_norm(op, u, Which::full);
    if (gn == 0.0) continue;
    r.constant = std::max(r.constant, lhs / gn);
    ++r.samples_used;
  }
  return r;
}

/// Eigenvalues of the discrete Neumann operator d^*d on n cells of [0, r]: ((2/h) sin(i pi / 2n))^2.
inline std::vector<double> neumann_theta_sq(Index n, double r) {
  require(n >= 2 && r > 0.0, "neumann_theta_sq: bad arguments");
  const double h = r / static_cast<double>(n);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) {
    lap(i, i) += 1.0;
    lap(i + 1, i + 1) += 1.0;
    lap(i, i + 1) -= 1.0;
    lap(i + 1, i) -= 1.0;
  }
  lap /= h * h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap, Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (Index i = 0; i < n; ++i) out.push_back(std::max(0.0, es.eigenvalues()(i)));
  return out;
}

/// Singular values 1 / sqrt(1 + theta_i^2 + lambda_j^2) of the embedding H^1 -> L^2 on [0, r] x boundary, descending.
inline std::vector<double> h1_embedding_svals(const std::vector<double>& theta_sq, const EigenSystem& a) {
  std::vector<double> out;
  for (double th : theta_sq)
    for (Index j = 0; j < a.dim(); ++j) out.push_back(1.0 / std::sqrt(1.0 + th + std::pow(a.eigenvalue(j), 2)));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Same with the discrete Neumann spectrum of the grid cells in [0, r].
inline std::vector<double> h1_embedding_svals(const CylinderGrid& g, double r, const EigenSystem& a) {
  require(r > 0.0 && r <= g.T(), "h1_embedding_svals: need 0 < r <= T");
  const Index cells = std::max<Index>(2, static_cast<Index>(std::llround(r / g.h())));
  return h1_embedding_svals(neumann_theta_sq(cells, r), a);
}

}  // namespace sbvp
