#pragma once

#include "sbvp/linalg.hpp"

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sbvp {

/// Eigenvalues with |lambda| below this (times max(1, spectral radius)) are treated as exact zeros.
inline constexpr double kZeroTol = 1e-12;
inline constexpr double kDefaultEps = 1.0;

/// Interval on the real line with independent endpoint closedness; infinite endpoints allowed.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = false;

  bool contains(double x) const {
    const bool above = lo_closed ? x >= lo : x > lo;
    const bool below = hi_closed ? x <= hi : x < hi;
    return above && below;
  }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

  static Interval closed(double a, double b) { return {a, b, true, true}; }
  static Interval open(double a, double b) { return {a, b, false, false}; }
  static Interval half_open(double a, double b) { return {a, b, true, false}; }
  static Interval at_least(double r) { return {r, std::numeric_limits<double>::infinity(), true, false}; }
  static Interval above(double r) { return {r, std::numeric_limits<double>::infinity(), false, false}; }
  static Interval below(double r) { return {-std::numeric_limits<double>::infinity(), r, false, false}; }
  static Interval at_most(double r) { return {-std::numeric_limits<double>::infinity(), r, false, true}; }
  /// [0, inf): the positive side, which contains the kernel.
  static Interval nonnegative() { return at_least(0.0); }
  /// (-inf, 0)
  static Interval negative() { return below(0.0); }
};

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending, near-zero values snapped to 0.
class EigenSystem {
public:
  EigenSystem() = default;

  explicit EigenSystem(const Mat& hermitian, double herm_tol = 1e-10) {
    require(hermitian.rows() == hermitian.cols(), "EigenSystem: matrix must be square");
    require(hermitian.rows() > 0, "EigenSystem: empty matrix");
    require(hermitian.allFinite(), "EigenSystem: non-finite entries");
    const double scale = std::max(1.0, hermitian.cwiseAbs().maxCoeff());
    if (hermitian_defect(hermitian) > herm_tol * scale)
      throw InputError("EigenSystem: matrix is not Hermitian");
    const Mat sym = 0.5 * (hermitian + hermitian.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    if (es.info() != Eigen::Success) throw DomainError("EigenSystem: eigensolver failed");
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
    snap();
  }

  static EigenSystem diagonal(const std::vector<double>& values) {
    require(!values.empty(), "EigenSystem::diagonal: empty spectrum");
    RVec v = Eigen::Map<const RVec>(values.data(), static_cast<Index>(values.size()));
    const Index n = v.size();
    std::vector<Index> order(n);
    for (Index i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return v(a) < v(b); });
    EigenSystem s;
    s.values_.resize(n);
    s.vectors_ = Mat::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
      s.values_(j) = v(order[j]);
      s.vectors_(order[j], j) = 1.0;
    }
    s.snap();
    return s;
  }

  /// Builds from a known decomposition; `vectors` must be unitary and `values` ascending.
  static EigenSystem from_decomposition(RVec values, Mat vectors) {
    require(vectors.rows() == vectors.cols() && vectors.cols() == values.size(),
            "EigenSystem::from_decomposition: shape mismatch");
    const Index n = values.size();
    require(n > 0, "EigenSystem::from_decomposition: empty");
    require((vectors.adjoint() * vectors - Mat::Identity(n, n)).norm() < 1e-10,
            "EigenSystem::from_decomposition: eigenvectors not orthonormal");
    for (Index i = 1; i < n; ++i)
      require(values(i - 1) <= values(i), "EigenSystem::from_decomposition: eigenvalues not ascending");
    EigenSystem s;
    s.values_ = std::move(values);
    s.vectors_ = std::move(vectors);
    s.snap();
    return s;
  }

  Index dim() const { return values_.size(); }
  const RVec& eigenvalues() const { return values_; }
  const Mat& eigenvectors() const { return vectors_; }
  double eigenvalue(Index j) const { return values_(j); }

  double spectral_radius() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }

  Mat matrix() const { return vectors_ * values_.cast<cplx>().asDiagonal() * vectors_.adjoint(); }

  Vec to_eigen(const Vec& v) const {
    check_dim(v.size());
    return vectors_.adjoint() * v;
  }
  Vec from_eigen(const Vec& c) const {
    check_dim(c.size());
    return vectors_ * c;
  }

  /// The system of -A with the same eigenvectors, eigenvalues kept ascending.
  EigenSystem negated() const {
    EigenSystem s;
    s.values_ = -values_.reverse();
    s.vectors_ = vectors_.rowwise().reverse();
    s.snap();
    return s;
  }

  /// The system of A - r with the same eigenvectors.
  EigenSystem shifted(double r) const {
    EigenSystem s;
    s.values_ = values_.array() - r;
    s.vectors_ = vectors_;
    s.snap();
    return s;
  }

  std::vector<Index> kernel_indices() const {
    std::vector<Index> k;
    for (Index j = 0; j < dim(); ++j)
      if (values_(j) == 0.0) k.push_back(j);
    return k;
  }

  /// Eigenvalues within round-off of a finite endpoint are treated as lying on it.
  std::vector<Index> indices_in(const Interval& s) const {
    const double tol = kZeroTol * std::max(1.0, spectral_radius());
    std::vector<Index> out;
    for (Index j = 0; j < dim(); ++j) {
      double x = values_(j);
      if (std::isfinite(s.lo) && std::abs(x - s.lo) <= tol) x = s.lo;
      if (std::isfinite(s.hi) && std::abs(x - s.hi) <= tol) x = s.hi;
      if (s.contains(x)) out.push_back(j);
    }
    return out;
  }

  void check_dim(Index n) const {
    if (n != dim()) throw InputError("dimension mismatch with eigensystem");
  }

private:
  void snap() {
    const double tol = kZeroTol * std::max(1.0, spectral_radius());
    for (Index j = 0; j < values_.size(); ++j)
      if (std::abs(values_(j)) < tol) values_(j) = 0.0;
  }

  RVec values_;
  Mat vectors_;
};

/// Orthogonal spectral projector onto the eigenspaces with eigenvalues in `interval`.
struct SpectralProjector {
  Interval interval;
  std::vector<Index> indices;
  Mat basis;   // orthonormal, ambient coordinates
  Mat matrix;  // basis * basis^H

  Index rank() const { return static_cast<Index>(indices.size()); }
};

inline SpectralProjector spectral_projector(const EigenSystem& sys, const Interval& s) {
  SpectralProjector p;
  p.interval = s;
  p.indices = sys.indices_in(s);
  p.basis.resize(sys.dim(), p.rank());
  for (Index k = 0; k < p.rank(); ++k) p.basis.col(k) = sys.eigenvectors().col(p.indices[k]);
  p.matrix = p.basis * p.basis.adjoint();
  return p;
}

inline SpectralProjector chi_plus(const EigenSystem& sys) { return spectral_projector(sys, Interval::nonnegative()); }
inline SpectralProjector chi_minus(const EigenSystem& sys) { return spectral_projector(sys, Interval::negative()); }

namespace detail {
template <class F>
cplx eval_checked(F&& f, double x) {
  const cplx y = cplx(f(x));
  if (!std::isfinite(y.real()) || !std::isfinite(y.imag()))
    throw DomainError("borel function returned a non-finite value at an eigenvalue");
  return y;
}

inline void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("eps must be positive and finite");
}
}  // namespace detail

/// Values f(lambda_j) for every eigenvalue.
template <class F>
Eigen::VectorXcd spectral_values(const EigenSystem& sys, F&& f) {
  Eigen::VectorXcd d(sys.dim());
  for (Index j = 0; j < sys.dim(); ++j) d(j) = detail::eval_checked(f, sys.eigenvalue(j));
  return d;
}

/// f(T) v through the eigenbasis.
template <class F>
Vec borel_apply(const EigenSystem& sys, F&& f, const Vec& v) {
  sys.check_dim(v.size());
  const Eigen::VectorXcd d = spectral_values(sys, f);
  return sys.eigenvectors() * (d.asDiagonal() * (sys.eigenvectors().adjoint() * v));
}

/// Dense matrix of f(T).
template <class F>
Mat borel_matrix(const EigenSystem& sys, F&& f) {
  const Eigen::VectorXcd d = spectral_values(sys, f);
  return sys.eigenvectors() * d.asDiagonal() * sys.eigenvectors().adjoint();
}

inline double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

/// Weights (|lambda_j| + eps)^p.
inline RVec shifted_abs_power(const EigenSystem& sys, double eps, double p) {
  detail::check_eps(eps);
  RVec w(sys.dim());
  for (Index j = 0; j < sys.dim(); ++j) w(j) = std::pow(std::abs(sys.eigenvalue(j)) + eps, p);
  return w;
}

/// || (|T| + eps)^alpha v ||, the H^alpha norm.
inline double frac_norm(const EigenSystem& sys, double alpha, double eps, const Vec& v) {
  require(alpha >= 0.0, "frac_norm: alpha must be nonnegative");
  const RVec w = shifted_abs_power(sys, eps, alpha);
  return (w.cast<cplx>().asDiagonal() * sys.to_eigen(v)).norm();
}

/// || (|T| + eps)^(-alpha) v ||, the norm of the dual of H^alpha.
inline double dual_norm(const EigenSystem& sys, double alpha, double eps, const Vec& v) {
  require(alpha >= 0.0, "dual_norm: alpha must be nonnegative");
  const RVec w = shifted_abs_power(sys, eps, -alpha);
  return (w.cast<cplx>().asDiagonal() * sys.to_eigen(v)).norm();
}

/// Eigen-coefficients of a vector together with the scale alpha they are measured in.
struct GradedVector {
  Vec coefficients;
  RVec weights;  // (|lambda_j| + eps)^alpha
  double alpha = 0.0;
  double eps = kDefaultEps;

  static GradedVector from_ambient(const EigenSystem& sys, const Vec& v, double alpha, double eps = kDefaultEps) {
    GradedVector g;
    g.coefficients = sys.to_eigen(v);
    g.weights = shifted_abs_power(sys, eps, alpha);
    g.alpha = alpha;
    g.eps = eps;
    return g;
  }
  double norm() const { return (weights.cast<cplx>().asDiagonal() * coefficients).norm(); }
};

/// exp(-t (|T| + eps)) v for t >= 0.
inline Vec semigroup(const EigenSystem& sys, double t, double eps, const Vec& v) {
  if (t < 0.0) throw InputError("semigroup: negative time");
  detail::check_eps(eps);
  return borel_apply(sys, [&](double x) { return std::exp(-t * (std::abs(x) + eps)); }, v);
}

struct QuadratureSpec {
  int nodes = 400;
  std::optional<double> t_min;
  std::optional<double> t_max;
};

struct QuadraticEstimate {
  double value = 0.0;            // integral of ||psi(tT) v||^2 dt/t over the non-kernel part
  double nonkernel_norm_sq = 0.0;
  double normalized = 0.0;       // value / nonkernel_norm_sq
  double kernel_mass = 0.0;      // ||P_ker v||^2, excluded from the integral
  double t_min = 0.0;
  double t_max = 0.0;
  std::vector<std::string> warnings;
};

/// Default quadratic-estimate function, z e^{-|z|}.
inline double default_psi(double z) { return z * std::exp(-std::abs(z)); }

/// Log-spaced trapezoid approximation of  int_0^inf ||psi(tT) v||^2 dt/t.
template <class Psi>
QuadraticEstimate quadratic_estimate(const EigenSystem& sys, Psi&& psi, const Vec& v, QuadratureSpec q = {}) {
  require(q.nodes >= 2, "quadratic_estimate: need at least two nodes");
  const Vec c = sys.to_eigen(v);
  QuadraticEstimate r;
  double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < sys.dim(); ++j) {
    const double a = std::abs(sys.eigenvalue(j));
    if (a == 0.0) {
      r.kernel_mass += std::norm(c(j));
    } else {
      lmax = std::max(lmax, a);
      lmin = std::min(lmin, a);
      r.nonkernel_norm_sq += std::norm(c(j));
    }
  }
  if (r.kernel_mass > 0.0) r.warnings.push_back("kernel component excluded from the quadratic estimate");
  if (lmax == 0.0) {
    r.warnings.push_back("operator has no nonzero spectrum");
    return r;
  }
  r.t_min = q.t_min.value_or(1e-6 / lmax);
  r.t_max = q.t_max.value_or(1e3 / lmin);
  require(r.t_min > 0.0 && r.t_max > r.t_min, "quadratic_estimate: bad integration range");
  const double s0 = std::log(r.t_min), s1 = std::log(r.t_max);
  const double ds = (s1 - s0) / (q.nodes - 1);
  for (Index j = 0; j < sys.dim(); ++j) {
    const double lam = sys.eigenvalue(j);
    if (lam == 0.0) continue;
    double acc = 0.0;
    for (int k = 0; k < q.nodes; ++k) {
      const double t = std::exp(s0 + k * ds);
      const double g = std::norm(cplx(psi(t * lam)));
      acc += (k == 0 || k == q.nodes - 1) ? 0.5 * g : g;
    }
    r.value += acc * ds * std::norm(c(j));
  }
  r.normalized = r.nonkernel_norm_sq > 0.0 ? r.value / r.nonkernel_norm_sq : 0.0;
  return r;
}

inline QuadraticEstimate quadratic_estimate(const EigenSystem& sys, const Vec& v, QuadratureSpec q = {}) {
  return quadratic_estimate(sys, default_psi, v, q);
}

struct RellichReport {
  std::vector<double> values;  // descending
  double tail = 0.0;           // smallest value
  bool compactness_proxy = false;
};

/// Singular values of (1 + T^2)^{-(s - t)}, the embedding H^s -> H^t.
inline RellichReport rellich_singular_values(const EigenSystem& sys, double s, double t,
                                             double decay_threshold = 0.1) {
  if (!(s > t)) throw InputError("rellich_singular_values: requires s > t");
  RellichReport r;
  for (Index j = 0; j < sys.dim(); ++j) {
    const double l = sys.eigenvalue(j);
    r.values.push_back(std::pow(1.0 + l * l, -(s - t)));
  }
  std::sort(r.values.begin(), r.values.end(), std::greater<>());
  r.tail = r.values.back();
  r.compactness_proxy = r.tail < decay_threshold;
  return r;
}

/// True when the first list is a prefix of the second (to tol) and the appended tail is no larger.
inline bool rellich_tail_monotone(const std::vector<double>& coarse, const std::vector<double>& fine,
                                  double tol = 1e-12) {
  if (fine.size() < coarse.size() || coarse.empty()) return false;
  for (std::size_t i = 0; i < coarse.size(); ++i)
    if (std::abs(coarse[i] - fine[i]) > tol) return false;
  for (std::size_t i = coarse.size(); i < fine.size(); ++i)
    if (fine[i] > coarse.back() + tol) return false;
  return true;
}

struct ProjectorNorms {
  double p_plus = 0.0, p_minus = 0.0, p_plus_adj = 0.0, p_minus_adj = 0.0;
};

struct InvolutionReport {
  double involution_defect = 0.0;      // max |Xi^2 - I|
  double anticommutator_norm = 0.0;    // ||Xi T + T Xi||
  double idempotence_defect = 0.0;     // max over P+- of |P^2 - P|
  double complementarity_defect = 0.0; // |P+ + P- - I|
  double conjugation_defect = 0.0;     // |Xi P+ Xi^{-1} - P+|
  std::map<double, ProjectorNorms> norms;  // keyed by alpha
  Mat p_plus, p_minus;
};

/// Checks the structure of an involution Xi relative to T and reports projector norms on H^alpha.
inline InvolutionReport involution_report(const EigenSystem& sys, const Mat& xi, double eps = kDefaultEps,
                                          const std::vector<double>& alphas = {0.0, 0.5, 1.0}) {
  const Index n = sys.dim();
  require(xi.rows() == n && xi.cols() == n, "involution_report: shape mismatch");
  const Mat id = Mat::Identity(n, n);
  const Mat t = sys.matrix();
  InvolutionReport r;
  r.involution_defect = (xi * xi - id).cwiseAbs().maxCoeff();
  r.anticommutator_norm = op_norm(xi * t + t * xi);
  r.p_plus = 0.5 * (id + xi);
  r.p_minus = 0.5 * (id - xi);
  r.idempotence_defect = std::max((r.p_plus * r.p_plus - r.p_plus).cwiseAbs().maxCoeff(),
                                  (r.p_minus * r.p_minus - r.p_minus).cwiseAbs().maxCoeff());
  r.complementarity_defect = (r.p_plus + r.p_minus - id).cwiseAbs().maxCoeff();
  Eigen::FullPivLU<Mat> lu(xi);
  if (lu.isInvertible())
    r.conjugation_defect = (xi * r.p_plus * lu.inverse() - r.p_plus).cwiseAbs().maxCoeff();
  else
    r.conjugation_defect = std::numeric_limits<double>::infinity();
  for (double a : alphas) {
    const Mat w = borel_matrix(sys, [&](double x) { return std::pow(std::abs(x) + eps, a); });
    const Mat wi = borel_matrix(sys, [&](double x) { return std::pow(std::abs(x) + eps, -a); });
    ProjectorNorms pn;
    pn.p_plus = op_norm(w * r.p_plus * wi);
    pn.p_minus = op_norm(w * r.p_minus * wi);
    pn.p_plus_adj = op_norm(w * r.p_plus.adjoint() * wi);
    pn.p_minus_adj = op_norm(w * r.p_minus.adjoint() * wi);
    r.norms[a] = pn;
  }
  return r;
}

struct SmoothingSample {
  double lhs = 0.0;    // ||T^{2k} chi_S v||
  double rhs = 0.0;    // C_{k,S} * dual_norm(alpha, v)
};

struct SmoothingReport {
  int k = 0;
  double constant = 0.0;          // sup over S intersect spec(T)
  double constant_over_set = 0.0; // sup over all of S (bounded S only)
  double max_ratio = 0.0;         // max lhs / rhs, must not exceed 1
  bool holds = true;
  std::vector<SmoothingSample> samples;
};

/// Checks ||T^{2k} chi_S v|| <= C_{k,S} ||v||_{dual H^alpha} for k = 1..kmax on given vectors.
inline std::vector<SmoothingReport> bounded_set_smoothing_check(const EigenSystem& sys, const Interval& s,
                                                                double alpha, double eps, int kmax,
                                                                const std::vector<Vec>& vs) {
  require(s.bounded(), "bounded_set_smoothing_check: set must be bounded");
  require(kmax >= 1, "bounded_set_smoothing_check: kmax must be >= 1");
  detail::check_eps(eps);
  const auto proj = spectral_projector(sys, s);
  std::vector<SmoothingReport> out;
  for (int k = 1; k <= kmax; ++k) {
    SmoothingReport r;
    r.k = k;
    double sup_pow = 0.0, sup_w = 0.0;
    for (Index j : proj.indices) {
      const double l = std::abs(sys.eigenvalue(j));
      sup_pow = std::max(sup_pow, std::pow(l, 2 * k));
      sup_w = std::max(sup_w, std::pow(l + eps, alpha));
    }
    r.constant = sup_pow * sup_w;
    const double edge = std::max(std::abs(s.lo), std::abs(s.hi));
    r.constant_over_set = std::pow(edge, 2 * k) * std::pow(edge + eps, alpha);
    for (const Vec& v : vs) {
      SmoothingSample smp;
      const Vec pv = proj.matrix * v;
      smp.lhs = borel_apply(sys, [&](double x) { return std::pow(x, 2 * k); }, pv).norm();
      smp.rhs = r.constant * dual_norm(sys, alpha, eps, v);
      const double ratio = smp.rhs > 0.0 ? smp.lhs / smp.rhs : (smp.lhs > 0.0 ? INFINITY : 0.0);
      r.max_ratio = std::max(r.max_ratio, ratio);
      r.samples.push_back(smp);
    }
    r.holds = r.max_ratio <= 1.0 + 1e-12;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sbvp
