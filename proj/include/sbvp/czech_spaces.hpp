#pragma once

#include "sbvp/spectral_core.hpp"

#include <memory>

namespace sbvp {

/// Squared-norm weights of the check space: (|l|+eps) on l < 0, (|l|+eps)^{-1} on l >= 0.
inline RVec czech_weights(const EigenSystem& sys, double eps = kDefaultEps) {
  detail::check_eps(eps);
  RVec w(sys.dim());
  for (Index j = 0; j < sys.dim(); ++j) {
    const double l = sys.eigenvalue(j);
    const double a = std::abs(l) + eps;
    w(j) = l < 0.0 ? a : 1.0 / a;
  }
  return w;
}

/// Squared-norm weights of the hat space (the check space of -A):
/// (|l|+eps) on l > 0, (|l|+eps)^{-1} on l <= 0. The kernel sits on the dual side in both spaces.
inline RVec hat_weights(const EigenSystem& sys, double eps = kDefaultEps) {
  detail::check_eps(eps);
  RVec w(sys.dim());
  for (Index j = 0; j < sys.dim(); ++j) {
    const double l = sys.eigenvalue(j);
    const double a = std::abs(l) + eps;
    w(j) = l > 0.0 ? a : 1.0 / a;
  }
  return w;
}

namespace detail {
inline double weighted_norm(const EigenSystem& sys, const RVec& w, const Vec& v) {
  const Vec c = sys.to_eigen(v);
  double s = 0.0;
  for (Index j = 0; j < c.size(); ++j) s += w(j) * std::norm(c(j));
  return std::sqrt(s);
}
}  // namespace detail

inline double czech_norm(const EigenSystem& sys, const Vec& v, double eps = kDefaultEps) {
  return detail::weighted_norm(sys, czech_weights(sys, eps), v);
}

inline double hat_norm(const EigenSystem& sys, const Vec& v, double eps = kDefaultEps) {
  return detail::weighted_norm(sys, hat_weights(sys, eps), v);
}

/// Hermitian Gram matrix G with v^H G v = czech_norm(v)^2.
inline Mat czech_gram(const EigenSystem& sys, double eps = kDefaultEps) {
  const RVec w = czech_weights(sys, eps);
  return sys.eigenvectors() * w.cast<cplx>().asDiagonal() * sys.eigenvectors().adjoint();
}

inline Mat hat_gram(const EigenSystem& sys, double eps = kDefaultEps) {
  const RVec w = hat_weights(sys, eps);
  return sys.eigenvectors() * w.cast<cplx>().asDiagonal() * sys.eigenvectors().adjoint();
}

/// Gram matrix of the H^alpha norm.
inline Mat sobolev_gram(const EigenSystem& sys, double alpha, double eps = kDefaultEps) {
  const RVec w = shifted_abs_power(sys, eps, 2.0 * alpha);
  return sys.eigenvectors() * w.cast<cplx>().asDiagonal() * sys.eigenvectors().adjoint();
}

/// Element of the check space split into its negative-side and positive-side parts.
struct CzechDatum {
  std::shared_ptr<const EigenSystem> base;
  Vec neg_part;  // chi^- v, measured in H^{1/2}
  Vec pos_part;  // chi^+ v, measured in the dual of H^{1/2}
  double eps = kDefaultEps;

  static CzechDatum from(std::shared_ptr<const EigenSystem> sys, const Vec& v, double eps = kDefaultEps) {
    require(sys != nullptr, "CzechDatum: missing eigensystem");
    CzechDatum d;
    d.base = sys;
    d.eps = eps;
    d.neg_part = chi_minus(*sys).matrix * v;
    d.pos_part = chi_plus(*sys).matrix * v;
    return d;
  }
  Vec value() const { return neg_part + pos_part; }
  double norm() const {
    const double a = frac_norm(*base, 0.5, eps, neg_part);
    const double b = dual_norm(*base, 0.5, eps, pos_part);
    return std::sqrt(a * a + b * b);
  }
};

/// Element of the hat space (the check space of -A).
struct HatDatum {
  std::shared_ptr<const EigenSystem> base;
  Vec value;
  double eps = kDefaultEps;

  static HatDatum from(std::shared_ptr<const EigenSystem> sys, const Vec& v, double eps = kDefaultEps) {
    require(sys != nullptr, "HatDatum: missing eigensystem");
    sys->check_dim(v.size());
    return HatDatum{std::move(sys), v, eps};
  }
  double norm() const { return hat_norm(*base, value, eps); }
};

/// Euclidean pairing <u, v> = sum u_j conj(v_j) of a check datum with a hat datum.
inline cplx pairing(const CzechDatum& u, const HatDatum& v) {
  require(u.base != nullptr && v.base != nullptr, "pairing: missing eigensystem");
  if (u.base != v.base) throw InputError("pairing: data built over different eigensystems");
  return v.value.dot(u.value());
}

inline cplx pairing(const Vec& u, const Vec& v) {
  require(u.size() == v.size(), "pairing: dimension mismatch");
  return v.dot(u);
}

/// sup_v |<u, v>| / hat_norm(v), evaluated in closed form per eigendirection.
inline double pairing_dual_norm(const EigenSystem& sys, const Vec& u, double eps = kDefaultEps) {
  const RVec w = hat_weights(sys, eps);
  const Vec c = sys.to_eigen(u);
  double s = 0.0;
  for (Index j = 0; j < c.size(); ++j) s += std::norm(c(j)) / w(j);
  return std::sqrt(s);
}

/// Maximiser of |<u, v>| / hat_norm(v) (unnormalised).
inline Vec pairing_maximizer(const EigenSystem& sys, const Vec& u, double eps = kDefaultEps) {
  const RVec w = hat_weights(sys, eps);
  Vec c = sys.to_eigen(u);
  for (Index j = 0; j < c.size(); ++j) c(j) /= w(j);
  return sys.from_eigen(c);
}

/// Best constant C in |<u, v>| <= C czech_norm(u) hat_norm(v).
inline double pairing_constant(const EigenSystem& sys, double eps = kDefaultEps) {
  const RVec a = czech_weights(sys, eps), b = hat_weights(sys, eps);
  double c = 0.0;
  for (Index j = 0; j < a.size(); ++j) c = std::max(c, 1.0 / std::sqrt(a(j) * b(j)));
  return c;
}

struct ShiftReport {
  double r = 0.0;
  double projector_defect = 0.0;     // |chi^-(A - r) - chi_{(-inf, r)}(A)|
  double decomposition_defect = 0.0; // |chi^-(A - r) - chi^-(A) - chi_{[0, r)}(A)| (r > 0)
  double ratio_min = 0.0;            // min over samples of czech_{A-r}(v) / czech_A(v)
  double ratio_max = 0.0;
  double predicted_min = 0.0;        // extreme per-eigendirection ratios
  double predicted_max = 0.0;
  bool within_prediction = true;
  std::vector<Index> kernel_indices;
  std::vector<Index> band_indices;   // eigenvalues in [0, r) or [r, 0)
};

/// Compares the check norms of A and of A - r.
inline ShiftReport shift_compare(const EigenSystem& sys, double r, const std::vector<Vec>& samples,
                                 double eps = kDefaultEps) {
  ShiftReport rep;
  rep.r = r;
  const EigenSystem shifted(sys.matrix() - r * Mat::Identity(sys.dim(), sys.dim()));
  rep.projector_defect =
      (chi_minus(shifted).matrix - spectral_projector(sys, Interval::below(r)).matrix).cwiseAbs().maxCoeff();
  if (r > 0.0) {
    const Mat sum = chi_minus(sys).matrix + spectral_projector(sys, Interval::half_open(0.0, r)).matrix;
    rep.decomposition_defect = (chi_minus(shifted).matrix - sum).cwiseAbs().maxCoeff();
    rep.band_indices = sys.indices_in(Interval::half_open(0.0, r));
  } else if (r < 0.0) {
    const Mat diff = chi_minus(sys).matrix - spectral_projector(sys, Interval::half_open(r, 0.0)).matrix;
    rep.decomposition_defect = (chi_minus(shifted).matrix - diff).cwiseAbs().maxCoeff();
    rep.band_indices = sys.indices_in(Interval::half_open(r, 0.0));
  }
  rep.kernel_indices = sys.kernel_indices();
  const EigenSystem same_basis = sys.shifted(r);
  const RVec w0 = czech_weights(sys, eps), w1 = czech_weights(same_basis, eps);
  rep.predicted_min = INFINITY;
  rep.predicted_max = 0.0;
  for (Index j = 0; j < w0.size(); ++j) {
    const double q = std::sqrt(w1(j) / w0(j));
    rep.predicted_min = std::min(rep.predicted_min, q);
    rep.predicted_max = std::max(rep.predicted_max, q);
  }
  rep.ratio_min = INFINITY;
  rep.ratio_max = 0.0;
  for (const Vec& v : samples) {
    const double a = czech_norm(sys, v, eps);
    if (a == 0.0) continue;
    const double q = czech_norm(same_basis, v, eps) / a;
    rep.ratio_min = std::min(rep.ratio_min, q);
    rep.ratio_max = std::max(rep.ratio_max, q);
  }
  if (rep.ratio_max == 0.0) rep.ratio_min = 0.0;
  rep.within_prediction = samples.empty() || (rep.ratio_min >= rep.predicted_min * (1 - 1e-12) &&
                                              rep.ratio_max <= rep.predicted_max * (1 + 1e-12));
  return rep;
}

}  // namespace sbvp
