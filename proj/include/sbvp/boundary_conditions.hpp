#pragma once

#include "sbvp/czech_spaces.hpp"

#include <optional>
#include <string>
#include <utility>

namespace sbvp {

enum class BcKind { aps, adjoint, projection, chiral_plus, chiral_minus, matching, custom };

inline std::string to_string(BcKind k) {
  switch (k) {
    case BcKind::aps: return "aps";
    case BcKind::adjoint: return "adjoint";
    case BcKind::projection: return "projection";
    case BcKind::chiral_plus: return "chiral_plus";
    case BcKind::chiral_minus: return "chiral_minus";
    case BcKind::matching: return "matching";
    case BcKind::custom: return "custom";
  }
  return "custom";
}

inline BcKind bc_kind_from_string(const std::string& s) {
  for (BcKind k : {BcKind::aps, BcKind::adjoint, BcKind::projection, BcKind::chiral_plus, BcKind::chiral_minus,
                   BcKind::matching, BcKind::custom})
    if (to_string(k) == s) return k;
  throw InputError("unknown boundary condition kind: " + s);
}

/// Closed subspace B of the boundary space, stored as an orthonormal basis in ambient coordinates.
class BoundaryCondition {
public:
  BoundaryCondition() = default;

  static BoundaryCondition span(const Mat& vectors, BcKind kind = BcKind::custom) {
    BoundaryCondition b;
    b.basis_ = orthonormal_basis(vectors);
    b.kind_ = kind;
    return b;
  }
  static BoundaryCondition zero(Index n, BcKind kind = BcKind::custom) {
    BoundaryCondition b;
    b.basis_ = Mat(n, 0);
    b.kind_ = kind;
    return b;
  }
  static BoundaryCondition full(Index n, BcKind kind = BcKind::custom) {
    BoundaryCondition b;
    b.basis_ = Mat::Identity(n, n);
    b.kind_ = kind;
    return b;
  }

  const Mat& basis() const { return basis_; }
  BcKind kind() const { return kind_; }
  Index dim() const { return basis_.cols(); }
  Index ambient_dim() const { return basis_.rows(); }
  Mat projector() const { return basis_ * basis_.adjoint(); }
  /// Orthonormal basis of the Euclidean annihilator.
  Mat annihilator() const { return orthogonal_complement(basis_, ambient_dim()); }
  bool contains(const Vec& v, double tol = 1e-8) const {
    const double n = v.norm();
    return n == 0.0 || distance_to_subspace(basis_, v) <= tol * n;
  }
  const std::optional<Mat>& sigma0() const { return sigma0_; }
  BoundaryCondition with_sigma0(Mat s) const {
    BoundaryCondition b = *this;
    b.sigma0_ = std::move(s);
    return b;
  }

private:
  Mat basis_;
  BcKind kind_ = BcKind::custom;
  std::optional<Mat> sigma0_;
};

/// Largest principal angle between two boundary conditions (pi/2 when the dimensions differ).
inline double bc_angle(const BoundaryCondition& a, const BoundaryCondition& b) {
  return principal_angle(a.basis(), b.basis());
}

inline bool same_bc(const BoundaryCondition& a, const BoundaryCondition& b, double tol = 1e-8) {
  return a.dim() == b.dim() && bc_angle(a, b) < tol;
}

/// Range of chi^-(A): the generalised Atiyah-Patodi-Singer condition.
inline BoundaryCondition aps(const EigenSystem& sys) {
  return BoundaryCondition::span(chi_minus(sys).basis, BcKind::aps);
}

inline constexpr double kMaxSigmaCondition = 1e12;

namespace detail {
inline void check_sigma(const Mat& sigma0, Index n) {
  require(sigma0.rows() == n && sigma0.cols() == n, "sigma0 has the wrong shape");
  if (condition_number(sigma0) > kMaxSigmaCondition) throw DomainError("sigma0 is singular or ill-conditioned");
}
}  // namespace detail

/// Adjoint condition B^ad = (sigma0^{-1})^H B^perp, where B^perp is the Euclidean annihilator.
inline BoundaryCondition adjoint_bc(const BoundaryCondition& b, const Mat& sigma0) {
  const Index n = b.ambient_dim();
  detail::check_sigma(sigma0, n);
  const Mat perp = b.annihilator();
  const Mat img = sigma0.adjoint().partialPivLu().solve(perp);
  return BoundaryCondition::span(img, BcKind::adjoint).with_sigma0(sigma0);
}

/// max |<sigma0 u, v>| over unit u in B and unit v in B^ad, relative to max(1, |sigma0|).
inline double green_defect(const BoundaryCondition& b, const BoundaryCondition& bad, const Mat& sigma0) {
  if (b.dim() == 0 || bad.dim() == 0) return 0.0;
  return op_norm(bad.basis().adjoint() * sigma0 * b.basis()) / std::max(1.0, op_norm(sigma0));
}

struct ProjectionBcReport {
  BoundaryCondition bc;
  double idempotence_defect = 0.0;
  double norm_half = 0.0;       // |P| on H^{1/2}
  double norm_dual = 0.0;       // |P| on the dual of H^{1/2}
  double closure_angle = 0.0;   // angle between closure(P H^{1/2}) and P (dual H^{1/2})
};

/// B = ran P for an idempotent P, with its norms on the half-scale and the dual half-scale.
inline ProjectionBcReport projection_bc(const EigenSystem& sys, const Mat& p, double eps = kDefaultEps) {
  const Index n = sys.dim();
  require(p.rows() == n && p.cols() == n, "projection_bc: shape mismatch");
  ProjectionBcReport r;
  r.idempotence_defect = (p * p - p).cwiseAbs().maxCoeff();
  if (r.idempotence_defect > 1e-10 * std::max(1.0, p.cwiseAbs().maxCoeff()))
    throw InputError("projection_bc: matrix is not idempotent");
  const Mat w = borel_matrix(sys, [&](double x) { return std::sqrt(std::abs(x) + eps); });
  const Mat wi = borel_matrix(sys, [&](double x) { return 1.0 / std::sqrt(std::abs(x) + eps); });
  r.norm_half = op_norm(w * p * wi);
  r.norm_dual = op_norm(wi * p * w);
  r.bc = BoundaryCondition::span(p, BcKind::projection);
  const Mat a = orthonormal_basis(p * wi), b = orthonormal_basis(p * w);
  r.closure_angle = principal_angle(a, b);
  return r;
}

/// Adjoint of ran P via the localisation formula: sigma0^H B^ad = ran(I - P^H).
inline BoundaryCondition projection_adjoint_local(const Mat& p, const Mat& sigma0) {
  const Index n = p.rows();
  detail::check_sigma(sigma0, n);
  const Mat comp = Mat::Identity(n, n) - p.adjoint();
  return BoundaryCondition::span(sigma0.adjoint().partialPivLu().solve(comp), BcKind::adjoint).with_sigma0(sigma0);
}

struct ChiralPair {
  BoundaryCondition plus, minus;
  Mat p_plus, p_minus;
  double involution_defect = 0.0;
  double anticommutator_defect = 0.0;
};

/// B_pm = ran (I pm Xi)/2 for an involution Xi anticommuting with A.
inline ChiralPair chiral(const EigenSystem& sys, const Mat& xi, double tol = 1e-10) {
  const Index n = sys.dim();
  require(xi.rows() == n && xi.cols() == n, "chiral: shape mismatch");
  const Mat id = Mat::Identity(n, n);
  const Mat a = sys.matrix();
  ChiralPair c;
  c.involution_defect = (xi * xi - id).cwiseAbs().maxCoeff();
  c.anticommutator_defect = (xi * a + a * xi).cwiseAbs().maxCoeff() / std::max(1.0, sys.spectral_radius());
  if (c.involution_defect > tol * std::max(1.0, xi.cwiseAbs().maxCoeff()))
    throw InputError("chiral: Xi is not an involution");
  if (c.anticommutator_defect > tol * std::max(1.0, xi.cwiseAbs().maxCoeff()))
    throw InputError("chiral: Xi does not anticommute with A");
  c.p_plus = 0.5 * (id + xi);
  c.p_minus = 0.5 * (id - xi);
  c.plus = BoundaryCondition::span(c.p_plus, BcKind::chiral_plus);
  c.minus = BoundaryCondition::span(c.p_minus, BcKind::chiral_minus);
  return c;
}

/// Which structural relation between sigma0 and the chiral data the caller asserts.
enum class ChiralBranch { sigma_commutes_with_xi, sigma_anticommutes_with_a };

/// Predicted adjoint of B_+ (plus = true) or B_- for the chosen branch.
/// Commuting branch: ran(P_-^H) (resp. ran(P_+^H)). Anticommuting branch: the opposite chiral
/// condition of Xi~ = sigma0 Xi^H sigma0^{-1}, which requires sigma0^H sigma0 to be scalar.
inline BoundaryCondition chiral_adjoint_predicted(const EigenSystem& sys, const Mat& xi, const Mat& sigma0,
                                                  ChiralBranch branch, bool plus, double tol = 1e-10) {
  const Index n = sys.dim();
  detail::check_sigma(sigma0, n);
  const Mat id = Mat::Identity(n, n);
  const double scale = std::max(1.0, op_norm(sigma0));
  if (branch == ChiralBranch::sigma_commutes_with_xi) {
    if ((sigma0 * xi - xi * sigma0).cwiseAbs().maxCoeff() > tol * scale)
      throw InputError("chiral_adjoint_predicted: sigma0 does not commute with Xi");
    const Mat q = plus ? Mat(0.5 * (id - xi.adjoint())) : Mat(0.5 * (id + xi.adjoint()));
    return BoundaryCondition::span(q, BcKind::adjoint).with_sigma0(sigma0);
  }
  const Mat a = sys.matrix();
  if ((sigma0 * a + a * sigma0).cwiseAbs().maxCoeff() > tol * scale * std::max(1.0, sys.spectral_radius()))
    throw InputError("chiral_adjoint_predicted: sigma0 does not anticommute with A");
  const Mat sts = sigma0.adjoint() * sigma0;
  if ((sts - sts(0, 0) * id).cwiseAbs().maxCoeff() > tol * scale * scale)
    throw InputError("chiral_adjoint_predicted: sigma0 must be a multiple of a unitary");
  const Mat xt = sigma0 * xi.adjoint() * sigma0.inverse();
  const Mat q = plus ? Mat(0.5 * (id - xt)) : Mat(0.5 * (id + xt));
  return BoundaryCondition::span(q, BcKind::adjoint).with_sigma0(sigma0);
}

struct MatchingData {
  EigenSystem doubled;            // A0 (+) (-A0)
  BoundaryCondition diagonal;     // {(u, u)}
  BoundaryCondition antidiagonal; // {(v, -v)}, the Euclidean annihilator
};

/// Transmission condition for two copies of a boundary glued with opposite orientations.
inline MatchingData matching(const EigenSystem& sys0) {
  const Index n = sys0.dim();
  Mat a = Mat::Zero(2 * n, 2 * n);
  const Mat a0 = sys0.matrix();
  a.topLeftCorner(n, n) = a0;
  a.bottomRightCorner(n, n) = -a0;
  MatchingData m{EigenSystem(a), {}, {}};
  Mat d(2 * n, n), ad(2 * n, n);
  d << Mat::Identity(n, n), Mat::Identity(n, n);
  ad << Mat::Identity(n, n), -Mat::Identity(n, n);
  m.diagonal = BoundaryCondition::span(d, BcKind::matching);
  m.antidiagonal = BoundaryCondition::span(ad, BcKind::adjoint);
  return m;
}

/// Largest ratio |u|^2_{H^{1/2}} / |u|^2_X over span(q), X given by its Gram matrix. Empty span gives 1.
inline double embedding_margin(const EigenSystem& sys, const Mat& q, const Mat& x_gram, double eps) {
  if (q.cols() == 0) return 1.0;
  const Mat num = q.adjoint() * sobolev_gram(sys, 0.5, eps) * q;
  const Mat den = q.adjoint() * x_gram * q;
  return max_generalized_eig(0.5 * (num + num.adjoint()), 0.5 * (den + den.adjoint()));
}

/// Largest ratio |M u|^2_X / |u|^2_X over span(q).
inline double restricted_operator_norm_sq(const Mat& m, const Mat& q, const Mat& x_gram) {
  if (q.cols() == 0) return 1.0;
  const Mat mq = m * q;
  const Mat num = mq.adjoint() * x_gram * mq;
  const Mat den = q.adjoint() * x_gram * q;
  return max_generalized_eig(0.5 * (num + num.adjoint()), 0.5 * (den + den.adjoint()));
}

/// Coarse resolution level: the spectral band |lambda| <= radius / 2.
inline Mat low_band_projector(const EigenSystem& sys) {
  const double c = sys.spectral_radius() / 2.0;
  return spectral_projector(sys, Interval::closed(-c, c)).matrix;
}

inline constexpr double kMaxMarginGrowth = 2.0;

struct RegularityReport {
  bool a_semi_regular = false;
  bool a_regular = false;
  double semi_margin = 0.0;        // sup over B of |u|^2_{1/2} / |u|^2_check
  double semi_margin_coarse = 0.0; // same over the low-band part of B
  double semi_growth = 0.0;
  double regular_margin = 0.0;     // sup over B^perp of |v|^2_{1/2} / |v|^2_hat
  double regular_margin_coarse = 0.0;
  double regular_growth = 0.0;
  bool margin_verdict_regular = false;
  bool projection_shortcut = false;   // the sufficient condition for projection-type B held
  double sigma_norm_growth = 0.0;
  Mat adjoint_basis;
  std::vector<Index> kernel_overlap;  // kernel eigen-indices whose eigenvector lies in B
  double eps = kDefaultEps;
};

/// Semi-regularity and regularity of B judged by margin growth from the low band to the full space.
inline RegularityReport regularity_check(const EigenSystem& sys, const BoundaryCondition& b, const Mat& sigma0,
                                         double eps = kDefaultEps) {
  const Index n = sys.dim();
  require(b.ambient_dim() == n, "regularity_check: dimension mismatch");
  detail::check_sigma(sigma0, n);
  RegularityReport r;
  r.eps = eps;
  const Mat low = low_band_projector(sys);
  const Mat cg = czech_gram(sys, eps), hg = hat_gram(sys, eps);
  const Mat perp = b.annihilator();

  r.semi_margin = embedding_margin(sys, b.basis(), cg, eps);
  r.semi_margin_coarse = embedding_margin(sys, orthonormal_basis(low * b.basis()), cg, eps);
  r.semi_growth = r.semi_margin / r.semi_margin_coarse;
  r.a_semi_regular = r.semi_growth <= kMaxMarginGrowth;

  r.regular_margin = embedding_margin(sys, perp, hg, eps);
  r.regular_margin_coarse = embedding_margin(sys, orthonormal_basis(low * perp), hg, eps);
  r.regular_growth = r.regular_margin / r.regular_margin_coarse;
  r.margin_verdict_regular = r.a_semi_regular && r.regular_growth <= kMaxMarginGrowth;

  const Mat a = sys.matrix();
  const double tol = 1e-10 * std::max(1.0, op_norm(sigma0)) * std::max(1.0, sys.spectral_radius());
  const bool anticommutes = (sigma0 * a + a * sigma0).cwiseAbs().maxCoeff() <= tol;
  bool shortcut = anticommutes && b.dim() < n;
  if (shortcut) {
    const double g1 = subspace_gap(b.basis(), orthonormal_basis(sigma0 * b.basis()));
    const double g2 = subspace_gap(perp, orthonormal_basis(sigma0.adjoint() * perp));
    shortcut = g1 < 1e-10 && g2 < 1e-10;
  }
  if (shortcut) {
    const double fine = restricted_operator_norm_sq(sigma0.adjoint(), perp, hg);
    const double coarse = restricted_operator_norm_sq(sigma0.adjoint(), orthonormal_basis(low * perp), hg);
    r.sigma_norm_growth = fine / coarse;
    shortcut = r.sigma_norm_growth <= kMaxMarginGrowth;
  }
  r.projection_shortcut = shortcut;
  r.a_regular = shortcut ? true : r.margin_verdict_regular;
  if (shortcut) r.a_semi_regular = true;

  r.adjoint_basis = adjoint_bc(b, sigma0).basis();
  for (Index j : sys.kernel_indices())
    if (b.contains(sys.eigenvectors().col(j))) r.kernel_overlap.push_back(j);
  return r;
}

}  // namespace sbvp
