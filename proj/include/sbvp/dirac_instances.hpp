#pragma once

#include "sbvp/czech_spaces.hpp"
#include "sbvp/expression.hpp"

#include <functional>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace sbvp {

inline Mat pauli(int k) {
  Mat s = Mat::Zero(2, 2);
  switch (k) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: throw InputError("pauli: index must be 0..3");
  }
  return s;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

/// Circle operator -i d/dtheta + shift + V(theta) truncated to Fourier modes k in [-N, N].
struct CircleDiracSpec {
  int N = 8;
  double shift = 0.0;
  std::vector<cplx> potential;  // samples at theta_j = 2 pi j / (2N+1); empty means V = 0
};

/// Fourier coefficients Vhat_n, n in [-N, N], of 2N+1 equispaced samples.
inline std::vector<cplx> fourier_coefficients(const std::vector<cplx>& samples) {
  const int m = static_cast<int>(samples.size());
  require(m % 2 == 1, "fourier_coefficients: need an odd number of samples");
  const int n = (m - 1) / 2;
  std::vector<cplx> c(m);
  for (int k = -n; k <= n; ++k) {
    cplx s = 0.0;
    for (int j = 0; j < m; ++j) s += samples[j] * std::polar(1.0, -2.0 * std::numbers::pi * k * j / m);
    c[k + n] = s / static_cast<double>(m);
  }
  return c;
}

inline std::vector<cplx> sample_on_circle(const std::function<double(double)>& f, int m) {
  std::vector<cplx> out(m);
  for (int j = 0; j < m; ++j) out[j] = f(2.0 * std::numbers::pi * j / m);
  return out;
}

inline Mat circle_dirac_matrix(const CircleDiracSpec& spec) {
  require(spec.N >= 1, "circle_dirac: N must be positive");
  const int n = spec.N, dim = 2 * n + 1;
  Mat a = Mat::Zero(dim, dim);
  for (int k = -n; k <= n; ++k) a(k + n, k + n) = k + spec.shift;
  if (spec.potential.empty()) return a;
  require(static_cast<int>(spec.potential.size()) == dim, "circle_dirac: potential needs 2N+1 samples");
  double imag = 0.0, scale = 1.0;
  for (const cplx& v : spec.potential) {
    imag = std::max(imag, std::abs(v.imag()));
    scale = std::max(scale, std::abs(v));
  }
  if (imag > 1e-12 * scale) throw InputError("circle_dirac: potential must be real");
  const std::vector<cplx> vhat = fourier_coefficients(spec.potential);
  double tail = 0.0, top = 0.0;
  for (int k = -n; k <= n; ++k) {
    top = std::max(top, std::abs(vhat[k + n]));
    if (2 * std::abs(k) > n) tail = std::max(tail, std::abs(vhat[k + n]));
  }
  if (tail > 1e-10 * std::max(1.0, top))
    throw InputError("circle_dirac: potential is not band-limited to |n| <= N/2");
  for (int k = -n; k <= n; ++k)
    for (int m = -n; m <= n; ++m)
      if (2 * std::abs(k - m) <= n) a(k + n, m + n) += vhat[k - m + n];
  return 0.5 * (a + a.adjoint());
}

inline EigenSystem circle_dirac(const CircleDiracSpec& spec) { return EigenSystem(circle_dirac_matrix(spec)); }

inline CircleDiracSpec circle_dirac_spec(int N, double shift, const std::function<double(double)>& v) {
  return {N, shift, sample_on_circle(v, 2 * N + 1)};
}

/// Samples of a Hermitian endomorphism field Phi(x) on an increasing grid.
struct FieldSamples {
  std::vector<double> x;
  std::vector<Mat> values;

  Index size() const { return static_cast<Index>(x.size()); }
  void validate(const char* who) const {
    require(x.size() == values.size(), std::string(who) + ": one sample per grid point");
    require(x.size() >= 3, std::string(who) + ": need at least three samples");
    for (std::size_t i = 1; i < x.size(); ++i) require(x[i] > x[i - 1], std::string(who) + ": grid must increase");
    for (const Mat& m : values) {
      require(m.rows() == values.front().rows() && m.cols() == m.rows(), std::string(who) + ": sample shape");
      require(m.allFinite(), std::string(who) + ": non-finite sample");
    }
  }
  /// Derivative by centred differences, one-sided second order at the ends.
  std::vector<Mat> derivative() const {
    const std::size_t n = x.size();
    std::vector<Mat> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
      d[i] = (values[i + 1] * (hl / hr) - values[i - 1] * (hr / hl) + values[i] * (hr / hl - hl / hr)) / (hl + hr);
    }
    const double h0 = x[1] - x[0], h1 = x[2] - x[1];
    d[0] = (-(2 * h0 + h1) / (h0 * (h0 + h1))) * values[0] + ((h0 + h1) / (h0 * h1)) * values[1] -
           (h0 / (h1 * (h0 + h1))) * values[2];
    const double g0 = x[n - 1] - x[n - 2], g1 = x[n - 2] - x[n - 3];
    d[n - 1] = ((2 * g0 + g1) / (g0 * (g0 + g1))) * values[n - 1] - ((g0 + g1) / (g0 * g1)) * values[n - 2] +
               (g0 / (g1 * (g0 + g1))) * values[n - 3];
    return d;
  }
};

/// Compact set K = [lo, hi]; an empty optional means K is empty.
using CompactInterval = std::optional<std::pair<double, double>>;

inline bool outside(const CompactInterval& k, double x) { return !k || x < k->first || x > k->second; }

/// Potential data for D - i Phi with D = -i S d/dx on the line.
struct CalliasSpec {
  FieldSamples phi;
  Mat symbol;            // S, Hermitian with S^2 = I
  CompactInterval K;
  double Lambda = 0.0;
  bool differentiable = true;  // declared smoothness of Phi; false refuses the derivative-based test
};

/// Relative slack for the bound comparisons, absorbing round-off in sampled derivatives.
inline constexpr double kVerdictSlack = 1e-10;

inline bool bound_holds(double value, double lambda) {
  return value >= lambda - kVerdictSlack * std::max(1.0, std::abs(lambda));
}

struct CalliasReport {
  bool verdict = false;            // min over x outside K of lambda_min(Phi^2 + S Phi') >= Lambda
  bool verdict_negated = false;    // same for -Phi
  bool classical_verdict = false;  // lambda_min(Phi^2) - |S Phi'| >= Lambda outside K
  double min_outside = 0.0;
  double min_outside_negated = 0.0;
  double commutator_defect = 0.0;  // max |[S, Phi]|, zero when the commutator is of order zero
  std::vector<std::pair<double, double>> margin_map;  // (x, lambda_min)
  Index samples_outside = 0;
};

/// Pointwise test of Phi^2 + i[D, Phi] >= Lambda outside K, with i[D, Phi] = S Phi'.
inline CalliasReport callias_check(const CalliasSpec& spec) {
  spec.phi.validate("callias_check");
  if (!spec.differentiable) throw InputError("callias_check: potential declared non-differentiable");
  const Index n = spec.phi.values.front().rows();
  require(spec.symbol.rows() == n && spec.symbol.cols() == n, "callias_check: symbol shape");
  for (const Mat& p : spec.phi.values)
    require(hermitian_defect(p) <= 1e-10 * std::max(1.0, p.cwiseAbs().maxCoeff()),
            "callias_check: Phi must be Hermitian");
  const std::vector<Mat> dphi = spec.phi.derivative();
  CalliasReport r;
  r.min_outside = r.min_outside_negated = INFINITY;
  double classical = INFINITY;
  for (Index i = 0; i < spec.phi.size(); ++i) {
    const Mat& p = spec.phi.values[i];
    Mat c = spec.symbol * dphi[i];
    c = 0.5 * (c + c.adjoint());
    const Mat p2 = p * p;
    Eigen::SelfAdjointEigenSolver<Mat> e1(p2 + c, Eigen::EigenvaluesOnly), e2(p2 - c, Eigen::EigenvaluesOnly),
        e3(p2, Eigen::EigenvaluesOnly);
    const double m1 = e1.eigenvalues().minCoeff(), m2 = e2.eigenvalues().minCoeff();
    r.margin_map.emplace_back(spec.phi.x[i], m1);
    r.commutator_defect = std::max(r.commutator_defect, (spec.symbol * p - p * spec.symbol).cwiseAbs().maxCoeff());
    if (outside(spec.K, spec.phi.x[i])) {
      ++r.samples_outside;
      r.min_outside = std::min(r.min_outside, m1);
      r.min_outside_negated = std::min(r.min_outside_negated, m2);
      classical = std::min(classical, e3.eigenvalues().minCoeff() - op_norm(c));
    }
  }
  r.verdict = bound_holds(r.min_outside, spec.Lambda);
  r.verdict_negated = bound_holds(r.min_outside_negated, spec.Lambda);
  r.classical_verdict = bound_holds(classical, spec.Lambda);
  return r;
}

/// Kink potential Phi(x) = phi(x) (I (x) sigma3) for the Dirac symbol S = sigma1 (x) I on C^4.
inline CalliasSpec kink_callias_spec(const std::vector<double>& x, const std::vector<double>& phi, CompactInterval k,
                                     double lambda) {
  require(x.size() == phi.size(), "kink_callias_spec: size mismatch");
  CalliasSpec s;
  s.phi.x = x;
  const Mat flavour = kron(pauli(0), pauli(3));
  for (double v : phi) s.phi.values.push_back(v * flavour);
  s.symbol = kron(pauli(1), pauli(0));
  s.K = k;
  s.Lambda = lambda;
  return s;
}

inline std::vector<double> uniform_grid(double a, double b, int n) {
  require(n >= 3 && b > a, "uniform_grid: bad arguments");
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = a + (b - a) * i / (n - 1);
  return x;
}

/// Boundary symbol A = -i S d/dx on a line grid.
struct BoundarySymbol {
  std::vector<double> x;
  Mat symbol;
};

struct ParaCalliasReport {
  bool verdict = false;               // lambda_min((i Psi)^2 + i[A, Psi]_+) >= Lambda outside K
  double min_outside = 0.0;
  double skew_defect = 0.0;           // max |Psi + Psi^H|
  double anticommutator_defect = 0.0; // max |S Psi + Psi S|
  std::vector<std::pair<double, double>> margin_map;
};

namespace detail {
inline std::vector<double> para_bound(const BoundarySymbol& a, const std::vector<Mat>& psi, ParaCalliasReport* rep) {
  FieldSamples f{a.x, psi};
  f.validate("para_callias");
  require(a.symbol.rows() == psi.front().rows(), "para_callias: symbol shape");
  const std::vector<Mat> dpsi = f.derivative();
  std::vector<double> out;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Mat& p = psi[i];
    if (rep) {
      rep->skew_defect = std::max(rep->skew_defect, (p + p.adjoint()).cwiseAbs().maxCoeff());
      rep->anticommutator_defect =
          std::max(rep->anticommutator_defect, (a.symbol * p + p * a.symbol).cwiseAbs().maxCoeff());
    }
    const Mat ip = cplx(0, 1) * p;
    Mat q = ip * ip + a.symbol * dpsi[i];
    q = 0.5 * (q + q.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(q, Eigen::EigenvaluesOnly);
    out.push_back(es.eigenvalues().minCoeff());
  }
  return out;
}
}  // namespace detail

/// Pointwise test of (i Psi)^2 + i[A, Psi]_+ >= Lambda outside K, with i[A, Psi]_+ = S Psi'.
inline ParaCalliasReport para_callias_check(const BoundarySymbol& a, const std::vector<Mat>& psi,
                                            const CompactInterval& k, double lambda) {
  ParaCalliasReport r;
  const std::vector<double> b = detail::para_bound(a, psi, &r);
  const double scale = std::max(1.0, psi.front().cwiseAbs().maxCoeff());
  if (r.skew_defect > 1e-10 * scale) throw InputError("para_callias_check: Psi must be skew-Hermitian");
  r.min_outside = INFINITY;
  for (std::size_t i = 0; i < b.size(); ++i) {
    r.margin_map.emplace_back(a.x[i], b[i]);
    if (outside(k, a.x[i])) r.min_outside = std::min(r.min_outside, b[i]);
  }
  r.verdict = bound_holds(r.min_outside, lambda);
  return r;
}

struct KRegion {
  double R = 0.0;
  bool empty = false;      // the bound holds everywhere
  bool unbounded = false;  // the bound fails at the edge of the sampled domain
  double half_width = 0.0; // K_R = [-half_width, half_width]
};

/// Smallest symmetric K_R outside of which the para-Callias bound is >= R, for each R.
inline std::vector<KRegion> strongly_para_profile(const BoundarySymbol& a, const std::vector<Mat>& psi,
                                                  const std::vector<double>& r_values) {
  const std::vector<double> b = detail::para_bound(a, psi, nullptr);
  const double edge = std::max(std::abs(a.x.front()), std::abs(a.x.back()));
  std::vector<KRegion> out;
  for (double R : r_values) {
    KRegion k;
    k.R = R;
    double worst = -1.0;
    for (std::size_t i = 0; i < b.size(); ++i)
      if (!bound_holds(b[i], R)) worst = std::max(worst, std::abs(a.x[i]));
    if (worst < 0.0) {
      k.empty = true;
    } else if (worst >= edge * (1.0 - 1e-12) ||
               std::abs(a.x.front()) == worst || std::abs(a.x.back()) == worst) {
      k.unbounded = true;
      k.half_width = INFINITY;
    } else {
      k.half_width = worst;
    }
    out.push_back(k);
  }
  return out;
}

/// Position operator in the first n Hermite functions.
inline Eigen::MatrixXd hermite_position(Index n) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  for (Index k = 0; k + 1 < n; ++k) x(k, k + 1) = x(k + 1, k) = std::sqrt((k + 1) / 2.0);
  return x;
}

/// d/dx in the first n Hermite functions (skew-symmetric).
inline Eigen::MatrixXd hermite_derivative(Index n) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Index k = 0; k + 1 < n; ++k) {
    d(k, k + 1) = std::sqrt((k + 1) / 2.0);
    d(k + 1, k) = -std::sqrt((k + 1) / 2.0);
  }
  return d;
}

/// A + i Psi on the line with A = -i sigma3 d/dx and Psi = i sigma2 f(x), in n Hermite functions per spinor
/// component. f(X) is taken through the functional calculus of the truncated position operator.
inline Mat line_dirac_hermite(Index n, const std::function<double(double)>& f) {
  require(n >= 2, "line_dirac_hermite: need n >= 2");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hermite_position(n));
  Eigen::VectorXd fv(n);
  for (Index i = 0; i < n; ++i) fv(i) = f(es.eigenvalues()(i));
  const Eigen::MatrixXd fx = es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().transpose();
  const Mat d = hermite_derivative(n).cast<cplx>();
  Mat h = kron(cplx(0, -1) * pauli(3), d) - kron(pauli(2), fx.cast<cplx>());
  return 0.5 * (h + h.adjoint());
}

struct DiscretenessReport {
  std::vector<Index> truncations;
  std::vector<std::vector<double>> lowest;  // per truncation, the m smallest-magnitude eigenvalues, sorted
  std::vector<double> max_change;           // between consecutive truncations
  std::vector<Index> counting;              // #{|lambda| <= count_level} per truncation
  bool stabilized = false;
  double count_level = 0.0;
};

/// Tracks the m eigenvalues closest to zero across truncations; discrete spectrum shows as stabilisation.
inline DiscretenessReport discreteness_proxy(const std::function<Mat(Index)>& builder,
                                             const std::vector<Index>& truncations, int m = 10,
                                             double tol = 1e-6, double count_level = 5.0) {
  require(truncations.size() >= 2, "discreteness_proxy: need at least two truncations");
  require(m >= 1, "discreteness_proxy: m must be positive");
  DiscretenessReport r;
  r.truncations = truncations;
  r.count_level = count_level;
  for (Index n : truncations) {
    const Mat h = builder(n);
    const EigenSystem es(h);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.dim());
    std::sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    require(static_cast<int>(ev.size()) >= m, "discreteness_proxy: truncation smaller than m");
    std::vector<double> low(ev.begin(), ev.begin() + m);
    std::sort(low.begin(), low.end());
    r.lowest.push_back(low);
    Index c = 0;
    for (double v : ev)
      if (std::abs(v) <= count_level) ++c;
    r.counting.push_back(c);
  }
  for (std::size_t k = 1; k < r.lowest.size(); ++k) {
    double d = 0.0;
    for (int i = 0; i < m; ++i) d = std::max(d, std::abs(r.lowest[k][i] - r.lowest[k - 1][i]));
    r.max_change.push_back(d);
  }
  r.stabilized = r.max_change.back() < tol;
  return r;
}

struct MultiplierReport {
  int N = 0;
  double chi_sup = 0.0;
  double dchi_sup = 0.0;
  double bound_factor = 0.0;   // |chi|^{1/2} (|chi| + C^2 |d chi|)^{1/2}, C = 1
  double operator_norm = 0.0;  // |chi| as a map on H^{1/2}
  double c_prime = 0.0;        // operator_norm / bound_factor
  double sampled_max = 0.0;    // max ratio over random y, never above operator_norm
};

/// Multiplication by a real function chi on the truncated circle, measured on H^{1/2} of -i d/dtheta + shift.
inline MultiplierReport multiplier_halfnorm_check(int N, double shift, const std::function<double(double)>& chi,
                                                  double eps, int samples, std::mt19937_64& rng) {
  require(N >= 1, "multiplier_halfnorm_check: N must be positive");
  const int dim = 2 * N + 1, fine = 16 * N + 65;
  std::vector<cplx> vals = sample_on_circle(chi, fine);
  MultiplierReport r;
  r.N = N;
  const double h = 2.0 * std::numbers::pi / fine;
  for (int j = 0; j < fine; ++j) {
    require(std::abs(vals[j].imag()) == 0.0, "multiplier_halfnorm_check: chi must be real");
    r.chi_sup = std::max(r.chi_sup, std::abs(vals[j].real()));
    const double d = (vals[(j + 1) % fine].real() - vals[(j + fine - 1) % fine].real()) / (2.0 * h);
    r.dchi_sup = std::max(r.dchi_sup, std::abs(d));
  }
  const std::vector<cplx> c = fourier_coefficients(vals);
  const int half = (fine - 1) / 2;
  Mat mult = Mat::Zero(dim, dim);
  for (int k = -N; k <= N; ++k)
    for (int l = -N; l <= N; ++l) mult(k + N, l + N) = c[k - l + half];
  RVec w(dim);
  for (int k = -N; k <= N; ++k) w(k + N) = std::sqrt(std::abs(k + shift) + eps);
  const Mat conj = w.cast<cplx>().asDiagonal() * mult * w.cwiseInverse().cast<cplx>().asDiagonal();
  r.operator_norm = op_norm(conj);
  r.bound_factor = std::sqrt(r.chi_sup) * std::sqrt(r.chi_sup + r.dchi_sup);
  r.c_prime = r.bound_factor > 0.0 ? r.operator_norm / r.bound_factor : 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec y = random_vector(rng, dim);
    const Vec wy = w.cast<cplx>().asDiagonal() * y;
    const Vec wmy = w.cast<cplx>().asDiagonal() * (mult * y);
    if (wy.norm() > 0.0) r.sampled_max = std::max(r.sampled_max, wmy.norm() / wy.norm());
  }
  return r;
}

/// Norm identity behind the para-Callias reduction: A + i s Phi = -s^{-1} (A - i s Phi) s.
inline double para_reduction_defect(const Mat& a, const Mat& sigma0, const Mat& phi0) {
  const Mat i_s_phi = cplx(0, 1) * sigma0 * phi0;
  const Mat lhs = a + i_s_phi;
  const Mat rhs = -sigma0.inverse() * (a - i_s_phi) * sigma0;
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace sbvp
