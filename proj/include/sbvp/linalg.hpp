#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace sbvp {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Malformed or inconsistent input (wrong shapes, non-Hermitian data, bad parameters).
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A request outside the domain of the operation (non-finite values, singular maps).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InputError(what);
}

inline double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

inline double hermitian_defect(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline double condition_number(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double lo = s(s.size() - 1);
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / lo;
}

/// Orthonormal basis of the column span of `m`; columns below `rel_tol * s_max` are dropped.
inline Mat orthonormal_basis(const Mat& m, double rel_tol = 1e-10) {
  if (m.cols() == 0 || m.rows() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Index rank = 0;
  if (smax > 0.0) {
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) > rel_tol * smax) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

/// Orthonormal basis of the Euclidean orthogonal complement of span(q) in C^n.
inline Mat orthogonal_complement(const Mat& q, Index n) {
  if (q.cols() == 0) return Mat::Identity(n, n);
  const Mat qq = orthonormal_basis(q);
  Eigen::JacobiSVD<Mat> svd(qq, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(n - qq.cols());
}

/// Sine of the largest principal angle between two subspaces given by orthonormal bases.
/// Returns 1 when the dimensions differ.
inline double subspace_gap(const Mat& q1, const Mat& q2) {
  if (q1.rows() != q2.rows()) throw InputError("subspace_gap: ambient dimensions differ");
  if (q1.cols() != q2.cols()) return 1.0;
  if (q1.cols() == 0) return 0.0;
  const Mat r = q2 - q1 * (q1.adjoint() * q2);
  return std::min(1.0, op_norm(r));
}

/// Largest principal angle in radians.
inline double principal_angle(const Mat& q1, const Mat& q2) {
  return std::asin(subspace_gap(q1, q2));
}

inline double distance_to_subspace(const Mat& q, const Vec& v) {
  if (q.cols() == 0) return v.norm();
  return (v - q * (q.adjoint() * v)).norm();
}

/// Largest generalized eigenvalue of (num, den) with `den` Hermitian positive definite.
inline double max_generalized_eig(const Mat& num, const Mat& den) {
  if (num.rows() == 0) return 0.0;
  Eigen::LLT<Mat> llt(den);
  if (llt.info() != Eigen::Success) throw DomainError("max_generalized_eig: denominator not positive definite");
  const Mat linv = llt.matrixL().solve(Mat::Identity(den.rows(), den.cols()));
  Mat c = linv * num * linv.adjoint();
  c = 0.5 * (c + c.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

/// Smallest generalized eigenvalue of (num, den) with `den` Hermitian positive definite.
inline double min_generalized_eig(const Mat& num, const Mat& den) {
  if (num.rows() == 0) return 0.0;
  Eigen::LLT<Mat> llt(den);
  if (llt.info() != Eigen::Success) throw DomainError("min_generalized_eig: denominator not positive definite");
  const Mat linv = llt.matrixL().solve(Mat::Identity(den.rows(), den.cols()));
  Mat c = linv * num * linv.adjoint();
  c = 0.5 * (c + c.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline Mat random_complex(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = cplx(nd(rng), nd(rng));
  return m;
}

inline Vec random_vector(std::mt19937_64& rng, Index n) { return random_complex(rng, n, 1).col(0); }

inline Mat random_hermitian(std::mt19937_64& rng, Index n) {
  const Mat g = random_complex(rng, n, n);
  return 0.5 * (g + g.adjoint());
}

inline Mat random_unitary(std::mt19937_64& rng, Index n) {
  Eigen::HouseholderQR<Mat> qr(random_complex(rng, n, n));
  return qr.householderQ() * Mat::Identity(n, n);
}

}  // namespace sbvp
