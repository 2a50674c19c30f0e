#pragma once

#include "sbvp/cylinder_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sbvp {

/// D u = sigma_t (u' + M_t u) on [0, L] with arbitrary sampled sigma_t and generator M_t.
struct FirstOrderSystem {
  CylinderGrid grid;
  std::vector<Mat> sigma;
  std::vector<Mat> generator;

  Index dim() const { return sigma.empty() ? 0 : sigma.front().rows(); }
  void validate() const {
    require(static_cast<Index>(sigma.size()) == grid.nt(), "FirstOrderSystem: one sigma per sample");
    require(static_cast<Index>(generator.size()) == grid.nt(), "FirstOrderSystem: one generator per sample");
    require(dim() > 0, "FirstOrderSystem: empty fibre");
    for (Index i = 0; i < grid.nt(); ++i)
      require(sigma[i].rows() == dim() && sigma[i].cols() == dim() && generator[i].rows() == dim() &&
                  generator[i].cols() == dim(),
              "FirstOrderSystem: shape mismatch");
  }
};

/// The system of D = sigma_t (d/dt + A + R_t).
inline FirstOrderSystem forward_system(const CylinderOperator& op) {
  FirstOrderSystem s{op.grid(), op.sigmas(), {}};
  const Mat a = op.a().matrix();
  for (Index i = 0; i < op.grid().nt(); ++i) s.generator.push_back(a + op.remainder(i));
  return s;
}

/// The formal adjoint written as D^dagger = -sigma_t^H (d/dt + A~ + R~_t), where
/// A~ + R~_t = sigma_t^{-H} ((sigma_t^H)' - (A + R_t^H) sigma_t^H).
inline FirstOrderSystem adjoint_system(const CylinderOperator& op) {
  const Index n = op.dim(), nt = op.grid().nt();
  Mat flat(nt, n * n);
  for (Index i = 0; i < nt; ++i) {
    const Mat sh = op.sigma(i).adjoint();
    flat.row(i) = Eigen::Map<const Eigen::RowVectorXcd>(sh.data(), n * n);
  }
  const Mat dflat = time_derivative(flat, op.grid().h());
  FirstOrderSystem s{op.grid(), {}, {}};
  const Mat a = op.a().matrix();
  for (Index i = 0; i < nt; ++i) {
    const Mat sh = op.sigma(i).adjoint();
    const Mat dsh = Eigen::Map<const Mat>(dflat.row(i).eval().data(), n, n);
    const Mat rhs = dsh - (a + op.remainder(i).adjoint()) * sh;
    s.sigma.push_back(-sh);
    s.generator.push_back(sh.partialPivLu().solve(rhs));
  }
  return s;
}

/// Discrete boundary value problem: box-scheme rows for each time step plus rows annihilating
/// the components of u(0) outside B0 and of u(L) outside B1.
struct AssembledBVP {
  Mat matrix;
  Index interior_rows = 0;
  Index dim = 0;
  Index nt = 0;
  BoundaryCondition b0, b1;
};

inline AssembledBVP assemble(const FirstOrderSystem& sys, const BoundaryCondition& b0, const BoundaryCondition& b1) {
  sys.validate();
  const Index n = sys.dim(), nt = sys.grid.nt();
  require(b0.ambient_dim() == n && b1.ambient_dim() == n, "assemble: boundary condition dimension mismatch");
  const double h = sys.grid.h(), sh = std::sqrt(h);
  const Mat c0 = b0.annihilator(), c1 = b1.annihilator();
  AssembledBVP bvp;
  bvp.dim = n;
  bvp.nt = nt;
  bvp.b0 = b0;
  bvp.b1 = b1;
  bvp.interior_rows = (nt - 1) * n;
  bvp.matrix = Mat::Zero(bvp.interior_rows + c0.cols() + c1.cols(), nt * n);
  const Mat id = Mat::Identity(n, n);
  for (Index i = 0; i + 1 < nt; ++i) {
    const Mat s = 0.5 * (sys.sigma[i] + sys.sigma[i + 1]);
    const Mat m = 0.5 * (sys.generator[i] + sys.generator[i + 1]);
    bvp.matrix.block(i * n, i * n, n, n) = sh * s * (-id / h + 0.5 * m);
    bvp.matrix.block(i * n, (i + 1) * n, n, n) = sh * s * (id / h + 0.5 * m);
  }
  Index row = bvp.interior_rows;
  if (c0.cols() > 0) bvp.matrix.block(row, 0, c0.cols(), n) = c0.adjoint();
  row += c0.cols();
  if (c1.cols() > 0) bvp.matrix.block(row, (nt - 1) * n, c1.cols(), n) = c1.adjoint();
  return bvp;
}

inline const std::vector<double>& kernel_tolerance_sweep() {
  static const std::vector<double> t{1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  return t;
}

struct KernelAnalysis {
  Index kernel_dim = 0;
  Index cokernel_dim = 0;         // rows - rank of the assembled matrix
  double sigma_max = 0.0;
  double sval_gap = 0.0;          // smallest singular value above the threshold
  double largest_kernel_sval = 0.0;
  bool tol_stable = true;
  std::vector<Index> dims_by_tol; // kernel dims over kernel_tolerance_sweep()
  RVec singular_values;
};

/// Kernel dimension: the number of singular values (padded with zeros to the column count) below tol * sigma_max.
inline KernelAnalysis analyze_kernel(const AssembledBVP& bvp, double tol = 1e-8) {
  if (bvp.matrix.size() == 0) throw InputError("kernel_dim: empty system");
  require(tol > 0.0 && tol < 1.0, "kernel_dim: tolerance must lie in (0, 1)");
  Eigen::BDCSVD<Mat> svd(bvp.matrix);
  const RVec s = svd.singularValues();
  const Index cols = bvp.matrix.cols(), rows = bvp.matrix.rows();
  KernelAnalysis k;
  k.singular_values = s;
  k.sigma_max = s.size() ? s(0) : 0.0;
  auto count = [&](double t) {
    Index rank = 0;
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) >= t * k.sigma_max && k.sigma_max > 0.0) ++rank;
    return rank;
  };
  const Index rank = count(tol);
  k.kernel_dim = cols - rank;
  k.cokernel_dim = rows - rank;
  k.sval_gap = rank > 0 ? s(rank - 1) : 0.0;
  k.largest_kernel_sval = rank < s.size() ? s(rank) : 0.0;
  for (double t : kernel_tolerance_sweep()) {
    k.dims_by_tol.push_back(cols - count(t));
    if (k.dims_by_tol.back() != k.kernel_dim) k.tol_stable = false;
  }
  return k;
}

inline Index kernel_dim(const AssembledBVP& bvp, double tol = 1e-8) { return analyze_kernel(bvp, tol).kernel_dim; }

/// Signed count of eigenvalues crossing zero for the flow A + c t on [0, L]:
/// #{lambda in [-cL, 0)} for c >= 0 and -#{lambda in [0, -cL)} for c < 0.
inline int aps_index_oracle(const RVec& eigenvalues, double c, double L = 1.0) {
  int k = 0;
  const double r = c * L;
  for (Index j = 0; j < eigenvalues.size(); ++j) {
    const double l = eigenvalues(j);
    if (r >= 0.0 && l >= -r && l < 0.0) ++k;
    if (r < 0.0 && l >= 0.0 && l < -r) --k;
  }
  return k;
}

/// Far-end condition for the flow family: the nonnegative spectral subspace of the generator at t = L.
inline BoundaryCondition far_end_nonnegative(const Mat& generator_at_l) {
  const EigenSystem es(generator_at_l);
  return BoundaryCondition::span(chi_plus(es).basis, BcKind::projection);
}

/// D = sigma0 (d/dt + A + c t) on [0, L].
inline CylinderOperator spectral_flow_operator(const EigenSystem& a, double c, double L, Index nt, const Mat& sigma0) {
  const Index n = a.dim();
  return CylinderOperator::with_remainder(CylinderGrid(L, nt), a, sigma0,
                                          [&](double t) { return Mat(c * t * Mat::Identity(n, n)); });
}

/// Grid size keeping h |M_t| <= 1 for the box scheme, at least 24 samples.
inline Index flow_grid_size(const EigenSystem& a, double c, double L) {
  const double m = a.spectral_radius() + std::abs(c) * L;
  return std::max<Index>(24, static_cast<Index>(std::ceil(L * m)) + 8);
}

struct IndexReport {
  Index kernel_dim = 0;
  Index cokernel_dim = 0;          // kernel of the adjoint problem with adjoint conditions
  Index matrix_cokernel_dim = 0;   // rows - rank of the forward matrix
  long index = 0;
  long algebraic_index = 0;        // columns - rows of the forward matrix
  double sval_gap = 0.0;
  double coercivity_margin = 0.0;  // sval_gap relative to the L^2 scaling of the unknowns
  bool tol_stable = true;
  std::optional<int> oracle_index;
  double cokernel_range_pairing = 0.0;
  std::vector<Index> kernel_dims_by_tol;
};

/// Index of D with B0 at t = 0 and B1 at t = L; the cokernel is the kernel of D^dagger with
/// B0^ad = (sigma_0^{-1})^H B0^perp and B1^ad = (sigma_L^{-1})^H B1^perp.
inline IndexReport index(const CylinderOperator& op, const BoundaryCondition& b0, const BoundaryCondition& b1,
                         double tol = 1e-8) {
  IndexReport r;
  const AssembledBVP fwd = assemble(forward_system(op), b0, b1);
  const KernelAnalysis kf = analyze_kernel(fwd, tol);
  const BoundaryCondition a0 = adjoint_bc(b0, op.sigma0());
  const BoundaryCondition a1 = adjoint_bc(b1, op.sigma(op.grid().nt() - 1));
  const AssembledBVP adj = assemble(adjoint_system(op), a0, a1);
  const KernelAnalysis ka = analyze_kernel(adj, tol);
  r.kernel_dim = kf.kernel_dim;
  r.cokernel_dim = ka.kernel_dim;
  r.matrix_cokernel_dim = kf.cokernel_dim;
  r.index = static_cast<long>(r.kernel_dim) - static_cast<long>(r.cokernel_dim);
  r.algebraic_index = static_cast<long>(fwd.matrix.cols()) - static_cast<long>(fwd.matrix.rows());
  r.sval_gap = kf.sval_gap;
  r.coercivity_margin = kf.sval_gap / std::sqrt(op.grid().h());
  r.tol_stable = kf.tol_stable && ka.tol_stable;
  r.kernel_dims_by_tol = kf.dims_by_tol;
  if (kf.cokernel_dim > 0) {
    Eigen::BDCSVD<Mat> svd(fwd.matrix, Eigen::ComputeFullU);
    const Index rank = fwd.matrix.rows() - kf.cokernel_dim;
    const Mat coker = svd.matrixU().rightCols(kf.cokernel_dim);
    std::mt19937_64 rng(7);
    for (int s = 0; s < 4; ++s) {
      const Vec x = random_vector(rng, fwd.matrix.cols());
      const Vec y = fwd.matrix * x;
      r.cokernel_range_pairing = std::max(r.cokernel_range_pairing, (coker.adjoint() * y).norm() / y.norm());
    }
    (void)rank;
  }
  return r;
}

/// Time-and-mode mask in eigen-coordinates: samples must vanish where mask(i, j) is true.
struct KMask {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> cells;

  static KMask none(Index nt, Index dim) {
    return {Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(nt, dim, false)};
  }
  /// Masks the given modes on samples with t <= t_max.
  static KMask modes_until(const CylinderGrid& g, Index dim, const std::vector<Index>& modes, double t_max) {
    KMask k = none(g.nt(), dim);
    for (Index i = 0; i < g.nt(); ++i)
      if (g.time(i) <= t_max)
        for (Index j : modes) k.cells(i, j) = true;
    return k;
  }
  bool contains(const KMask& o) const { return ((!o.cells) || cells).all(); }
};

struct CoercivityReport {
  double margin = 0.0;      // min |Du| / |u| over admissible samples
  Index admissible = 0;
  bool spectral_cutoff_preserves = true;  // chi_S(A) u(0) stays in B for every admissible sample
};

namespace detail {
inline bool admissible(const CylinderOperator& op, const BoundaryCondition& b, const KMask& k,
                       const CylinderSection& u) {
  if (!b.contains(u.trace())) return false;
  if (!rows_vanish(u.values, op.grid().nt() - 1)) return false;
  const Mat coeff = u.values * op.a().eigenvectors().conjugate();
  const double scale = std::max(1.0, coeff.cwiseAbs().maxCoeff());
  for (Index i = 0; i < coeff.rows(); ++i)
    for (Index j = 0; j < coeff.cols(); ++j)
      if (k.cells(i, j) && std::abs(coeff(i, j)) > 1e-12 * scale) return false;
  return true;
}
}  // namespace detail

/// Sample-based coercivity margin away from the mask; samples that are not admissible are skipped.
inline CoercivityReport coercivity_margin(const CylinderOperator& op, const BoundaryCondition& b, const KMask& k,
                                          const std::vector<CylinderSection>& samples,
                                          const Interval& cutoff_band = Interval::closed(-1.0, 1.0)) {
  require(k.cells.rows() == op.grid().nt() && k.cells.cols() == op.dim(), "coercivity_margin: mask shape");
  CoercivityReport r;
  r.margin = INFINITY;
  const Mat band = spectral_projector(op.a(), cutoff_band).matrix;
  for (const auto& u : samples) {
    detail::check_section(u, op.grid(), op.dim());
    if (!detail::admissible(op, b, k, u)) continue;
    const double nu = l2_norm(op.grid(), u.values);
    if (nu == 0.0) continue;
    ++r.admissible;
    r.margin = std::min(r.margin, l2_norm(op.grid(), apply_full(op, u).values) / nu);
    if (!b.contains(Vec(band * u.trace()))) r.spectral_cutoff_preserves = false;
  }
  if (r.admissible == 0) throw InputError("coercivity_margin: no admissible samples");
  return r;
}

/// Exact margin inf |Du| / |u| over all admissible sections (trace in B, zero on the mask, vanishing at T).
inline double exact_coercivity_margin(const CylinderOperator& op, const BoundaryCondition& b, const KMask& k) {
  const Index n = op.dim(), nt = op.grid().nt();
  require(k.cells.rows() == nt && k.cells.cols() == n, "exact_coercivity_margin: mask shape");
  const Mat& u = op.a().eigenvectors();
  const Mat bc = u.adjoint() * b.basis();  // B in eigen-coordinates
  std::vector<CylinderSection> basis;
  for (Index i = 0; i + 1 < nt; ++i) {
    if (i == 0) {
      // trace directions: vectors of B with zero masked coefficients
      std::vector<Index> masked;
      for (Index j = 0; j < n; ++j)
        if (k.cells(0, j)) masked.push_back(j);
      Mat constraint(static_cast<Index>(masked.size()), bc.cols());
      for (std::size_t m = 0; m < masked.size(); ++m) constraint.row(m) = bc.row(masked[m]);
      Mat free = Mat::Identity(bc.cols(), bc.cols());
      if (!masked.empty() && bc.cols() > 0) {
        Eigen::FullPivLU<Mat> lu(constraint);
        free = lu.kernel();
        if (free.cols() == 1 && free.norm() == 0.0) free = Mat(bc.cols(), 0);
      }
      const Mat dirs = bc * free;
      for (Index c = 0; c < dirs.cols(); ++c) {
        CylinderSection s = CylinderSection::zeros(op.grid(), n);
        s.set(0, u * dirs.col(c));
        basis.push_back(s);
      }
      continue;
    }
    for (Index j = 0; j < n; ++j) {
      if (k.cells(i, j)) continue;
      CylinderSection s = CylinderSection::zeros(op.grid(), n);
      s.set(i, u.col(j));
      basis.push_back(s);
    }
  }
  if (basis.empty()) throw InputError("exact_coercivity_margin: admissible set is empty");
  const Index m = static_cast<Index>(basis.size());
  std::vector<Mat> images;
  for (const auto& s : basis) images.push_back(apply_full(op, s).values);
  Mat num(m, m), den(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index c = 0; c <= a; ++c) {
      num(a, c) = l2_inner(op.grid(), images[c], images[a]);
      den(a, c) = l2_inner(op.grid(), basis[c].values, basis[a].values);
      num(c, a) = std::conj(num(a, c));
      den(c, a) = std::conj(den(a, c));
    }
  return std::sqrt(std::max(0.0, min_generalized_eig(num, den)));
}

struct SemiFredholmReport {
  bool applicable = true;
  std::string note;
  Index kernel_dim = 0;
  double sval_gap = 0.0;
  bool tol_stable = true;
  bool b0_semi_regular = false;
  bool b1_semi_regular = false;
  double h1_tail = 0.0;  // smallest embedding singular value on the collar [0, L/2]
};

/// Left semi-Fredholm evidence: finite stable kernel, a range gap, semi-regular conditions at both ends
/// (the far end judged against -A(L) with symbol -sigma_L), and decay of the H^1 embedding.
inline SemiFredholmReport semifredholm_report(const FirstOrderSystem& sys, const BoundaryCondition& b0,
                                              const BoundaryCondition& b1, double tol = 1e-8) {
  sys.validate();
  SemiFredholmReport r;
  double size = 0.0;
  for (const Mat& s : sys.sigma) size = std::max(size, s.cwiseAbs().maxCoeff());
  if (size == 0.0) {
    r.applicable = false;
    r.note = "not applicable: operator vanishes identically";
    return r;
  }
  const AssembledBVP bvp = assemble(sys, b0, b1);
  const KernelAnalysis k = analyze_kernel(bvp, tol);
  r.kernel_dim = k.kernel_dim;
  r.sval_gap = k.sval_gap;
  r.tol_stable = k.tol_stable;
  const Index nt = sys.grid.nt();
  const Mat& g0 = sys.generator.front();
  const Mat& gl = sys.generator[nt - 1];
  if (hermitian_defect(g0) > 1e-10 * std::max(1.0, g0.cwiseAbs().maxCoeff()) ||
      hermitian_defect(gl) > 1e-10 * std::max(1.0, gl.cwiseAbs().maxCoeff())) {
    r.note = "boundary generators not Hermitian; regularity not assessed";
    return r;
  }
  const EigenSystem a0(g0), al(Mat(-gl));
  r.b0_semi_regular = regularity_check(a0, b0, sys.sigma.front()).a_semi_regular;
  r.b1_semi_regular = regularity_check(al, b1, Mat(-sys.sigma[nt - 1])).a_semi_regular;
  r.h1_tail = h1_embedding_svals(sys.grid, 0.5 * sys.grid.T(), a0).back();
  return r;
}

}  // namespace sbvp
