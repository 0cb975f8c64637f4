#ifndef QMN_LINALG_HPP
#define QMN_LINALG_HPP

#include <algorithm>

#include "qmn/core.hpp"

// Small dense subspace toolkit. Subspaces are carried as matrices with
// orthonormal columns; every threshold is relative to the largest singular
// value of the matrix being decomposed.
namespace qmn::linalg {

inline constexpr double kSubspaceTol = 1e-10;

template <typename Scalar>
Eigen::Index numerical_rank(const Matrix<Scalar>& m, RealOf<Scalar> rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == RealOf<Scalar>(0)) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > rel_tol * s(0)) ++r;
  return r;
}

/// Orthonormal basis of the column space.
template <typename Scalar>
Matrix<Scalar> column_basis(const Matrix<Scalar>& m, RealOf<Scalar> rel_tol = kSubspaceTol) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix<Scalar>(m.rows(), 0);
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s(0) > RealOf<Scalar>(0))
    while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

/// Orthonormal basis of the kernel.
template <typename Scalar>
Matrix<Scalar> null_basis(const Matrix<Scalar>& m, RealOf<Scalar> rel_tol = kSubspaceTol) {
  const auto n = m.cols();
  if (n == 0) return Matrix<Scalar>(0, 0);
  if (m.rows() == 0) return Matrix<Scalar>::Identity(n, n);
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s(0) > RealOf<Scalar>(0))
    while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  return svd.matrixV().rightCols(n - r);
}

/// Kernel basis where singular values at or below `abs_threshold` count as zero.
template <typename Scalar>
Matrix<Scalar> null_basis_below(const Matrix<Scalar>& m, RealOf<Scalar> abs_threshold) {
  const auto n = m.cols();
  if (n == 0) return Matrix<Scalar>(0, 0);
  if (m.rows() == 0) return Matrix<Scalar>::Identity(n, n);
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > abs_threshold) ++r;
  return svd.matrixV().rightCols(n - r);
}

/// Component of `v` orthogonal to the span of the orthonormal columns of `basis`.
template <typename Scalar>
Matrix<Scalar> reject(const Matrix<Scalar>& basis, const Matrix<Scalar>& v) {
  if (basis.cols() == 0) return v;
  return v - basis * (basis.adjoint() * v);
}

/// Span of two subspaces given by orthonormal bases.
template <typename Scalar>
Matrix<Scalar> sum(const Matrix<Scalar>& a, const Matrix<Scalar>& b,
                   RealOf<Scalar> rel_tol = kSubspaceTol) {
  Matrix<Scalar> both(a.rows(), a.cols() + b.cols());
  both << a, b;
  return column_basis<Scalar>(both, rel_tol);
}

/// Intersection of two subspaces given by orthonormal bases.
template <typename Scalar>
Matrix<Scalar> intersect(const Matrix<Scalar>& a, const Matrix<Scalar>& b,
                         RealOf<Scalar> rel_tol = kSubspaceTol) {
  if (a.cols() == 0 || b.cols() == 0) return Matrix<Scalar>(a.rows(), 0);
  Matrix<Scalar> stacked(a.rows(), a.cols() + b.cols());
  stacked << a, -b;
  Matrix<Scalar> ker = null_basis<Scalar>(stacked, rel_tol);
  return column_basis<Scalar>(a * ker.topRows(a.cols()), rel_tol);
}

/// Orthonormal complement of `inner` inside `outer` (inner assumed contained in outer).
template <typename Scalar>
Matrix<Scalar> complement_within(const Matrix<Scalar>& outer, const Matrix<Scalar>& inner,
                                 RealOf<Scalar> rel_tol = kSubspaceTol) {
  if (outer.cols() == 0) return outer;
  Matrix<Scalar> rest = reject<Scalar>(inner, outer);
  Matrix<Scalar> basis = column_basis<Scalar>(rest, rel_tol);
  const auto want = outer.cols() - inner.cols();
  if (basis.cols() > want) basis = basis.leftCols(std::max<Eigen::Index>(want, 0)).eval();
  return basis;
}

/// Largest singular value of the part of `v` lying outside span(basis),
/// relative to the size of `v`. Zero means contained.
template <typename Scalar>
RealOf<Scalar> containment_residual(const Matrix<Scalar>& basis, const Matrix<Scalar>& v) {
  if (v.size() == 0) return 0;
  const auto scale = v.norm();
  if (scale == RealOf<Scalar>(0)) return 0;
  return reject<Scalar>(basis, v).norm() / scale;
}

}  // namespace qmn::linalg

#endif  // QMN_LINALG_HPP
