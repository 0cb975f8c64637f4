#ifndef QMN_RELU_HPP
#define QMN_RELU_HPP

#include <vector>

#include "qmn/core.hpp"
#include "qmn/rep.hpp"

namespace qmn {

/// mu_i = sum_{a into i} V_a V_a* - sum_{a out of i} V_a* V_a + f_i f_i* - h_i* h_i.
template <typename Scalar>
std::vector<Matrix<Scalar>> momentum(const DoubleFramedTriple<Scalar>& t) {
  check_shapes(t);
  const auto& q = *t.quiver;
  const auto& hq = q.hidden();
  std::vector<Matrix<Scalar>> mu;
  for (std::size_t i = 0; i < hq.size(); ++i) mu.push_back(t.f[i] * t.f[i].adjoint() - t.h[i].adjoint() * t.h[i]);
  for (auto a : hq.arrows) {
    const auto s = *q.hidden_index(q.arrow(a).source);
    const auto tt = *q.hidden_index(q.arrow(a).target);
    mu[tt] += t.maps[a] * t.maps[a].adjoint();
    mu[s] -= t.maps[a].adjoint() * t.maps[a];
  }
  return mu;
}

struct LevelSetReport {
  std::vector<double> residual;  // spectral norm of mu_i - level * Id
  std::vector<bool> member;
  bool all() const {
    for (bool m : member)
      if (!m) return false;
    return true;
  }
};

/// Membership of t in mu^{-1}(level * Id); level 0 gives M+, level 1 gives M~+.
template <typename Scalar>
LevelSetReport level_set_membership(const DoubleFramedTriple<Scalar>& t, double level, double tol = 1e-8) {
  LevelSetReport r;
  for (const auto& m : momentum(t)) {
    Matrix<Scalar> diff = m - Scalar(level) * Matrix<Scalar>::Identity(m.rows(), m.cols());
    double res = 0;
    if (diff.size()) res = static_cast<double>(Eigen::JacobiSVD<Matrix<Scalar>>(diff).singularValues()(0));
    r.residual.push_back(res);
    r.member.push_back(res <= tol);
  }
  return r;
}

struct BalanceResult {
  VectorXd gauge;  // positive scalar per hidden vertex
  DoubleFramedTriple<double> balanced;
  int sweeps = 0;
  double residual = 0;  // max_i |mu_i - level|
};

inline constexpr int kBalanceSweeps = 10000;

/// Positive gauge g with mu(g . t) = level at every hidden vertex of a thin
/// real triple, by exact Gauss-Seidel updates in g_i^2. NoConvergence when a
/// vertex equation has no positive root or the sweep budget runs out.
BalanceResult balance(const DoubleFramedTriple<double>& t, double level, double tol = 1e-8,
                      int max_sweeps = kBalanceSweeps);

}  // namespace qmn

#endif  // QMN_RELU_HPP
