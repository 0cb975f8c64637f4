#include "qmn/relu.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace qmn {

namespace {

// Solve A x - B / x = c for x > 0.
std::optional<double> positive_root(double a, double b, double c) {
  if (a > 0) {
    const double x = (c + std::sqrt(c * c + 4 * a * b)) / (2 * a);
    if (x > 0 && std::isfinite(x)) return x;
    return std::nullopt;
  }
  if (b > 0 && c < 0) return -b / c;
  return std::nullopt;
}

}  // namespace

BalanceResult balance(const DoubleFramedTriple<double>& t, double level, double tol, int max_sweeps) {
  check_shapes(t);
  const auto& q = *t.quiver;
  const auto& hq = q.hidden();
  for (std::size_t i = 0; i < hq.size(); ++i)
    if (t.dim(i) != 1) throw Error(ErrorCode::ShapeMismatch, "balance needs a thin triple");

  const auto n = static_cast<Eigen::Index>(hq.size());
  VectorXd sq = VectorXd::Ones(n);  // g_i^2
  std::vector<double> f2(hq.size()), h2(hq.size());
  for (std::size_t i = 0; i < hq.size(); ++i) {
    f2[i] = t.f[i].squaredNorm();
    h2[i] = t.h[i].squaredNorm();
  }
  auto mu = [&](std::size_t i) {
    double m = sq(i) * f2[i] - h2[i] / sq(i);
    for (const auto& e : hq.in[i]) m += t.maps[e.arrow].squaredNorm() * sq(i) / sq(e.target);
    for (const auto& e : hq.out[i]) m -= t.maps[e.arrow].squaredNorm() * sq(e.target) / sq(i);
    return m;
  };
  auto residual = [&] {
    double r = 0;
    for (std::size_t i = 0; i < hq.size(); ++i) r = std::max(r, std::abs(mu(i) - level));
    return r;
  };

  BalanceResult out;
  double res = residual();
  while (res > tol) {
    if (out.sweeps >= max_sweeps) {
      std::ostringstream msg;
      msg << "balancing stopped after " << out.sweeps << " sweeps with residual " << res;
      throw Error(ErrorCode::NoConvergence, msg.str());
    }
    for (std::size_t i = 0; i < hq.size(); ++i) {
      double a = f2[i], b = h2[i];
      for (const auto& e : hq.in[i]) a += t.maps[e.arrow].squaredNorm() / sq(e.target);
      for (const auto& e : hq.out[i]) b += t.maps[e.arrow].squaredNorm() * sq(e.target);
      auto x = positive_root(a, b, level);
      if (!x) {
        if (a == 0 && b == 0 && level == 0) continue;
        std::ostringstream msg;
        msg << "no positive gauge solves the moment equation at '" << q.vertex(hq.vertices[i])
            << "' (in-mass " << a << ", out-mass " << b << ", level " << level << ")";
        throw Error(ErrorCode::NoConvergence, msg.str());
      }
      sq(i) = *x;
    }
    ++out.sweeps;
    res = residual();
  }

  out.gauge = sq.cwiseSqrt();
  GaugeElement<double> g;
  for (Eigen::Index i = 0; i < n; ++i) g.blocks.push_back(MatrixXd::Constant(1, 1, out.gauge(i)));
  out.balanced = act(g, t);
  out.residual = res;
  return out;
}

}  // namespace qmn
