#ifndef QMN_RANDOM_HPP
#define QMN_RANDOM_HPP

#include <cmath>
#include <random>

#include "qmn/core.hpp"
#include "qmn/network.hpp"
#include "qmn/rep.hpp"
#include "qmn/thincat.hpp"

namespace qmn {

using Rng = std::mt19937_64;

inline MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  return m;
}

inline DoubleFramedTriple<double> random_triple(QuiverPtr q, const DimensionVector& dims, Rng& rng) {
  auto t = zero_triple<double>(q, dims);
  for (auto a : q->hidden().arrows) t.maps[a] = random_matrix(t.maps[a].rows(), t.maps[a].cols(), rng);
  for (auto a : direct_arrows(*q)) t.maps[a] = random_matrix(t.maps[a].rows(), t.maps[a].cols(), rng);
  for (std::size_t i = 0; i < t.hidden_count(); ++i) {
    t.f[i] = random_matrix(t.f[i].rows(), t.f[i].cols(), rng);
    t.h[i] = random_matrix(t.h[i].rows(), t.h[i].cols(), rng);
  }
  return t;
}

/// Blocks A + (d + 1) I with A uniform in [-1, 1]: diagonally dominant, hence invertible.
inline GaugeElement<double> random_gauge(const Quiver& q, const DimensionVector& dims, Rng& rng) {
  GaugeElement<double> g;
  std::bernoulli_distribution flip(0.5);
  for (auto v : q.hidden().vertices) {
    const int d = dims[v];
    MatrixXd b = random_matrix(d, d, rng) + (d + 1.0) * MatrixXd::Identity(d, d);
    if (flip(rng)) b = -b;
    g.blocks.push_back(b);
  }
  return g;
}

inline ThinRep<double> random_thin(QuiverPtr q, Rng& rng, double lo = -1, double hi = 1) {
  const auto n = static_cast<Eigen::Index>(q->arrow_count());
  return {q, random_matrix(n, 1, rng, lo, hi)};
}

/// exp(U[-1, 1]) per hidden vertex.
inline VectorXd random_positive_gauge(const Quiver& q, Rng& rng) {
  VectorXd g = random_matrix(static_cast<Eigen::Index>(q.hidden().size()), 1, rng);
  return g.array().exp();
}

/// Magnitude in [0.5, 2], random sign, per hidden vertex.
inline VectorXd random_nonzero_gauge(const Quiver& q, Rng& rng) {
  VectorXd g = random_positive_gauge(q, rng).array().log() * std::log(2.0);
  g = g.array().exp();
  std::bernoulli_distribution flip(0.5);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (flip(rng)) g(i) = -g(i);
  return g;
}

}  // namespace qmn

#endif  // QMN_RANDOM_HPP
