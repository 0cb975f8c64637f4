#ifndef QMN_TESTS_SUPPORT_HPP
#define QMN_TESTS_SUPPORT_HPP

#include <cmath>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmn/fixtures.hpp"
#include "qmn/quiver.hpp"
#include "qmn/random.hpp"
#include "qmn/rep.hpp"
#include "qmn/thincat.hpp"

namespace qmn::testing {

using Arrows = std::vector<std::tuple<std::string, std::string, std::string>>;

inline QuiverPtr make_quiver(std::vector<std::string> vertices, const Arrows& arrows, bool network = false) {
  QuiverSpec spec;
  spec.vertices = std::move(vertices);
  for (const auto& [id, from, to] : arrows) spec.arrows.push_back({id, from, to});
  spec.network = network;
  return Quiver::make(std::move(spec));
}

/// Hidden vertices h0..h{n-1} joined by `edges` (parallel edges allowed),
/// with one source per unit of u_i and one sink per unit of w_i.
struct FramedShape {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> u, w;
};

inline QuiverPtr framed_quiver(const FramedShape& s) {
  QuiverSpec spec;
  for (int i = 0; i < s.n; ++i) spec.vertices.push_back("h" + std::to_string(i));
  int k = 0;
  for (const auto& [a, b] : s.edges)
    spec.arrows.push_back({"e" + std::to_string(k++), "h" + std::to_string(a), "h" + std::to_string(b)});
  for (int i = 0; i < s.n; ++i) {
    for (int m = 0; m < s.u[i]; ++m) {
      const std::string v = "s" + std::to_string(i) + "_" + std::to_string(m);
      spec.vertices.push_back(v);
      spec.arrows.push_back({"f" + std::to_string(i) + "_" + std::to_string(m), v, "h" + std::to_string(i)});
    }
    for (int m = 0; m < s.w[i]; ++m) {
      const std::string v = "t" + std::to_string(i) + "_" + std::to_string(m);
      spec.vertices.push_back(v);
      spec.arrows.push_back({"g" + std::to_string(i) + "_" + std::to_string(m), "h" + std::to_string(i), v});
    }
  }
  return Quiver::make(std::move(spec));
}

/// Valid shape: every hidden vertex without in-edges gets u >= 1, every one
/// without out-edges gets w >= 1.
inline FramedShape random_shape(Rng& rng, int n, double p_edge = 0.5, int max_parallel = 1, int max_frame = 2) {
  FramedShape s;
  s.n = n;
  std::bernoulli_distribution edge(p_edge);
  std::uniform_int_distribution<int> par(1, max_parallel), frame(0, max_frame);
  std::vector<int> indeg(n, 0), outdeg(n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (edge(rng)) {
        for (int k = par(rng); k > 0; --k) s.edges.emplace_back(a, b);
        ++outdeg[a];
        ++indeg[b];
      }
  for (int i = 0; i < n; ++i) {
    s.u.push_back(std::max(frame(rng), indeg[i] ? 0 : 1));
    s.w.push_back(std::max(frame(rng), outdeg[i] ? 0 : 1));
  }
  return s;
}

inline DimensionVector dims_with_hidden(const Quiver& q, const std::vector<int>& hidden) {
  auto d = DimensionVector::thin(q);
  for (std::size_t i = 0; i < hidden.size(); ++i) d[q.hidden().vertices[i]] = hidden[i];
  return d;
}

inline DimensionVector random_hidden_dims(const Quiver& q, Rng& rng, int max_dim) {
  std::uniform_int_distribution<int> dist(1, max_dim);
  auto d = DimensionVector::thin(q);
  for (auto v : q.hidden().vertices) d[v] = dist(rng);
  return d;
}

/// Layered network with optional bias vertex feeding every non-input layer.
inline QuiverPtr mlp_quiver(const std::vector<int>& layers, bool bias) {
  QuiverSpec spec;
  spec.network = true;
  auto name = [](std::size_t l, int k) { return "L" + std::to_string(l) + "_" + std::to_string(k); };
  for (std::size_t l = 0; l < layers.size(); ++l)
    for (int k = 0; k < layers[l]; ++k) spec.vertices.push_back(name(l, k));
  if (bias) {
    spec.vertices.push_back("bias");
    spec.roles["bias"] = Role::Bias;
  }
  int id = 0;
  for (std::size_t l = 1; l < layers.size(); ++l)
    for (int k = 0; k < layers[l]; ++k) {
      for (int j = 0; j < layers[l - 1]; ++j)
        spec.arrows.push_back({"w" + std::to_string(id++), name(l - 1, j), name(l, k)});
      if (bias) spec.arrows.push_back({"w" + std::to_string(id++), "bias", name(l, k)});
    }
  return Quiver::make(std::move(spec));
}

inline NeuralNetwork random_network(QuiverPtr q, Activation f, Rng& rng, double lo = -1, double hi = 1) {
  std::vector<Activation> acts(q->vertex_count(), Activation::Identity);
  for (auto v : q->hidden().vertices) acts[v] = f;
  return NeuralNetwork(random_thin(q, rng, lo, hi), acts);
}

/// Closed-form quotient map of the D~4 example, rows (t1,t2 via 4; t1,t2 via 5),
/// columns (s1, s2 into 1; s1, s2 into 2; s3 into 5).
inline Eigen::MatrixXd d4_template(const fixtures::D4Params& p) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 5);
  m.block(0, 0, 2, 2) = p.a * p.c * p.v * p.phi.transpose();
  m.block(0, 2, 2, 2) = p.b * p.c * p.v * p.psi.transpose();
  m.block(2, 0, 2, 2) = p.a * p.d * p.w * p.phi.transpose();
  m.block(2, 2, 2, 2) = p.b * p.d * p.w * p.psi.transpose();
  m.block(2, 4, 2, 1) = p.lambda * p.w;
  return m;
}

inline fixtures::D4Params random_d4(Rng& rng) {
  std::uniform_real_distribution<double> u(-2, 2);
  fixtures::D4Params p;
  p.a = u(rng); p.b = u(rng); p.c = u(rng); p.d = u(rng); p.lambda = u(rng);
  p.phi = {u(rng), u(rng)};
  p.psi = {u(rng), u(rng)};
  p.v = {u(rng), u(rng)};
  p.w = {u(rng), u(rng)};
  return p;
}

/// Number of hidden paths i ~> j (lazy included) as sum of adjacency powers.
inline Eigen::MatrixXd path_counts(const Quiver& q) {
  const auto& hq = q.hidden();
  const auto n = static_cast<Eigen::Index>(hq.size());
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  for (auto a : hq.arrows)
    adj(static_cast<Eigen::Index>(*q.hidden_index(q.arrow(a).source)),
        static_cast<Eigen::Index>(*q.hidden_index(q.arrow(a).target))) += 1;
  Eigen::MatrixXd total = Eigen::MatrixXd::Identity(n, n), power = total;
  for (Eigen::Index k = 0; k < n; ++k) {
    power = power * adj;
    total += power;
  }
  return total;
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0 ? 0 : (a - b).norm() / scale;
}

/// Per-entry relative error; entries below `floor` in magnitude are compared absolutely.
inline double max_rel_err(const Eigen::VectorXd& exact, const Eigen::VectorXd& approx, double floor = 1e-6) {
  double worst = 0;
  for (Eigen::Index k = 0; k < exact.size(); ++k) {
    const double scale = std::max({std::abs(exact(k)), std::abs(approx(k)), floor});
    worst = std::max(worst, std::abs(exact(k) - approx(k)) / scale);
  }
  return worst;
}

inline GaugeElement<double> scalar_gauge(const VectorXd& g) {
  GaugeElement<double> out;
  for (Eigen::Index i = 0; i < g.size(); ++i) out.blocks.push_back(MatrixXd::Constant(1, 1, g(i)));
  return out;
}

/// Thin rep with the given weights on arrows in declaration order.
inline ThinRep<double> thin_of(QuiverPtr q, std::vector<double> w) {
  return {q, Eigen::Map<VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()))};
}

}  // namespace qmn::testing

#endif  // QMN_TESTS_SUPPORT_HPP
