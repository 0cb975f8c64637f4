#include "qmn/network.hpp"

#include <cmath>
#include <set>
#include <utility>

namespace qmn {

const char* to_string(Activation f) {
  switch (f) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

std::optional<Activation> parse_activation(std::string_view text) {
  if (text == "identity" || text == "linear") return Activation::Identity;
  if (text == "relu") return Activation::Relu;
  if (text == "tanh") return Activation::Tanh;
  if (text == "sigmoid") return Activation::Sigmoid;
  return std::nullopt;
}

double activate(Activation f, double z) {
  switch (f) {
    case Activation::Identity: return z;
    case Activation::Relu: return z > 0 ? z : 0.0;
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

double derivative(Activation f, double z) {
  switch (f) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return z > 0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

std::vector<std::size_t> framed_sources(const Quiver& q) { return q.classification().sources; }

std::vector<std::size_t> framed_sinks(const Quiver& q) {
  std::vector<std::size_t> out;
  for (auto v : q.classification().sinks)
    if (!q.is_source(v)) out.push_back(v);
  return out;
}

NeuralNetwork::NeuralNetwork(ThinRep<double> weights, std::vector<Activation> activations)
    : weights_(std::move(weights)), activations_(std::move(activations)) {
  const auto& q = *weights_.quiver;
  check_shapes(weights_);
  if (activations_.size() != q.vertex_count())
    throw Error(ErrorCode::ShapeMismatch, "one activation per vertex is required");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& a : q.arrows())
    if (!seen.emplace(a.source, a.target).second)
      throw Error(ErrorCode::MultipleArrows, "network quivers admit at most one arrow between '" +
                                                 q.vertex(a.source) + "' and '" + q.vertex(a.target) + "'");
  for (std::size_t v = 0; v < q.vertex_count(); ++v) {
    if (!q.is_hidden(v)) activations_[v] = Activation::Identity;
    if (q.is_source(v))
      (q.role(v) == Role::Bias ? biases_ : inputs_).push_back(v);
  }
  outputs_ = framed_sinks(q);
}

NeuralNetwork::NeuralNetwork(ThinRep<double> weights)
    : NeuralNetwork(weights, std::vector<Activation>(weights.quiver->vertex_count(), Activation::Identity)) {}

ForwardTrace forward(const NeuralNetwork& n, const VectorXd& x) {
  const auto& q = n.quiver();
  if (static_cast<std::size_t>(x.size()) != n.inputs().size())
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(x.size()) + " entries, network expects " +
                                              std::to_string(n.inputs().size()));
  const auto nv = static_cast<Eigen::Index>(q.vertex_count());
  ForwardTrace tr{VectorXd::Zero(nv), VectorXd::Zero(nv), VectorXd()};
  for (std::size_t k = 0; k < n.inputs().size(); ++k) {
    tr.a(static_cast<Eigen::Index>(n.inputs()[k])) = x(static_cast<Eigen::Index>(k));
    tr.z(static_cast<Eigen::Index>(n.inputs()[k])) = 1.0;
  }
  for (auto b : n.biases()) {
    tr.a(static_cast<Eigen::Index>(b)) = 1.0;
    tr.z(static_cast<Eigen::Index>(b)) = 1.0;
  }
  for (auto v : q.classification().topological_order) {
    if (q.is_source(v)) continue;
    double z = 0;
    for (auto arrow : q.in_arrows(v))
      z += n.weights().weights(static_cast<Eigen::Index>(arrow)) *
           tr.a(static_cast<Eigen::Index>(q.arrow(arrow).source));
    tr.z(static_cast<Eigen::Index>(v)) = z;
    tr.a(static_cast<Eigen::Index>(v)) = activate(n.activation(v), z);
  }
  tr.output.resize(static_cast<Eigen::Index>(n.outputs().size()));
  for (std::size_t k = 0; k < n.outputs().size(); ++k)
    tr.output(static_cast<Eigen::Index>(k)) = tr.a(static_cast<Eigen::Index>(n.outputs()[k]));
  return tr;
}

VectorXd knowledge_factors(const NeuralNetwork& n, const ForwardTrace& tr, double tol) {
  const auto& q = n.quiver();
  VectorXd c(static_cast<Eigen::Index>(q.arrow_count()));
  for (std::size_t k = 0; k < q.arrow_count(); ++k) {
    const auto s = q.arrow(k).source;
    const auto si = static_cast<Eigen::Index>(s);
    if (q.is_source(s)) {
      c(static_cast<Eigen::Index>(k)) = q.role(s) == Role::Bias ? 1.0 : tr.a(si);
    } else {
      if (std::abs(tr.z(si)) < tol)
        throw Error(ErrorCode::SingularPreActivation,
                    "pre-activation at '" + q.vertex(s) + "' vanishes; the knowledge map is undefined here");
      c(static_cast<Eigen::Index>(k)) = tr.a(si) / tr.z(si);
    }
  }
  return c;
}

ThinRep<double> knowledge_map(const NeuralNetwork& n, const VectorXd& x, double tol) {
  auto tr = forward(n, x);
  return {n.quiver_ptr(), n.weights().weights.cwiseProduct(knowledge_factors(n, tr, tol))};
}

VectorXd psi_hat_values(const ThinRep<double>& w) {
  const auto& q = *w.quiver;
  check_shapes(w);
  VectorXd value = VectorXd::Zero(static_cast<Eigen::Index>(q.vertex_count()));
  for (auto v : q.classification().topological_order) {
    if (q.is_source(v)) {
      value(static_cast<Eigen::Index>(v)) = 1.0;
      continue;
    }
    double z = 0;
    for (auto arrow : q.in_arrows(v))
      z += w.weights(static_cast<Eigen::Index>(arrow)) * value(static_cast<Eigen::Index>(q.arrow(arrow).source));
    value(static_cast<Eigen::Index>(v)) = z;
  }
  return value;
}

VectorXd psi_hat(const ThinRep<double>& w) {
  const auto values = psi_hat_values(w);
  const auto sinks = framed_sinks(*w.quiver);
  VectorXd out(static_cast<Eigen::Index>(sinks.size()));
  for (std::size_t k = 0; k < sinks.size(); ++k)
    out(static_cast<Eigen::Index>(k)) = values(static_cast<Eigen::Index>(sinks[k]));
  return out;
}

namespace {

std::pair<std::vector<Eigen::Index>, Eigen::Index> stacked_offsets(const std::vector<std::size_t>& vertices,
                                                                   const DimensionVector& dims,
                                                                   std::size_t vertex_count) {
  std::vector<Eigen::Index> off(vertex_count, -1);
  Eigen::Index total = 0;
  for (auto v : vertices) {
    off[v] = total;
    total += dims[v];
  }
  return {off, total};
}

}  // namespace

MatrixXd in_map(const Quiver& q, const DimensionVector& dims) {
  const auto fd = framing_data(q, dims);
  const auto [src_off, src_dim] = stacked_offsets(framed_sources(q), dims, q.vertex_count());
  const auto [row_off, rows] = ModuliPoint<double>::offsets(fd.u);
  MatrixXd m = MatrixXd::Zero(rows, src_dim);
  for (std::size_t i = 0; i < fd.in_slots.size(); ++i)
    for (const auto& slot : fd.in_slots[i])
      m.block(row_off[i] + slot.offset, src_off[slot.terminal], slot.dim, slot.dim).setIdentity();
  return m;
}

MatrixXd out_map(const Quiver& q, const DimensionVector& dims) {
  const auto fd = framing_data(q, dims);
  const auto [snk_off, snk_dim] = stacked_offsets(framed_sinks(q), dims, q.vertex_count());
  const auto [col_off, cols] = ModuliPoint<double>::offsets(fd.w);
  MatrixXd m = MatrixXd::Zero(snk_dim, cols);
  for (std::size_t i = 0; i < fd.out_slots.size(); ++i)
    for (const auto& slot : fd.out_slots[i])
      m.block(snk_off[slot.terminal], col_off[i] + slot.offset, slot.dim, slot.dim).setIdentity();
  return m;
}

MatrixXd network_matrix(const ModuliPoint<double>& m) {
  const auto& q = *m.quiver;
  MatrixXd nv = out_map(q, m.dims) * m.assembled() * in_map(q, m.dims);
  const auto [src_off, src_dim] = stacked_offsets(framed_sources(q), m.dims, q.vertex_count());
  const auto [snk_off, snk_dim] = stacked_offsets(framed_sinks(q), m.dims, q.vertex_count());
  for (std::size_t k = 0; k < m.direct.size(); ++k) {
    const auto& arrow = q.arrow(m.direct[k]);
    nv.block(snk_off[arrow.target], src_off[arrow.source], m.dims[arrow.target], m.dims[arrow.source]) +=
        m.direct_blocks[k];
  }
  return nv;
}

MatrixXd network_matrix(const DoubleFramedTriple<double>& t) { return network_matrix(project(t)); }

VectorXd psi_hat(const ModuliPoint<double>& m) {
  const auto in = in_map(*m.quiver, m.dims);
  return network_matrix(m) * VectorXd::Ones(in.cols());
}

VectorXd forward_linear(const Representation<double>& r, const VectorXd& x) {
  const auto& q = *r.quiver;
  check_shapes(r);
  const auto sources = framed_sources(q);
  const auto sinks = framed_sinks(q);
  const auto [src_off, src_dim] = stacked_offsets(sources, r.dims, q.vertex_count());
  const auto [snk_off, snk_dim] = stacked_offsets(sinks, r.dims, q.vertex_count());
  if (x.size() != src_dim) throw Error(ErrorCode::ShapeMismatch, "input does not match the source dimensions");
  std::vector<VectorXd> value(q.vertex_count());
  for (auto v : q.classification().topological_order) {
    if (q.is_source(v)) {
      value[v] = x.segment(src_off[v], r.dims[v]);
      continue;
    }
    value[v] = VectorXd::Zero(r.dims[v]);
    for (auto arrow : q.in_arrows(v)) value[v] += r.maps[arrow] * value[q.arrow(arrow).source];
  }
  VectorXd out(snk_dim);
  for (auto v : sinks) out.segment(snk_off[v], r.dims[v]) = value[v];
  return out;
}

MatrixXd forward_matrix(const Representation<double>& r) {
  const auto sources = framed_sources(*r.quiver);
  Eigen::Index n = 0;
  for (auto v : sources) n += r.dims[v];
  MatrixXd basis = MatrixXd::Identity(n, n);
  MatrixXd m;
  for (Eigen::Index k = 0; k < n; ++k) {
    VectorXd col = forward_linear(r, basis.col(k));
    if (k == 0) m.resize(col.size(), n);
    m.col(k) = col;
  }
  if (n == 0) {
    Eigen::Index rows = 0;
    for (auto v : framed_sinks(*r.quiver)) rows += r.dims[v];
    m = MatrixXd::Zero(rows, 0);
  }
  return m;
}

}  // namespace qmn
