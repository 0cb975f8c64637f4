#include "qmn/grad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace qmn {

const char* to_string(Loss loss) {
  switch (loss) {
    case Loss::Mse: return "mse";
    case Loss::SoftmaxCrossEntropy: return "softmax-ce";
  }
  return "?";
}

std::optional<Loss> parse_loss(std::string_view text) {
  if (text == "mse") return Loss::Mse;
  if (text == "softmax-ce" || text == "cross-entropy" || text == "ce") return Loss::SoftmaxCrossEntropy;
  return std::nullopt;
}

VectorXd softmax(const VectorXd& z) {
  if (z.size() == 0) return z;
  VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

double loss_value(Loss loss, const VectorXd& z, const VectorXd& y) {
  if (z.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "label size differs from the output size");
  switch (loss) {
    case Loss::Mse: return (z - y).squaredNorm();
    case Loss::SoftmaxCrossEntropy: {
      if (z.size() == 0) return 0;
      const double m = z.maxCoeff();
      const double lse = m + std::log((z.array() - m).exp().sum());
      return -(y.array() * (z.array() - lse)).sum();
    }
  }
  return 0;
}

VectorXd loss_gradient(Loss loss, const VectorXd& z, const VectorXd& y) {
  if (z.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "label size differs from the output size");
  switch (loss) {
    case Loss::Mse: return 2.0 * (z - y);
    case Loss::SoftmaxCrossEntropy: return softmax(z) * y.sum() - y;
  }
  return z;
}

QuiverPtr opposite(const Quiver& q) {
  QuiverSpec spec;
  spec.vertices = q.spec().vertices;
  for (const auto& a : q.arrows()) spec.arrows.push_back({a.id, q.vertex(a.target), q.vertex(a.source)});
  return Quiver::make(std::move(spec));
}

ThinRep<double> as_opposite(const GradientRep& g) { return {opposite(*g.quiver), g.dw}; }

namespace {

Eigen::Index ix(std::size_t k) { return static_cast<Eigen::Index>(k); }

VectorXd sink_values(const Quiver& q, const VectorXd& per_vertex) {
  const auto sinks = framed_sinks(q);
  VectorXd out(ix(sinks.size()));
  for (std::size_t k = 0; k < sinks.size(); ++k) out(ix(k)) = per_vertex(ix(sinks[k]));
  return out;
}

VectorXd per_vertex_from_sinks(const Quiver& q, const VectorXd& at_sinks) {
  const auto sinks = framed_sinks(q);
  VectorXd out = VectorXd::Zero(ix(q.vertex_count()));
  for (std::size_t k = 0; k < sinks.size(); ++k) out(ix(sinks[k])) = at_sinks(ix(k));
  return out;
}

}  // namespace

GradientRep backprop(const NeuralNetwork& n, const VectorXd& x, const VectorXd& y, Loss loss) {
  const auto& q = n.quiver();
  const auto tr = forward(n, x);
  const auto& w = n.weights().weights;
  GradientRep g{n.quiver_ptr(), VectorXd::Zero(w.size()), per_vertex_from_sinks(q, loss_gradient(loss, tr.output, y))};
  VectorXd delta = g.da;  // dL/dz; sinks carry the identity
  const auto& order = q.classification().topological_order;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto v = *it;
    if (q.out_arrows(v).empty()) continue;
    double da = 0;
    for (auto a : q.out_arrows(v)) da += w(ix(a)) * delta(ix(q.arrow(a).target));
    g.da(ix(v)) = da;
    delta(ix(v)) = q.is_hidden(v) ? derivative(n.activation(v), tr.z(ix(v))) * da : 0.0;
  }
  for (std::size_t a = 0; a < q.arrow_count(); ++a)
    g.dw(ix(a)) = delta(ix(q.arrow(a).target)) * tr.a(ix(q.arrow(a).source));
  return g;
}

GradientRep backprop_factored(const NeuralNetwork& n, const VectorXd& x, const VectorXd& y, Loss loss) {
  const auto& q = n.quiver();
  const auto tr = forward(n, x);
  const VectorXd c = knowledge_factors(n, tr);
  const ThinRep<double> k{n.quiver_ptr(), n.weights().weights.cwiseProduct(c)};
  const VectorXd value = psi_hat_values(k);
  GradientRep g{n.quiver_ptr(), VectorXd::Zero(c.size()),
                per_vertex_from_sinks(q, loss_gradient(loss, sink_values(q, value), y))};
  const auto& order = q.classification().topological_order;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto v = *it;
    if (q.out_arrows(v).empty()) continue;
    double lambda = 0;
    for (auto a : q.out_arrows(v)) lambda += k.weights(ix(a)) * g.da(ix(q.arrow(a).target));
    g.da(ix(v)) = lambda;
  }
  for (std::size_t a = 0; a < q.arrow_count(); ++a)
    g.dw(ix(a)) = g.da(ix(q.arrow(a).target)) * value(ix(q.arrow(a).source)) * c(ix(a));
  return g;
}

GradientRep backprop_literal(const NeuralNetwork& n, const VectorXd& x, const VectorXd& y, Loss loss) {
  const auto& q = n.quiver();
  const auto tr = forward(n, x);
  const ThinRep<double> k{n.quiver_ptr(), n.weights().weights.cwiseProduct(knowledge_factors(n, tr))};
  const VectorXd value = psi_hat_values(k);
  const auto& w = n.weights().weights;
  // f_v evaluated at the reconstructed pre-activation; sources read as their activation output.
  auto fz = [&](std::size_t v) {
    return q.is_source(v) ? tr.a(ix(v)) : activate(n.activation(v), value(ix(v)));
  };
  auto is_sink = [&](std::size_t v) { return q.out_arrows(v).empty(); };
  GradientRep g{n.quiver_ptr(), VectorXd::Zero(w.size()),
                per_vertex_from_sinks(q, loss_gradient(loss, sink_values(q, value), y))};
  const auto& order = q.classification().topological_order;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto v = *it;
    if (is_sink(v)) continue;
    double da = 0;
    for (auto a : q.out_arrows(v)) {
      const auto t = q.arrow(a).target;
      da += is_sink(t) ? w(ix(a)) * g.da(ix(t)) : w(ix(a)) * g.da(ix(t)) * fz(t);
    }
    g.da(ix(v)) = da;
  }
  for (std::size_t a = 0; a < q.arrow_count(); ++a) {
    const auto s = q.arrow(a).source, t = q.arrow(a).target;
    g.dw(ix(a)) = is_sink(t) ? g.da(ix(t)) * fz(s)
                             : g.da(ix(t)) * derivative(n.activation(t), value(ix(t))) * fz(s);
  }
  return g;
}

VectorXd numerical_gradient(const NeuralNetwork& n, const VectorXd& x, const VectorXd& y, Loss loss,
                            double step) {
  auto work = n;
  auto& w = work.weights().weights;
  VectorXd out(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double keep = w(k);
    w(k) = keep + step;
    const double up = loss_value(loss, forward(work, x).output, y);
    w(k) = keep - step;
    const double down = loss_value(loss, forward(work, x).output, y);
    w(k) = keep;
    out(k) = (up - down) / (2 * step);
  }
  return out;
}

GradientRep gradient_transform(const VectorXd& g, const GradientRep& dw) {
  const auto& q = *dw.quiver;
  if (static_cast<std::size_t>(g.size()) != q.hidden().size())
    throw Error(ErrorCode::ShapeMismatch, "gauge needs one scalar per hidden vertex");
  auto at = [&](std::size_t v) {
    auto i = q.hidden_index(v);
    return i ? g(ix(*i)) : 1.0;
  };
  auto out = dw;
  for (std::size_t a = 0; a < q.arrow_count(); ++a)
    out.dw(ix(a)) *= at(q.arrow(a).source) / at(q.arrow(a).target);
  for (std::size_t v = 0; v < q.vertex_count(); ++v) out.da(ix(v)) /= at(v);
  return out;
}

unsigned default_threads() {
  if (const char* env = std::getenv("QMN_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

double mean_loss(const NeuralNetwork& n, const Dataset& data, Loss loss) {
  if (data.empty()) return 0;
  double total = 0;
  for (const auto& s : data) total += loss_value(loss, forward(n, s.x).output, s.y);
  return total / static_cast<double>(data.size());
}

VectorXd batch_gradient(const NeuralNetwork& n, const Dataset& data, Loss loss, unsigned threads) {
  const auto m = n.weights().weights.size();
  if (data.empty()) return VectorXd::Zero(m);
  if (threads == 0) threads = default_threads();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(data.size())));
  std::vector<VectorXd> per_sample(data.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) per_sample[k] = backprop(n, data[k].x, data[k].y, loss).dw;
  };
  if (threads == 1) {
    work(0, data.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (data.size() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < data.size(); begin += chunk)
      pool.emplace_back(work, begin, std::min(data.size(), begin + chunk));
    for (auto& t : pool) t.join();
  }
  VectorXd sum = VectorXd::Zero(m);
  for (const auto& g : per_sample) sum += g;
  return sum / static_cast<double>(data.size());
}

TrainResult train(const NeuralNetwork& n, const Dataset& data, const TrainOptions& opts) {
  if (!(opts.lr >= 0)) throw Error(ErrorCode::ShapeMismatch, "learning rate must be nonnegative");
  TrainResult result{n, {}};
  auto record = [&](int epoch) {
    const double l = mean_loss(result.net, data, opts.loss);
    if (!std::isfinite(l) || l > opts.divergence)
      throw Error(ErrorCode::DivergenceDetected,
                  "loss " + std::to_string(l) + " at epoch " + std::to_string(epoch));
    result.history.push_back(l);
    if (opts.observer) opts.observer(epoch, result.net, l);
  };
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    record(epoch);
    result.net.weights().weights -= opts.lr * batch_gradient(result.net, data, opts.loss, opts.threads);
  }
  record(opts.epochs);
  return result;
}

}  // namespace qmn
