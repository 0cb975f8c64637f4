#ifndef QMN_NETWORK_HPP
#define QMN_NETWORK_HPP

#include <optional>
#include <string_view>
#include <vector>

#include "qmn/core.hpp"
#include "qmn/moduli.hpp"
#include "qmn/quiver.hpp"
#include "qmn/rep.hpp"
#include "qmn/thincat.hpp"

namespace qmn {

enum class Activation { Identity, Relu, Tanh, Sigmoid };

const char* to_string(Activation f);
std::optional<Activation> parse_activation(std::string_view text);

double activate(Activation f, double z);
/// Almost-everywhere derivative; ReLU'(0) = 0.
double derivative(Activation f, double z);

inline constexpr double kPreActivationTol = 1e-12;

/// Thin weights plus one activation per vertex. Sources and sinks carry the
/// identity; bias sources feed the constant 1.
class NeuralNetwork {
 public:
  NeuralNetwork(ThinRep<double> weights, std::vector<Activation> activations);
  /// Identity activations everywhere.
  explicit NeuralNetwork(ThinRep<double> weights);

  const Quiver& quiver() const { return *weights_.quiver; }
  const QuiverPtr& quiver_ptr() const { return weights_.quiver; }
  const ThinRep<double>& weights() const { return weights_; }
  ThinRep<double>& weights() { return weights_; }
  Activation activation(std::size_t v) const { return activations_[v]; }
  const std::vector<Activation>& activations() const { return activations_; }

  const std::vector<std::size_t>& inputs() const { return inputs_; }
  const std::vector<std::size_t>& biases() const { return biases_; }
  const std::vector<std::size_t>& outputs() const { return outputs_; }

  NeuralNetwork with_weights(ThinRep<double> w) const { return NeuralNetwork(std::move(w), activations_); }
  NeuralNetwork with_identity_activations() const { return NeuralNetwork(weights_); }

 private:
  ThinRep<double> weights_;
  std::vector<Activation> activations_;
  std::vector<std::size_t> inputs_, biases_, outputs_;
};

/// Per-vertex activation outputs a_v and pre-activations z_v. At sources z_v = 1.
struct ForwardTrace {
  VectorXd a;
  VectorXd z;
  VectorXd output;  // a at the sinks, in vertex order
};

ForwardTrace forward(const NeuralNetwork& n, const VectorXd& x);

/// W_x^f: input arrows scaled by x_s, bias arrows unchanged, hidden-source
/// arrows scaled by a_s / z_s. SingularPreActivation when some |z_s| < tol.
ThinRep<double> knowledge_map(const NeuralNetwork& n, const VectorXd& x,
                              double tol = kPreActivationTol);

/// The factor c_a with (W_x^f)_a = W_a c_a.
VectorXd knowledge_factors(const NeuralNetwork& n, const ForwardTrace& trace,
                           double tol = kPreActivationTol);

/// Identity activations on the all-ones input; values at every vertex.
VectorXd psi_hat_values(const ThinRep<double>& w);
/// Values at the sinks only.
VectorXd psi_hat(const ThinRep<double>& w);
/// out o q o in on the all-ones vector; requires unit source dimensions.
VectorXd psi_hat(const ModuliPoint<double>& m);

/// in: stacked source spaces -> (+)U_i, copying each source into its slots.
MatrixXd in_map(const Quiver& q, const DimensionVector& dims);
/// out: (+)W_j -> stacked sink spaces, summing slots into their sinks.
MatrixXd out_map(const Quiver& q, const DimensionVector& dims);
/// N_V = out o pi(V) o in, plus the maps of direct source-to-sink arrows.
MatrixXd network_matrix(const DoubleFramedTriple<double>& t);
MatrixXd network_matrix(const ModuliPoint<double>& m);

/// Linear forward propagation of stacked source vectors to stacked sink vectors.
VectorXd forward_linear(const Representation<double>& r, const VectorXd& x);
/// Matrix of forward_linear.
MatrixXd forward_matrix(const Representation<double>& r);

/// Source and sink vertices (sinks exclude isolated vertices), in vertex order.
std::vector<std::size_t> framed_sources(const Quiver& q);
std::vector<std::size_t> framed_sinks(const Quiver& q);

}  // namespace qmn

#endif  // QMN_NETWORK_HPP
