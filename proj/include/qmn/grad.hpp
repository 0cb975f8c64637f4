#ifndef QMN_GRAD_HPP
#define QMN_GRAD_HPP

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "qmn/core.hpp"
#include "qmn/network.hpp"

namespace qmn {

enum class Loss { Mse, SoftmaxCrossEntropy };

const char* to_string(Loss loss);
std::optional<Loss> parse_loss(std::string_view text);

VectorXd softmax(const VectorXd& z);
/// mse: sum (z_i - y_i)^2. softmax-ce: -sum y_i log softmax(z)_i.
double loss_value(Loss loss, const VectorXd& z, const VectorXd& y);
/// Gradient with respect to the network output z.
VectorXd loss_gradient(Loss loss, const VectorXd& z, const VectorXd& y);

/// dW per arrow, read as a thin representation of the opposite quiver, plus
/// the vertex adjoints da_v = dL/da_v of the backward sweep.
struct GradientRep {
  QuiverPtr quiver;
  VectorXd dw;
  VectorXd da;
};

/// Same vertices, every arrow reversed.
QuiverPtr opposite(const Quiver& q);
ThinRep<double> as_opposite(const GradientRep& g);

/// Reverse-mode chain rule; exact gradient of loss(forward(n, x), y).
GradientRep backprop(const NeuralNetwork& n, const VectorXd& x, const VectorXd& y, Loss loss);

/// Gradient computed from the knowledge representation W_x^f alone: linear
/// backprop through W_x^f on the all-ones input, then dW_a = lambda_t z_s c_a.
/// Agrees with backprop whenever f(z)/z = f'(z) at the hidden vertices
/// (identity everywhere, ReLU off its kink). SingularPreActivation as for
/// knowledge_map.
GradientRep backprop_factored(const NeuralNetwork& n, const VectorXd& x, const VectorXd& y, Loss loss);

/// The combinatorial formulas as printed: f in place of df in the inner
/// recursion and in the dW weight. Kept for comparison only.
GradientRep backprop_literal(const NeuralNetwork& n, const VectorXd& x, const VectorXd& y, Loss loss);

/// Central differences in every weight.
VectorXd numerical_gradient(const NeuralNetwork& n, const VectorXd& x, const VectorXd& y, Loss loss,
                            double step = 1e-5);

/// dW_a -> dW_a g_s / g_t, with g per hidden index and 1 at framed vertices.
GradientRep gradient_transform(const VectorXd& g, const GradientRep& dw);

struct Sample {
  VectorXd x;
  VectorXd y;
};
using Dataset = std::vector<Sample>;

double mean_loss(const NeuralNetwork& n, const Dataset& data, Loss loss);
/// Arithmetic mean of per-sample gradients, reduced in sample order.
VectorXd batch_gradient(const NeuralNetwork& n, const Dataset& data, Loss loss, unsigned threads = 0);

struct TrainOptions {
  Loss loss = Loss::Mse;
  double lr = 0.05;
  int epochs = 500;
  /// 0 means QMN_THREADS or 1.
  unsigned threads = 0;
  double divergence = 1e12;
  /// Called before each update and once after the last, with the epoch index and loss.
  std::function<void(int, const NeuralNetwork&, double)> observer;
};

struct TrainResult {
  NeuralNetwork net;
  std::vector<double> history;  // loss before each epoch, then the final loss
};

/// Full-batch gradient descent. DivergenceDetected when the loss exceeds the
/// threshold or stops being finite.
TrainResult train(const NeuralNetwork& n, const Dataset& data, const TrainOptions& opts);

/// QMN_THREADS when set and positive, else 1.
unsigned default_threads();

}  // namespace qmn

#endif  // QMN_GRAD_HPP
