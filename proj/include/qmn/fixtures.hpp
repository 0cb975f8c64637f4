#ifndef QMN_FIXTURES_HPP
#define QMN_FIXTURES_HPP

#include <Eigen/Dense>

#include "qmn/network.hpp"
#include "qmn/quiver.hpp"
#include "qmn/rep.hpp"
#include "qmn/thincat.hpp"

// The three worked examples: the path i -> j -> k, the D~4-shaped network
// with five hidden vertices, and the single hidden ReLU unit.
namespace qmn::fixtures {

/// i --a--> j --b--> k.
QuiverPtr a3();
ThinRep<double> a3_thin(double a, double b);

/// Sources s1 s2 s3, hidden 1..5, sinks t1 t2.
QuiverPtr d4tilde();

struct D4Params {
  double a = 1, b = 1, c = 1, d = 1, lambda = 1;
  Eigen::Vector2d phi = Eigen::Vector2d::Ones();  // s1, s2 -> 1
  Eigen::Vector2d psi = Eigen::Vector2d::Ones();  // s1, s2 -> 2
  Eigen::Vector2d v = Eigen::Vector2d::Ones();    // 4 -> t1, t2
  Eigen::Vector2d w = Eigen::Vector2d::Ones();    // 5 -> t1, t2
};

ThinRep<double> d4tilde_thin(const D4Params& p = {});
DoubleFramedTriple<double> d4tilde_triple(const D4Params& p = {});

/// s --f--> j --h--> t with a ReLU at j.
NeuralNetwork single_vertex_relu(double f, double h);

}  // namespace qmn::fixtures

#endif  // QMN_FIXTURES_HPP
