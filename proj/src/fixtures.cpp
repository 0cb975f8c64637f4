#include "qmn/fixtures.hpp"

namespace qmn::fixtures {

QuiverPtr a3() {
  QuiverSpec spec;
  spec.vertices = {"i", "j", "k"};
  spec.arrows = {{"a", "i", "j"}, {"b", "j", "k"}};
  return Quiver::make(std::move(spec));
}

ThinRep<double> a3_thin(double a, double b) {
  ThinRep<double> r{a3(), Eigen::Vector2d(a, b)};
  return r;
}

QuiverPtr d4tilde() {
  QuiverSpec spec;
  spec.vertices = {"s1", "s2", "s3", "1", "2", "3", "4", "5", "t1", "t2"};
  spec.arrows = {{"phi1", "s1", "1"}, {"phi2", "s2", "1"}, {"psi1", "s1", "2"}, {"psi2", "s2", "2"},
                 {"lambda", "s3", "5"}, {"a", "1", "3"},     {"b", "2", "3"},     {"c", "3", "4"},
                 {"d", "3", "5"},       {"v1", "4", "t1"},   {"v2", "4", "t2"},   {"w1", "5", "t1"},
                 {"w2", "5", "t2"}};
  spec.network = true;
  return Quiver::make(std::move(spec));
}

ThinRep<double> d4tilde_thin(const D4Params& p) {
  auto r = unit<double>(d4tilde());
  r["phi1"] = p.phi(0);
  r["phi2"] = p.phi(1);
  r["psi1"] = p.psi(0);
  r["psi2"] = p.psi(1);
  r["lambda"] = p.lambda;
  r["a"] = p.a;
  r["b"] = p.b;
  r["c"] = p.c;
  r["d"] = p.d;
  r["v1"] = p.v(0);
  r["v2"] = p.v(1);
  r["w1"] = p.w(0);
  r["w2"] = p.w(1);
  return r;
}

DoubleFramedTriple<double> d4tilde_triple(const D4Params& p) { return to_triple(d4tilde_thin(p)); }

NeuralNetwork single_vertex_relu(double f, double h) {
  QuiverSpec spec;
  spec.vertices = {"s", "j", "t"};
  spec.arrows = {{"f", "s", "j"}, {"h", "j", "t"}};
  spec.network = true;
  ThinRep<double> w{Quiver::make(std::move(spec)), Eigen::Vector2d(f, h)};
  return NeuralNetwork(w, {Activation::Identity, Activation::Relu, Activation::Identity});
}

}  // namespace qmn::fixtures
