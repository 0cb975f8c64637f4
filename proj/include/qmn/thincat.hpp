#ifndef QMN_THINCAT_HPP
#define QMN_THINCAT_HPP

#include <cmath>
#include <optional>
#include <string_view>

#include "qmn/core.hpp"
#include "qmn/quiver.hpp"
#include "qmn/rep.hpp"

namespace qmn {

inline constexpr double kZeroWeightTol = 1e-12;

/// Representation with every vertex space one-dimensional: one scalar per arrow.
template <typename Scalar>
struct ThinRep {
  QuiverPtr quiver;
  Vector<Scalar> weights;

  Scalar operator[](std::string_view arrow_id) const { return weights(index(arrow_id)); }
  Scalar& operator[](std::string_view arrow_id) { return weights(index(arrow_id)); }

 private:
  Eigen::Index index(std::string_view id) const {
    return static_cast<Eigen::Index>(quiver->arrow_index(id));
  }
};

template <typename Scalar>
ThinRep<Scalar> unit(QuiverPtr q) {
  const auto n = static_cast<Eigen::Index>(q->arrow_count());
  return {std::move(q), Vector<Scalar>::Ones(n)};
}

template <typename Scalar>
ThinRep<Scalar> zero_thin(QuiverPtr q) {
  const auto n = static_cast<Eigen::Index>(q->arrow_count());
  return {std::move(q), Vector<Scalar>::Zero(n)};
}

template <typename Scalar>
void check_shapes(const ThinRep<Scalar>& a) {
  if (static_cast<std::size_t>(a.weights.size()) != a.quiver->arrow_count())
    throw Error(ErrorCode::ShapeMismatch, "thin representation needs one weight per arrow");
}

/// Pointwise tensor product; for thin representations this is the weightwise product.
template <typename Scalar>
ThinRep<Scalar> tensor(const ThinRep<Scalar>& a, const ThinRep<Scalar>& b) {
  if (a.quiver != b.quiver) {
    if (a.quiver->arrow_count() != b.quiver->arrow_count() ||
        a.quiver->vertex_count() != b.quiver->vertex_count())
      throw Error(ErrorCode::QuiverMismatch, "tensor factors live on different quivers");
    for (std::size_t k = 0; k < a.quiver->arrow_count(); ++k) {
      const auto& x = a.quiver->arrow(k);
      const auto& y = b.quiver->arrow(k);
      if (x.id != y.id || x.source != y.source || x.target != y.target)
        throw Error(ErrorCode::QuiverMismatch, "tensor factors live on different quivers");
    }
  }
  check_shapes(a);
  check_shapes(b);
  return {a.quiver, a.weights.cwiseProduct(b.weights)};
}

template <typename Scalar>
Representation<Scalar> to_representation(const ThinRep<Scalar>& a) {
  check_shapes(a);
  auto r = zero_representation<Scalar>(a.quiver, DimensionVector::thin(*a.quiver));
  for (std::size_t k = 0; k < r.maps.size(); ++k) r.maps[k](0, 0) = a.weights(static_cast<Eigen::Index>(k));
  return r;
}

template <typename Scalar>
ThinRep<Scalar> to_thin(const Representation<Scalar>& r) {
  if (!(r.dims == DimensionVector::thin(*r.quiver)))
    throw Error(ErrorCode::ShapeMismatch, "representation is not thin");
  check_shapes(r);
  ThinRep<Scalar> a{r.quiver, Vector<Scalar>(static_cast<Eigen::Index>(r.maps.size()))};
  for (std::size_t k = 0; k < r.maps.size(); ++k) a.weights(static_cast<Eigen::Index>(k)) = r.maps[k](0, 0);
  return a;
}

template <typename Scalar>
DoubleFramedTriple<Scalar> to_triple(const ThinRep<Scalar>& a) {
  return split(to_representation(a));
}

template <typename Scalar>
ThinRep<Scalar> to_thin(const DoubleFramedTriple<Scalar>& t) {
  return to_thin(join(t));
}

/// Invertible under tensor iff every weight is a nonzero scalar.
template <typename Scalar>
bool is_invertible(const ThinRep<Scalar>& a, double tol = kZeroWeightTol) {
  for (Eigen::Index k = 0; k < a.weights.size(); ++k)
    if (std::abs(a.weights(k)) < tol) return false;
  return true;
}

template <typename Scalar>
std::optional<ThinRep<Scalar>> tensor_inverse(const ThinRep<Scalar>& a, double tol = kZeroWeightTol) {
  if (!is_invertible(a, tol)) return std::nullopt;
  return ThinRep<Scalar>{a.quiver, a.weights.cwiseInverse()};
}

/// W_a -> g_t W_a / g_s with g given per hidden index and 1 at framed vertices.
template <typename Scalar>
ThinRep<Scalar> act(const Vector<Scalar>& g, const ThinRep<Scalar>& a) {
  const auto& q = *a.quiver;
  if (static_cast<std::size_t>(g.size()) != q.hidden().size())
    throw Error(ErrorCode::ShapeMismatch, "gauge needs one scalar per hidden vertex");
  auto at = [&](std::size_t v) -> Scalar {
    auto i = q.hidden_index(v);
    return i ? g(static_cast<Eigen::Index>(*i)) : Scalar(1);
  };
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (std::abs(g(i)) < kZeroWeightTol) throw Error(ErrorCode::SingularGauge, "gauge scalar is zero");
  auto out = a;
  for (std::size_t k = 0; k < q.arrow_count(); ++k)
    out.weights(static_cast<Eigen::Index>(k)) *= at(q.arrow(k).target) / at(q.arrow(k).source);
  return out;
}

/// Morphism of the network category: one scalar per vertex, 1 on framed vertices.
template <typename Scalar>
struct NetworkMorphism {
  Vector<Scalar> g;
};

template <typename Scalar>
NetworkMorphism<Scalar> identity_morphism(const Quiver& q) {
  return {Vector<Scalar>::Ones(static_cast<Eigen::Index>(q.vertex_count()))};
}

struct MorphismCheck {
  bool boundary = false;     // g = 1 at every source and sink
  bool intertwines = false;  // g_t W_a = W'_a g_s for every arrow
  bool iso = false;          // additionally every g_v nonzero
  double residual = 0;
  bool valid() const { return boundary && intertwines; }
};

template <typename Scalar>
MorphismCheck check_morphism(const NetworkMorphism<Scalar>& m, const ThinRep<Scalar>& a,
                             const ThinRep<Scalar>& b, double tol = 1e-9) {
  const auto& q = *a.quiver;
  if (static_cast<std::size_t>(m.g.size()) != q.vertex_count())
    throw Error(ErrorCode::ShapeMismatch, "morphism needs one scalar per vertex");
  check_shapes(a);
  check_shapes(b);
  MorphismCheck c;
  c.boundary = true;
  for (std::size_t v = 0; v < q.vertex_count(); ++v)
    if (!q.is_hidden(v) && std::abs(m.g(static_cast<Eigen::Index>(v)) - Scalar(1)) > tol) c.boundary = false;
  double scale = 1;
  for (std::size_t k = 0; k < q.arrow_count(); ++k) {
    const auto& arrow = q.arrow(k);
    const auto e = static_cast<Eigen::Index>(k);
    const Scalar lhs = m.g(static_cast<Eigen::Index>(arrow.target)) * a.weights(e);
    const Scalar rhs = b.weights(e) * m.g(static_cast<Eigen::Index>(arrow.source));
    c.residual = std::max<double>(c.residual, std::abs(lhs - rhs));
    scale = std::max<double>({scale, std::abs(lhs), std::abs(rhs)});
  }
  c.residual /= scale;
  c.intertwines = c.residual <= tol;
  c.iso = c.valid();
  for (Eigen::Index v = 0; v < m.g.size(); ++v)
    if (std::abs(m.g(v)) < kZeroWeightTol) c.iso = false;
  return c;
}

/// Morphism a -> b found by propagating g = 1 from the framed vertices along
/// nonzero weights. Vertices the constraints leave free get 0. nullopt when
/// the propagated values violate some constraint.
template <typename Scalar>
std::optional<NetworkMorphism<Scalar>> solve_morphism(const ThinRep<Scalar>& a, const ThinRep<Scalar>& b,
                                                      double tol = 1e-9) {
  const auto& q = *a.quiver;
  check_shapes(a);
  check_shapes(b);
  const auto n = q.vertex_count();
  Vector<Scalar> g = Vector<Scalar>::Zero(static_cast<Eigen::Index>(n));
  std::vector<char> known(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (!q.is_hidden(v)) {
      g(static_cast<Eigen::Index>(v)) = Scalar(1);
      known[v] = 1;
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < q.arrow_count(); ++k) {
      const auto& arrow = q.arrow(k);
      const auto e = static_cast<Eigen::Index>(k);
      const auto s = static_cast<Eigen::Index>(arrow.source), t = static_cast<Eigen::Index>(arrow.target);
      if (known[arrow.source] && !known[arrow.target] && std::abs(a.weights(e)) > kZeroWeightTol) {
        g(t) = b.weights(e) * g(s) / a.weights(e);
        known[arrow.target] = changed = true;
      } else if (known[arrow.target] && !known[arrow.source] && std::abs(b.weights(e)) > kZeroWeightTol) {
        g(s) = g(t) * a.weights(e) / b.weights(e);
        known[arrow.source] = changed = true;
      }
    }
  }
  NetworkMorphism<Scalar> m{g};
  if (!check_morphism(m, a, b, tol).valid()) return std::nullopt;
  return m;
}

}  // namespace qmn

#endif  // QMN_THINCAT_HPP
