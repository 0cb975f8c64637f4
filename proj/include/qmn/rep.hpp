#ifndef QMN_REP_HPP
#define QMN_REP_HPP

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "qmn/core.hpp"
#include "qmn/quiver.hpp"

namespace qmn {

/// Matrix per arrow, indexed by arrow position; the map of an arrow
/// s -> t has shape d_t x d_s.
template <typename Scalar>
struct Representation {
  QuiverPtr quiver;
  DimensionVector dims;
  std::vector<Matrix<Scalar>> maps;

  const Matrix<Scalar>& operator[](std::string_view arrow_id) const {
    return maps.at(quiver->arrow_index(arrow_id));
  }
  Matrix<Scalar>& operator[](std::string_view arrow_id) {
    return maps.at(quiver->arrow_index(arrow_id));
  }
};

template <typename Scalar>
Representation<Scalar> zero_representation(QuiverPtr q, DimensionVector dims) {
  Representation<Scalar> r{q, std::move(dims), {}};
  for (const auto& a : q->arrows())
    r.maps.push_back(Matrix<Scalar>::Zero(r.dims[a.target], r.dims[a.source]));
  return r;
}

template <typename Scalar>
void check_shapes(const Representation<Scalar>& r) {
  const auto& q = *r.quiver;
  if (r.dims.size() != q.vertex_count())
    throw Error(ErrorCode::ShapeMismatch, "dimension vector does not cover every vertex");
  if (r.maps.size() != q.arrow_count())
    throw Error(ErrorCode::ShapeMismatch, "representation has the wrong number of arrow maps");
  for (std::size_t a = 0; a < q.arrow_count(); ++a) {
    const auto& arrow = q.arrow(a);
    if (r.maps[a].rows() != r.dims[arrow.target] || r.maps[a].cols() != r.dims[arrow.source])
      throw Error(ErrorCode::ShapeMismatch,
                  "map of arrow '" + arrow.id + "' is " + std::to_string(r.maps[a].rows()) + "x" +
                      std::to_string(r.maps[a].cols()) + ", expected " +
                      std::to_string(r.dims[arrow.target]) + "x" +
                      std::to_string(r.dims[arrow.source]));
  }
  for (std::size_t v = 0; v < q.vertex_count(); ++v)
    if (r.dims[v] < 0) throw Error(ErrorCode::ShapeMismatch, "negative dimension");
}

/// Arrows from a source straight to a sink.
std::vector<std::size_t> direct_arrows(const Quiver& q);

/// (V, f, h): hidden maps indexed by parent arrow, plus the gauge-invariant
/// maps of direct source-to-sink arrows (framing arrows stay empty), framing f_i : U_i -> V_i and coframing h_i : V_i -> W_i
/// indexed by hidden index.
template <typename Scalar>
struct DoubleFramedTriple {
  QuiverPtr quiver;
  DimensionVector dims;
  FramingData framing;
  std::vector<Matrix<Scalar>> maps;
  std::vector<Matrix<Scalar>> f;
  std::vector<Matrix<Scalar>> h;

  int dim(std::size_t hidden) const { return dims[quiver->hidden().vertices[hidden]]; }
  std::size_t hidden_count() const { return f.size(); }
};

template <typename Scalar>
void check_shapes(const DoubleFramedTriple<Scalar>& t) {
  const auto& q = *t.quiver;
  const auto& hq = q.hidden();
  if (t.f.size() != hq.size() || t.h.size() != hq.size() || t.maps.size() != q.arrow_count())
    throw Error(ErrorCode::ShapeMismatch, "triple does not match its quiver");
  for (std::size_t i = 0; i < hq.size(); ++i) {
    if (t.f[i].rows() != t.dim(i) || t.f[i].cols() != t.framing.u[i])
      throw Error(ErrorCode::ShapeMismatch, "framing map at '" + q.vertex(hq.vertices[i]) +
                                                "' has the wrong shape");
    if (t.h[i].rows() != t.framing.w[i] || t.h[i].cols() != t.dim(i))
      throw Error(ErrorCode::ShapeMismatch, "coframing map at '" + q.vertex(hq.vertices[i]) +
                                                "' has the wrong shape");
  }
  auto check = [&](std::size_t a) {
    const auto& arrow = q.arrow(a);
    if (t.maps[a].rows() != t.dims[arrow.target] || t.maps[a].cols() != t.dims[arrow.source])
      throw Error(ErrorCode::ShapeMismatch, "map of arrow '" + arrow.id + "' has the wrong shape");
  };
  for (auto a : hq.arrows) check(a);
  for (auto a : direct_arrows(q)) check(a);
}

template <typename Scalar>
DoubleFramedTriple<Scalar> zero_triple(QuiverPtr q, DimensionVector dims) {
  DoubleFramedTriple<Scalar> t{q, dims, framing_data(*q, dims), {}, {}, {}};
  const auto& hq = q->hidden();
  t.maps.assign(q->arrow_count(), Matrix<Scalar>());
  for (auto a : hq.arrows)
    t.maps[a] = Matrix<Scalar>::Zero(dims[q->arrow(a).target], dims[q->arrow(a).source]);
  for (auto a : direct_arrows(*q))
    t.maps[a] = Matrix<Scalar>::Zero(dims[q->arrow(a).target], dims[q->arrow(a).source]);
  for (std::size_t i = 0; i < hq.size(); ++i) {
    t.f.push_back(Matrix<Scalar>::Zero(t.dim(i), t.framing.u[i]));
    t.h.push_back(Matrix<Scalar>::Zero(t.framing.w[i], t.dim(i)));
  }
  return t;
}


/// Collects source arrows into f_i column-blockwise and sink arrows into h_i
/// row-blockwise, in arrow declaration order.
template <typename Scalar>
DoubleFramedTriple<Scalar> split(const Representation<Scalar>& r) {
  check_shapes(r);
  auto t = zero_triple<Scalar>(r.quiver, r.dims);
  for (auto a : r.quiver->hidden().arrows) t.maps[a] = r.maps[a];
  for (auto a : direct_arrows(*r.quiver)) t.maps[a] = r.maps[a];
  for (std::size_t i = 0; i < t.hidden_count(); ++i) {
    for (const auto& slot : t.framing.in_slots[i])
      t.f[i].middleCols(slot.offset, slot.dim) = r.maps[slot.arrow];
    for (const auto& slot : t.framing.out_slots[i])
      t.h[i].middleRows(slot.offset, slot.dim) = r.maps[slot.arrow];
  }
  return t;
}

template <typename Scalar>
Representation<Scalar> join(const DoubleFramedTriple<Scalar>& t) {
  check_shapes(t);
  auto r = zero_representation<Scalar>(t.quiver, t.dims);
  for (auto a : t.quiver->hidden().arrows) r.maps[a] = t.maps[a];
  for (auto a : direct_arrows(*t.quiver)) r.maps[a] = t.maps[a];
  for (std::size_t i = 0; i < t.hidden_count(); ++i) {
    for (const auto& slot : t.framing.in_slots[i])
      r.maps[slot.arrow] = t.f[i].middleCols(slot.offset, slot.dim);
    for (const auto& slot : t.framing.out_slots[i])
      r.maps[slot.arrow] = t.h[i].middleRows(slot.offset, slot.dim);
  }
  return r;
}

/// Invertible block per hidden vertex; identity at sources and sinks is implicit.
template <typename Scalar>
struct GaugeElement {
  std::vector<Matrix<Scalar>> blocks;
};

template <typename Scalar>
GaugeElement<Scalar> identity_gauge(const Quiver& q, const DimensionVector& dims) {
  GaugeElement<Scalar> g;
  for (auto v : q.hidden().vertices) g.blocks.push_back(Matrix<Scalar>::Identity(dims[v], dims[v]));
  return g;
}

/// Blockwise product g * g2 (apply g2 first).
template <typename Scalar>
GaugeElement<Scalar> operator*(const GaugeElement<Scalar>& g, const GaugeElement<Scalar>& g2) {
  if (g.blocks.size() != g2.blocks.size())
    throw Error(ErrorCode::ShapeMismatch, "gauge elements of different size");
  GaugeElement<Scalar> out;
  for (std::size_t i = 0; i < g.blocks.size(); ++i) out.blocks.push_back(g.blocks[i] * g2.blocks[i]);
  return out;
}

inline constexpr double kGaugeTol = 1e-10;

/// |det g| >= tol * max|g_ij|^d, otherwise SingularGauge.
template <typename Scalar>
Matrix<Scalar> checked_inverse(const Matrix<Scalar>& g, double tol = kGaugeTol) {
  if (g.rows() != g.cols()) throw Error(ErrorCode::ShapeMismatch, "gauge block is not square");
  if (g.rows() == 0) return g;
  const double scale = static_cast<double>(g.cwiseAbs().maxCoeff());
  Eigen::PartialPivLU<Matrix<Scalar>> lu(g);
  const double det = static_cast<double>(std::abs(lu.determinant()));
  if (!(scale > 0) || det < tol * std::pow(scale, static_cast<double>(g.rows())))
    throw Error(ErrorCode::SingularGauge, "gauge block is numerically singular");
  return lu.inverse();
}

template <typename Scalar>
GaugeElement<Scalar> inverse(const GaugeElement<Scalar>& g) {
  GaugeElement<Scalar> out;
  for (const auto& b : g.blocks) out.blocks.push_back(checked_inverse(b));
  return out;
}

/// V_a -> g_t V_a g_s^-1, f_i -> g_i f_i, h_i -> h_i g_i^-1.
template <typename Scalar>
DoubleFramedTriple<Scalar> act(const GaugeElement<Scalar>& g, const DoubleFramedTriple<Scalar>& t) {
  check_shapes(t);
  const auto& q = *t.quiver;
  const auto& hq = q.hidden();
  if (g.blocks.size() != hq.size())
    throw Error(ErrorCode::ShapeMismatch, "gauge element has the wrong number of blocks");
  std::vector<Matrix<Scalar>> inv;
  for (std::size_t i = 0; i < hq.size(); ++i) {
    if (g.blocks[i].rows() != t.dim(i) || g.blocks[i].cols() != t.dim(i))
      throw Error(ErrorCode::ShapeMismatch, "gauge block has the wrong size");
    inv.push_back(checked_inverse(g.blocks[i]));
  }
  auto out = t;
  for (auto a : hq.arrows) {
    auto s = *q.hidden_index(q.arrow(a).source);
    auto tt = *q.hidden_index(q.arrow(a).target);
    out.maps[a] = g.blocks[tt] * t.maps[a] * inv[s];
  }
  for (std::size_t i = 0; i < hq.size(); ++i) {
    out.f[i] = g.blocks[i] * t.f[i];
    out.h[i] = t.h[i] * inv[i];
  }
  return out;
}

template <typename Scalar>
Representation<Scalar> act(const GaugeElement<Scalar>& g, const Representation<Scalar>& r) {
  return join(act(g, split(r)));
}

/// Q' = hidden quiver plus a vertex "inf" with u_i arrows inf -> i and w_i
/// arrows i -> inf. Q' has oriented cycles, so it is kept as a plain arrow
/// list rather than a Quiver.
struct DeframedQuiver {
  std::vector<std::string> vertices;  // hidden vertices in hidden order, then infinity
  std::vector<Quiver::Arrow> arrows;  // hidden arrows, then beta, then gamma
  DimensionVector dims;
  std::size_t infinity = 0;
  std::vector<std::size_t> hidden_arrow_source;        // parent arrow index per hidden arrow
  std::vector<std::vector<std::size_t>> beta;   // per hidden i, arrow index per slot k < u_i
  std::vector<std::vector<std::size_t>> gamma;  // per hidden i, arrow index per slot l < w_i

  /// Underlying graph connected, every vertex of total degree 2, as many
  /// arrows as vertices.
  bool is_affine_type_a() const;
  /// Some oriented cycle through infinity.
  bool has_oriented_cycle() const;
};

DeframedQuiver deframe(const Quiver& q, const DimensionVector& dims);

/// Q'' with vertices hidden + {0, inf}; the expected dimension of its
/// Theta-semistable moduli is dim R_d(Q) - dim G_d(Q~) - 1.
struct DoubleFramedVariant {
  QuiverPtr quiver;
  DimensionVector dims;
  long expected_dimension = 0;
};

DoubleFramedVariant doubleframe_variant(const Quiver& q, const DimensionVector& dims);

/// dim R_d(Q) = sum over arrows of d_s d_t.
long representation_space_dimension(const Quiver& q, const DimensionVector& dims);
/// dim G_d(Q~) = sum over hidden vertices of d_i^2.
long gauge_group_dimension(const Quiver& q, const DimensionVector& dims);

/// Maps of the Q'-representation: columns of f_i on beta arrows (d_i x 1),
/// rows of h_i on gamma arrows (1 x d_i).
template <typename Scalar>
std::vector<Matrix<Scalar>> to_deframed(const DeframedQuiver& dq, const DoubleFramedTriple<Scalar>& t) {
  std::vector<Matrix<Scalar>> maps(dq.arrows.size());
  for (std::size_t k = 0; k < dq.hidden_arrow_source.size(); ++k)
    maps[k] = t.maps[dq.hidden_arrow_source[k]];
  for (std::size_t i = 0; i < dq.beta.size(); ++i) {
    for (std::size_t k = 0; k < dq.beta[i].size(); ++k) maps[dq.beta[i][k]] = t.f[i].col(k);
    for (std::size_t l = 0; l < dq.gamma[i].size(); ++l) maps[dq.gamma[i][l]] = t.h[i].row(l);
  }
  return maps;
}

template <typename Scalar>
DoubleFramedTriple<Scalar> from_deframed(const DeframedQuiver& dq, const std::vector<Matrix<Scalar>>& maps,
                                         const DoubleFramedTriple<Scalar>& shape) {
  auto t = shape;
  for (std::size_t k = 0; k < dq.hidden_arrow_source.size(); ++k)
    t.maps[dq.hidden_arrow_source[k]] = maps[k];
  for (std::size_t i = 0; i < dq.beta.size(); ++i) {
    for (std::size_t k = 0; k < dq.beta[i].size(); ++k) t.f[i].col(k) = maps[dq.beta[i][k]];
    for (std::size_t l = 0; l < dq.gamma[i].size(); ++l) t.h[i].row(l) = maps[dq.gamma[i][l]];
  }
  return t;
}

/// The (lambda, id) part of the Q' base change: v -> v / lambda, phi -> lambda phi.
template <typename Scalar>
std::vector<Matrix<Scalar>> rescale_infinity(const DeframedQuiver& dq, std::vector<Matrix<Scalar>> maps,
                                             Scalar lambda) {
  for (std::size_t i = 0; i < dq.beta.size(); ++i) {
    for (auto a : dq.beta[i]) maps[a] /= lambda;
    for (auto a : dq.gamma[i]) maps[a] *= lambda;
  }
  return maps;
}

}  // namespace qmn

#endif  // QMN_REP_HPP
