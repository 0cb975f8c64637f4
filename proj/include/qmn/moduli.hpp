#ifndef QMN_MODULI_HPP
#define QMN_MODULI_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmn/core.hpp"
#include "qmn/linalg.hpp"
#include "qmn/quiver.hpp"
#include "qmn/rep.hpp"

namespace qmn {

inline constexpr double kRankTol = 1e-8;

using RankVector = std::vector<int>;

/// Point of the semisimple moduli space: one block h_j V_w f_i : U_i -> W_j per
/// hidden path w : i ~> j with u_i > 0 and w_j > 0, plus the map of every
/// direct source-to-sink arrow (already invariant).
template <typename Scalar>
struct ModuliPoint {
  QuiverPtr quiver;
  DimensionVector dims;
  FramingData framing;
  std::vector<Path> paths;
  std::vector<Matrix<Scalar>> blocks;
  std::vector<std::size_t> direct;
  std::vector<Matrix<Scalar>> direct_blocks;

  const Matrix<Scalar>* block(const Path& p) const {
    auto it = lookup().find(p);
    return it == lookup().end() ? nullptr : &blocks[it->second];
  }

  /// Hom(U_1 + ... , W_1 + ...) with paths between the same pair summed.
  /// Rows follow hidden vertices with w_j > 0, columns those with u_i > 0.
  Matrix<Scalar> assembled() const {
    const auto [row_off, rows] = offsets(framing.w);
    const auto [col_off, cols] = offsets(framing.u);
    Matrix<Scalar> m = Matrix<Scalar>::Zero(rows, cols);
    for (std::size_t k = 0; k < paths.size(); ++k)
      m.block(row_off[paths[k].end], col_off[paths[k].start], framing.w[paths[k].end],
              framing.u[paths[k].start]) += blocks[k];
    return m;
  }

  /// All scalar coordinates T_{w,k,l}, blockwise column-major.
  Vector<Scalar> coordinates() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.size();
    for (const auto& b : direct_blocks) n += b.size();
    Vector<Scalar> out(n);
    Eigen::Index at = 0;
    for (const auto* list : {&blocks, &direct_blocks})
      for (const auto& b : *list) {
        out.segment(at, b.size()) = Eigen::Map<const Vector<Scalar>>(b.data(), b.size());
        at += b.size();
      }
    return out;
  }

  static std::pair<std::vector<Eigen::Index>, Eigen::Index> offsets(const std::vector<int>& sizes) {
    std::vector<Eigen::Index> off(sizes.size(), 0);
    Eigen::Index total = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      off[i] = total;
      total += sizes[i];
    }
    return {off, total};
  }

 private:
  const std::map<Path, std::size_t>& lookup() const {
    if (index_.size() != paths.size()) {
      index_.clear();
      for (std::size_t k = 0; k < paths.size(); ++k) index_.emplace(paths[k], k);
    }
    return index_;
  }
  mutable std::map<Path, std::size_t> index_;
};

/// V_w : V_start -> V_end, the composite along a hidden path.
template <typename Scalar>
Matrix<Scalar> path_map(const DoubleFramedTriple<Scalar>& t, const Path& p) {
  Matrix<Scalar> m = Matrix<Scalar>::Identity(t.dim(p.start), t.dim(p.start));
  for (auto a : p.arrows) m = (t.maps[a] * m).eval();
  return m;
}

/// Hidden paths that carry a moduli coordinate, in (start, end, arrow id) order.
std::vector<Path> framed_paths(const Quiver& q, const FramingData& fd,
                               std::size_t cap = kDefaultPathCap);

template <typename Scalar>
ModuliPoint<Scalar> project(const DoubleFramedTriple<Scalar>& t, std::size_t cap = kDefaultPathCap) {
  check_shapes(t);
  ModuliPoint<Scalar> m;
  m.quiver = t.quiver;
  m.dims = t.dims;
  m.framing = t.framing;
  m.paths = framed_paths(*t.quiver, t.framing, cap);
  m.blocks.reserve(m.paths.size());
  for (const auto& p : m.paths) m.blocks.push_back(t.h[p.end] * path_map(t, p) * t.f[p.start]);
  m.direct = direct_arrows(*t.quiver);
  for (auto a : m.direct) m.direct_blocks.push_back(t.maps[a]);
  return m;
}

/// Paths into hidden vertex i from framed vertices, and out of i to coframed
/// vertices; these index the columns and rows of q^(i).
struct VertexPaths {
  std::vector<Path> in;
  std::vector<Path> out;
};

VertexPaths vertex_paths(const Quiver& q, const FramingData& fd, std::size_t i,
                         std::size_t cap = kDefaultPathCap);

/// Concatenation: first `first`, then `second`.
Path concatenate(const Path& first, const Path& second);

/// q^(i): rows by out-paths i ~> k (blocks of w_k), columns by in-paths j ~> i
/// (blocks of u_j); block (w', w) = q_{w' w}.
template <typename Scalar>
Matrix<Scalar> vertex_block(const ModuliPoint<Scalar>& m, std::size_t i) {
  const auto vp = vertex_paths(*m.quiver, m.framing, i);
  Eigen::Index rows = 0, cols = 0;
  for (const auto& p : vp.out) rows += m.framing.w[p.end];
  for (const auto& p : vp.in) cols += m.framing.u[p.start];
  Matrix<Scalar> out = Matrix<Scalar>::Zero(rows, cols);
  Eigen::Index r = 0;
  for (const auto& po : vp.out) {
    Eigen::Index c = 0;
    for (const auto& pi : vp.in) {
      const auto* b = m.block(concatenate(pi, po));
      if (b) out.block(r, c, b->rows(), b->cols()) = *b;
      c += m.framing.u[pi.start];
    }
    r += m.framing.w[po.end];
  }
  return out;
}

template <typename Scalar>
RankVector rank_vector(const ModuliPoint<Scalar>& m, double tol = kRankTol) {
  RankVector r;
  for (std::size_t i = 0; i < m.quiver->hidden().size(); ++i)
    r.push_back(static_cast<int>(linalg::numerical_rank<Scalar>(vertex_block(m, i), tol)));
  return r;
}

/// Hidden part of the dimension vector.
RankVector hidden_dims(const Quiver& q, const DimensionVector& dims);

/// Per-vertex orthonormal bases of a subrepresentation of V.
template <typename Scalar>
using SubspaceFamily = std::vector<Matrix<Scalar>>;

/// Smallest subrepresentation containing every Im f_i.
template <typename Scalar>
SubspaceFamily<Scalar> generated_subrepresentation(const DoubleFramedTriple<Scalar>& t) {
  const auto& q = *t.quiver;
  const auto& hq = q.hidden();
  SubspaceFamily<Scalar> s;
  for (std::size_t i = 0; i < hq.size(); ++i) s.push_back(linalg::column_basis<Scalar>(t.f[i]));
  // Dimensions only grow, so the sweep count is bounded by the total dimension.
  for (bool changed = true; changed;) {
    changed = false;
    for (auto i : hq.topological_order) {
      for (const auto& e : hq.out[i]) {
        if (s[i].cols() == 0) continue;
        Matrix<Scalar> image = t.maps[e.arrow] * s[i];
        auto grown = linalg::sum<Scalar>(s[e.target], image);
        if (grown.cols() > s[e.target].cols()) {
          s[e.target] = std::move(grown);
          changed = true;
        }
      }
    }
  }
  return s;
}

/// Largest subrepresentation contained vertexwise in Ker h_i.
template <typename Scalar>
SubspaceFamily<Scalar> kernel_subrepresentation(const DoubleFramedTriple<Scalar>& t) {
  const auto& q = *t.quiver;
  const auto& hq = q.hidden();
  SubspaceFamily<Scalar> k;
  for (std::size_t i = 0; i < hq.size(); ++i) k.push_back(linalg::null_basis<Scalar>(t.h[i]));
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = hq.topological_order.rbegin(); it != hq.topological_order.rend(); ++it) {
      const auto i = *it;
      if (k[i].cols() == 0 || hq.out[i].empty()) continue;
      // v in K_i survives iff V_a v lies in K_t for every arrow a out of i.
      Eigen::Index rows = 0;
      for (const auto& e : hq.out[i]) rows += t.dim(e.target);
      Matrix<Scalar> escape(rows, k[i].cols());
      RealOf<Scalar> scale = 0;
      Eigen::Index r = 0;
      for (const auto& e : hq.out[i]) {
        Matrix<Scalar> image = t.maps[e.arrow] * k[i];
        scale = std::max(scale, t.maps[e.arrow].norm());
        escape.middleRows(r, t.dim(e.target)) = linalg::reject<Scalar>(k[e.target], image);
        r += t.dim(e.target);
      }
      if (scale == RealOf<Scalar>(0)) continue;
      Matrix<Scalar> coeffs = linalg::null_basis_below<Scalar>(escape, linalg::kSubspaceTol * scale);
      if (coeffs.cols() < k[i].cols()) {
        k[i] = linalg::column_basis<Scalar>(Matrix<Scalar>(k[i] * coeffs));
        changed = true;
      }
    }
  }
  return k;
}

template <typename Scalar>
bool is_semistable(const DoubleFramedTriple<Scalar>& t) {
  check_shapes(t);
  auto s = generated_subrepresentation(t);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i].cols() != t.dim(i)) return false;
  return true;
}

/// Simple as a representation of the deframed quiver: f generates V and no
/// nonzero subrepresentation lies in the kernels of h.
template <typename Scalar>
bool is_simple(const DoubleFramedTriple<Scalar>& t) {
  if (!is_semistable(t)) return false;
  auto k = kernel_subrepresentation(t);
  for (const auto& basis : k)
    if (basis.cols() != 0) return false;
  return true;
}

/// Outcome of the numerical existence criterion for simple Q'-representations.
struct SimpleExistence {
  bool exists = false;
  bool affine_type_a = false;
  std::string reason;
};

SimpleExistence lbp_simple_exists(const Quiver& q, const DimensionVector& dims);

/// Euler form of the hidden quiver: sum a_i b_i - sum over hidden arrows a_s b_t.
long euler_form(const Quiver& q, const std::vector<long>& a, const std::vector<long>& b);

struct ModuliDimension {
  long value = 0;
  bool expected_only = false;  // no simple point of this dimension vector exists
};

ModuliDimension moduli_dimension(const Quiver& q, const DimensionVector& dims);

/// Closed-orbit data of a triple: its invariants and an explicit semisimple
/// representative (Im q with induced maps) + (zero part of dimension d~ - r).
template <typename Scalar>
struct Semisimplification {
  RankVector rank;
  ModuliPoint<Scalar> point;
  DoubleFramedTriple<Scalar> representative;
};

template <typename Scalar>
Semisimplification<Scalar> semisimplify(const DoubleFramedTriple<Scalar>& t, double tol = kRankTol) {
  check_shapes(t);
  const auto& q = *t.quiver;
  const auto& hq = q.hidden();
  auto gen = generated_subrepresentation(t);
  auto ker = kernel_subrepresentation(t);

  // W = S / (S cap K), realized as the orthogonal complement of S cap K in S.
  std::vector<Matrix<Scalar>> w_basis;
  for (std::size_t i = 0; i < hq.size(); ++i) {
    auto overlap = linalg::intersect<Scalar>(gen[i], ker[i]);
    w_basis.push_back(linalg::complement_within<Scalar>(gen[i], overlap));
  }

  auto rep = zero_triple<Scalar>(t.quiver, t.dims);
  for (auto a : direct_arrows(q)) rep.maps[a] = t.maps[a];
  for (auto a : hq.arrows) {
    auto s = *q.hidden_index(q.arrow(a).source);
    auto tt = *q.hidden_index(q.arrow(a).target);
    const auto rs = w_basis[s].cols(), rt = w_basis[tt].cols();
    rep.maps[a].topLeftCorner(rt, rs) = w_basis[tt].adjoint() * t.maps[a] * w_basis[s];
  }
  for (std::size_t i = 0; i < hq.size(); ++i) {
    const auto r = w_basis[i].cols();
    rep.f[i].topRows(r) = w_basis[i].adjoint() * t.f[i];
    rep.h[i].leftCols(r) = t.h[i] * w_basis[i];
  }

  auto point = project(t);
  auto rank = rank_vector(point, tol);
  return {std::move(rank), std::move(point), std::move(rep)};
}

/// f^(i): P_i -> V_i, the blocks V_w f_j over in-paths w : j ~> i.
template <typename Scalar>
Matrix<Scalar> framing_at(const DoubleFramedTriple<Scalar>& t, std::size_t i) {
  const auto vp = vertex_paths(*t.quiver, t.framing, i);
  Eigen::Index cols = 0;
  for (const auto& p : vp.in) cols += t.framing.u[p.start];
  Matrix<Scalar> out(t.dim(i), cols);
  Eigen::Index c = 0;
  for (const auto& p : vp.in) {
    out.middleCols(c, t.framing.u[p.start]) = path_map(t, p) * t.f[p.start];
    c += t.framing.u[p.start];
  }
  return out;
}

/// V'_i = Ker f^(i); a point of the resolution for any semistable triple.
template <typename Scalar>
SubspaceFamily<Scalar> resolution_subspaces(const DoubleFramedTriple<Scalar>& t) {
  SubspaceFamily<Scalar> out;
  for (std::size_t i = 0; i < t.hidden_count(); ++i)
    out.push_back(linalg::null_basis<Scalar>(framing_at(t, i)));
  return out;
}

/// p_a : P_i -> P_i' for a hidden arrow a : i -> i'.
Eigen::MatrixXd shift_map(const Quiver& q, const FramingData& fd, std::size_t arrow);

struct ResolutionCheck {
  bool closed_under_shifts = false;  // p_a(V'_i) in V'_i'
  bool inside_kernels = false;       // V'_i in Ker q^(i)
  double shift_residual = 0;
  double kernel_residual = 0;
  bool ok() const { return closed_under_shifts && inside_kernels; }
};

/// Subspace bases are given in the column coordinates of q^(i) and must have
/// codimension d_i there; otherwise CodimensionMismatch.
template <typename Scalar>
ResolutionCheck verify_resolution_point(const SubspaceFamily<Scalar>& subspaces,
                                        const ModuliPoint<Scalar>& m, double tol = 1e-9) {
  const auto& q = *m.quiver;
  const auto& hq = q.hidden();
  if (subspaces.size() != hq.size())
    throw Error(ErrorCode::CodimensionMismatch, "one subspace per hidden vertex is required");
  std::vector<Matrix<Scalar>> bases;
  for (std::size_t i = 0; i < hq.size(); ++i) {
    Matrix<Scalar> qi = vertex_block(m, i);
    const auto& v = subspaces[i];
    const int d = m.dims[hq.vertices[i]];
    if (v.rows() != qi.cols())
      throw Error(ErrorCode::CodimensionMismatch,
                  "subspace at '" + q.vertex(hq.vertices[i]) + "' lives in the wrong space");
    auto basis = linalg::column_basis<Scalar>(v);
    if (qi.cols() - basis.cols() != d)
      throw Error(ErrorCode::CodimensionMismatch,
                  "subspace at '" + q.vertex(hq.vertices[i]) + "' has codimension " +
                      std::to_string(qi.cols() - basis.cols()) + ", expected " + std::to_string(d));
    bases.push_back(std::move(basis));
  }

  ResolutionCheck check;
  for (auto a : hq.arrows) {
    auto s = *q.hidden_index(q.arrow(a).source);
    auto t = *q.hidden_index(q.arrow(a).target);
    Matrix<Scalar> shifted = shift_map(q, m.framing, a).template cast<Scalar>() * bases[s];
    check.shift_residual = std::max<double>(check.shift_residual,
                                            linalg::containment_residual<Scalar>(bases[t], shifted));
  }
  double scale = 0;
  for (const auto& b : m.blocks) scale = std::max<double>(scale, b.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < hq.size(); ++i) {
    Matrix<Scalar> hit = vertex_block(m, i) * bases[i];
    if (hit.size() == 0) continue;
    check.kernel_residual = std::max<double>(check.kernel_residual,
                                             hit.cwiseAbs().maxCoeff() / std::max(scale, 1.0));
  }
  check.closed_under_shifts = check.shift_residual <= tol;
  check.inside_kernels = check.kernel_residual <= tol;
  return check;
}

/// Solves g_t V1_a = V2_a g_s, g_i f1_i = f2_i, h1_i = h2_i g_i for scalars
/// g_i on thin triples by propagation. Undetermined vertices get 0. Returns
/// nullopt when the constraints are inconsistent.
template <typename Scalar>
std::optional<Vector<Scalar>> solve_thin_intertwiner(const DoubleFramedTriple<Scalar>& a,
                                                     const DoubleFramedTriple<Scalar>& b,
                                                     double tol = 1e-9) {
  const auto& q = *a.quiver;
  const auto& hq = q.hidden();
  for (std::size_t i = 0; i < hq.size(); ++i)
    if (a.dim(i) != 1 || b.dim(i) != 1)
      throw Error(ErrorCode::ShapeMismatch, "thin triples required");
  const std::size_t n = hq.size();
  Vector<Scalar> g = Vector<Scalar>::Zero(n);
  std::vector<char> known(n, 0);

  double scale = 1;
  auto bump = [&scale](const Matrix<Scalar>& m) {
    if (m.size()) scale = std::max<double>(scale, m.cwiseAbs().maxCoeff());
  };
  for (std::size_t i = 0; i < n; ++i) {
    bump(a.f[i]); bump(b.f[i]); bump(a.h[i]); bump(b.h[i]);
  }
  for (auto arrow : hq.arrows) { bump(a.maps[arrow]); bump(b.maps[arrow]); }
  const double zero = 1e-12 * scale;

  auto fix = [&](std::size_t i, Scalar value) {
    if (!known[i]) {
      g(i) = value;
      known[i] = 1;
      return true;
    }
    return false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (a.f[i].size() && a.f[i].cwiseAbs().maxCoeff() > zero) {
      Eigen::Index row, col;
      a.f[i].cwiseAbs().maxCoeff(&row, &col);
      fix(i, b.f[i](row, col) / a.f[i](row, col));
    } else if (b.h[i].size() && b.h[i].cwiseAbs().maxCoeff() > zero) {
      Eigen::Index row, col;
      b.h[i].cwiseAbs().maxCoeff(&row, &col);
      fix(i, a.h[i](row, col) / b.h[i](row, col));
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (auto arrow : hq.arrows) {
      auto s = *q.hidden_index(q.arrow(arrow).source);
      auto t = *q.hidden_index(q.arrow(arrow).target);
      const Scalar va = a.maps[arrow](0, 0), vb = b.maps[arrow](0, 0);
      if (known[s] && !known[t] && std::abs(va) > zero) changed |= fix(t, vb * g(s) / va);
      if (known[t] && !known[s] && std::abs(vb) > zero) changed |= fix(s, g(t) * va / vb);
    }
  }

  double residual = 0;
  for (auto arrow : hq.arrows) {
    auto s = *q.hidden_index(q.arrow(arrow).source);
    auto t = *q.hidden_index(q.arrow(arrow).target);
    residual = std::max<double>(residual, std::abs(g(t) * a.maps[arrow](0, 0) - b.maps[arrow](0, 0) * g(s)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (a.f[i].size()) residual = std::max<double>(residual, (g(i) * a.f[i] - b.f[i]).cwiseAbs().maxCoeff());
    if (a.h[i].size()) residual = std::max<double>(residual, (a.h[i] - b.h[i] * g(i)).cwiseAbs().maxCoeff());
  }
  if (residual > tol * scale) return std::nullopt;
  return g;
}

/// Gauge taking `a` to `b` when both are thin with equal moduli point and the
/// intertwiner is invertible.
template <typename Scalar>
std::optional<GaugeElement<Scalar>> separation_witness(const DoubleFramedTriple<Scalar>& a,
                                                       const DoubleFramedTriple<Scalar>& b,
                                                       double tol = 1e-9) {
  auto g = solve_thin_intertwiner(a, b, tol);
  if (!g) return std::nullopt;
  GaugeElement<Scalar> out;
  for (Eigen::Index i = 0; i < g->size(); ++i) {
    if (std::abs((*g)(i)) <= 1e-12) return std::nullopt;
    out.blocks.push_back(Matrix<Scalar>::Constant(1, 1, (*g)(i)));
  }
  return out;
}

/// Rank of the central-difference Jacobian of the moduli coordinates with
/// respect to every arrow entry of the representation.
Eigen::Index jacobian_rank(const DoubleFramedTriple<double>& t, double step = 1e-6,
                           double rel_tol = 1e-6);

}  // namespace qmn

#endif  // QMN_MODULI_HPP
