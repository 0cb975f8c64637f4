#include "qmn/moduli.hpp"

#include <algorithm>
#include <sstream>

namespace qmn {

std::vector<Path> framed_paths(const Quiver& q, const FramingData& fd, std::size_t cap) {
  const auto& hq = q.hidden();
  std::vector<Path> out;
  for (std::size_t i = 0; i < hq.size(); ++i) {
    if (fd.u[i] == 0) continue;
    for (std::size_t j = 0; j < hq.size(); ++j) {
      if (fd.w[j] == 0) continue;
      auto paths = enumerate_paths(hq, i, j, cap - out.size());
      out.insert(out.end(), paths.begin(), paths.end());
    }
  }
  return out;
}

VertexPaths vertex_paths(const Quiver& q, const FramingData& fd, std::size_t i, std::size_t cap) {
  const auto& hq = q.hidden();
  VertexPaths vp;
  for (std::size_t j = 0; j < hq.size(); ++j) {
    if (fd.u[j] == 0) continue;
    auto paths = enumerate_paths(hq, j, i, cap);
    vp.in.insert(vp.in.end(), paths.begin(), paths.end());
  }
  for (std::size_t k = 0; k < hq.size(); ++k) {
    if (fd.w[k] == 0) continue;
    auto paths = enumerate_paths(hq, i, k, cap);
    vp.out.insert(vp.out.end(), paths.begin(), paths.end());
  }
  return vp;
}

Path concatenate(const Path& first, const Path& second) {
  if (first.end != second.start)
    throw Error(ErrorCode::ShapeMismatch, "paths do not compose");
  Path p{first.start, second.end, first.arrows};
  p.arrows.insert(p.arrows.end(), second.arrows.begin(), second.arrows.end());
  return p;
}

RankVector hidden_dims(const Quiver& q, const DimensionVector& dims) {
  RankVector d;
  for (auto v : q.hidden().vertices) d.push_back(dims[v]);
  return d;
}

long euler_form(const Quiver& q, const std::vector<long>& a, const std::vector<long>& b) {
  const auto& hq = q.hidden();
  long value = 0;
  for (std::size_t i = 0; i < hq.size(); ++i) value += a[i] * b[i];
  for (auto arrow : hq.arrows)
    value -= a[*q.hidden_index(q.arrow(arrow).source)] * b[*q.hidden_index(q.arrow(arrow).target)];
  return value;
}

SimpleExistence lbp_simple_exists(const Quiver& q, const DimensionVector& dims) {
  const auto& hq = q.hidden();
  const auto fd = framing_data(q, dims);
  const auto d = hidden_dims(q, dims);
  SimpleExistence out;

  if (std::all_of(d.begin(), d.end(), [](int x) { return x == 0; })) {
    out.exists = true;
    out.reason = "hidden dimension vector is zero; the one-dimensional representation at infinity is simple";
    return out;
  }

  const auto dq = deframe(q, dims);
  if (dq.is_affine_type_a()) {
    out.affine_type_a = true;
    out.exists = std::all_of(d.begin(), d.end(), [](int x) { return x == 1; });
    out.reason = out.exists ? "Q' is of affine type A and every hidden dimension is 1"
                            : "Q' is of affine type A and some hidden dimension differs from 1";
    return out;
  }

  std::vector<long> dl(d.begin(), d.end());
  bool supported = false;
  for (std::size_t i = 0; i < hq.size(); ++i)
    if (d[i] * (fd.u[i] + fd.w[i]) != 0) supported = true;
  if (!supported) {
    out.reason = "no hidden vertex with d_i (u_i + w_i) != 0";
    return out;
  }
  for (std::size_t i = 0; i < hq.size(); ++i) {
    std::vector<long> e(hq.size(), 0);
    e[i] = 1;
    const long in_form = euler_form(q, dl, e);
    const long out_form = euler_form(q, e, dl);
    const auto& name = q.vertex(hq.vertices[i]);
    if (fd.u[i] < in_form) {
      std::ostringstream msg;
      msg << "u_" << name << " = " << fd.u[i] << " < <d, e_" << name << "> = " << in_form;
      out.reason = msg.str();
      return out;
    }
    if (fd.w[i] < out_form) {
      std::ostringstream msg;
      msg << "w_" << name << " = " << fd.w[i] << " < <e_" << name << ", d> = " << out_form;
      out.reason = msg.str();
      return out;
    }
  }
  out.exists = true;
  out.reason = "all numerical conditions hold";
  return out;
}

ModuliDimension moduli_dimension(const Quiver& q, const DimensionVector& dims) {
  ModuliDimension out;
  out.value = representation_space_dimension(q, dims) - gauge_group_dimension(q, dims);
  out.expected_only = !lbp_simple_exists(q, dims).exists;
  return out;
}

Eigen::MatrixXd shift_map(const Quiver& q, const FramingData& fd, std::size_t arrow) {
  const auto s = q.hidden_index(q.arrow(arrow).source);
  const auto t = q.hidden_index(q.arrow(arrow).target);
  if (!s || !t) throw Error(ErrorCode::ShapeMismatch, "shift maps exist only for hidden arrows");
  const auto from = vertex_paths(q, fd, *s).in;
  const auto to = vertex_paths(q, fd, *t).in;
  auto offsets = [&fd](const std::vector<Path>& paths) {
    std::vector<Eigen::Index> off;
    Eigen::Index total = 0;
    for (const auto& p : paths) {
      off.push_back(total);
      total += fd.u[p.start];
    }
    return std::make_pair(off, total);
  };
  const auto [from_off, from_dim] = offsets(from);
  const auto [to_off, to_dim] = offsets(to);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(to_dim, from_dim);
  const Path step{*s, *t, {arrow}};
  for (std::size_t k = 0; k < from.size(); ++k) {
    auto extended = concatenate(from[k], step);
    auto it = std::find(to.begin(), to.end(), extended);
    const auto u = fd.u[from[k].start];
    p.block(to_off[static_cast<std::size_t>(it - to.begin())], from_off[k], u, u).setIdentity();
  }
  return p;
}

namespace {

// Every scalar entry of (V, f, h) in a fixed order, as pointers into the triple.
std::vector<double*> parameters(DoubleFramedTriple<double>& t) {
  std::vector<double*> out;
  auto add = [&out](Eigen::MatrixXd& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) out.push_back(m.data() + k);
  };
  for (auto a : t.quiver->hidden().arrows) add(t.maps[a]);
  for (auto a : direct_arrows(*t.quiver)) add(t.maps[a]);
  for (auto& m : t.f) add(m);
  for (auto& m : t.h) add(m);
  return out;
}

}  // namespace

Eigen::Index jacobian_rank(const DoubleFramedTriple<double>& t, double step, double rel_tol) {
  auto work = t;
  auto params = parameters(work);
  const auto base = project(work).coordinates();
  Eigen::MatrixXd jac(base.size(), static_cast<Eigen::Index>(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double keep = *params[k];
    *params[k] = keep + step;
    Eigen::VectorXd plus = project(work).coordinates();
    *params[k] = keep - step;
    Eigen::VectorXd minus = project(work).coordinates();
    *params[k] = keep;
    jac.col(static_cast<Eigen::Index>(k)) = (plus - minus) / (2 * step);
  }
  return linalg::numerical_rank<double>(jac, rel_tol);
}

}  // namespace qmn
