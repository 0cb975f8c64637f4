#include "qmn/rep.hpp"

#include <numeric>
#include <set>

namespace qmn {

std::vector<std::size_t> direct_arrows(const Quiver& q) {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < q.arrow_count(); ++a)
    if (!q.is_hidden(q.arrow(a).source) && !q.is_hidden(q.arrow(a).target)) out.push_back(a);
  return out;
}

long representation_space_dimension(const Quiver& q, const DimensionVector& dims) {
  long total = 0;
  for (const auto& a : q.arrows()) total += static_cast<long>(dims[a.source]) * dims[a.target];
  return total;
}

long gauge_group_dimension(const Quiver& q, const DimensionVector& dims) {
  long total = 0;
  for (auto v : q.hidden().vertices) total += static_cast<long>(dims[v]) * dims[v];
  return total;
}

namespace {

std::string fresh_name(const Quiver& q, std::string base) {
  while (q.find_vertex(base)) base += '\'';
  return base;
}

}  // namespace

DeframedQuiver deframe(const Quiver& q, const DimensionVector& dims) {
  const auto& hq = q.hidden();
  const auto fd = framing_data(q, dims);
  DeframedQuiver dq;
  std::vector<int> d;
  for (auto v : hq.vertices) {
    dq.vertices.push_back(q.vertex(v));
    d.push_back(dims[v]);
  }
  dq.infinity = dq.vertices.size();
  dq.vertices.push_back(fresh_name(q, "inf"));
  d.push_back(1);
  dq.dims = DimensionVector(std::move(d));

  for (auto a : hq.arrows) {
    const auto& arrow = q.arrow(a);
    dq.arrows.push_back({arrow.id, *q.hidden_index(arrow.source), *q.hidden_index(arrow.target)});
    dq.hidden_arrow_source.push_back(a);
  }
  dq.beta.assign(hq.size(), {});
  dq.gamma.assign(hq.size(), {});
  for (std::size_t i = 0; i < hq.size(); ++i) {
    for (int k = 0; k < fd.u[i]; ++k) {
      dq.beta[i].push_back(dq.arrows.size());
      dq.arrows.push_back({"beta_" + q.vertex(hq.vertices[i]) + "_" + std::to_string(k + 1),
                           dq.infinity, i});
    }
  }
  for (std::size_t i = 0; i < hq.size(); ++i) {
    for (int l = 0; l < fd.w[i]; ++l) {
      dq.gamma[i].push_back(dq.arrows.size());
      dq.arrows.push_back({"gamma_" + q.vertex(hq.vertices[i]) + "_" + std::to_string(l + 1), i,
                           dq.infinity});
    }
  }
  return dq;
}

bool DeframedQuiver::is_affine_type_a() const {
  const auto n = vertices.size();
  if (n == 0 || arrows.size() != n) return false;
  std::vector<int> degree(n, 0);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& a : arrows) {
    ++degree[a.source];
    ++degree[a.target];
    parent[find(a.source)] = find(a.target);
  }
  for (std::size_t v = 0; v < n; ++v)
    if (degree[v] != 2 || find(v) != find(0)) return false;
  return true;
}

bool DeframedQuiver::has_oriented_cycle() const {
  const auto n = vertices.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& a : arrows) succ[a.source].push_back(a.target);
  // Any cycle in Q' passes through infinity since the hidden part is acyclic.
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack(succ[infinity].begin(), succ[infinity].end());
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    if (v == infinity) return true;
    if (seen[v]) continue;
    seen[v] = 1;
    for (auto t : succ[v]) stack.push_back(t);
  }
  return false;
}

DoubleFramedVariant doubleframe_variant(const Quiver& q, const DimensionVector& dims) {
  const auto& hq = q.hidden();
  const auto fd = framing_data(q, dims);
  QuiverSpec spec;
  std::vector<int> d;
  const auto zero = fresh_name(q, "zero");
  const auto inf = fresh_name(q, "inf");
  spec.vertices.push_back(zero);
  d.push_back(1);
  for (auto v : hq.vertices) {
    spec.vertices.push_back(q.vertex(v));
    d.push_back(dims[v]);
  }
  spec.vertices.push_back(inf);
  d.push_back(1);
  for (auto a : hq.arrows) {
    const auto& arrow = q.arrow(a);
    spec.arrows.push_back({arrow.id, q.vertex(arrow.source), q.vertex(arrow.target)});
  }
  for (std::size_t i = 0; i < hq.size(); ++i) {
    const auto& name = q.vertex(hq.vertices[i]);
    for (int k = 0; k < fd.u[i]; ++k)
      spec.arrows.push_back({"beta_" + name + "_" + std::to_string(k + 1), zero, name});
    for (int l = 0; l < fd.w[i]; ++l)
      spec.arrows.push_back({"gamma_" + name + "_" + std::to_string(l + 1), name, inf});
  }
  DoubleFramedVariant out;
  out.quiver = Quiver::make(std::move(spec));
  out.dims = DimensionVector(std::move(d));
  out.expected_dimension =
      representation_space_dimension(q, dims) - gauge_group_dimension(q, dims) - 1;
  return out;
}

}  // namespace qmn
