#include "qmn/quiver.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <utility>

namespace qmn {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CyclicQuiver: return "CyclicQuiver";
    case ErrorCode::DanglingArrow: return "DanglingArrow";
    case ErrorCode::DuplicateArrowId: return "DuplicateArrowId";
    case ErrorCode::DuplicateVertex: return "DuplicateVertex";
    case ErrorCode::InvalidRole: return "InvalidRole";
    case ErrorCode::MultipleArrows: return "MultipleArrows";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::QuiverMismatch: return "QuiverMismatch";
    case ErrorCode::SingularGauge: return "SingularGauge";
    case ErrorCode::PathExplosion: return "PathExplosion";
    case ErrorCode::CodimensionMismatch: return "CodimensionMismatch";
    case ErrorCode::SingularPreActivation: return "SingularPreActivation";
    case ErrorCode::UndefinedDerivative: return "UndefinedDerivative";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

const char* to_string(Role role) {
  switch (role) {
    case Role::Input: return "input";
    case Role::Bias: return "bias";
    case Role::Output: return "output";
    case Role::Hidden: return "hidden";
  }
  return "hidden";
}

std::optional<Role> parse_role(std::string_view text) {
  if (text == "input") return Role::Input;
  if (text == "bias") return Role::Bias;
  if (text == "output") return Role::Output;
  if (text == "hidden") return Role::Hidden;
  return std::nullopt;
}

namespace {

struct Indexed {
  std::unordered_map<std::string, std::size_t> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> ends;
};

Indexed index_spec(const QuiverSpec& spec) {
  Indexed out;
  for (std::size_t v = 0; v < spec.vertices.size(); ++v) {
    if (!out.vertices.emplace(spec.vertices[v], v).second)
      throw Error(ErrorCode::DuplicateVertex, "vertex '" + spec.vertices[v] + "' declared twice");
  }
  std::set<std::string> ids;
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& a : spec.arrows) {
    if (!ids.insert(a.id).second)
      throw Error(ErrorCode::DuplicateArrowId, "arrow id '" + a.id + "' used twice");
    auto s = out.vertices.find(a.from);
    auto t = out.vertices.find(a.to);
    if (s == out.vertices.end() || t == out.vertices.end())
      throw Error(ErrorCode::DanglingArrow,
                  "arrow '" + a.id + "' refers to undeclared vertex '" +
                      (s == out.vertices.end() ? a.from : a.to) + "'");
    if (spec.network && !pairs.emplace(s->second, t->second).second)
      throw Error(ErrorCode::MultipleArrows,
                  "network quiver has several arrows " + a.from + " -> " + a.to);
    out.ends.emplace_back(s->second, t->second);
  }
  return out;
}

// Kahn's algorithm; ties broken by declaration order.
std::optional<std::vector<std::size_t>> topological_sort(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& ends) {
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (auto [s, t] : ends) {
    ++indegree[t];
    succ[s].push_back(t);
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto v = ready.top();
    ready.pop();
    order.push_back(v);
    for (auto t : succ[v])
      if (--indegree[t] == 0) ready.push(t);
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

bool weakly_connected(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& ends) {
  if (n == 0) return true;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [s, t] : ends) parent[find(s)] = find(t);
  auto root = find(0);
  for (std::size_t v = 1; v < n; ++v)
    if (find(v) != root) return false;
  return true;
}

}  // namespace

Classification validate(const QuiverSpec& spec) {
  auto idx = index_spec(spec);
  const auto n = spec.vertices.size();

  auto order = topological_sort(n, idx.ends);
  if (!order) throw Error(ErrorCode::CyclicQuiver, "quiver has a directed cycle");

  std::vector<std::size_t> indeg(n, 0), outdeg(n, 0);
  for (auto [s, t] : idx.ends) {
    ++outdeg[s];
    ++indeg[t];
  }

  Classification c;
  c.topological_order = std::move(*order);
  for (std::size_t v = 0; v < n; ++v) {
    bool source = indeg[v] == 0;
    bool sink = outdeg[v] == 0;
    if (source) c.sources.push_back(v);
    if (sink) c.sinks.push_back(v);
    if (source && sink) c.isolated.push_back(v);
    if (!source && !sink) c.hidden.push_back(v);
  }
  c.degenerate = !c.isolated.empty();
  c.connected = weakly_connected(n, idx.ends);

  for (const auto& [name, role] : spec.roles) {
    auto it = idx.vertices.find(name);
    if (it == idx.vertices.end())
      throw Error(ErrorCode::InvalidRole, "role given for undeclared vertex '" + name + "'");
    auto v = it->second;
    bool ok = false;
    switch (role) {
      case Role::Input:
      case Role::Bias: ok = indeg[v] == 0; break;
      case Role::Output: ok = outdeg[v] == 0; break;
      case Role::Hidden: ok = indeg[v] != 0 && outdeg[v] != 0; break;
    }
    if (!ok)
      throw Error(ErrorCode::InvalidRole,
                  "vertex '" + name + "' cannot have role '" + to_string(role) + "'");
  }
  return c;
}

Quiver::Quiver(QuiverSpec spec) : spec_(std::move(spec)) {
  classes_ = validate(spec_);
  auto idx = index_spec(spec_);
  vertex_lookup_ = std::move(idx.vertices);

  const auto n = spec_.vertices.size();
  in_.assign(n, {});
  out_.assign(n, {});
  for (std::size_t a = 0; a < spec_.arrows.size(); ++a) {
    auto [s, t] = idx.ends[a];
    arrows_.push_back({spec_.arrows[a].id, s, t});
    arrow_lookup_.emplace(spec_.arrows[a].id, a);
    out_[s].push_back(a);
    in_[t].push_back(a);
  }

  roles_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto it = spec_.roles.find(spec_.vertices[v]);
    if (it != spec_.roles.end())
      roles_[v] = it->second;
    else if (in_[v].empty())
      roles_[v] = Role::Input;
    else if (out_[v].empty())
      roles_[v] = Role::Output;
    else
      roles_[v] = Role::Hidden;
  }

  hidden_index_.assign(n, std::nullopt);
  hidden_.vertices = classes_.hidden;
  for (std::size_t h = 0; h < hidden_.vertices.size(); ++h) hidden_index_[hidden_.vertices[h]] = h;
  hidden_.out.assign(hidden_.size(), {});
  hidden_.in.assign(hidden_.size(), {});
  for (std::size_t a = 0; a < arrows_.size(); ++a) {
    auto hs = hidden_index_[arrows_[a].source];
    auto ht = hidden_index_[arrows_[a].target];
    if (!hs || !ht) continue;
    hidden_.arrows.push_back(a);
    hidden_.out[*hs].push_back({a, *ht});
    hidden_.in[*ht].push_back({a, *hs});
  }
  auto by_id = [this](const HiddenQuiver::Edge& x, const HiddenQuiver::Edge& y) {
    return arrows_[x.arrow].id < arrows_[y.arrow].id;
  };
  for (auto& edges : hidden_.out) std::sort(edges.begin(), edges.end(), by_id);
  for (auto& edges : hidden_.in) std::sort(edges.begin(), edges.end(), by_id);
  for (auto v : classes_.topological_order)
    if (hidden_index_[v]) hidden_.topological_order.push_back(*hidden_index_[v]);
}

std::optional<std::size_t> Quiver::find_vertex(std::string_view id) const {
  auto it = vertex_lookup_.find(std::string(id));
  if (it == vertex_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Quiver::find_arrow(std::string_view id) const {
  auto it = arrow_lookup_.find(std::string(id));
  if (it == arrow_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Quiver::vertex_index(std::string_view id) const {
  auto v = find_vertex(id);
  if (!v) throw Error(ErrorCode::DanglingArrow, "unknown vertex '" + std::string(id) + "'");
  return *v;
}

std::size_t Quiver::arrow_index(std::string_view id) const {
  auto a = find_arrow(id);
  if (!a) throw Error(ErrorCode::ShapeMismatch, "unknown arrow '" + std::string(id) + "'");
  return *a;
}

FramingData framing_data(const Quiver& q, const DimensionVector& dims) {
  if (dims.size() != q.vertex_count())
    throw Error(ErrorCode::ShapeMismatch, "dimension vector does not cover every vertex");
  const auto& hq = q.hidden();
  FramingData fd;
  fd.u.assign(hq.size(), 0);
  fd.w.assign(hq.size(), 0);
  fd.in_slots.assign(hq.size(), {});
  fd.out_slots.assign(hq.size(), {});
  for (std::size_t a = 0; a < q.arrow_count(); ++a) {
    const auto& arrow = q.arrow(a);
    auto hs = q.hidden_index(arrow.source);
    auto ht = q.hidden_index(arrow.target);
    if (!hs && ht) {
      int d = dims[arrow.source];
      fd.in_slots[*ht].push_back({a, arrow.source, fd.u[*ht], d});
      fd.u[*ht] += d;
    } else if (hs && !ht) {
      int d = dims[arrow.target];
      fd.out_slots[*hs].push_back({a, arrow.target, fd.w[*hs], d});
      fd.w[*hs] += d;
    }
  }
  return fd;
}

namespace {

void extend_paths(const HiddenQuiver& hq, std::size_t at, std::size_t to,
                  const std::vector<char>& reaches, Path& current, std::vector<Path>& out,
                  std::size_t cap) {
  if (at == to) {
    if (out.size() >= cap)
      throw Error(ErrorCode::PathExplosion,
                  "more than " + std::to_string(cap) + " hidden paths");
    out.push_back(current);
    return;
  }
  for (const auto& e : hq.out[at]) {
    if (!reaches[e.target]) continue;
    current.arrows.push_back(e.arrow);
    extend_paths(hq, e.target, to, reaches, current, out, cap);
    current.arrows.pop_back();
  }
}

std::vector<char> reaching(const HiddenQuiver& hq, std::size_t to) {
  std::vector<char> reaches(hq.size(), 0);
  reaches[to] = 1;
  for (auto it = hq.topological_order.rbegin(); it != hq.topological_order.rend(); ++it)
    for (const auto& e : hq.out[*it])
      if (reaches[e.target]) reaches[*it] = 1;
  return reaches;
}

}  // namespace

std::vector<Path> enumerate_paths(const HiddenQuiver& hq, std::size_t from, std::size_t to,
                                  std::size_t cap) {
  std::vector<Path> out;
  if (from >= hq.size() || to >= hq.size()) return out;
  auto reaches = reaching(hq, to);
  if (!reaches[from]) return out;
  Path current{from, to, {}};
  extend_paths(hq, from, to, reaches, current, out, cap);
  return out;
}

std::vector<Path> enumerate_all_paths(const HiddenQuiver& hq, std::size_t cap) {
  std::vector<Path> all;
  for (std::size_t i = 0; i < hq.size(); ++i) {
    for (std::size_t j = 0; j < hq.size(); ++j) {
      auto paths = enumerate_paths(hq, i, j, cap - all.size());
      if (all.size() + paths.size() > cap)
        throw Error(ErrorCode::PathExplosion, "more than " + std::to_string(cap) + " hidden paths");
      all.insert(all.end(), paths.begin(), paths.end());
    }
  }
  return all;
}

std::string path_label(const Quiver& q, const Path& p) {
  if (p.lazy()) return "lazy@" + q.vertex(q.hidden().vertices.at(p.start));
  std::string label;
  for (std::size_t k = 0; k < p.arrows.size(); ++k) {
    if (k) label += '.';
    label += q.arrow(p.arrows[k]).id;
  }
  return label;
}

}  // namespace qmn
