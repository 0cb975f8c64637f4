#ifndef QMN_QUIVER_HPP
#define QMN_QUIVER_HPP

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qmn/core.hpp"

namespace qmn {

enum class Role { Input, Bias, Output, Hidden };

const char* to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

struct ArrowSpec {
  std::string id;
  std::string from;
  std::string to;
};

/// Raw, unvalidated quiver description as it appears in a quiver file.
struct QuiverSpec {
  std::vector<std::string> vertices;
  std::vector<ArrowSpec> arrows;
  std::map<std::string, Role> roles;
  bool network = false;
};

/// Partition of the vertex set. Isolated vertices are both sources and sinks
/// and mark the quiver as degenerate.
struct Classification {
  std::vector<std::size_t> sources;
  std::vector<std::size_t> sinks;
  std::vector<std::size_t> hidden;
  std::vector<std::size_t> isolated;
  std::vector<std::size_t> topological_order;
  bool degenerate = false;
  bool connected = true;
};

/// Checks a raw description and classifies its vertices.
/// Throws Error with CyclicQuiver, DanglingArrow, DuplicateArrowId,
/// DuplicateVertex, MultipleArrows (network quivers only) or InvalidRole.
Classification validate(const QuiverSpec& spec);

/// Full subquiver on the hidden vertices. Vertex positions here are "hidden
/// indices"; arrow entries are indices into the parent quiver.
struct HiddenQuiver {
  struct Edge {
    std::size_t arrow;
    std::size_t target;  // hidden index
  };

  std::vector<std::size_t> vertices;  // parent vertex index per hidden index
  std::vector<std::size_t> arrows;    // parent arrow indices with both ends hidden
  std::vector<std::vector<Edge>> out;  // sorted by arrow id
  std::vector<std::vector<Edge>> in;   // Edge::target holds the source here
  std::vector<std::size_t> topological_order;

  std::size_t size() const { return vertices.size(); }
};

class Quiver {
 public:
  struct Arrow {
    std::string id;
    std::size_t source;
    std::size_t target;
  };

  explicit Quiver(QuiverSpec spec);

  static std::shared_ptr<const Quiver> make(QuiverSpec spec) {
    return std::make_shared<const Quiver>(std::move(spec));
  }

  std::size_t vertex_count() const { return spec_.vertices.size(); }
  std::size_t arrow_count() const { return arrows_.size(); }

  const std::string& vertex(std::size_t v) const { return spec_.vertices.at(v); }
  const Arrow& arrow(std::size_t a) const { return arrows_.at(a); }
  const std::vector<Arrow>& arrows() const { return arrows_; }

  std::optional<std::size_t> find_vertex(std::string_view id) const;
  std::optional<std::size_t> find_arrow(std::string_view id) const;
  std::size_t vertex_index(std::string_view id) const;
  std::size_t arrow_index(std::string_view id) const;

  const Classification& classification() const { return classes_; }
  const HiddenQuiver& hidden() const { return hidden_; }
  const QuiverSpec& spec() const { return spec_; }
  bool is_network() const { return spec_.network; }

  bool is_source(std::size_t v) const { return in_[v].empty(); }
  bool is_sink(std::size_t v) const { return out_[v].empty(); }
  bool is_hidden(std::size_t v) const { return hidden_index_[v].has_value(); }
  std::optional<std::size_t> hidden_index(std::size_t v) const { return hidden_index_.at(v); }

  /// Declared role, defaulting to input/output/hidden by position.
  Role role(std::size_t v) const { return roles_[v]; }

  const std::vector<std::size_t>& in_arrows(std::size_t v) const { return in_[v]; }
  const std::vector<std::size_t>& out_arrows(std::size_t v) const { return out_[v]; }

 private:
  QuiverSpec spec_;
  std::vector<Arrow> arrows_;
  std::unordered_map<std::string, std::size_t> vertex_lookup_;
  std::unordered_map<std::string, std::size_t> arrow_lookup_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<Role> roles_;
  std::vector<std::optional<std::size_t>> hidden_index_;
  Classification classes_;
  HiddenQuiver hidden_;
};

using QuiverPtr = std::shared_ptr<const Quiver>;

class DimensionVector {
 public:
  DimensionVector() = default;
  explicit DimensionVector(std::vector<int> values) : values_(std::move(values)) {}

  static DimensionVector thin(const Quiver& q) {
    return DimensionVector(std::vector<int>(q.vertex_count(), 1));
  }

  int operator[](std::size_t v) const { return values_.at(v); }
  int& operator[](std::size_t v) { return values_.at(v); }
  std::size_t size() const { return values_.size(); }
  const std::vector<int>& values() const { return values_; }

  bool operator==(const DimensionVector&) const = default;

 private:
  std::vector<int> values_;
};

/// One copy of a source (resp. sink) space inside U_i (resp. W_i).
struct FramingSlot {
  std::size_t arrow;
  std::size_t terminal;  // the source or sink vertex
  int offset;            // first coordinate inside U_i / W_i
  int dim;
};

/// Indexed by hidden index.
struct FramingData {
  std::vector<int> u;
  std::vector<int> w;
  std::vector<std::vector<FramingSlot>> in_slots;
  std::vector<std::vector<FramingSlot>> out_slots;
};

/// Slot lists keep arrow declaration order; that order is the basis order of U_i and W_i.
FramingData framing_data(const Quiver& q, const DimensionVector& dims);

struct Path {
  std::size_t start;  // hidden index
  std::size_t end;    // hidden index
  std::vector<std::size_t> arrows;  // parent arrow indices, in traversal order

  bool lazy() const { return arrows.empty(); }
  bool operator==(const Path&) const = default;
  auto operator<=>(const Path&) const = default;
};

inline constexpr std::size_t kDefaultPathCap = 1'000'000;

/// All directed paths from `from` to `to` in the hidden quiver, lazy path
/// included when from == to, ordered lexicographically by arrow ids.
std::vector<Path> enumerate_paths(const HiddenQuiver& hq, std::size_t from, std::size_t to,
                                  std::size_t cap = kDefaultPathCap);

/// Every path of the hidden quiver, grouped by (start, end) in hidden order.
std::vector<Path> enumerate_all_paths(const HiddenQuiver& hq, std::size_t cap = kDefaultPathCap);

/// Human-readable label such as "a.c" or "lazy@3".
std::string path_label(const Quiver& q, const Path& p);

}  // namespace qmn

#endif  // QMN_QUIVER_HPP
