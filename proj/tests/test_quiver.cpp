#include <algorithm>

#include "doctest.h"
#include "qmn/fixtures.hpp"
#include "qmn/quiver.hpp"
#include "support.hpp"

using namespace qmn;
using namespace qmn::testing;

namespace {

std::vector<std::string> names(const Quiver& q, const std::vector<std::size_t>& vs) {
  std::vector<std::string> out;
  for (auto v : vs) out.push_back(q.vertex(v));
  return out;
}

ErrorCode code_of(const QuiverSpec& spec) {
  try {
    validate(spec);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a validation error");
  return ErrorCode::Parse;
}

}  // namespace

TEST_CASE("A3 classification") {
  auto q = fixtures::a3();
  const auto& c = q->classification();
  CHECK(names(*q, c.sources) == std::vector<std::string>{"i"});
  CHECK(names(*q, c.sinks) == std::vector<std::string>{"k"});
  CHECK(names(*q, c.hidden) == std::vector<std::string>{"j"});
  CHECK_FALSE(c.degenerate);
  CHECK(c.connected);
  CHECK(q->role(q->vertex_index("i")) == Role::Input);
  CHECK(q->role(q->vertex_index("k")) == Role::Output);
  CHECK(q->role(q->vertex_index("j")) == Role::Hidden);
}

TEST_CASE("isolated vertex is both source and sink") {
  auto q = make_quiver({"v"}, {});
  const auto& c = q->classification();
  CHECK(c.sources.size() == 1);
  CHECK(c.sinks.size() == 1);
  CHECK(c.hidden.empty());
  CHECK(c.degenerate);
  CHECK(q->hidden().size() == 0);
}

TEST_CASE("validation errors") {
  QuiverSpec cyc{{"a", "b"}, {{"x", "a", "b"}, {"y", "b", "a"}}, {}, false};
  CHECK(code_of(cyc) == ErrorCode::CyclicQuiver);
  QuiverSpec loop{{"a"}, {{"x", "a", "a"}}, {}, false};
  CHECK(code_of(loop) == ErrorCode::CyclicQuiver);
  QuiverSpec dangling{{"a"}, {{"x", "a", "b"}}, {}, false};
  CHECK(code_of(dangling) == ErrorCode::DanglingArrow);
  QuiverSpec dup_arrow{{"a", "b"}, {{"x", "a", "b"}, {"x", "a", "b"}}, {}, false};
  CHECK(code_of(dup_arrow) == ErrorCode::DuplicateArrowId);
  QuiverSpec dup_vertex{{"a", "a"}, {}, {}, false};
  CHECK(code_of(dup_vertex) == ErrorCode::DuplicateVertex);
  QuiverSpec multi{{"a", "b"}, {{"x", "a", "b"}, {"y", "a", "b"}}, {}, true};
  CHECK(code_of(multi) == ErrorCode::MultipleArrows);
  multi.network = false;
  CHECK_NOTHROW(validate(multi));
  QuiverSpec bad_role{{"a", "b"}, {{"x", "a", "b"}}, {{"b", Role::Bias}}, false};
  CHECK(code_of(bad_role) == ErrorCode::InvalidRole);
  QuiverSpec unknown_role{{"a", "b"}, {{"x", "a", "b"}}, {{"c", Role::Input}}, false};
  CHECK(code_of(unknown_role) == ErrorCode::InvalidRole);
  CHECK(kind_of(ErrorCode::CyclicQuiver) == ErrorKind::Validation);
  CHECK(kind_of(ErrorCode::PathExplosion) == ErrorKind::Numeric);
}

TEST_CASE("bias role on a source") {
  auto q = Quiver::make({{"b", "x", "h", "y"}, {{"p", "b", "h"}, {"q", "x", "h"}, {"r", "h", "y"}}, {{"b", Role::Bias}}, true});
  CHECK(q->role(q->vertex_index("b")) == Role::Bias);
  CHECK(q->role(q->vertex_index("x")) == Role::Input);
  CHECK(parse_role("bias") == Role::Bias);
  CHECK_FALSE(parse_role("nonsense").has_value());
}

TEST_CASE("disconnected quivers are flagged") {
  auto q = make_quiver({"a", "b", "c", "d"}, {{"x", "a", "b"}, {"y", "c", "d"}});
  CHECK_FALSE(q->classification().connected);
}

TEST_CASE("d4tilde framing dimensions") {
  auto q = fixtures::d4tilde();
  auto fd = framing_data(*q, DimensionVector::thin(*q));
  CHECK(fd.u == std::vector<int>{2, 2, 0, 0, 1});
  CHECK(fd.w == std::vector<int>{0, 0, 0, 2, 2});
  // Slots follow arrow declaration order.
  REQUIRE(fd.in_slots[0].size() == 2);
  CHECK(q->arrow(fd.in_slots[0][0].arrow).id == "phi1");
  CHECK(q->arrow(fd.in_slots[0][1].arrow).id == "phi2");
  CHECK(fd.in_slots[0][1].offset == 1);
  CHECK(q->arrow(fd.out_slots[4][1].arrow).id == "w2");
}

TEST_CASE("framing with wider sources") {
  auto q = fixtures::a3();
  DimensionVector d({3, 2, 4});
  auto fd = framing_data(*q, d);
  CHECK(fd.u == std::vector<int>{3});
  CHECK(fd.w == std::vector<int>{4});
  d[0] = 0;
  CHECK(framing_data(*q, d).u == std::vector<int>{0});
}

TEST_CASE("framing is additive in source arrows") {
  Rng rng(21);
  for (int k = 0; k < 30; ++k) {
    auto shape = random_shape(rng, 4, 0.5, 2, 2);
    auto q = framed_quiver(shape);
    auto fd = framing_data(*q, DimensionVector::thin(*q));
    CHECK(fd.u == shape.u);
    CHECK(fd.w == shape.w);
    // One more source arrow of width 3 into h0.
    auto spec = q->spec();
    spec.vertices.push_back("extra");
    spec.arrows.push_back({"extra_arrow", "extra", "h0"});
    auto q2 = Quiver::make(spec);
    auto d2 = DimensionVector::thin(*q2);
    d2[q2->vertex_index("extra")] = 3;
    auto fd2 = framing_data(*q2, d2);
    CHECK(fd2.u[0] == fd.u[0] + 3);
    for (std::size_t i = 1; i < fd.u.size(); ++i) CHECK(fd2.u[i] == fd.u[i]);
  }
}

TEST_CASE("d4tilde paths") {
  auto q = fixtures::d4tilde();
  const auto& hq = q->hidden();
  auto h = [&](const char* v) { return *q->hidden_index(q->vertex_index(v)); };
  auto p14 = enumerate_paths(hq, h("1"), h("4"));
  REQUIRE(p14.size() == 1);
  CHECK(path_label(*q, p14[0]) == "a.c");
  auto p55 = enumerate_paths(hq, h("5"), h("5"));
  REQUIRE(p55.size() == 1);
  CHECK(p55[0].lazy());
  CHECK(path_label(*q, p55[0]) == "lazy@5");
  CHECK(enumerate_paths(hq, h("4"), h("1")).empty());
  CHECK(enumerate_paths(hq, h("1"), h("2")).empty());
}

TEST_CASE("path counts match adjacency powers") {
  Rng rng(22);
  for (int k = 0; k < 40; ++k) {
    auto q = framed_quiver(random_shape(rng, 2 + k % 5, 0.6, 2, 1));
    const auto& hq = q->hidden();
    auto counts = path_counts(*q);
    auto all = enumerate_all_paths(hq);
    CHECK(static_cast<double>(all.size()) == doctest::Approx(counts.sum()));
    for (std::size_t i = 0; i < hq.size(); ++i)
      for (std::size_t j = 0; j < hq.size(); ++j) {
        auto paths = enumerate_paths(hq, i, j);
        CHECK(static_cast<double>(paths.size()) == counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        CHECK(std::is_sorted(paths.begin(), paths.end(), [&](const Path& a, const Path& b) {
          std::vector<std::string> la, lb;
          for (auto x : a.arrows) la.push_back(q->arrow(x).id);
          for (auto x : b.arrows) lb.push_back(q->arrow(x).id);
          return la < lb;
        }));
      }
  }
}

TEST_CASE("paths are closed under extension by an arrow") {
  Rng rng(23);
  for (int k = 0; k < 20; ++k) {
    auto q = framed_quiver(random_shape(rng, 5, 0.5, 2, 1));
    const auto& hq = q->hidden();
    for (std::size_t i = 0; i < hq.size(); ++i)
      for (std::size_t j = 0; j < hq.size(); ++j)
        for (const auto& p : enumerate_paths(hq, i, j)) {
          // Every path is consecutive and its extensions appear among the longer paths.
          std::size_t at = i;
          for (auto a : p.arrows) {
            CHECK(*q->hidden_index(q->arrow(a).source) == at);
            at = *q->hidden_index(q->arrow(a).target);
          }
          CHECK(at == j);
          for (const auto& e : hq.out[j]) {
            Path longer = p;
            longer.arrows.push_back(e.arrow);
            longer.end = e.target;
            auto ext = enumerate_paths(hq, i, e.target);
            CHECK(std::find(ext.begin(), ext.end(), longer) != ext.end());
          }
        }
  }
}

TEST_CASE("path explosion is reported") {
  // Layers of two vertices with all arrows between consecutive layers: 2^k paths.
  FramedShape s;
  s.n = 24;
  for (int l = 0; l + 1 < 12; ++l)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) s.edges.emplace_back(2 * l + a, 2 * l + 2 + b);
  s.u.assign(24, 0);
  s.w.assign(24, 0);
  s.u[0] = s.u[1] = 1;
  s.w[22] = s.w[23] = 1;
  auto q = framed_quiver(s);
  CHECK(enumerate_paths(q->hidden(), 0, 22).size() == 1024);
  CHECK_THROWS_WITH_AS(enumerate_all_paths(q->hidden(), 500), doctest::Contains("PathExplosion"), Error);
}
