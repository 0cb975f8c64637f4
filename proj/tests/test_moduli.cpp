#include "doctest.h"
#include "qmn/fixtures.hpp"
#include "qmn/moduli.hpp"
#include "qmn/random.hpp"
#include "support.hpp"

using namespace qmn;
using namespace qmn::testing;

namespace {

std::size_t hid(const Quiver& q, const char* v) { return *q.hidden_index(q.vertex_index(v)); }

// Columns 0..n-1 of V in coordinates of an orthonormal basis.
MatrixXd span_of(std::initializer_list<VectorXd> vs) {
  MatrixXd m(vs.begin()->size(), static_cast<Eigen::Index>(vs.size()));
  Eigen::Index c = 0;
  for (const auto& v : vs) m.col(c++) = v;
  return m;
}

}  // namespace

TEST_CASE("d4tilde at all ones") {
  auto m = project(fixtures::d4tilde_triple());
  MatrixXd expected(4, 5);
  expected << 1, 1, 1, 1, 0,  //
      1, 1, 1, 1, 0,          //
      1, 1, 1, 1, 1,          //
      1, 1, 1, 1, 1;
  CHECK(m.assembled() == expected);
  // Paths 1~>4, 1~>5, 2~>4, 2~>5, 5~>5.
  CHECK(m.paths.size() == 5);
}

TEST_CASE("d4tilde quotient template") {
  Rng rng(41);
  for (int k = 0; k < 10; ++k) {
    auto p = random_d4(rng);
    CHECK(rel_err(project(fixtures::d4tilde_triple(p)).assembled(), d4_template(p)) <= 1e-12);
  }
}

TEST_CASE("A3 moduli point is the product") {
  auto m = project(to_triple(fixtures::a3_thin(2, 3)));
  REQUIRE(m.blocks.size() == 1);
  CHECK(m.blocks[0](0, 0) == 6);
  CHECK(m.coordinates().size() == 1);
}

TEST_CASE("block lookup by path") {
  auto t = fixtures::d4tilde_triple();
  auto m = project(t);
  for (const auto& p : m.paths) CHECK(m.block(p) != nullptr);
  CHECK(m.block(Path{0, 0, {}}) == nullptr);
}

TEST_CASE("moduli point is gauge invariant") {
  Rng rng(42);
  for (int k = 0; k < 50; ++k) {
    auto q = framed_quiver(random_shape(rng, 4, 0.5, 2, 2));
    auto dims = random_hidden_dims(*q, rng, 3);
    auto t = random_triple(q, dims, rng);
    auto g = random_gauge(*q, dims, rng);
    CHECK(rel_err(project(act(g, t)).coordinates(), project(t).coordinates()) <= 1e-9);
  }
}

TEST_CASE("d4tilde vertex blocks") {
  fixtures::D4Params p;
  Rng rng(43);
  p = random_d4(rng);
  auto t = fixtures::d4tilde_triple(p);
  auto m = project(t);
  const auto& q = *t.quiver;
  auto full = d4_template(p);
  MatrixXd A = full.block(0, 0, 2, 2), B = full.block(0, 2, 2, 2), C = full.block(2, 0, 2, 2),
           D = full.block(2, 2, 2, 2), E = full.block(2, 4, 2, 1);
  MatrixXd q3(4, 4);
  q3 << A, B, C, D;
  CHECK(rel_err(vertex_block(m, hid(q, "3")), q3) <= 1e-14);
  MatrixXd q5(2, 5);
  q5 << C, D, E;
  CHECK(rel_err(vertex_block(m, hid(q, "5")), q5) <= 1e-14);
  auto ranks = rank_vector(m);
  CHECK(ranks == RankVector{1, 1, 1, 1, 1});
}

TEST_CASE("rank vectors") {
  auto d4 = fixtures::d4tilde();
  CHECK(rank_vector(project(fixtures::d4tilde_triple())) == RankVector{1, 1, 1, 1, 1});
  CHECK(rank_vector(project(zero_triple<double>(d4, DimensionVector::thin(*d4)))) == RankVector{0, 0, 0, 0, 0});
  // A source of dimension zero leaves q^(j) with no columns.
  auto a3 = fixtures::a3();
  DimensionVector d({0, 1, 1});
  auto m = project(zero_triple<double>(a3, d));
  CHECK(vertex_block(m, 0).cols() == 0);
  CHECK(rank_vector(m) == RankVector{0});
}

TEST_CASE("rank is bounded by the hidden dimension") {
  Rng rng(44);
  for (int k = 0; k < 40; ++k) {
    auto q = framed_quiver(random_shape(rng, 3, 0.6, 2, 2));
    auto dims = random_hidden_dims(*q, rng, 3);
    auto r = rank_vector(project(random_triple(q, dims, rng)));
    auto d = hidden_dims(*q, dims);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] <= d[i]);
  }
}

TEST_CASE("A3 stability") {
  CHECK(is_simple(to_triple(fixtures::a3_thin(1, 2))));
  CHECK(is_semistable(to_triple(fixtures::a3_thin(1, 0))));
  CHECK_FALSE(is_simple(to_triple(fixtures::a3_thin(1, 0))));
  CHECK_FALSE(is_semistable(to_triple(fixtures::a3_thin(0, 1))));
  CHECK(is_semistable(fixtures::d4tilde_triple()));
  CHECK(is_simple(fixtures::d4tilde_triple()));
}

TEST_CASE("simple iff full rank on random non-thin triples") {
  Rng rng(45);
  int simple = 0, not_simple = 0;
  for (int k = 0; k < 200; ++k) {
    auto q = framed_quiver(random_shape(rng, 3, 0.6, 2, 2));
    auto dims = random_hidden_dims(*q, rng, 2);
    auto t = random_triple(q, dims, rng);
    // Knock out some maps to reach the boundary.
    for (auto a : q->hidden().arrows)
      if (rng() % 3 == 0) t.maps[a].setZero();
    for (std::size_t i = 0; i < t.hidden_count(); ++i) {
      if (rng() % 4 == 0) t.f[i].setZero();
      if (rng() % 4 == 0) t.h[i].setZero();
    }
    const bool s = is_simple(t);
    CHECK(s == (rank_vector(project(t)) == hidden_dims(*q, dims)));
    (s ? simple : not_simple)++;
  }
  CHECK(simple > 10);
  CHECK(not_simple > 10);
}

TEST_CASE("existence criterion on the worked examples") {
  auto a3 = fixtures::a3();
  auto e = lbp_simple_exists(*a3, DimensionVector::thin(*a3));
  CHECK(e.exists);
  CHECK(e.affine_type_a);
  CHECK_FALSE(lbp_simple_exists(*a3, DimensionVector({1, 2, 1})).exists);
  auto d4 = fixtures::d4tilde();
  auto e4 = lbp_simple_exists(*d4, DimensionVector::thin(*d4));
  CHECK(e4.exists);
  CHECK_FALSE(e4.affine_type_a);
  // Zero hidden dimensions: the representation at infinity alone.
  CHECK(lbp_simple_exists(*a3, DimensionVector({1, 0, 1})).exists);
  // u_1 = 1 cannot generate a two-dimensional space.
  auto chain = framed_quiver({2, {{0, 1}}, {1, 0}, {0, 1}});
  CHECK_FALSE(lbp_simple_exists(*chain, dims_with_hidden(*chain, {2, 1})).exists);
  CHECK(lbp_simple_exists(*chain, dims_with_hidden(*chain, {1, 1})).exists);
  CHECK_FALSE(lbp_simple_exists(*chain, dims_with_hidden(*chain, {1, 0})).exists);
}

TEST_CASE("Euler form") {
  auto q = fixtures::d4tilde();
  std::vector<long> ones(5, 1);
  // 5 vertices, 4 hidden arrows.
  CHECK(euler_form(*q, ones, ones) == 1);
  std::vector<long> e1{1, 0, 0, 0, 0}, e3{0, 0, 1, 0, 0};
  CHECK(euler_form(*q, e1, e3) == -1);
  CHECK(euler_form(*q, e3, e1) == 0);
}

TEST_CASE("moduli dimension") {
  auto d4 = fixtures::d4tilde();
  auto dim = moduli_dimension(*d4, DimensionVector::thin(*d4));
  CHECK(dim.value == 8);
  CHECK_FALSE(dim.expected_only);
  auto a3 = fixtures::a3();
  CHECK(moduli_dimension(*a3, DimensionVector::thin(*a3)).value == 1);
  auto bad = moduli_dimension(*a3, DimensionVector({1, 2, 1}));
  CHECK(bad.expected_only);
}

TEST_CASE("Jacobian rank at generic points") {
  Rng rng(46);
  for (auto q : {fixtures::d4tilde(), fixtures::a3()}) {
    auto t = to_triple(random_thin(q, rng, 0.5, 2));
    CHECK(jacobian_rank(t) == static_cast<Eigen::Index>(q->arrow_count() - q->hidden().size()));
  }
  // Non-thin: the formula dim R - dim G holds where simples exist.
  auto q = framed_quiver({2, {{0, 1}}, {3, 0}, {0, 3}});
  auto dims = dims_with_hidden(*q, {2, 2});
  REQUIRE(lbp_simple_exists(*q, dims).exists);
  CHECK(jacobian_rank(random_triple(q, dims, rng)) == moduli_dimension(*q, dims).value);
}

TEST_CASE("semisimplification") {
  Rng rng(47);
  SUBCASE("simple triples keep full rank") {
    auto t = to_triple(random_thin(fixtures::d4tilde(), rng));
    auto s = semisimplify(t);
    CHECK(s.rank == RankVector{1, 1, 1, 1, 1});
    CHECK(rel_err(project(s.representative).coordinates(), s.point.coordinates()) <= 1e-12);
  }
  SUBCASE("zero triple") {
    auto q = fixtures::d4tilde();
    auto s = semisimplify(zero_triple<double>(q, DimensionVector::thin(*q)));
    CHECK(s.rank == RankVector{0, 0, 0, 0, 0});
    for (const auto& f : s.representative.f) CHECK(f.isZero());
  }
  SUBCASE("degenerate triples re-project to the same point") {
    for (int k = 0; k < 40; ++k) {
      auto q = framed_quiver(random_shape(rng, 3, 0.6, 2, 2));
      auto dims = random_hidden_dims(*q, rng, 3);
      auto t = random_triple(q, dims, rng);
      for (auto a : q->hidden().arrows)
        if (rng() % 3 == 0) t.maps[a].setZero();
      if (rng() % 2) t.h[0].setZero();
      auto s = semisimplify(t);
      CHECK(rel_err(project(s.representative).coordinates(), project(t).coordinates()) <= 1e-10);
      CHECK(rank_vector(project(s.representative)) == s.rank);
    }
  }
}

TEST_CASE("resolution points") {
  Rng rng(48);
  fixtures::D4Params p = random_d4(rng);
  auto t = fixtures::d4tilde_triple(p);
  auto m = project(t);
  auto subspaces = resolution_subspaces(t);
  CHECK(verify_resolution_point(subspaces, m).ok());

  SUBCASE("a random hyperplane at vertex 3 breaks shift closure") {
    const auto i = hid(*t.quiver, "3");
    auto moved = subspaces;
    moved[i] = linalg::null_basis<double>(random_matrix(1, 4, rng));
    auto check = verify_resolution_point(moved, m);
    CHECK_FALSE(check.ok());
  }
  SUBCASE("codimension is enforced") {
    auto wrong = subspaces;
    wrong[0] = MatrixXd::Identity(2, 2);
    CHECK_THROWS_WITH_AS(verify_resolution_point(wrong, m), doctest::Contains("CodimensionMismatch"), Error);
    wrong.pop_back();
    CHECK_THROWS_AS(verify_resolution_point(wrong, m), Error);
  }
  SUBCASE("at q = 0 every compatible family lies in the kernels") {
    auto z = project(zero_triple<double>(t.quiver, t.dims));
    auto check = verify_resolution_point(subspaces, z);
    CHECK(check.inside_kernels);
    CHECK(check.closed_under_shifts);
  }
}

TEST_CASE("shift maps") {
  auto q = fixtures::d4tilde();
  auto fd = framing_data(*q, DimensionVector::thin(*q));
  // a : 1 -> 3 sends P_1 = U_1 into the first block of P_3 = U_1 + U_2.
  auto p = shift_map(*q, fd, q->arrow_index("a"));
  MatrixXd expected = MatrixXd::Zero(4, 2);
  expected.topRows(2).setIdentity();
  CHECK(p == expected);
  CHECK_THROWS_AS(shift_map(*q, fd, q->arrow_index("phi1")), Error);
}

TEST_CASE("separation of thin points") {
  Rng rng(49);
  auto q = fixtures::d4tilde();
  for (int k = 0; k < 20; ++k) {
    auto a = to_triple(random_thin(q, rng));
    auto g = scalar_gauge(random_nonzero_gauge(*q, rng));
    auto b = act(g, a);
    auto w = separation_witness(a, b);
    REQUIRE(w.has_value());
    auto moved = act(*w, a);
    for (std::size_t i = 0; i < a.hidden_count(); ++i) CHECK(rel_err(moved.f[i], b.f[i]) <= 1e-10);
    // A different point has no witness.
    auto c = to_triple(random_thin(q, rng));
    CHECK_FALSE(separation_witness(a, c).has_value());
  }
}

TEST_CASE("path explosion surfaces from project") {
  FramedShape s;
  s.n = 20;
  for (int l = 0; l + 1 < 10; ++l)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) s.edges.emplace_back(2 * l + a, 2 * l + 2 + b);
  s.u.assign(20, 0);
  s.w.assign(20, 0);
  s.u[0] = s.u[1] = 1;
  s.w[18] = s.w[19] = 1;
  auto q = framed_quiver(s);
  auto t = zero_triple<double>(q, DimensionVector::thin(*q));
  CHECK_THROWS_WITH_AS(project(t, 100), doctest::Contains("PathExplosion"), Error);
  CHECK(project(t).paths.size() == 4 * 256);
}

TEST_CASE("subspace helpers") {
  VectorXd e1 = VectorXd::Unit(3, 0), e2 = VectorXd::Unit(3, 1), e3 = VectorXd::Unit(3, 2);
  auto a = span_of({e1, e2}), b = span_of({e2, e3});
  CHECK(linalg::intersect<double>(a, b).cols() == 1);
  CHECK(linalg::sum<double>(a, b).cols() == 3);
  CHECK(linalg::complement_within<double>(a, span_of({e1})).cols() == 1);
  CHECK(linalg::containment_residual<double>(a, span_of({e1})) <= 1e-15);
  CHECK(linalg::containment_residual<double>(a, span_of({e3})) > 0.5);
}
