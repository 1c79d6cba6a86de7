#include <doctest.h>

#include "oqs/hilbert.hpp"

#include <random>

using namespace oqs;

namespace {

Mat random_matrix(int d, std::mt19937_64& g) {
  std::normal_distribution<double> n;
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cd(n(g), n(g));
  return m;
}

// direct index contraction: rho_{(k),(k')} = sum_rest rho_{(k,r),(k',r)} for 3 qubits, keep {0,2}
Mat trace_out_middle(const Mat& rho) {
  Mat out = Mat::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int c2 = 0; c2 < 2; ++c2)
          for (int b = 0; b < 2; ++b) out(a * 2 + c, a2 * 2 + c2) += rho(a * 4 + b * 2 + c, a2 * 4 + b * 2 + c2);
  return out;
}

}  // namespace

TEST_CASE("local operators") {
  auto s = LocalBasis::spin_half();
  Mat sz = local_operator(s, "sz").matrix;
  CHECK(sz(0, 0) == cd(1));
  CHECK(sz(1, 1) == cd(-1));
  CHECK(std::abs(sz(0, 1)) == 0.0);
  Mat sp = local_operator(s, "sp").matrix;
  CHECK(sp(0, 1) == cd(1));  // |up><down|

  auto b = LocalBasis::boson(2);
  Vec two = basis_vector(3, 2);
  Vec r = local_operator(b, "a").matrix * two;
  CHECK(std::abs(r[1] - std::sqrt(2.0)) < 1e-15);
  CHECK(r.norm() == doctest::Approx(std::sqrt(2.0)));

  Mat a = local_operator(LocalBasis::hardcore(), "a").matrix;
  CHECK((a * a).norm() == 0.0);

  CHECK_THROWS_AS(local_operator(s, "a"), InputError);
  CHECK_THROWS_AS(local_operator(b, "sz"), InputError);
  CHECK_THROWS_AS(local_operator(s, "bogus"), InputError);
}

TEST_CASE("collective spin algebra") {
  auto c = LocalBasis::collective(4);  // S = 2
  Mat sx = local_operator(c, "Sx").matrix, sy = local_operator(c, "Sy").matrix, sz = local_operator(c, "Sz").matrix;
  CHECK((sx * sy - sy * sx - I1 * sz).norm() < 1e-12);
  Mat cas = sx * sx + sy * sy + sz * sz;
  CHECK((cas - 6.0 * Mat::Identity(5, 5)).norm() < 1e-12);
  CHECK(sz(0, 0).real() == doctest::Approx(2.0));
}

TEST_CASE("embed") {
  Basis b(2, LocalBasis::spin_half());
  Operator z = embed(local_operator(b[0], "sz"), 0, b);
  RVec diag = z.matrix.diagonal().real();
  CHECK(diag(0) == 1);
  CHECK(diag(1) == 1);
  CHECK(diag(2) == -1);
  CHECK(diag(3) == -1);
  Operator id = embed(local_operator(b[0], "id"), 1, b);
  CHECK((id.matrix - Mat::Identity(4, 4)).norm() == 0.0);
  Operator xx = embed(local_operator(b[0], "sx"), 0, b) * embed(local_operator(b[1], "sx"), 1, b);
  CHECK(std::abs(xx.trace()) == 0.0);
  CHECK_THROWS_AS(embed(local_operator(b[0], "sx"), 2, b), InputError);
}

TEST_CASE("embed properties") {
  std::mt19937_64 g(7);
  Basis b = {LocalBasis::spin_half(), LocalBasis::boson(2), LocalBasis::spin_half()};
  for (int site = 0; site < 3; ++site) {
    int dl = b[site].dim;
    Operator A(random_matrix(dl, g), {b[site]}), B(random_matrix(dl, g), {b[site]});
    Operator lhs = embed(A * B, site, b), rhs = embed(A, site, b) * embed(B, site, b);
    CHECK((lhs.matrix - rhs.matrix).norm() < 1e-12 * lhs.matrix.norm());
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      Operator A = embed(Operator(random_matrix(b[i].dim, g), {b[i]}), i, b);
      Operator B = embed(Operator(random_matrix(b[j].dim, g), {b[j]}), j, b);
      CHECK((A * B - B * A).matrix.norm() == 0.0);
    }
}

TEST_CASE("partial trace") {
  Basis b(2, LocalBasis::spin_half());
  Vec up = basis_vector(2, 0), dn = basis_vector(2, 1);
  Operator rho = projector(product_state({up, dn}), b);
  Operator r0 = partial_trace(rho, {0});
  CHECK((r0.matrix - up * up.adjoint()).norm() < 1e-15);

  Vec bell = (product_state({up, dn}) + product_state({dn, up})) / std::sqrt(2.0);
  Operator rb = partial_trace(projector(bell, b), {0});
  CHECK((rb.matrix - 0.5 * Mat::Identity(2, 2)).norm() < 1e-15);

  std::mt19937_64 g(3);
  Basis b3(3, LocalBasis::spin_half());
  Mat m = random_matrix(8, g);
  m = m + m.adjoint();
  Operator r(m, b3);
  Operator red = partial_trace(r, {0, 2});
  CHECK((red.matrix - trace_out_middle(m)).norm() < 1e-12);
  CHECK(std::abs(red.trace() - r.trace()) < 1e-12);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(partial_trace(r, {k}).trace() - r.trace()) < 1e-12);

  CHECK_THROWS_AS(partial_trace(r, {}), InputError);
  CHECK_THROWS_AS(partial_trace(r, {0, 1, 2}), InputError);
}

TEST_CASE("lattice graphs") {
  auto c2 = LatticeGraph::chain(2, true);
  CHECK(c2.edges.size() == 1);
  auto c4 = LatticeGraph::chain(4, true);
  CHECK(c4.edges.size() == 4);
  auto sq = LatticeGraph::square(2, 2);
  CHECK(sq.edges.size() == 4);
  CHECK(sq.coordination(0) == 2);
  auto sq3 = LatticeGraph::square(3, 3);
  CHECK(sq3.coordination(4) == 4);
  CHECK_THROWS_AS(LatticeGraph::custom(3, {{0, 0}}), InputError);
  CHECK_THROWS_AS(LatticeGraph::custom(3, {{0, 3}}), InputError);
  CHECK_THROWS_AS(LatticeGraph::custom(3, {{0, 1}, {1, 0}}), InputError);
}

TEST_CASE("operators validate dimensions and hermiticity") {
  Basis b(2, LocalBasis::spin_half());
  CHECK_THROWS_AS(Operator(Mat::Identity(3, 3), b), InputError);
  Operator sp = embed(local_operator(b[0], "sp"), 0, b);
  CHECK_THROWS_AS(sp.assert_hermitian(), InputError);
  CHECK_NOTHROW((sp + sp.adjoint()).assert_hermitian());
  CHECK_THROWS_AS(LocalBasis::boson(0).validate(), InputError);
}

TEST_CASE("boson top level population") {
  Basis b = {LocalBasis::boson(3)};
  Vec v = Vec::Zero(4);
  v[3] = 0.6;
  v[0] = 0.8;
  CHECK(top_level_population(v, b, 0) == doctest::Approx(0.36));
  CHECK(top_level_population(projector(v, b), 0) == doctest::Approx(0.36));
}
