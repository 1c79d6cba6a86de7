#include <doctest.h>

#include "oqs/liouville.hpp"
#include "oqs/models.hpp"

#include <random>

using namespace oqs;

TEST_CASE("every catalog entry builds with defaults") {
  for (const auto& name : catalog_names()) {
    CAPTURE(name);
    ModelSpec m = build_model(name);
    CHECK_NOTHROW(m.validate());
    CHECK(m.hamiltonian().is_hermitian(1e-12));
    for (const auto& j : m.jump_terms) CHECK(j.rate >= 0.0);
    if (!m.jump_terms.empty()) {
      RVec w = eigvalsh(parent_hamiltonian(m).matrix);
      CHECK(w.minCoeff() >= -1e-10);
    }
  }
}

TEST_CASE("catalog errors") {
  CHECK_THROWS_AS(build_model("nope"), InputError);
  CHECK_THROWS_AS(build_model("xyz", {{"bogus", 1.0}}), InputError);
  CHECK_THROWS_AS(build_model("xyz", {{"gamma", -1.0}}), InputError);
  CHECK_THROWS_AS(build_model("bec_engineering", {{"N", 3}, {"cutoff", 2}}), InputError);
  CHECK_THROWS_AS(build_model("single_mode", {{"cutoff", 1.5}}), InputError);
}

TEST_CASE("xyz on a 2x2 square") {
  ModelSpec m = build_model("xyz", {{"Jx", 0.9}, {"Jz", 1.0}, {"gamma", 1.0}, {"lx", 2}, {"ly", 2}});
  CHECK(m.jump_terms.size() == 4);
  CHECK(m.hamiltonian_terms.size() == 12);
}

TEST_CASE("single mode jumps") {
  ModelSpec m = build_model("single_mode", {{"kappa_minus", 0.7}, {"kappa_plus", 0.0}, {"cutoff", 5}});
  REQUIRE(m.jump_terms.size() == 1);
  Mat a = local_operator(LocalBasis::boson(5), "a").matrix;
  CHECK((m.jump_terms[0].op.matrix - std::sqrt(0.7) * a).norm() < 1e-14);
  Operator ph = parent_hamiltonian(m);
  CHECK((ph.matrix - 0.7 * local_operator(LocalBasis::boson(5), "n").matrix).norm() < 1e-14);
}

TEST_CASE("btc at N = 2") {
  ModelSpec m = build_model("btc", {{"N", 2}, {"omega0", 0.3}, {"kappa", 0.8}});
  CHECK(m.dim() == 3);
  Mat sx = local_operator(LocalBasis::collective(2), "Sx").matrix;
  Mat sm = local_operator(LocalBasis::collective(2), "Sm").matrix;
  CHECK((m.hamiltonian().matrix - 0.3 * sx).norm() < 1e-14);
  REQUIRE(m.jump_terms.size() == 1);
  CHECK((m.jump_terms[0].op.matrix - std::sqrt(0.8 / 1.0) * sm).norm() < 1e-14);
}

TEST_CASE("xyz at Jx = Jy conserves total sigma^z under H") {
  ModelSpec m = build_model("xyz", {{"Jx", 0.7}, {"Jy", 0.7}, {"Jz", 1.3}, {"n_sites", 4}});
  Mat mz = Mat::Zero(m.dim(), m.dim());
  for (int i = 0; i < 4; ++i) mz += embed(local_operator(m.basis[i], "sz"), i, m.basis).matrix;
  Mat h = m.hamiltonian().matrix;
  CHECK((h * mz - mz * h).norm() < 1e-12);
}

TEST_CASE("bec jumps annihilate the condensate") {
  for (int L = 2; L <= 4; ++L)
    for (int N = 1; N <= 4; ++N) {
      CAPTURE(L);
      CAPTURE(N);
      ModelSpec m = build_model("bec_engineering", {{"n_sites", L}, {"N", N}});
      Vec psi = bec_state(m.basis, N);
      CHECK(psi.norm() == doctest::Approx(1.0));
      for (const auto& j : m.jump_terms) CHECK((j.op.matrix * psi).norm() < 1e-10);
      Operator ph = parent_hamiltonian(m);
      CHECK((ph.matrix * psi).norm() < 1e-10);
    }
}

TEST_CASE("dissipative computation stationary state") {
  const int n = 2, T = 2;
  auto gates = random_circuit(n, T, 11);
  for (const auto& u : gates) CHECK((u.adjoint() * u - Mat::Identity(4, 4)).norm() < 1e-12);
  ModelSpec m = build_dissipative_computation(n, gates);
  CHECK(m.basis.back().dim == T + 1);
  Operator rho0 = dissipative_computation_rho0(n, gates);
  CHECK(std::abs(rho0.trace() - 1.0) < 1e-14);
  CHECK(lindblad_apply(m, rho0).matrix.norm() < 1e-10);
}

TEST_CASE("absorbing model all-down state is dark") {
  ModelSpec m = build_model("absorbing", {{"Omega", 0.8}, {"gamma", 0.4}, {"kappa", 1.3}, {"n_sites", 3}});
  Vec dn = basis_vector(2, 1);
  Vec psi = product_state({dn, dn, dn});
  for (const auto& j : m.jump_terms) CHECK((j.op.matrix * psi).norm() < 1e-14);
  CHECK((m.hamiltonian().matrix * psi).norm() < 1e-14);
}

TEST_CASE("kerr scaling and semiclassical roots") {
  auto roots = kerr_semiclassical_densities(10, 10, 2, 1);
  CHECK(roots.size() == 3);
  for (double x : roots) {
    double lhs = x * ((10 - 10 * x) * (10 - 10 * x) + 0.25);
    CHECK(lhs == doctest::Approx(4.0).epsilon(1e-10));
  }
  CHECK(kerr_semiclassical_densities(10, 10, 0.3, 1).size() == 1);
  ModelSpec m = build_model("kerr", {{"N", 4}, {"F_tilde", 2}});
  CHECK(m.params.at("cutoff") >= std::ceil(6 * roots.back() * 4) - 1e-9);
}

TEST_CASE("strong dephasing generator") {
  Operator k = strong_dephasing_k(LatticeGraph::chain(4), 1.0, 10.0);
  RVec w = eigvalsh(k.matrix);
  CHECK(w.minCoeff() > -1e-12);
  int zeros = 0;
  for (double x : w) zeros += std::abs(x) < 1e-12;
  CHECK(zeros == 5);  // fully symmetric multiplet, S = 2
  // one-magnon gap of an open ferromagnetic chain: 2W(1 - cos(pi/N)), W = J^2/(8 gamma)
  double gap = 1e9;
  for (double x : w)
    if (x > 1e-12) gap = std::min(gap, x);
  CHECK(gap == doctest::Approx(2.0 / 80.0 * (1 - std::cos(M_PI / 4))).epsilon(1e-10));
}

TEST_CASE("json round trip") {
  for (const char* name : {"xyz", "kerr", "dissipative_computation", "btc"}) {
    ModelSpec m = build_model(name);
    ModelSpec r = model_from_json(to_json(m));
    CHECK(r.name == m.name);
    CHECK(r.graph == m.graph);
    CHECK(r.basis == m.basis);
    CHECK(r.params == m.params);
    CHECK(r.hamiltonian_terms.size() == m.hamiltonian_terms.size());
    CHECK(r.jump_terms.size() == m.jump_terms.size());
    CHECK((r.hamiltonian().matrix - m.hamiltonian().matrix).norm() == 0.0);
    for (size_t k = 0; k < m.jump_terms.size(); ++k) {
      CHECK(r.jump_terms[k].rate == m.jump_terms[k].rate);
      CHECK((r.jump_terms[k].op.matrix - m.jump_terms[k].op.matrix).norm() == 0.0);
    }
    CHECK(to_json(r) == to_json(m));
  }
}
