#include <doctest.h>

#include "oqs/liouville.hpp"
#include "oqs/semiclassics.hpp"

#include <cmath>
#include <numbers>

using namespace oqs;

namespace {

OdeOptions tight() {
  OdeOptions o;
  o.rtol = 1e-11;
  o.atol = 1e-13;
  return o;
}

Mat spin_state(double theta, double phi) {
  Vec v(2);
  v << std::cos(theta / 2), std::exp(I1 * phi) * std::sin(theta / 2);
  return v * v.adjoint();
}

double expect(const Mat& op, const Mat& rho) { return (op * rho).trace().real(); }

}  // namespace

TEST_CASE("local_model splits catalog models by support") {
  auto m = build_model("xyz", {{"n_sites", 3}, {"hz", 0.3}});
  auto lm = local_model(m);
  CHECK(lm.pairs.size() == 2);
  for (int i = 0; i < 3; ++i) CHECK(lm.jumps[i].size() == 1);
  Mat sz = local_operator(LocalBasis::spin_half(), "sz").matrix;
  CHECK((lm.h_site[1] - 0.3 * sz).norm() < 1e-12);

  CHECK_THROWS_AS(local_model(build_model("hardcore_loss", {{"n_sites", 4}})), InputError);

  ModelSpec three = build_model("xyz", {{"n_sites", 3}});
  Mat sx = local_operator(LocalBasis::spin_half(), "sx").matrix;
  three.hamiltonian_terms.push_back({1.0, product({{0, sx}, {1, sx}, {2, sx}}, three.basis), "triple"});
  CHECK_THROWS_AS(local_model(three), InputError);
}

TEST_CASE("gutzwiller: decoupled sites follow the exact single-site evolution") {
  Params p{{"Jx", 0}, {"Jy", 0}, {"Jz", 0}, {"hx", 0.7}, {"hz", -0.4}, {"gamma", 0.3}, {"n_sites", 3}};
  auto m = build_model("xyz", p);
  std::vector<Mat> r0 = {spin_state(0.3, 0.1), spin_state(1.2, -0.5), spin_state(2.5, 2.0)};
  auto t = linspace(0, 5, 11);
  auto gw = gutzwiller_evolve(m, r0, t, tight());

  auto single = build_model("xyz", {{"Jx", 0}, {"Jy", 0}, {"Jz", 0}, {"hx", 0.7}, {"hz", -0.4}, {"gamma", 0.3}, {"n_sites", 1}});
  auto l = vectorize(single);
  for (int i = 0; i < 3; ++i) {
    auto ex = evolve(l, Operator(r0[i], single.basis), t, tight());
    for (size_t k = 0; k < t.size(); ++k) CHECK((gw[k].rho[i] - ex.states[k].matrix).norm() < 1e-8);
  }
}

TEST_CASE("gutzwiller: per-site trace and Hermiticity, uniform states stay uniform") {
  auto m = build_model("xyz", {{"Jx", 0.9}, {"Jy", 1.2}, {"Jz", 1.0}, {"n_sites", 5}, {"periodic", 1}});
  std::vector<Mat> r0(5, spin_state(2.0, 0.4));
  auto res = gutzwiller_evolve(m, r0, linspace(0, 6, 13), tight());
  for (const auto& st : res)
    for (int i = 0; i < 5; ++i) {
      CHECK(std::abs(st.rho[i].trace() - 1.0) < 1e-10);
      CHECK((st.rho[i] - st.rho[i].adjoint()).norm() < 1e-10);
      CHECK((st.rho[i] - st.rho[0]).norm() < 1e-9);
    }
}

TEST_CASE("gutzwiller reproduces the XYZ magnetization equations") {
  // catalog couplings are twice the mean-field J's
  const double jx = 0.9, jy = 1.4, jz = 1.0, g = 1.0;
  auto m = build_model("xyz", {{"Jx", jx / 2}, {"Jy", jy / 2}, {"Jz", jz / 2}, {"gamma", g}, {"n_sites", 4}, {"periodic", 1}});
  Mat r = spin_state(2.6, 0.7);
  auto t = linspace(0, 4, 9);
  auto gw = gutzwiller_evolve(m, std::vector<Mat>(4, r), t, tight());
  const LocalBasis s = LocalBasis::spin_half();
  Mat sx = local_operator(s, "sx").matrix, sy = local_operator(s, "sy").matrix, sz = local_operator(s, "sz").matrix;
  RVec s0(3);
  s0 << expect(sx, r), expect(sy, r), expect(sz, r);
  auto mf = xyz_meanfield({jx, jy, jz, g, 2.0}, s0, t, tight());
  for (size_t k = 0; k < t.size(); ++k) {
    CHECK(std::abs(expect(sx, gw[k].rho[2]) - mf[k](0)) < 1e-8);
    CHECK(std::abs(expect(sy, gw[k].rho[2]) - mf[k](1)) < 1e-8);
    CHECK(std::abs(expect(sz, gw[k].rho[2]) - mf[k](2)) < 1e-8);
  }
}

TEST_CASE("gutzwiller Dicke: the cavity settles into the coherent state -phi/(omega_c - i kappa/2)") {
  const double g = 1.0, wc = 1.0, kappa = 1.0;
  auto m = build_model("dicke", {{"omega_c", wc}, {"epsilon", 1}, {"g", g}, {"n_emitters", 2}, {"kappa", kappa},
                                 {"gamma_minus", 0.1}, {"cutoff", 20}});
  const int d0 = m.basis[0].dim;
  Vec c = Vec::Zero(d0);
  c(0) = 0.8;
  c(1) = 0.6;
  Vec sp(2);
  sp << std::sqrt(0.3), std::sqrt(0.7);
  std::vector<Mat> r0 = {c * c.adjoint(), sp * sp.adjoint(), sp * sp.adjoint()};
  auto res = gutzwiller_evolve(m, r0, {0, 200}, tight());
  const auto& rf = res.back().rho;
  Mat a = local_operator(m.basis[0], "a").matrix;
  Mat sx = local_operator(m.basis[1], "sx").matrix;
  cd alpha = (a * rf[0]).trace();
  double phi = g * (expect(sx, rf[1]) + expect(sx, rf[2]));
  cd z = -phi / (wc - 0.5 * I1 * kappa);
  CHECK(std::abs(alpha) > 0.5);  // superradiant branch, not the trivial vacuum
  CHECK(std::abs(alpha - z) < 1e-6);
  CHECK(std::abs(expect(a.adjoint() * a, rf[0]) - std::norm(alpha)) < 1e-8);
}

TEST_CASE("xyz mean field: critical coupling and ordered fixed point") {
  const double jc = xyz_critical(0.9, 1.0, 1.0, 4.0);
  // closed form from the 2x2 linearization around the down state
  CHECK(jc == doctest::Approx(1.0 + 1.0 / (4 * 16 * 0.1)).epsilon(1e-6));
  CHECK(jc > 0.9);
  CHECK(xyz_stability({0.9, jc - 1e-3, 1.0, 1.0, 4.0}) < 0);
  CHECK(xyz_stability({0.9, jc + 1e-3, 1.0, 1.0, 4.0}) > 0);

  RVec s0(3);
  s0 << 0.01, 0.01, -0.9998;
  auto below = xyz_meanfield({0.9, 1.1, 1.0, 1.0, 4.0}, s0, {0, 400});
  CHECK(std::hypot(below.back()(0), below.back()(1)) < 1e-6);
  XyzMeanField above{0.9, 1.3, 1.0, 1.0, 4.0};
  auto up = xyz_meanfield(above, s0, {0, 400});
  CHECK(std::hypot(up.back()(0), up.back()(1)) > 0.3);
  CHECK(xyz_meanfield_rhs(above, up.back()).norm() < 1e-7);
  Eigen::EigenSolver<RMat> es(xyz_jacobian(above, up.back()), false);
  CHECK(es.eigenvalues().real().maxCoeff() < 0);

  CHECK_THROWS_AS(xyz_critical(0.9, 1.0, 1.0, 4.0, 0.0, 1.1), NumericalError);
}

TEST_CASE("xyz mean field: Jx = Jy keeps the down state stationary and stable") {
  RVec down(3);
  down << 0, 0, -1;
  for (double jz : {-2.0, 0.0, 0.5, 3.0}) {
    XyzMeanField p{0.7, 0.7, jz, 1.0, 4.0};
    CHECK(xyz_meanfield_rhs(p, down).norm() == 0.0);
    CHECK(xyz_stability(p) == doctest::Approx(-0.5));
  }
}

TEST_CASE("xyz per-site mode agrees with the uniform ansatz on a ring") {
  XyzMeanField p{0.9, 2.0, 1.0, 1.0, 2.0};
  RVec one(3);
  one << 0.05, -0.02, -0.99;
  RVec all(12);
  for (int i = 0; i < 4; ++i) all.segment(3 * i, 3) = one;
  auto t = linspace(0, 30, 7);
  auto sites = xyz_meanfield(p, LatticeGraph::chain(4, true), all, t, tight());
  auto uni = xyz_meanfield(p, one, t, tight());
  for (size_t k = 0; k < t.size(); ++k)
    for (int i = 0; i < 4; ++i) CHECK((sites[k].segment(3 * i, 3) - uni[k]).norm() < 1e-8);
  CHECK(std::abs(uni.back()(0)) > 0.1);
}

TEST_CASE("btc: relaxation, invariants and fixed points") {
  const double kappa = 1.0, w = 0.5;
  RVec s0(3);
  s0 << 0.3, 0.2, -std::sqrt(1 - 0.13);
  auto t = linspace(0, 40, 801);
  auto tr = btc_dynamics(w, kappa, 1.0, s0, t, tight());
  RVec star(3);
  star << 0, 0.5, -std::sqrt(0.75);
  CHECK((tr.back() - star).norm() < 1e-8);
  std::vector<double> x, y;
  for (size_t i = 0; i < t.size(); ++i)
    if (t[i] > 10 && t[i] < 25) {
      x.push_back(t[i]);
      y.push_back(std::log((tr[i] - star).norm()));
    }
  CHECK(-linear_fit(x, y).first == doctest::Approx(kappa * std::sqrt(0.75)).epsilon(0.01));
  CHECK(btc_relaxation_rate(w, kappa) == doctest::Approx(std::sqrt(0.75)));

  const double m0 = btc_invariant(w, kappa, 1.0, s0);
  for (const auto& s : tr) {
    CHECK(std::abs(s.norm() - 1.0) < 1e-8);
    if (std::abs(s(1) - w) > 1e-2) CHECK(std::abs(btc_invariant(w, kappa, 1.0, s) - m0) < 1e-8);
  }

  auto fp = btc_fixed_points(0.5);
  REQUIRE(fp.size() == 2);
  CHECK(fp[0].kind == FixedPointKind::Stable);
  CHECK(fp[1].kind == FixedPointKind::Unstable);
  for (int i = 0; i < 2; ++i) CHECK(fp[0].eigenvalues[i].real() == doctest::Approx(-std::sqrt(0.75)));

  for (const auto& f : btc_fixed_points(1.5)) {
    CHECK(f.kind == FixedPointKind::Oscillatory);
    CHECK(btc_rhs(1.5, 1.0, 1.0, f.s).norm() < 1e-12);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(f.eigenvalues[i].real()) < 1e-9);
      CHECK(std::abs(f.eigenvalues[i].imag()) == doctest::Approx(std::sqrt(1.5 * 1.5 - 1)));
    }
  }
  CHECK_THROWS_AS(btc_dynamics(w, kappa, 1.0, (RVec(3) << 1, 1, 0).finished(), t), InputError);
}

TEST_CASE("btc: classification is invariant under rescaling kappa and omega0") {
  for (double eta : {0.2, 0.5, 0.9, 1.2, 3.0}) {
    auto a = btc_fixed_points(eta, 1.0);
    for (double c : {0.1, 7.0}) {
      auto b = btc_fixed_points(eta, c);
      REQUIRE(a.size() == b.size());
      for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].kind == b[i].kind);
        CHECK((a[i].s - b[i].s).norm() < 1e-12);
        for (int k = 0; k < 2; ++k) CHECK(std::abs(b[i].eigenvalues[k] - c * a[i].eigenvalues[k]) < 1e-10);
      }
    }
  }
  // the dimensionless dynamics agree after t -> t / c
  RVec s0(3);
  s0 << 0.1, 0.6, std::sqrt(1 - 0.37);
  auto r1 = btc_dynamics(0.5, 1.0, 1.0, s0, {0, 3}, tight());
  auto r2 = btc_dynamics(2.0, 4.0, 1.0, s0, {0, 0.75}, tight());
  CHECK((r1.back() - r2.back()).norm() < 1e-9);
}

TEST_CASE("bogoliubov dispersion") {
  std::vector<double> k = {0.0, 0.01, 0.5, 1.0, 3.0};
  auto [p0, m0] = bogoliubov_dispersion(1.0, 1.0, 0.0, k);
  for (size_t i = 0; i < k.size(); ++i) {
    const double e = k[i] * k[i] / 2;
    CHECK(std::abs(p0[i] - std::sqrt(e * (e + 2))) < 1e-14);
    CHECK(std::abs(m0[i] + std::sqrt(e * (e + 2))) < 1e-14);
  }
  const double mu = 1.0, m = 0.5, kap = 0.4;
  auto [p, mi] = bogoliubov_dispersion(mu, m, kap, {1e-3});
  CHECK(std::abs(p[0].real()) < 1e-15);
  CHECK(std::abs(mi[0].real()) < 1e-15);
  CHECK(p[0].imag() == doctest::Approx(-bogoliubov_diffusion(mu, m, kap) * 1e-6).epsilon(1e-4));
  const double kep = bogoliubov_exceptional_k(mu, m, kap);
  auto [pe, me] = bogoliubov_dispersion(mu, m, kap, {kep});
  CHECK(std::abs(pe[0] - me[0]) < 1e-6);
  auto [pa, ma] = bogoliubov_dispersion(mu, m, kap, {1.1 * kep});
  CHECK(pa[0].real() > 0);
  CHECK(pa[0].imag() == doctest::Approx(-kap));
}

TEST_CASE("weak losses follow n0 / (1 + 2 kappa2 n0 t)") {
  RVec nk(16);
  for (int j = 0; j < 16; ++j) nk(j) = std::exp(-0.2 * j);
  auto t = logspace(0.1, 1e4, 41);
  t.insert(t.begin(), 0.0);
  auto r = weak_loss_evolve(nk, 0.5, t, tight());
  const double n0 = nk.mean();
  for (size_t i = 0; i < t.size(); ++i) {
    CHECK(r.density[i] == doctest::Approx(weak_loss_density(n0, 0.5, t[i])).epsilon(1e-6));
    RVec shape = r.nk[i].cwiseQuotient(nk);
    CHECK(shape.maxCoeff() - shape.minCoeff() < 1e-8);
  }
  CHECK(weak_loss_density(1.0, 0.5, 1.0) == doctest::Approx(0.5));
  std::vector<double> x, y;
  for (size_t i = 1; i < t.size(); ++i)
    if (t[i] >= 100) {
      x.push_back(std::log(t[i]));
      y.push_back(std::log(r.density[i]));
    }
  CHECK(linear_fit(x, y).first == doctest::Approx(-1.0).epsilon(0.02));
  // implied g2(0) = -dn/dt / (2 kappa2 n^2) = 1 by construction of the closed form
  const double h = 1e-4, tm = 3.0;
  const double dn = (weak_loss_density(n0, 0.5, tm + h) - weak_loss_density(n0, 0.5, tm - h)) / (2 * h);
  CHECK(-dn / (2 * 0.5 * std::pow(weak_loss_density(n0, 0.5, tm), 2)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("zeno rate") {
  CHECK(zeno_rate(1, 1, 2) == doctest::Approx(0.5));
  CHECK(zeno_rate(0.3, 0, 5) == doctest::Approx(2 * 0.09 / 5));
  double prev = zeno_rate(1, 0.5, 1.01);
  for (double g = 1.5; g < 1e4; g *= 1.5) {
    double r = zeno_rate(1, 0.5, g);
    CHECK(r < prev);
    prev = r;
  }
  CHECK(zeno_rate(1, 1, 1e9) < 1e-8);
  CHECK_THROWS_AS(zeno_rate(-1, 1, 1), InputError);
}

TEST_CASE("strong losses: t^-1/2 decay and double-peaked rapidities") {
  auto t = logspace(10, 1000, 31);
  t.insert(t.begin(), 0.0);
  auto r = strong_loss_evolve(RVec::Ones(64), 1.0, t, tight());
  std::vector<double> x, y;
  for (size_t i = 1; i < t.size(); ++i) {
    x.push_back(std::log(t[i]));
    y.push_back(std::log(r.density[i]));
  }
  CHECK(linear_fit(x, y).first == doctest::Approx(-0.5).epsilon(0.1));
  for (size_t i = 1; i < t.size(); ++i) {
    CHECK(r.density[i] <= r.density[i - 1] + 1e-15);
    CHECK((r.nk[i].array() <= r.nk[i - 1].array() + 1e-15).all());
    CHECK((r.nk[i].array() >= 0).all());
  }
  const RVec& last = r.nk.back();
  // maxima at k = 0 (index 0) and k = pi (index 32)
  CHECK(last(0) == doctest::Approx(last.maxCoeff()));
  CHECK(last(32) == doctest::Approx(last.maxCoeff()));
  CHECK(last(16) < 1e-3 * last(0));

  auto frozen = strong_loss_evolve(RVec::Constant(8, 0.4), 0.0, {0, 10});
  CHECK((frozen.nk.back().array() == 0.4).all());
  CHECK_THROWS_AS(strong_loss_evolve(RVec::Constant(4, 1.5), 1.0, {0, 1}), InputError);
}

TEST_CASE("two-site dephasing: anomalous diffusion in Fock space") {
  auto taus = logspace(1e-6, 1e-4, 21);
  auto r = twosite_dephasing(80, taus);
  std::vector<double> x, yp, yc;
  for (size_t i = 0; i < taus.size(); ++i) {
    CHECK(std::abs(r.norm[i] - 1.0) < 1e-10);
    CHECK((r.rho[i].array() >= 0).all());
    x.push_back(std::log(taus[i]));
    yp.push_back(std::log(r.p[i].maxCoeff()));
    yc.push_back(std::log(r.coherence[i]));
  }
  CHECK(std::abs(linear_fit(x, yp).first + 0.25) < 0.03);
  CHECK(std::abs(linear_fit(x, yc).first + 0.5) < 0.05);

  const double tau = 1e-3;
  auto one = twosite_dephasing(80, {tau});
  double err = 0, peak = 0;
  for (int i = 0; i < one.s.size(); ++i)
    if (std::abs(one.s(i)) <= 2 * std::pow(tau, 0.25)) {
      const double sc = twosite_scaling_profile(one.s(i), tau);
      err = std::max(err, std::abs(one.p[0](i) - sc));
      peak = std::max(peak, sc);
    }
  CHECK(err / peak < 0.1);

  // the scaling profile is normalized
  double integral = 0;
  for (double s = -3; s <= 3; s += 1e-4) integral += twosite_scaling_profile(s, 0.01) * 1e-4;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(twosite_dephasing(81, {0.1}), InputError);
}

TEST_CASE("semiclassics export") {
  auto csv = table_csv({"t", "n"}, {{0, 1}, {0.5, 0.25}});
  CHECK(csv == "t,n\n0,1\n0.5,0.25\n");
  CHECK_THROWS_AS(table_csv({"t"}, {{0, 1}}), InputError);
  auto r = weak_loss_evolve(RVec::Ones(2), 1.0, {0, 1});
  auto m = momentum_csv(r);
  CHECK(m.rfind("t,k,nk\n0,0,1\n", 0) == 0);
  auto js = btc_fixed_points_json(btc_fixed_points(0.5));
  CHECK(js.find("\"stable\"") != std::string::npos);
  CHECK(js.find("\"unstable\"") != std::string::npos);
}
