#include <doctest.h>

#include "oqs/liouville.hpp"

#include <algorithm>
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

Operator random_density(const Basis& b, std::mt19937_64& g) {
  int d = total_dim(b);
  Mat m = random_matrix(d, g);
  Mat r = m * m.adjoint();
  return {r / r.trace(), b};
}

double expect(const Operator& rho, const Mat& o) { return (rho.matrix * o).trace().real(); }

// every value of a has a partner in b within tol (and sizes equal)
bool same_set(std::vector<cd> a, std::vector<cd> b, double tol) {
  if (a.size() != b.size()) return false;
  for (auto x : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](cd p, cd q) { return std::abs(p - x) < std::abs(q - x); });
    if (std::abs(*it - x) > tol) return false;
    b.erase(it);
  }
  return true;
}

std::vector<cd> to_vec(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("vectorize agrees with direct application") {
  std::mt19937_64 g(1);
  std::vector<ModelSpec> models = {
      build_model("xyz", {{"n_sites", 3}, {"hx", 0.3}}),
      build_model("single_mode", {{"kappa_plus", 0.3}, {"cutoff", 6}}),
      build_model("bose_hubbard", {{"gamma_phi", 0.4}, {"kappa_loss", 0.2}, {"m", 2}, {"cutoff", 3}}),
      build_model("absorbing", {{"n_sites", 3}}),
      build_model("btc", {{"N", 6}, {"omega_x", 0.2}}),
  };
  for (const auto& m : models) {
    CAPTURE(m.name);
    SuperOperator l = vectorize(m);
    for (int k = 0; k < 10; ++k) {
      Operator rho(random_matrix(m.dim(), g), m.basis);
      Mat direct = lindblad_apply(m, rho).matrix;
      Mat via = l.apply(rho).matrix;
      CHECK((direct - via).norm() < 1e-12 * std::max(1.0, direct.norm()));
      CHECK(std::abs(via.trace()) < 1e-10 * rho.matrix.norm());  // trace preservation
      Operator rd(rho.matrix.adjoint(), m.basis);
      CHECK((l.apply(rd).matrix - via.adjoint()).norm() < 1e-12 * std::max(1.0, via.norm()));
    }
    // trace functional is a left null vector
    Vec one = vec(Mat::Identity(m.dim(), m.dim()));
    Vec row = l.matrix.adjoint() * one;
    CHECK(row.norm() < 1e-10);
  }
}

TEST_CASE("Hamiltonian-only spectrum is -i(Ea - Eb)") {
  ModelSpec m = build_model("xyz", {{"n_sites", 2}, {"gamma", 0.0}, {"hz", 0.37}});
  SuperOperator l = vectorize(m);
  RVec e = eigvalsh(m.hamiltonian().matrix);
  std::vector<cd> expected;
  for (int a = 0; a < e.size(); ++a)
    for (int b = 0; b < e.size(); ++b) expected.push_back(-I1 * (e[a] - e[b]));
  SpectralData s = spectrum(l, false);
  CHECK(same_set(to_vec(s.values), expected, 1e-10));
}

TEST_CASE("single decaying mode spectrum and adr") {
  const double w = 1.3, k = 0.6;
  ModelSpec m = build_model("single_mode", {{"omega_c", w}, {"kappa_minus", k}, {"cutoff", 4}});
  SpectralData s = spectrum(vectorize(m));
  std::vector<cd> expected;
  for (int mu = 0; mu <= 4; ++mu)
    for (int nu = 0; nu <= 4; ++nu) expected.push_back(cd(-0.5 * k * (mu + nu), -w * (mu - nu)));
  CHECK(same_set(to_vec(s.values), expected, 1e-10));
  CHECK(adr(s) == doctest::Approx(k / 2).epsilon(1e-10));
  CHECK(kernel_count(s) == 1);
  CHECK(std::abs(s.values[0]) < 1e-12);
}

TEST_CASE("spectral invariants") {
  std::mt19937_64 g(5);
  std::vector<ModelSpec> models = {build_model("xyz", {{"n_sites", 3}}), build_model("ising", {{"n_sites", 3}, {"gamma_plus", 0.3}}),
                                   build_model("single_mode", {{"kappa_plus", 0.2}, {"cutoff", 8}})};
  for (const auto& m : models) {
    CAPTURE(m.name);
    SpectralData s = spectrum(vectorize(m));
    CHECK(s.values.real().maxCoeff() <= 1e-8);
    CHECK(kernel_count(s) == 1);
    CHECK(s.defect < 1e-8);
    // conjugate pairs
    std::vector<cd> v = to_vec(s.values), vc;
    for (auto x : v) vc.push_back(std::conj(x));
    CHECK(same_set(v, vc, 1e-8));
    for (int mu = 1; mu < s.size(); ++mu) CHECK(std::abs(s.right_mode(mu).trace()) < 1e-8);
  }
}

TEST_CASE("spectrum of the quadratic mode depends only on kappa_minus - kappa_plus") {
  auto vals = [](double km, double kp) {
    ModelSpec m = build_model("single_mode", {{"kappa_minus", km}, {"kappa_plus", kp}, {"cutoff", 30}});
    return spectrum(vectorize(m), false).values;
  };
  Vec a = vals(1.0, 0.2), b = vals(1.3, 0.5);
  // low-lying part only: truncation distorts the top of the spectrum
  int matched = 0;
  for (auto x : a) {
    if (x.real() < -1.9) continue;
    double best = 1e9;
    for (auto y : b) best = std::min(best, std::abs(x - y));
    CHECK(best < 1e-6);
    ++matched;
  }
  CHECK(matched == 15);  // mu + nu <= 4
}

TEST_CASE("evolve: decaying mode") {
  const double k = 0.8;
  ModelSpec m = build_model("single_mode", {{"kappa_minus", k}, {"cutoff", 3}});
  Operator rho0 = projector(basis_vector(4, 1), m.basis);
  auto grid = linspace(0, 3, 7);
  auto r = evolve(vectorize(m), rho0, grid);
  Mat n = local_operator(m.basis[0], "n").matrix;
  for (size_t i = 0; i < grid.size(); ++i) CHECK(expect(r.states[i], n) == doctest::Approx(std::exp(-k * grid[i])).epsilon(1e-8));
  CHECK_FALSE(r.positivity_violated);
  CHECK_THROWS_AS(evolve(vectorize(m), Operator(2.0 * rho0.matrix, m.basis), grid), InputError);
}

TEST_CASE("evolve: XX chain with dephasing") {
  const double gamma = 0.3;
  ModelSpec m = build_model("xx_dephasing", {{"n_sites", 4}, {"J", 1.0}, {"gamma", gamma}});
  Vec up = basis_vector(2, 0), dn = basis_vector(2, 1);
  Vec psi = (product_state({up, dn, up, dn}) + product_state({dn, up, up, dn})) / std::sqrt(2.0);
  Operator rho0 = projector(psi, m.basis);
  auto grid = linspace(0, 2, 5);
  auto r = evolve(vectorize(m), rho0, grid);
  Mat mz = Mat::Zero(16, 16), A = Mat::Zero(16, 16);
  for (int i = 0; i < 4; ++i) mz += embed(local_operator(m.basis[i], "sz"), i, m.basis).matrix;
  for (int i = 0; i + 1 < 4; ++i) {
    Mat t = product({{i, local_operator(m.basis[i], "sp").matrix}, {i + 1, local_operator(m.basis[i], "sm").matrix}}, m.basis).matrix;
    A += t + t.adjoint();
  }
  const double a0 = expect(rho0, A);
  CHECK(std::abs(a0) > 0.5);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(expect(r.states[i], mz) - expect(rho0, mz)) < 1e-8);
    CHECK(expect(r.states[i], A) == doctest::Approx(a0 * std::exp(-4 * gamma * grid[i])).epsilon(1e-7));
  }
}

TEST_CASE("evolve agrees with the matrix exponential") {
  std::mt19937_64 g(9);
  ModelSpec m = build_model("single_mode", {{"kappa_plus", 0.3}, {"omega_c", 0.7}, {"cutoff", 2}});
  SuperOperator l = vectorize(m);
  Operator rho0 = random_density(m.basis, g);
  auto grid = linspace(0, 2, 5);
  auto r = evolve(l, rho0, grid);
  for (size_t i = 0; i < grid.size(); ++i)
    CHECK((r.states[i].matrix - propagate_expm(l, rho0, grid[i]).matrix).norm() < 1e-7);
}

TEST_CASE("steady state: pumped and decaying mode is thermal") {
  const double km = 1.0, kp = 0.35;
  ModelSpec m = build_model("single_mode", {{"kappa_minus", km}, {"kappa_plus", kp}, {"cutoff", 12}});
  SuperOperator l = vectorize(m);
  SteadyState ss = steady_state(l);
  CHECK(ss.kernel_dim == 1);
  CHECK(ss.residual < 1e-9 * l.matrix.norm());
  // detailed balance kappa_+ (n+1) p_n = kappa_- (n+1) p_{n+1}
  RVec p(13);
  p[0] = 1.0;
  for (int n = 0; n < 12; ++n) p[n + 1] = p[n] * kp * (n + 1) / (km * (n + 1));
  p /= p.sum();
  for (int n = 0; n <= 12; ++n) CHECK(ss.rho.matrix(n, n).real() == doctest::Approx(p[n]).epsilon(1e-9));
  Mat off = ss.rho.matrix;
  off.diagonal().setZero();
  CHECK(off.norm() < 1e-12);
}

TEST_CASE("steady state: dark states") {
  ModelSpec m = build_model("xyz", {{"Jx", 0.8}, {"Jy", 0.8}, {"Jz", 1.4}, {"n_sites", 3}});
  SteadyState ss = steady_state(vectorize(m));
  CHECK(ss.kernel_dim == 1);
  Vec dn = basis_vector(2, 1);
  Operator dark = projector(product_state({dn, dn, dn}), m.basis);
  CHECK((ss.rho.matrix - dark.matrix).norm() < 1e-8);

  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int k = 0; k < 3; ++k) {
    ModelSpec a = build_model("absorbing", {{"Omega", u(g)}, {"gamma", u(g)}, {"kappa", u(g)}, {"n_sites", 3}});
    Operator p = projector(product_state({dn, dn, dn}), a.basis);
    CHECK(lindblad_apply(a, p).matrix.norm() < 1e-12);
  }
}

TEST_CASE("steady state on the sparse path matches the dense path") {
  ModelSpec m = build_model("single_mode", {{"kappa_plus", 0.3}, {"cutoff", 10}});
  SuperOperator l = vectorize(m);
  SpectrumOptions o;
  o.max_dense = 10;
  SteadyState a = steady_state(l), b = steady_state(l, o);
  CHECK((a.rho.matrix - b.rho.matrix).norm() < 1e-9);
  SpectralData sm = slow_modes(l, 4);
  CHECK(std::abs(sm.values[0]) < 1e-9);
  CHECK(adr(sm) == doctest::Approx(adr(spectrum(l, false))).epsilon(1e-8));
}

TEST_CASE("btc: complex slow modes in the oscillating phase") {
  ModelSpec m = build_model("btc", {{"N", 10}, {"omega0", 1.5}, {"kappa", 1.0}});
  SpectralData s = spectrum(vectorize(m), false);
  CHECK(kernel_count(s) == 1);
  // an oscillating pair sits among the three slowest decaying modes
  bool complex_slow = false;
  for (int mu = 1; mu <= 3; ++mu) complex_slow = complex_slow || std::abs(s.values[mu].imag()) > 0.5;
  CHECK(complex_slow);
  ModelSpec below = build_model("btc", {{"N", 10}, {"omega0", 0.5}, {"kappa", 1.0}});
  SpectralData sb = spectrum(vectorize(below), false);
  CHECK(adr(sb) > adr(s));
}

TEST_CASE("weak symmetry sectors of the single mode") {
  ModelSpec m = build_model("single_mode", {{"kappa_plus", 0.2}, {"cutoff", 5}});
  SuperOperator l = vectorize(m);
  Operator n = local_operator(m.basis[0], "n");
  SectorDecomposition sec = symmetry_sectors(l, n);
  size_t total = 0;
  for (const auto& b : sec.blocks) total += b.indices.size();
  CHECK(total == 36);
  CHECK(sec.blocks.size() == 11);
  CHECK(sec.defect < 1e-14);
  SteadyState ss = steady_state(l);
  for (const auto& b : sec.blocks) {
    if (b.k == 0) continue;
    Vec v = vec(ss.rho.matrix);
    for (int i : b.indices) CHECK(std::abs(v[i]) < 1e-12);
  }
  SpectralData sd = spectrum_by_sectors(l, sec);
  CHECK(sd.size() == 36);
  CHECK(sd.sector[0] == 0);

  // charge not conserved: x quadrature drive breaks the symmetry
  Operator h = m.hamiltonian() + Operator(local_operator(m.basis[0], "a").matrix + local_operator(m.basis[0], "adag").matrix, m.basis);
  CHECK_THROWS_AS(symmetry_sectors(vectorize(h, m.jumps()), n), InputError);
}

TEST_CASE("sectors of Hamiltonian-only evolution are unitary") {
  ModelSpec m = build_model("xx_dephasing", {{"n_sites", 3}, {"gamma", 0.0}, {"h", 0.4}});
  SuperOperator l = vectorize(m);
  Operator q(Mat::Zero(8, 8), m.basis);
  for (int i = 0; i < 3; ++i) q = q + embed(local_operator(m.basis[i], "n"), i, m.basis);
  SectorDecomposition sec = symmetry_sectors(l, q);
  for (const auto& b : sec.blocks) {
    Vec v = eigvals(Mat(restrict_block(l, b.indices)));
    CHECK(v.real().cwiseAbs().maxCoeff() < 1e-10);
  }
  SectorDecomposition st = strong_symmetry_sectors(l, q);
  CHECK(st.blocks.size() == 16);
}

TEST_CASE("two-time correlations of the thermal mode") {
  const double w = 1.0, km = 1.0, kp = 0.2, kap = km - kp;
  ModelSpec m = build_model("single_mode", {{"omega_c", w}, {"kappa_minus", km}, {"kappa_plus", kp}, {"cutoff", 25}});
  SuperOperator l = vectorize(m);
  Operator rho = steady_state(l).rho;
  Operator a = local_operator(m.basis[0], "a"), ad = local_operator(m.basis[0], "adag");
  auto grid = linspace(0, 4, 9);
  auto c = two_time_correlation(l, rho, a, ad, grid);
  const double nbar = kp / kap;
  for (size_t i = 0; i < grid.size(); ++i) {
    cd expected = (nbar + 1) * std::exp(cd(-kap / 2 * grid[i], -w * grid[i]));
    CHECK(std::abs(c[i] - expected) < 1e-6);
  }
  // stationarity: evolving rho_ss first changes nothing
  Operator later = evolve(l, rho, {0.0, 1.0}).states.back();
  auto c2 = two_time_correlation(l, later, a, ad, grid);
  for (size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(c[i] - c2[i]) < 1e-8);
}

TEST_CASE("two-time correlation at zero delay") {
  std::mt19937_64 g(4);
  ModelSpec m = build_model("xyz", {{"n_sites", 2}});
  SuperOperator l = vectorize(m);
  Operator rho = steady_state(l).rho;
  Operator A(random_matrix(4, g), m.basis), B(random_matrix(4, g), m.basis);
  auto c = two_time_correlation(l, rho, A, B, {0.0});
  CHECK(std::abs(c[0] - (A.matrix * B.matrix * rho.matrix).trace()) < 1e-12);
}

TEST_CASE("fdt ratio of the thermal mode matches the Lorentzian closed form") {
  const double wc = 1.0, km = 1.0, kp = 0.2, kap = km - kp, g = kap / 2;
  ModelSpec m = build_model("single_mode", {{"omega_c", wc}, {"kappa_minus", km}, {"kappa_plus", kp}, {"cutoff", 20}});
  SuperOperator l = vectorize(m);
  Operator rho = steady_state(l).rho;
  Operator x(local_operator(m.basis[0], "a").matrix + local_operator(m.basis[0], "adag").matrix, m.basis);
  std::vector<double> ws = {0.5, 1.0, 2.0};
  FdtResult r = fdt_ratio(l, rho, x, ws);
  const double eta = (km + kp) / (km - kp);
  for (size_t i = 0; i < ws.size(); ++i) {
    const double w = ws[i];
    double A = g / (g * g + (w - wc) * (w - wc)), B = g / (g * g + (w + wc) * (w + wc));
    CHECK(r.s[i] == doctest::Approx(eta * (A + B)).epsilon(1e-4));
    CHECK(r.chi_im[i] == doctest::Approx(A - B).epsilon(1e-4));
    CHECK(r.ratio[i] == doctest::Approx(eta * (g * g + w * w + wc * wc) / (2 * w * wc)).epsilon(1e-4));
  }
  CHECK(r.tail_estimate < 1e-4);
  CHECK_THROWS_AS(fdt_ratio(l, rho, local_operator(m.basis[0], "a"), ws), InputError);
}

TEST_CASE("metastable split returns two density matrices") {
  ModelSpec m = build_model("kerr", {{"N", 3}, {"F_tilde", 1.6}});
  SpectralData s = spectrum(vectorize(m));
  REQUIRE(std::abs(s.values[1].imag()) < 1e-10);
  MetastableSplit sp = metastable_split(s);
  CHECK(sp.residual < 1e-6);
  for (const Operator* r : {&sp.lower, &sp.upper}) {
    CHECK(std::abs(r->trace() - 1.0) < 1e-12);
    CHECK(eigvalsh(r->matrix).minCoeff() > -1e-12);
  }
}

TEST_CASE("perturbative steady state") {
  Basis b = {LocalBasis::spin_half()};
  Operator sm = local_operator(b[0], "sm"), sx = local_operator(b[0], "sx");
  Operator zero(Mat::Zero(2, 2), b);
  SuperOperator l0 = vectorize(zero, {std::sqrt(1.0) * sm});
  SuperOperator l1 = vectorize(sx, {});
  SteadyState s0 = steady_state(l0);
  CHECK((perturbative_steady_state(l0, l1, 0.0, 2).matrix - s0.rho.matrix).norm() < 1e-12);

  // first-order coherence is linear in the drive, compare with the exact null space
  const double eps = 1e-3;
  Operator exact = steady_state(vectorize(eps * sx, {sm})).rho;
  Operator first = perturbative_steady_state(l0, l1, eps, 1);
  CHECK(std::abs(first.matrix(0, 1) - exact.matrix(0, 1)) < 10 * eps * eps);
  Operator first2 = perturbative_steady_state(l0, l1, 2 * eps, 1);
  CHECK(std::abs(first2.matrix(0, 1) - 2.0 * first.matrix(0, 1)) < 1e-12);

  // random two-spin perturbation: error / eps^3 bounded at order 2
  std::mt19937_64 g(8);
  ModelSpec m = build_model("ising", {{"n_sites", 2}, {"gamma_plus", 0.3}});
  SuperOperator L0 = vectorize(m);
  Mat hr = random_matrix(4, g);
  hr = hr + hr.adjoint();
  Operator jr(random_matrix(4, g) * 0.3, m.basis);
  SuperOperator L1 = vectorize(Operator(hr, m.basis), {jr});
  std::vector<double> ratios;
  for (double e : {1e-2, std::pow(10.0, -2.5), 1e-3}) {
    SuperOperator full{L0.matrix + e * L1.matrix, m.basis, 4};
    Operator ex = steady_state(full).rho;
    Operator pt = perturbative_steady_state(L0, L1, e, 2);
    CHECK(std::abs(pt.trace() - 1.0) < 1e-12);
    ratios.push_back((ex.matrix - pt.matrix).norm() / (e * e * e));
  }
  CHECK(ratios[2] < 3 * ratios[0] + 1e-6);
  CHECK(ratios[0] < 1e3);
}

TEST_CASE("adjoint equation") {
  std::mt19937_64 g(12);
  ModelSpec m = build_model("xyz", {{"n_sites", 2}, {"hx", 0.2}});
  Operator id = identity(m.basis);
  CHECK(adjoint_apply(m, id).matrix.norm() < 1e-12);
  for (int k = 0; k < 5; ++k) {
    Operator o(random_matrix(4, g), m.basis), rho(random_matrix(4, g), m.basis);
    cd lhs = (adjoint_apply(m, o).matrix * rho.matrix).trace();
    cd rhs = (o.matrix * lindblad_apply(m, rho).matrix).trace();
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)));
  }
  ModelSpec d = build_model("single_mode", {{"kappa_minus", 0.4}, {"cutoff", 6}});
  Operator n = local_operator(d.basis[0], "n");
  CHECK((adjoint_apply(d, n).matrix + 0.4 * n.matrix).norm() < 1e-12);

  // two-body loss on two sites: d<N>/dt = -2 kappa sum <a^dag^2 a^2>
  const double kl = 0.7;
  ModelSpec bh = build_model("bose_hubbard", {{"kappa_loss", kl}, {"m", 2}, {"cutoff", 4}, {"U", 0.5}});
  Mat N = Mat::Zero(bh.dim(), bh.dim()), rhs = Mat::Zero(bh.dim(), bh.dim());
  for (int j = 0; j < 2; ++j) {
    Mat a = embed(local_operator(bh.basis[j], "a"), j, bh.basis).matrix;
    N += a.adjoint() * a;
    rhs += -kl * 2 * a.adjoint() * a.adjoint() * a * a;
  }
  CHECK((adjoint_apply(bh, Operator(N, bh.basis)).matrix - rhs).norm() < 1e-12);
}

TEST_CASE("spectrum export") {
  ModelSpec m = build_model("single_mode", {{"cutoff", 1}});
  SpectralData s = spectrum(vectorize(m));
  std::string csv = spectrum_csv(s);
  CHECK(csv.rfind("re,im,sector\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(spectrum_json(s).find("eigenvalues") != std::string::npos);
}
