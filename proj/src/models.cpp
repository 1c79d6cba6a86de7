#include "oqs/models.hpp"

#include <json.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>

namespace oqs {

Operator ModelSpec::hamiltonian() const {
  const int d = dim();
  Mat h = Mat::Zero(d, d);
  for (const auto& t : hamiltonian_terms) h += t.coefficient * t.op.matrix;
  return {h, basis};
}

std::vector<Operator> ModelSpec::jumps() const {
  std::vector<Operator> out;
  out.reserve(jump_terms.size());
  for (const auto& j : jump_terms) out.push_back(j.op);
  return out;
}

void ModelSpec::validate() const {
  graph.validate();
  const int d = dim();
  for (const auto& t : hamiltonian_terms)
    if (t.op.basis != basis || t.op.dim() != d) throw InputError("Hamiltonian term '" + t.label + "' on wrong basis");
  for (const auto& j : jump_terms) {
    if (!(j.rate >= 0.0)) throw InputError("negative rate in jump '" + j.label + "'");
    if (j.op.basis != basis || j.op.dim() != d) throw InputError("jump term '" + j.label + "' on wrong basis");
  }
  if (!hamiltonian_terms.empty()) {
    Mat h = hamiltonian().matrix;
    double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("Hamiltonian is not Hermitian");
  }
}

namespace {

const std::map<std::string, Params>& defaults_table() {
  static const std::map<std::string, Params> t = {
      {"single_mode", {{"omega_c", 1.0}, {"kappa_minus", 1.0}, {"kappa_plus", 0.0}, {"cutoff", 10}}},
      {"xyz", {{"Jx", 0.9}, {"Jy", 1.0}, {"Jz", 1.0}, {"gamma", 1.0}, {"hx", 0}, {"hy", 0}, {"hz", 0},
               {"n_sites", 4}, {"periodic", 0}, {"lx", 0}, {"ly", 0}}},
      {"transverse_ising", {{"J", 1.0}, {"h", 1.0}, {"gamma", 1.0}, {"gamma_monitor", 0.0}, {"gamma_phi", 0.0},
                            {"n_sites", 4}, {"periodic", 0}, {"lx", 0}, {"ly", 0}}},
      {"ising", {{"J", 1.0}, {"h", 0.0}, {"gamma_minus", 1.0}, {"gamma_plus", 0.0}, {"gamma_phi", 0.0},
                 {"n_sites", 4}, {"periodic", 0}, {"lx", 0}, {"ly", 0}}},
      {"xx_dephasing", {{"J", 1.0}, {"h", 0.0}, {"gamma", 1.0}, {"n_sites", 4}, {"periodic", 0}, {"lx", 0}, {"ly", 0}}},
      {"xxz_dephasing", {{"Jxy", 1.0}, {"Jz", 1.0}, {"gamma", 1.0}, {"n_sites", 4}, {"periodic", 0}, {"lx", 0}, {"ly", 0}}},
      {"bose_hubbard", {{"t_h", 1.0}, {"U", 1.0}, {"gamma_phi", 0.0}, {"kappa_loss", 0.0}, {"m", 1},
                        {"kappa_plus", 0.0}, {"cutoff", 3}, {"n_sites", 2}, {"periodic", 0}, {"lx", 0}, {"ly", 0}}},
      {"dicke", {{"omega_c", 1.0}, {"epsilon", 1.0}, {"g", 0.5}, {"n_emitters", 2}, {"kappa", 1.0},
                 {"gamma_minus", 0.0}, {"gamma_plus", 0.0}, {"gamma_phi", 0.0}, {"cutoff", 8}}},
      {"kerr", {{"delta", 10.0}, {"U_tilde", 10.0}, {"F_tilde", 2.0}, {"kappa", 1.0}, {"N", 5}, {"cutoff", 0}}},
      {"btc", {{"omega0", 0.5}, {"kappa", 1.0}, {"N", 10}, {"omega_x", 0.0}, {"omega_z", 0.0}}},
      {"hardcore_loss", {{"J", 1.0}, {"Gamma", 0.1}, {"n_sites", 6}, {"periodic", 1}}},
      {"bec_engineering", {{"gamma", 1.0}, {"N", 2}, {"cutoff", 0}, {"t_h", 0.0}, {"U", 0.0},
                           {"n_sites", 2}, {"periodic", 0}, {"lx", 0}, {"ly", 0}}},
      {"absorbing", {{"Omega", 1.0}, {"gamma", 1.0}, {"kappa", 1.0}, {"n_sites", 4}, {"periodic", 0}, {"lx", 0}, {"ly", 0}}},
      {"dissipative_computation", {{"n_qubits", 2}, {"T", 2}, {"seed", 1}}},
  };
  return t;
}

Params resolve(const std::string& name, const Params& given) {
  const auto& tab = defaults_table();
  auto it = tab.find(name);
  if (it == tab.end()) throw InputError("unknown model: " + name);
  Params p = it->second;
  for (const auto& [k, v] : given) {
    if (!p.count(k)) throw InputError("unknown parameter '" + k + "' for model " + name);
    if (!std::isfinite(v)) throw InputError("parameter '" + k + "' is not finite");
    p[k] = v;
  }
  return p;
}

int as_int(const Params& p, const std::string& k, int lo) {
  double v = p.at(k);
  if (v != std::floor(v) || v < lo) throw InputError("parameter '" + k + "' must be an integer >= " + std::to_string(lo));
  return static_cast<int>(v);
}

double nonneg(const Params& p, const std::string& k) {
  double v = p.at(k);
  if (v < 0) throw InputError("parameter '" + k + "' must be >= 0");
  return v;
}

LatticeGraph lattice_from(const Params& p, const std::optional<LatticeGraph>& g) {
  if (g) {
    g->validate();
    return *g;
  }
  int lx = as_int(p, "lx", 0), ly = as_int(p, "ly", 0);
  if (lx > 0 && ly > 0) return LatticeGraph::square(lx, ly);
  return LatticeGraph::chain(as_int(p, "n_sites", 1), p.at("periodic") != 0.0);
}

Mat m_of(const LocalBasis& b, const std::string& n) { return local_operator(b, n).matrix; }

struct Builder {
  ModelSpec m;
  void h(cd c, const std::vector<std::pair<int, Mat>>& f, const std::string& label) {
    m.hamiltonian_terms.push_back({c, product(f, m.basis), label});
  }
  void h_op(cd c, Operator op, const std::string& label) { m.hamiltonian_terms.push_back({c, std::move(op), label}); }
  void jump(double rate, const std::vector<std::pair<int, Mat>>& f, const std::string& label) {
    if (rate < 0) throw InputError("negative rate for " + label);
    if (rate == 0) return;
    Operator op = product(f, m.basis);
    m.jump_terms.push_back({rate, std::sqrt(rate) * op, label});
  }
  void jump_op(double rate, const Operator& op, const std::string& label) {
    if (rate < 0) throw InputError("negative rate for " + label);
    if (rate == 0) return;
    m.jump_terms.push_back({rate, std::sqrt(rate) * op, label});
  }
};

std::string bond_label(const std::string& what, int i, int j) {
  return what + "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}
std::string site_label(const std::string& what, int i) { return what + "(" + std::to_string(i) + ")"; }

// sigma^+_i sigma^-_j + h.c.
Operator flip_flop(const Basis& b, int i, int j) {
  LocalBasis s = LocalBasis::spin_half();
  Operator a = product({{i, m_of(s, "sp")}, {j, m_of(s, "sm")}}, b);
  return a + a.adjoint();
}

}  // namespace

std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : defaults_table()) out.push_back(k);
  return out;
}

Params catalog_defaults(const std::string& name) { return resolve(name, {}); }

std::vector<double> kerr_semiclassical_densities(double delta, double u, double f, double kappa) {
  // x[(delta - u x)^2 + kappa^2/4] = f^2
  std::vector<double> roots;
  if (u == 0.0) {
    roots.push_back(f * f / (delta * delta + 0.25 * kappa * kappa));
    return roots;
  }
  const double c3 = u * u, c2 = -2 * delta * u, c1 = delta * delta + 0.25 * kappa * kappa, c0 = -f * f;
  Eigen::Matrix3cd comp = Eigen::Matrix3cd::Zero();
  comp(0, 0) = -c2 / c3;
  comp(0, 1) = -c1 / c3;
  comp(0, 2) = -c0 / c3;
  comp(1, 0) = 1;
  comp(2, 1) = 1;
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(comp, false);
  for (int i = 0; i < 3; ++i) {
    cd r = es.eigenvalues()[i];
    if (std::abs(r.imag()) < 1e-7 * std::max(1.0, std::abs(r)) && r.real() >= 0) {
      // polish with Newton
      double x = r.real();
      for (int it = 0; it < 20; ++it) {
        double fx = ((c3 * x + c2) * x + c1) * x + c0;
        double dfx = (3 * c3 * x + 2 * c2) * x + c1;
        if (dfx == 0) break;
        x -= fx / dfx;
      }
      roots.push_back(x);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

ModelSpec build_model(const std::string& name, const Params& given, const std::optional<LatticeGraph>& graph) {
  const Params p = resolve(name, given);
  const LocalBasis s = LocalBasis::spin_half();
  Builder B;
  B.m.name = name;
  B.m.params = p;

  if (name == "single_mode") {
    const int nc = as_int(p, "cutoff", 1);
    LocalBasis b = LocalBasis::boson(nc);
    B.m.graph = LatticeGraph::chain(1);
    B.m.basis = {b};
    B.h(p.at("omega_c"), {{0, m_of(b, "n")}}, "omega_c n");
    B.jump(nonneg(p, "kappa_minus"), {{0, m_of(b, "a")}}, "decay");
    B.jump(nonneg(p, "kappa_plus"), {{0, m_of(b, "adag")}}, "pump");
  } else if (name == "xyz") {
    B.m.graph = lattice_from(p, graph);
    B.m.basis.assign(B.m.graph.n_sites, s);
    const char* comp[3] = {"sx", "sy", "sz"};
    const double J[3] = {p.at("Jx"), p.at("Jy"), p.at("Jz")};
    const double hf[3] = {p.at("hx"), p.at("hy"), p.at("hz")};
    for (auto [i, j] : B.m.graph.edges)
      for (int a = 0; a < 3; ++a)
        B.h(J[a], {{i, m_of(s, comp[a])}, {j, m_of(s, comp[a])}}, bond_label(std::string("J") + "xyz"[a], i, j));
    for (int i = 0; i < B.m.graph.n_sites; ++i)
      for (int a = 0; a < 3; ++a)
        if (hf[a] != 0.0) B.h(hf[a], {{i, m_of(s, comp[a])}}, site_label(std::string("h") + "xyz"[a], i));
    for (int i = 0; i < B.m.graph.n_sites; ++i) B.jump(nonneg(p, "gamma"), {{i, m_of(s, "sm")}}, site_label("loss", i));
  } else if (name == "transverse_ising") {
    B.m.graph = lattice_from(p, graph);
    B.m.basis.assign(B.m.graph.n_sites, s);
    for (auto [i, j] : B.m.graph.edges) B.h(p.at("J"), {{i, m_of(s, "sx")}, {j, m_of(s, "sx")}}, bond_label("J", i, j));
    for (int i = 0; i < B.m.graph.n_sites; ++i) B.h(p.at("h"), {{i, m_of(s, "sz")}}, site_label("h", i));
    for (int i = 0; i < B.m.graph.n_sites; ++i) {
      B.jump(nonneg(p, "gamma"), {{i, m_of(s, "sm")}}, site_label("loss", i));
      B.jump(nonneg(p, "gamma_monitor"), {{i, m_of(s, "n")}}, site_label("monitor", i));
      B.jump(nonneg(p, "gamma_phi"), {{i, m_of(s, "sz")}}, site_label("dephasing", i));
    }
  } else if (name == "ising") {
    B.m.graph = lattice_from(p, graph);
    B.m.basis.assign(B.m.graph.n_sites, s);
    for (auto [i, j] : B.m.graph.edges) B.h(p.at("J"), {{i, m_of(s, "sz")}, {j, m_of(s, "sz")}}, bond_label("J", i, j));
    for (int i = 0; i < B.m.graph.n_sites; ++i) {
      if (p.at("h") != 0.0) B.h(p.at("h"), {{i, m_of(s, "sz")}}, site_label("h", i));
      B.jump(nonneg(p, "gamma_minus"), {{i, m_of(s, "sm")}}, site_label("loss", i));
      B.jump(nonneg(p, "gamma_plus"), {{i, m_of(s, "sp")}}, site_label("pump", i));
      B.jump(nonneg(p, "gamma_phi"), {{i, m_of(s, "sz")}}, site_label("dephasing", i));
    }
  } else if (name == "xx_dephasing" || name == "xxz_dephasing") {
    B.m.graph = lattice_from(p, graph);
    B.m.basis.assign(B.m.graph.n_sites, s);
    const bool xx = name == "xx_dephasing";
    for (auto [i, j] : B.m.graph.edges) {
      if (xx) {
        B.h_op(-p.at("J"), flip_flop(B.m.basis, i, j), bond_label("J", i, j));
      } else {
        B.h_op(0.5 * p.at("Jxy"), flip_flop(B.m.basis, i, j), bond_label("Jxy", i, j));
        B.h(p.at("Jz"), {{i, m_of(s, "sz")}, {j, m_of(s, "sz")}}, bond_label("Jz", i, j));
      }
    }
    if (xx && p.at("h") != 0.0)
      for (int i = 0; i < B.m.graph.n_sites; ++i) B.h(p.at("h"), {{i, m_of(s, "sz")}}, site_label("h", i));
    for (int i = 0; i < B.m.graph.n_sites; ++i) B.jump(nonneg(p, "gamma"), {{i, m_of(s, "sz")}}, site_label("dephasing", i));
  } else if (name == "bose_hubbard") {
    B.m.graph = lattice_from(p, graph);
    LocalBasis b = LocalBasis::boson(as_int(p, "cutoff", 1));
    B.m.basis.assign(B.m.graph.n_sites, b);
    const int m = as_int(p, "m", 1);
    for (auto [i, j] : B.m.graph.edges) {
      Operator hop = product({{i, m_of(b, "adag")}, {j, m_of(b, "a")}}, B.m.basis);
      B.h_op(-p.at("t_h"), hop + hop.adjoint(), bond_label("hop", i, j));
    }
    Mat nn = m_of(b, "n");
    Mat onsite = nn * (nn - Mat::Identity(b.dim, b.dim));
    Mat am = Mat::Identity(b.dim, b.dim);
    for (int k = 0; k < m; ++k) am = am * m_of(b, "a");
    for (int i = 0; i < B.m.graph.n_sites; ++i) {
      if (p.at("U") != 0.0) B.h(0.5 * p.at("U"), {{i, onsite}}, site_label("U", i));
      B.jump(nonneg(p, "gamma_phi"), {{i, nn}}, site_label("dephasing", i));
      B.jump(nonneg(p, "kappa_loss"), {{i, am}}, site_label("loss", i));
      B.jump(nonneg(p, "kappa_plus"), {{i, m_of(b, "adag")}}, site_label("pump", i));
    }
  } else if (name == "dicke") {
    const int ne = as_int(p, "n_emitters", 1);
    LocalBasis b = LocalBasis::boson(as_int(p, "cutoff", 1));
    B.m.graph = LatticeGraph::star(ne + 1);
    B.m.basis.assign(ne + 1, s);
    B.m.basis[0] = b;
    B.h(p.at("omega_c"), {{0, m_of(b, "n")}}, "omega_c n");
    Mat x = m_of(b, "a") + m_of(b, "adag");
    for (int i = 1; i <= ne; ++i) {
      B.h(p.at("epsilon"), {{i, m_of(s, "n")}}, site_label("epsilon", i));
      B.h(p.at("g"), {{0, x}, {i, m_of(s, "sx")}}, site_label("g", i));
    }
    B.jump(nonneg(p, "kappa"), {{0, m_of(b, "a")}}, "cavity loss");
    for (int i = 1; i <= ne; ++i) {
      B.jump(nonneg(p, "gamma_minus"), {{i, m_of(s, "sm")}}, site_label("loss", i));
      B.jump(nonneg(p, "gamma_plus"), {{i, m_of(s, "sp")}}, site_label("pump", i));
      B.jump(nonneg(p, "gamma_phi"), {{i, m_of(s, "sz")}}, site_label("dephasing", i));
    }
  } else if (name == "kerr") {
    const double N = p.at("N");
    if (!(N > 0)) throw InputError("kerr: N must be > 0");
    const double U = p.at("U_tilde") / N, F = p.at("F_tilde") * std::sqrt(N);
    int nc = as_int(p, "cutoff", 0);
    if (nc == 0) {
      auto roots = kerr_semiclassical_densities(p.at("delta"), p.at("U_tilde"), p.at("F_tilde"), nonneg(p, "kappa"));
      double nmax = roots.empty() ? 0.0 : roots.back() * N;
      nc = std::max(12, static_cast<int>(std::ceil(6.0 * nmax)));
      B.m.params["cutoff"] = nc;
    }
    LocalBasis b = LocalBasis::boson(nc);
    B.m.graph = LatticeGraph::chain(1);
    B.m.basis = {b};
    Mat a = m_of(b, "a"), ad = m_of(b, "adag");
    B.h(-p.at("delta"), {{0, m_of(b, "n")}}, "detuning");
    B.h(0.5 * U, {{0, ad * ad * a * a}}, "kerr");
    B.h(F, {{0, a + ad}}, "drive");
    B.jump(nonneg(p, "kappa"), {{0, a}}, "loss");
  } else if (name == "btc") {
    const int N = as_int(p, "N", 1);
    const double S = 0.5 * N;
    LocalBasis b = LocalBasis::collective(N);
    B.m.graph = LatticeGraph::chain(1);
    B.m.basis = {b};
    Mat sx = m_of(b, "Sx"), sz = m_of(b, "Sz");
    B.h(p.at("omega0"), {{0, sx}}, "omega0 Sx");
    if (p.at("omega_x") != 0.0) B.h(p.at("omega_x") / S, {{0, sx * sx}}, "omega_x Sx^2");
    if (p.at("omega_z") != 0.0) B.h(p.at("omega_z") / S, {{0, sz * sz}}, "omega_z Sz^2");
    B.jump(nonneg(p, "kappa") / S, {{0, m_of(b, "Sm")}}, "collective decay");
  } else if (name == "hardcore_loss") {
    const int L = as_int(p, "n_sites", 2);
    B.m.graph = LatticeGraph::chain(L, p.at("periodic") != 0.0);
    B.m.basis.assign(L, s);
    for (auto [i, j] : B.m.graph.edges) B.h_op(-p.at("J"), flip_flop(B.m.basis, i, j), bond_label("J", i, j));
    const double G = nonneg(p, "Gamma");
    for (int j = 0; j < L; ++j) {
      auto nb = B.m.graph.neighbours(j);
      Mat acc = Mat::Zero(B.m.dim(), B.m.dim());
      for (int k : nb) acc += product({{j, m_of(s, "sm")}, {k, m_of(s, "sm")}}, B.m.basis).matrix;
      if (!nb.empty()) B.jump_op(G, Operator(acc, B.m.basis), site_label("pair loss", j));
    }
  } else if (name == "bec_engineering") {
    B.m.graph = lattice_from(p, graph);
    const int N = as_int(p, "N", 0);
    int nc = as_int(p, "cutoff", 0);
    if (nc == 0) {
      nc = std::max(N, 1);
      B.m.params["cutoff"] = nc;
    }
    if (nc < N) throw InputError("bec_engineering: boson cutoff below particle number");
    LocalBasis b = LocalBasis::boson(nc);
    B.m.basis.assign(B.m.graph.n_sites, b);
    Mat a = m_of(b, "a"), ad = m_of(b, "adag");
    for (auto [i, j] : B.m.graph.edges) {
      Operator cre = product({{i, ad}}, B.m.basis) + product({{j, ad}}, B.m.basis);
      Operator ann = product({{i, a}}, B.m.basis) - product({{j, a}}, B.m.basis);
      B.jump_op(nonneg(p, "gamma"), cre * ann, bond_label("bec", i, j));
      if (p.at("t_h") != 0.0) {
        Operator hop = product({{i, ad}, {j, a}}, B.m.basis);
        B.h_op(-p.at("t_h"), hop + hop.adjoint(), bond_label("hop", i, j));
      }
    }
    if (p.at("U") != 0.0) {
      Mat nn = m_of(b, "n");
      for (int i = 0; i < B.m.graph.n_sites; ++i)
        B.h(0.5 * p.at("U"), {{i, nn * (nn - Mat::Identity(b.dim, b.dim))}}, site_label("U", i));
    }
  } else if (name == "absorbing") {
    B.m.graph = lattice_from(p, graph);
    B.m.basis.assign(B.m.graph.n_sites, s);
    const double k = nonneg(p, "kappa");
    for (auto [i, j] : B.m.graph.edges) {
      // each unordered bond contributes both orderings (site conditioned on its neighbour)
      for (auto [u, v] : {std::pair{i, j}, std::pair{j, i}}) {
        B.h(p.at("Omega"), {{v, m_of(s, "n")}, {u, m_of(s, "sx")}}, bond_label("Omega", u, v));
        B.jump(k, {{v, m_of(s, "n")}, {u, m_of(s, "sp")}}, bond_label("branching", u, v));
        B.jump(k, {{v, m_of(s, "n")}, {u, m_of(s, "sm")}}, bond_label("coagulation", u, v));
      }
    }
    for (int i = 0; i < B.m.graph.n_sites; ++i) B.jump(nonneg(p, "gamma"), {{i, m_of(s, "sm")}}, site_label("decay", i));
  } else if (name == "dissipative_computation") {
    const int n = as_int(p, "n_qubits", 1), T = as_int(p, "T", 1);
    auto m = build_dissipative_computation(n, random_circuit(n, T, static_cast<unsigned long long>(p.at("seed"))));
    m.params = p;
    return m;
  } else {
    throw InputError("unknown model: " + name);
  }
  B.m.validate();
  return B.m;
}

std::vector<Mat> random_circuit(int n_qubits, int T, unsigned long long seed) {
  if (n_qubits < 1 || T < 1) throw InputError("random_circuit: need n_qubits, T >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Basis qb(n_qubits, LocalBasis::qudit(2));
  std::vector<Mat> gates;
  for (int t = 0; t < T; ++t) {
    const int k = n_qubits == 1 ? 1 : 2;
    const int d = 1 << k;
    Mat g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = cd(nd(rng), nd(rng));
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
    if (n_qubits == 1) {
      gates.push_back(q);
      continue;
    }
    const int site = t % (n_qubits - 1);
    // embed the two-qubit gate on (site, site+1)
    int left = 1 << site, right = 1 << (n_qubits - site - 2);
    Mat full = Eigen::kroneckerProduct(Mat::Identity(left, left), Eigen::kroneckerProduct(q, Mat::Identity(right, right)).eval()).eval();
    gates.push_back(full);
  }
  return gates;
}

ModelSpec build_dissipative_computation(int n_qubits, const std::vector<Mat>& gates) {
  if (n_qubits < 1 || gates.empty()) throw InputError("dissipative computation needs qubits and gates");
  const int dq = 1 << n_qubits;
  const int T = static_cast<int>(gates.size());
  for (const auto& g : gates) {
    if (g.rows() != dq || g.cols() != dq) throw InputError("gate dimension must be 2^n_qubits");
    if (!(g.adjoint() * g).isIdentity(1e-10)) throw InputError("gate is not unitary");
  }
  ModelSpec m;
  m.name = "dissipative_computation";
  m.graph = LatticeGraph::star(n_qubits + 1);
  // star hub is site 0; relabel so the register (last site) is the hub
  m.graph.edges.clear();
  for (int i = 0; i < n_qubits; ++i) m.graph.edges.emplace_back(i, n_qubits);
  m.graph.geometry = Geometry::Star;
  m.basis.assign(n_qubits, LocalBasis::qudit(2));
  m.basis.push_back(LocalBasis::qudit(T + 1));
  m.params = {{"n_qubits", n_qubits}, {"T", T}};
  Mat lower = Mat::Zero(2, 2);
  lower(0, 1) = 1.0;
  Mat r00 = Mat::Zero(T + 1, T + 1);
  r00(0, 0) = 1.0;
  for (int i = 0; i < n_qubits; ++i)
    m.jump_terms.push_back({1.0, product({{i, lower}, {n_qubits, r00}}, m.basis), site_label("reset", i)});
  for (int t = 1; t <= T; ++t) {
    Mat up = Mat::Zero(T + 1, T + 1), down = Mat::Zero(T + 1, T + 1);
    up(t, t - 1) = 1.0;
    down(t - 1, t) = 1.0;
    const Mat& U = gates[t - 1];
    Mat l = Eigen::kroneckerProduct(U, up).eval() + Eigen::kroneckerProduct(Mat(U.adjoint()), down).eval();
    m.jump_terms.push_back({1.0, Operator(l, m.basis), site_label("clock", t)});
  }
  m.validate();
  return m;
}

Operator dissipative_computation_rho0(int n_qubits, const std::vector<Mat>& gates) {
  const int dq = 1 << n_qubits;
  const int T = static_cast<int>(gates.size());
  Basis b(n_qubits, LocalBasis::qudit(2));
  b.push_back(LocalBasis::qudit(T + 1));
  Vec psi = Vec::Zero(dq);
  psi[0] = 1.0;
  Mat rho = Mat::Zero(dq * (T + 1), dq * (T + 1));
  for (int t = 0; t <= T; ++t) {
    if (t > 0) psi = gates[t - 1] * psi;
    Mat reg = Mat::Zero(T + 1, T + 1);
    reg(t, t) = 1.0;
    rho += Eigen::kroneckerProduct(Mat(psi * psi.adjoint()), reg).eval() / static_cast<double>(T + 1);
  }
  return {rho, b};
}

Vec bec_state(const Basis& basis, int n_particles) {
  const int ns = static_cast<int>(basis.size());
  for (const auto& lb : basis) {
    if (lb.kind != BasisKind::Boson) throw InputError("bec_state needs boson sites");
    if (lb.dim - 1 < n_particles) throw InputError("bec_state: cutoff below particle number");
  }
  const int d = total_dim(basis);
  Mat b0d = Mat::Zero(d, d);
  for (int i = 0; i < ns; ++i) b0d += product({{i, local_operator(basis[i], "adag").matrix}}, basis).matrix;
  b0d /= std::sqrt(static_cast<double>(ns));
  Vec v = Vec::Zero(d);
  v[0] = 1.0;
  for (int k = 1; k <= n_particles; ++k) v = b0d * v / std::sqrt(static_cast<double>(k));
  return v;
}

Operator parent_hamiltonian(const ModelSpec& model) {
  if (model.jump_terms.empty()) throw InputError("parent_hamiltonian: model has no jump terms");
  const int d = model.dim();
  Mat h = Mat::Zero(d, d);
  for (const auto& j : model.jump_terms) h += j.op.matrix.adjoint() * j.op.matrix;
  return {0.5 * (h + h.adjoint()), model.basis};
}

Operator strong_dephasing_k(const LatticeGraph& graph, double jxy, double gamma) {
  if (!(gamma > 0)) throw InputError("strong_dephasing_k: gamma must be > 0");
  graph.validate();
  const LocalBasis s = LocalBasis::spin_half();
  Basis b(graph.n_sites, s);
  const int d = total_dim(b);
  Mat k = Mat::Zero(d, d);
  for (auto [i, j] : graph.edges) {
    k += Mat::Identity(d, d);
    for (const char* c : {"sx", "sy", "sz"}) k -= product({{i, m_of(s, c)}, {j, m_of(s, c)}}, b).matrix;
  }
  k *= jxy * jxy / (16.0 * gamma);
  return {0.5 * (k + k.adjoint()), b};
}

// ---- JSON ----

using nlohmann::json;

namespace {

json op_json(const Operator& op) {
  json e = json::array();
  for (Eigen::Index j = 0; j < op.matrix.cols(); ++j)
    for (Eigen::Index i = 0; i < op.matrix.rows(); ++i) {
      cd v = op.matrix(i, j);
      if (v != cd(0.0)) e.push_back({i, j, v.real(), v.imag()});
    }
  return {{"dim", op.dim()}, {"entries", e}};
}

Operator op_from(const json& j, const Basis& b) {
  const int d = j.at("dim").get<int>();
  Mat m = Mat::Zero(d, d);
  for (const auto& e : j.at("entries")) m(e[0].get<int>(), e[1].get<int>()) = cd(e[2].get<double>(), e[3].get<double>());
  return {m, b};
}

}  // namespace

std::string to_json(const ModelSpec& m) {
  json j;
  j["name"] = m.name;
  json g;
  g["n_sites"] = m.graph.n_sites;
  g["edges"] = m.graph.edges;
  g["geometry"] = to_string(m.graph.geometry);
  j["graph"] = g;
  json b = json::array();
  for (const auto& lb : m.basis) b.push_back({{"kind", to_string(lb.kind)}, {"dim", lb.dim}});
  j["basis"] = b;
  json ht = json::array();
  for (const auto& t : m.hamiltonian_terms)
    ht.push_back({{"coefficient", {t.coefficient.real(), t.coefficient.imag()}}, {"operator", op_json(t.op)}, {"label", t.label}});
  j["hamiltonian_terms"] = ht;
  json jt = json::array();
  for (const auto& t : m.jump_terms) jt.push_back({{"rate", t.rate}, {"operator", op_json(t.op)}, {"label", t.label}});
  j["jump_terms"] = jt;
  j["params"] = m.params;
  return j.dump();
}

ModelSpec model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
  try {
    ModelSpec m;
    m.name = j.at("name").get<std::string>();
    m.graph.n_sites = j.at("graph").at("n_sites").get<int>();
    m.graph.edges = j.at("graph").at("edges").get<std::vector<std::pair<int, int>>>();
    m.graph.geometry = geometry_from_string(j.at("graph").at("geometry").get<std::string>());
    for (const auto& lb : j.at("basis"))
      m.basis.push_back({basis_kind_from_string(lb.at("kind").get<std::string>()), lb.at("dim").get<int>()});
    for (const auto& t : j.at("hamiltonian_terms")) {
      auto c = t.at("coefficient");
      m.hamiltonian_terms.push_back({cd(c[0].get<double>(), c[1].get<double>()), op_from(t.at("operator"), m.basis),
                                     t.at("label").get<std::string>()});
    }
    for (const auto& t : j.at("jump_terms"))
      m.jump_terms.push_back({t.at("rate").get<double>(), op_from(t.at("operator"), m.basis), t.at("label").get<std::string>()});
    m.params = j.at("params").get<Params>();
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace oqs
