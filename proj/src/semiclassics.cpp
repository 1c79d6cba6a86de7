#include "oqs/semiclassics.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numbers>
#include <sstream>

namespace oqs {

namespace {

// Does op act as the identity on `site`? Compares op with 1_site (x) Tr_site(op)/d.
bool acts_trivially(const Mat& op, const Basis& b, int site, double tol) {
  const int d = b[site].dim;
  long stride = 1;
  for (size_t s = site + 1; s < b.size(); ++s) stride *= b[s].dim;
  const long dim = op.rows();
  const long block = stride * d;
  auto strip = [&](long i) { return (i / block) * stride + i % stride; };
  auto digit = [&](long i) { return (i / stride) % d; };
  auto compose = [&](long r, long a) { return (r / stride) * block + a * stride + r % stride; };
  const long rd = dim / d;
  Mat red = Mat::Zero(rd, rd);
  for (long r = 0; r < rd; ++r)
    for (long c = 0; c < rd; ++c) {
      cd acc = 0;
      for (long a = 0; a < d; ++a) acc += op(compose(r, a), compose(c, a));
      red(r, c) = acc / double(d);
    }
  const double scale = std::max(1.0, op.cwiseAbs().maxCoeff());
  for (long c = 0; c < dim; ++c)
    for (long r = 0; r < dim; ++r) {
      cd expect = digit(r) == digit(c) ? red(strip(r), strip(c)) : cd(0);
      if (std::abs(op(r, c) - expect) > tol * scale) return false;
    }
  return true;
}

std::vector<int> support(const Operator& op, double tol) {
  std::vector<int> s;
  for (int i = 0; i < static_cast<int>(op.basis.size()); ++i)
    if (!acts_trivially(op.matrix, op.basis, i, tol)) s.push_back(i);
  return s;
}

Mat restrict_to(const Operator& op, const std::vector<int>& sites) {
  int d = 1;
  for (int s : sites) d *= op.basis[s].dim;
  return partial_trace(op, sites).matrix / double(op.dim() / d);
}

void lindblad_local(const Mat& h, const std::vector<Mat>& jumps, const Mat& rho, Mat& out) {
  out = -I1 * (h * rho - rho * h);
  for (const Mat& l : jumps) {
    Mat ldl = l.adjoint() * l;
    out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
  }
}

}  // namespace

LocalModel local_model(const ModelSpec& m, double tol) {
  LocalModel lm;
  lm.basis = m.basis;
  const int n = static_cast<int>(m.basis.size());
  lm.h_site.resize(n);
  lm.jumps.resize(n);
  for (int i = 0; i < n; ++i) lm.h_site[i] = Mat::Zero(m.basis[i].dim, m.basis[i].dim);
  for (const auto& term : m.hamiltonian_terms) {
    auto s = support(term.op, tol);
    if (s.empty()) continue;  // constant shift
    if (s.size() > 2)
      throw InputError("gutzwiller: term '" + term.label + "' couples more than two sites");
    Mat r = term.coefficient * restrict_to(term.op, s);
    if (s.size() == 1) {
      lm.h_site[s[0]] += r;
      continue;
    }
    auto it = std::find_if(lm.pairs.begin(), lm.pairs.end(),
                           [&](const LocalModel::Pair& p) { return p.i == s[0] && p.j == s[1]; });
    if (it == lm.pairs.end()) lm.pairs.push_back({s[0], s[1], r});
    else it->h += r;
  }
  for (const auto& jt : m.jump_terms) {
    auto s = support(jt.op, tol);
    if (s.empty()) continue;  // proportional to the identity: no dynamics
    if (s.size() > 1) throw InputError("gutzwiller: jump '" + jt.label + "' is not single-site");
    lm.jumps[s[0]].push_back(restrict_to(jt.op, s));
  }
  return lm;
}

Mat gutzwiller_field(const LocalModel& m, const std::vector<Mat>& rho, int site) {
  Mat h = m.h_site[site];
  for (const auto& p : m.pairs) {
    const int di = m.basis[p.i].dim, dj = m.basis[p.j].dim;
    if (p.i == site) {
      const Mat& r = rho[p.j];
      for (int a = 0; a < di; ++a)
        for (int b = 0; b < di; ++b) {
          cd acc = 0;
          for (int c = 0; c < dj; ++c)
            for (int d = 0; d < dj; ++d) acc += p.h(a * dj + c, b * dj + d) * r(d, c);
          h(a, b) += acc;
        }
    } else if (p.j == site) {
      const Mat& r = rho[p.i];
      for (int c = 0; c < dj; ++c)
        for (int d = 0; d < dj; ++d) {
          cd acc = 0;
          for (int a = 0; a < di; ++a)
            for (int b = 0; b < di; ++b) acc += p.h(a * dj + c, b * dj + d) * r(b, a);
          h(c, d) += acc;
        }
    }
  }
  return h;
}

std::vector<MeanFieldState> gutzwiller_evolve(const LocalModel& m, const std::vector<Mat>& rho0,
                                              const std::vector<double>& t_grid, const OdeOptions& opt) {
  const int n = m.n_sites();
  if (static_cast<int>(rho0.size()) != n) throw InputError("gutzwiller: need one initial state per site");
  std::vector<long> off(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    const int d = m.basis[i].dim;
    if (rho0[i].rows() != d || rho0[i].cols() != d) throw InputError("gutzwiller: initial state has wrong shape");
    if (std::abs(rho0[i].trace() - 1.0) > 1e-10 || (rho0[i] - rho0[i].adjoint()).norm() > 1e-10)
      throw InputError("gutzwiller: initial states must be Hermitian with unit trace");
    off[i + 1] = off[i] + long(d) * d;
  }
  auto unpack = [&](const Vec& y) {
    std::vector<Mat> r(n);
    for (int i = 0; i < n; ++i) {
      const int d = m.basis[i].dim;
      r[i] = Eigen::Map<const Mat>(y.data() + off[i], d, d);
    }
    return r;
  };
  Vec y0(off[n]);
  for (int i = 0; i < n; ++i) y0.segment(off[i], off[i + 1] - off[i]) = Eigen::Map<const Vec>(rho0[i].data(), rho0[i].size());

  RhsC f = [&](double, const Vec& y, Vec& dy) {
    auto r = unpack(y);
    dy.resize(y.size());
    Mat out;
    for (int i = 0; i < n; ++i) {
      lindblad_local(gutzwiller_field(m, r, i), m.jumps[i], r[i], out);
      dy.segment(off[i], off[i + 1] - off[i]) = Eigen::Map<const Vec>(out.data(), out.size());
    }
  };
  auto ys = ode_solve(f, y0, t_grid, opt);
  std::vector<MeanFieldState> res;
  res.reserve(ys.size());
  for (size_t k = 0; k < ys.size(); ++k) res.push_back({t_grid[k], unpack(ys[k])});
  return res;
}

std::vector<MeanFieldState> gutzwiller_evolve(const ModelSpec& m, const std::vector<Mat>& rho0,
                                              const std::vector<double>& t_grid, const OdeOptions& opt) {
  return gutzwiller_evolve(local_model(m), rho0, t_grid, opt);
}

// ---- XYZ ----

RVec xyz_meanfield_rhs(const XyzMeanField& p, const RVec& s) {
  const double x = s(0), y = s(1), z = s(2), c = p.z;
  RVec d(3);
  d(0) = -0.5 * p.gamma * x + c * (p.jy - p.jz) * y * z;
  d(1) = -0.5 * p.gamma * y + c * (p.jz - p.jx) * x * z;
  d(2) = -p.gamma * (1.0 + z) + c * (p.jx - p.jy) * x * y;
  return d;
}

std::vector<RVec> xyz_meanfield(const XyzMeanField& p, const RVec& s0, const std::vector<double>& t_grid,
                                const OdeOptions& opt) {
  if (s0.size() != 3) throw InputError("xyz_meanfield: initial state must have 3 components");
  if (s0.norm() > 1.0 + 1e-12) throw InputError("xyz_meanfield: |s| must be <= 1");
  RhsR f = [&](double, const RVec& y, RVec& dy) { dy = xyz_meanfield_rhs(p, y); };
  return ode_solve(f, s0, t_grid, opt);
}

std::vector<RVec> xyz_meanfield(const XyzMeanField& p, const LatticeGraph& g, const RVec& s0,
                                const std::vector<double>& t_grid, const OdeOptions& opt) {
  const int n = g.n_sites;
  if (s0.size() != 3 * n) throw InputError("xyz_meanfield: need 3 components per site");
  for (int i = 0; i < n; ++i)
    if (s0.segment(3 * i, 3).norm() > 1.0 + 1e-12) throw InputError("xyz_meanfield: |s_i| must be <= 1");
  RhsR f = [&](double, const RVec& y, RVec& dy) {
    dy.resize(y.size());
    for (int i = 0; i < n; ++i) {
      dy(3 * i) = -0.5 * p.gamma * y(3 * i);
      dy(3 * i + 1) = -0.5 * p.gamma * y(3 * i + 1);
      dy(3 * i + 2) = -p.gamma * (1.0 + y(3 * i + 2));
    }
    for (auto [a, b] : g.edges)
      for (auto [i, j] : {std::pair{a, b}, std::pair{b, a}}) {
        const double xi = y(3 * i), yi = y(3 * i + 1), zi = y(3 * i + 2);
        const double xj = y(3 * j), yj = y(3 * j + 1), zj = y(3 * j + 2);
        dy(3 * i) += p.jy * zi * yj - p.jz * yi * zj;
        dy(3 * i + 1) += p.jz * xi * zj - p.jx * zi * xj;
        dy(3 * i + 2) += p.jx * yi * xj - p.jy * xi * yj;
      }
  };
  return ode_solve(f, s0, t_grid, opt);
}

RMat xyz_jacobian(const XyzMeanField& p, const RVec& s) {
  const double x = s(0), y = s(1), z = s(2), c = p.z;
  RMat j(3, 3);
  j << -0.5 * p.gamma, c * (p.jy - p.jz) * z, c * (p.jy - p.jz) * y,
      c * (p.jz - p.jx) * z, -0.5 * p.gamma, c * (p.jz - p.jx) * x,
      c * (p.jx - p.jy) * y, c * (p.jx - p.jy) * x, -p.gamma;
  return j;
}

double xyz_stability(const XyzMeanField& p) {
  RVec down(3);
  down << 0, 0, -1;
  Eigen::EigenSolver<RMat> es(xyz_jacobian(p, down), false);
  return es.eigenvalues().real().maxCoeff();
}

double xyz_critical(double jx, double jz, double gamma, double z, double jy_lo, double jy_hi, double tol) {
  if (std::isnan(jy_lo)) jy_lo = std::min(jx, jz);
  if (std::isnan(jy_hi)) jy_hi = std::max(jx, jz) + 10.0 * std::max(1.0, gamma);
  if (!(jy_hi > jy_lo) || !(tol > 0)) throw InputError("xyz_critical: bad window or tolerance");
  auto lam = [&](double jy) { return xyz_stability({jx, jy, jz, gamma, z}); };
  const int n_scan = 400;
  double a = jy_lo, fa = lam(a);
  for (int k = 1; k <= n_scan; ++k) {
    double b = jy_lo + (jy_hi - jy_lo) * k / n_scan, fb = lam(b);
    if ((fa < 0) != (fb < 0)) {
      while (b - a > tol) {
        double m = 0.5 * (a + b), fm = lam(m);
        if ((fm < 0) == (fa < 0)) a = m, fa = fm;
        else b = m;
      }
      return 0.5 * (a + b);
    }
    a = b;
    fa = fb;
  }
  throw NumericalError("xyz_critical: no stability change in the scanned window");
}

// ---- BTC ----

RVec btc_rhs(double omega0, double kappa, double S, const RVec& s) {
  const double k = kappa / S;
  RVec d(3);
  d(0) = k * s(0) * s(2);
  d(1) = -omega0 * s(2) + k * s(1) * s(2);
  d(2) = omega0 * s(1) - k * (s(0) * s(0) + s(1) * s(1));
  return d;
}

std::vector<RVec> btc_dynamics(double omega0, double kappa, double S, const RVec& s0,
                               const std::vector<double>& t_grid, const OdeOptions& opt) {
  if (!(S > 0) || kappa < 0) throw InputError("btc_dynamics: need S > 0 and kappa >= 0");
  if (s0.size() != 3 || std::abs(s0.norm() - S) > 1e-8 * S) throw InputError("btc_dynamics: |S(0)| must equal S");
  RhsR f = [&](double, const RVec& y, RVec& dy) { dy = btc_rhs(omega0, kappa, S, y); };
  return ode_solve(f, s0, t_grid, opt);
}

double btc_invariant(double omega0, double kappa, double S, const RVec& s) {
  return s(0) / (s(1) - omega0 / kappa * S);
}

std::string to_string(FixedPointKind k) {
  switch (k) {
    case FixedPointKind::Stable: return "stable";
    case FixedPointKind::Unstable: return "unstable";
    case FixedPointKind::Oscillatory: return "oscillatory";
  }
  return "?";
}

std::vector<BtcFixedPoint> btc_fixed_points(double eta, double kappa) {
  if (!(eta >= 0) || !(kappa > 0)) throw InputError("btc_fixed_points: need eta >= 0 and kappa > 0");
  std::vector<RVec> pts;
  if (eta <= 1.0) {
    const double c = std::sqrt(1.0 - eta * eta);
    pts.push_back((RVec(3) << 0, eta, -c).finished());
    if (c > 0) pts.push_back((RVec(3) << 0, eta, c).finished());
  } else {
    const double a = std::sqrt(1.0 - 1.0 / (eta * eta));
    pts.push_back((RVec(3) << a, 1.0 / eta, 0).finished());
    pts.push_back((RVec(3) << -a, 1.0 / eta, 0).finished());
  }
  std::vector<BtcFixedPoint> out;
  for (const RVec& s : pts) {
    const double x = s(0), y = s(1), z = s(2), w = eta * kappa, k = kappa;
    RMat j(3, 3);
    j << k * z, 0, k * x,
        0, k * z, -w + k * y,
        -2 * k * x, w - 2 * k * y, 0;
    // Orthonormal basis of the tangent plane; the flow preserves |S| so J maps it into itself.
    Eigen::JacobiSVD<RMat> svd(s.transpose(), Eigen::ComputeFullV);
    RMat t = svd.matrixV().rightCols(2);
    RMat red = t.transpose() * j * t;
    Eigen::EigenSolver<RMat> es(red, false);
    BtcFixedPoint fp;
    fp.s = s;
    fp.eigenvalues = es.eigenvalues();
    const double re = fp.eigenvalues.real().maxCoeff();
    const double tol = 1e-12 * kappa;
    fp.kind = re < -tol ? FixedPointKind::Stable : re > tol ? FixedPointKind::Unstable : FixedPointKind::Oscillatory;
    out.push_back(fp);
  }
  return out;
}

double btc_relaxation_rate(double omega0, double kappa) {
  const double eta = omega0 / kappa;
  return eta < 1.0 ? kappa * std::sqrt(1.0 - eta * eta) : 0.0;
}

std::string btc_fixed_points_json(const std::vector<BtcFixedPoint>& fps) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : fps) {
    nlohmann::json e;
    e["s"] = {f.s(0), f.s(1), f.s(2)};
    e["kind"] = to_string(f.kind);
    e["eigenvalues"] = nlohmann::json::array();
    for (int i = 0; i < f.eigenvalues.size(); ++i) e["eigenvalues"].push_back({f.eigenvalues[i].real(), f.eigenvalues[i].imag()});
    arr.push_back(e);
  }
  return arr.dump(2);
}

// ---- Bogoliubov ----

std::pair<Vec, Vec> bogoliubov_dispersion(double mu, double mass, double kappa, const std::vector<double>& k) {
  if (!(mu > 0) || !(mass > 0) || kappa < 0) throw InputError("bogoliubov_dispersion: need mu > 0, m > 0, kappa >= 0");
  Vec plus(k.size()), minus(k.size());
  for (size_t i = 0; i < k.size(); ++i) {
    const double e = k[i] * k[i] / (2 * mass);
    const cd r = std::sqrt(cd(e * (e + 2 * mu) - kappa * kappa, 0.0));
    plus[i] = -I1 * kappa + r;
    minus[i] = -I1 * kappa - r;
  }
  return {plus, minus};
}

double bogoliubov_diffusion(double mu, double mass, double kappa) {
  if (!(kappa > 0)) throw InputError("bogoliubov_diffusion: need kappa > 0");
  return mu / (2 * mass * kappa);
}

double bogoliubov_exceptional_k(double mu, double mass, double kappa) {
  const double e = -mu + std::sqrt(mu * mu + kappa * kappa);
  return std::sqrt(2 * mass * e);
}

// ---- losses ----

double weak_loss_density(double n0, double kappa2, double t) { return n0 / (1.0 + 2.0 * kappa2 * n0 * t); }

MomentumSeries weak_loss_evolve(const RVec& nk0, double kappa2, const std::vector<double>& t_grid,
                                const OdeOptions& opt) {
  if (nk0.size() == 0 || (nk0.array() < 0).any()) throw InputError("weak_loss_evolve: occupations must be >= 0");
  if (kappa2 < 0) throw InputError("weak_loss_evolve: kappa2 must be >= 0");
  RhsR f = [&](double, const RVec& y, RVec& dy) { dy = -2.0 * kappa2 * y.mean() * y; };
  MomentumSeries r{t_grid, ode_solve(f, nk0, t_grid, opt), {}};
  for (const auto& v : r.nk) r.density.push_back(v.mean());
  return r;
}

double zeno_rate(double t_h, double u, double gamma) {
  if (t_h < 0 || u < 0 || gamma < 0) throw InputError("zeno_rate: inputs must be >= 0");
  const double g2 = 0.5 * gamma;
  if (u == 0 && g2 == 0) throw InputError("zeno_rate: U and gamma cannot both vanish");
  return g2 * t_h * t_h / (u * u + g2 * g2);
}

std::vector<double> momentum_grid(int l) {
  std::vector<double> k(l);
  for (int j = 0; j < l; ++j) k[j] = 2.0 * std::numbers::pi * j / l;
  return k;
}

MomentumSeries strong_loss_evolve(const RVec& nk0, double gamma, const std::vector<double>& t_grid,
                                  const OdeOptions& opt) {
  const int l = static_cast<int>(nk0.size());
  if (l == 0 || (nk0.array() < 0).any() || (nk0.array() > 1).any())
    throw InputError("strong_loss_evolve: fermionic occupations must lie in [0, 1]");
  if (gamma < 0) throw InputError("strong_loss_evolve: Gamma must be >= 0");
  auto k = momentum_grid(l);
  RVec sk(l);
  for (int j = 0; j < l; ++j) sk(j) = std::sin(k[j]);
  RhsR f = [&](double, const RVec& y, RVec& dy) {
    // sum_q (s_k - s_q)^2 n_q = s_k^2 m0 - 2 s_k m1 + m2
    const double m0 = y.sum(), m1 = sk.dot(y), m2 = sk.cwiseProduct(sk).dot(y);
    dy = (-(4.0 * gamma / l) * (sk.array().square() * m0 - 2.0 * sk.array() * m1 + m2) * y.array()).matrix();
  };
  MomentumSeries r{t_grid, ode_solve(f, nk0, t_grid, opt), {}};
  for (const auto& v : r.nk) r.density.push_back(v.mean());
  return r;
}

// ---- two-site dephasing ----

double twosite_scaling_profile(double s, double tau) {
  return std::sqrt(2.0) / std::tgamma(0.25) * std::pow(tau, -0.25) * std::exp(-std::pow(s, 4) / (4.0 * tau));
}

TwoSiteResult twosite_dephasing(int n, const std::vector<double>& tau_grid) {
  if (n < 2 || n % 2 != 0) throw InputError("twosite_dephasing: N must be even and >= 2");
  const int d = n + 1;
  const double nn = n;
  // bond b links n = b and b + 1; its rate is W_{b+1}
  RVec w(n);
  for (int b = 0; b < n; ++b) {
    const double den = b - nn / 2 + 0.5;
    w(b) = (b + 1.0) * (nn - b) / (den * den);
  }
  RMat g = RMat::Zero(d, d);
  for (int b = 0; b < n; ++b) {
    const double r = nn * nn * w(b);
    g(b, b + 1) += r;
    g(b + 1, b) += r;
    g(b, b) -= r;
    g(b + 1, b + 1) -= r;
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(g);
  const RMat& v = es.eigenvectors();
  RVec rho0 = RVec::Zero(d);
  rho0(n / 2) = 1.0;
  RVec c0 = v.transpose() * rho0;

  TwoSiteResult res;
  res.tau = tau_grid;
  res.s.resize(d);
  for (int i = 0; i < d; ++i) res.s(i) = i / nn - 0.5;
  for (double tau : tau_grid) {
    if (tau < 0) throw InputError("twosite_dephasing: tau must be >= 0");
    RVec e = (es.eigenvalues().array() * tau).exp();
    // the stationary mode is exactly uniform; clamp rounding in its eigenvalue
    RVec rho = v * e.cwiseProduct(c0);
    rho = rho.cwiseMax(0.0);
    double coh = 0.0;
    for (int b = 0; b < n; ++b) {
      const double sm = (b + 0.5) / nn - 0.5;
      coh += nn * (rho(b + 1) - rho(b)) * (sm * sm - 0.25) / sm;
    }
    res.rho.push_back(rho);
    res.p.push_back(nn * rho);
    res.coherence.push_back(coh);
    res.norm.push_back(rho.sum());
  }
  return res;
}

// ---- export ----

std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os.precision(17);
  for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw InputError("table_csv: row width does not match header");
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  return os.str();
}

std::string momentum_csv(const MomentumSeries& s) {
  std::vector<std::vector<double>> rows;
  for (size_t a = 0; a < s.t.size(); ++a) {
    auto k = momentum_grid(static_cast<int>(s.nk[a].size()));
    for (size_t j = 0; j < k.size(); ++j) rows.push_back({s.t[a], k[j], s.nk[a](j)});
  }
  return table_csv({"t", "k", "nk"}, rows);
}

}  // namespace oqs
