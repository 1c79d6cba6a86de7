#include "oqs/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace oqs {

namespace {

Mat pairing(const QuadraticModel& m) { return m.k.size() ? m.k : Mat::Zero(m.modes(), m.modes()); }

// gamma = U w with gamma = (c, c^dag), w the Majorana vector.
Mat majorana_u(int n) {
  Mat u = Mat::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    u(j, 2 * j) = 0.5;
    u(j, 2 * j + 1) = cd(0, 0.5);
    u(n + j, 2 * j) = 0.5;
    u(n + j, 2 * j + 1) = cd(0, -0.5);
  }
  return u;
}

// w = V gamma
Mat majorana_v(int n) {
  Mat v = Mat::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    v(2 * j, j) = 1.0;
    v(2 * j, n + j) = 1.0;
    v(2 * j + 1, j) = cd(0, -1);
    v(2 * j + 1, n + j) = cd(0, 1);
  }
  return v;
}

Mat symplectic_j(int n) {
  Mat jm = Mat::Zero(2 * n, 2 * n);
  jm.topRightCorner(n, n) = Mat::Identity(n, n);
  jm.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return jm;
}

std::vector<Mat> integrate_lyapunov(const Mat& x, const Mat& y, const Mat& g0, const std::vector<double>& t_grid,
                                    const OdeOptions& opt) {
  const int d = static_cast<int>(g0.rows());
  const Mat xt = x.transpose();
  RhsC f = [&](double, const Vec& v, Vec& out) {
    Eigen::Map<const Mat> g(v.data(), d, d);
    Mat r = x * g + g * xt + y;
    out = Eigen::Map<const Vec>(r.data(), r.size());
  };
  Vec v0 = Eigen::Map<const Vec>(g0.data(), g0.size());
  std::vector<Mat> out;
  for (const Vec& v : ode_solve(f, v0, t_grid, opt)) out.push_back(Eigen::Map<const Mat>(v.data(), d, d));
  return out;
}

}  // namespace

void QuadraticModel::validate() const {
  const int n = modes();
  if (n < 1 || h.cols() != n) throw InputError("h must be a nonempty square matrix");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("h is not Hermitian");
  if (k.size()) {
    if (k.rows() != n || k.cols() != n) throw InputError("k has the wrong shape");
    const double ks = std::max(1.0, k.cwiseAbs().maxCoeff());
    if (statistics == Statistics::Boson && (k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * ks)
      throw InputError("bosonic pairing k must be symmetric");
    if (statistics == Statistics::Fermion && (k + k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * ks)
      throw InputError("fermionic pairing k must be antisymmetric");
  }
  for (const auto& j : jumps)
    if (j.p.size() != n || j.q.size() != n) throw InputError("jump coefficient vectors have the wrong length");
}

CorrelationMatrix vacuum_correlations(int n) {
  if (n < 1) throw InputError("need at least one mode");
  return {Mat::Identity(n, n), Mat::Zero(n, n), 0.0};
}

CovarianceGenerator covariance_generator(const QuadraticModel& m) {
  m.validate();
  const int n = m.modes();
  const Mat k = pairing(m);
  CovarianceGenerator g;
  g.statistics = m.statistics;
  if (m.statistics == Statistics::Boson) {
    // d alpha/dt = X alpha from the adjoint equation; [alpha_a, alpha_b] = J_ab
    const Mat jm = symplectic_j(n);
    Mat s(2 * n, 2 * n);
    s << k.conjugate(), m.h.conjugate(), m.h, k;
    g.x = cd(0, -1) * jm * s;
    g.y = Mat::Zero(2 * n, 2 * n);
    for (const auto& jump : m.jumps) {
      Vec c(2 * n), d(2 * n);
      c << jump.p, jump.q;
      d << jump.q.conjugate(), jump.p.conjugate();
      const Vec jc = jm * c, jd = jm * d;
      g.x += 0.5 * (jc * d.transpose() - jd * c.transpose());
      g.y -= jd * jc.transpose();
    }
    return g;
  }
  const Mat u = majorana_u(n);
  const Mat uc = u.topRows(n), ud = u.bottomRows(n);
  Mat q = ud.transpose() * m.h * uc + 0.5 * ud.transpose() * k * ud + 0.5 * uc.transpose() * k.adjoint() * uc;
  Mat a = cd(0, -4) * 0.5 * (q - q.transpose());
  Mat mm = Mat::Zero(2 * n, 2 * n);
  for (const auto& jump : m.jumps) {
    Vec l = uc.transpose() * jump.p + ud.transpose() * jump.q;
    mm += l * l.adjoint();
  }
  g.x = Mat(a.real().cast<cd>()) - 2.0 * Mat(mm.real().cast<cd>());
  g.y = 4.0 * Mat(mm.imag().cast<cd>());
  return g;
}

Mat to_covariance(const CorrelationMatrix& c, Statistics s) {
  const int n = static_cast<int>(c.c.rows());
  const Mat f = c.f.size() ? c.f : Mat::Zero(n, n);
  Mat g(2 * n, 2 * n);
  if (s == Statistics::Boson) {
    g << f, c.c, Mat(c.c.transpose()) - Mat::Identity(n, n), f.adjoint();
    return g;
  }
  g << f, c.c, Mat::Identity(n, n) - Mat(c.c.transpose()), f.adjoint();
  const Mat v = majorana_v(n);
  const Mat w = v * g * v.transpose();
  return Mat((cd(0, 0.5) * (w - w.transpose())).real().cast<cd>());
}

CorrelationMatrix from_covariance(const Mat& g, Statistics s, double t) {
  const int n = static_cast<int>(g.rows()) / 2;
  CorrelationMatrix out;
  out.t = t;
  if (s == Statistics::Boson) {
    out.f = g.topLeftCorner(n, n);
    out.c = g.topRightCorner(n, n);
    return out;
  }
  const Mat w = Mat::Identity(2 * n, 2 * n) - cd(0, 1) * g;
  const Mat u = majorana_u(n);
  const Mat gg = u * w * u.transpose();
  out.f = gg.topLeftCorner(n, n);
  out.c = gg.topRightCorner(n, n);
  return out;
}

std::vector<CorrelationMatrix> covariance_evolve(const QuadraticModel& m, const CorrelationMatrix& c0,
                                                 const std::vector<double>& t_grid, const OdeOptions& opt) {
  const CovarianceGenerator gen = covariance_generator(m);
  if (c0.c.rows() != m.modes() || c0.c.cols() != m.modes()) throw InputError("initial C has the wrong shape");
  OdeOptions o = opt;
  o.rtol = std::min(o.rtol, 1e-10);
  o.atol = std::min(o.atol, 1e-12);
  std::vector<CorrelationMatrix> out;
  auto gs = integrate_lyapunov(gen.x, gen.y, to_covariance(c0, m.statistics), t_grid, o);
  for (std::size_t i = 0; i < gs.size(); ++i) out.push_back(from_covariance(gs[i], m.statistics, t_grid[i]));
  return out;
}

CorrelationMatrix covariance_steady_state(const QuadraticModel& m) {
  const CovarianceGenerator gen = covariance_generator(m);
  EigResult e = eig(gen.x, true);
  if (e.values.real().maxCoeff() >= -1e-10)
    throw NumericalError("covariance generator is not strictly stable; stationary state not unique");
  const Mat& v = e.right;
  const Mat vinv = v.inverse();
  Mat yt = vinv * gen.y * vinv.transpose();
  for (int a = 0; a < yt.rows(); ++a)
    for (int b = 0; b < yt.cols(); ++b) yt(a, b) = -yt(a, b) / (e.values(a) + e.values(b));
  Mat g = v * yt * v.transpose();
  const double res = (gen.x * g + g * gen.x.transpose() + gen.y).norm();
  if (res > 1e-8 * std::max(1.0, gen.y.norm())) throw NumericalError("Lyapunov solve residual too large");
  return from_covariance(g, m.statistics);
}

double physicality_violation(const CorrelationMatrix& c, Statistics s) {
  const Mat herm = 0.5 * (c.c + c.c.adjoint());
  double v = (c.c - c.c.adjoint()).cwiseAbs().maxCoeff();
  RVec ev = eigvalsh(herm);
  if (s == Statistics::Boson) return std::max(v, std::max(0.0, 1.0 - ev.minCoeff()));
  return std::max({v, std::max(0.0, -ev.minCoeff()), std::max(0.0, ev.maxCoeff() - 1.0)});
}

std::vector<Mat> dephasing_correlation_evolve(double j, double gamma_phi, const Mat& c0,
                                              const std::vector<double>& t_grid, bool periodic,
                                              const OdeOptions& opt) {
  const int n = static_cast<int>(c0.rows());
  if (n < 1 || c0.cols() != n) throw InputError("C must be square");
  if (gamma_phi < 0) throw InputError("gamma_phi must be >= 0");
  // single-particle hopping T with H = sum T_kl a_k^dag a_l, T = -J (nearest neighbours)
  Mat t = Mat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) t(i, i + 1) = t(i + 1, i) = -j;
  if (periodic && n > 2) t(0, n - 1) = t(n - 1, 0) = -j;
  const Mat tt = t.transpose();
  RhsC f = [&](double, const Vec& v, Vec& out) {
    Eigen::Map<const Mat> c(v.data(), n, n);
    Mat r = cd(0, 1) * (tt * c - c * tt);
    r -= gamma_phi * c;
    r.diagonal() += gamma_phi * c.diagonal();
    out = Eigen::Map<const Vec>(r.data(), r.size());
  };
  OdeOptions o = opt;
  o.rtol = std::min(o.rtol, 1e-10);
  o.atol = std::min(o.atol, 1e-12);
  std::vector<Mat> out;
  for (const Vec& v : ode_solve(f, Eigen::Map<const Vec>(c0.data(), c0.size()), t_grid, o))
    out.push_back(Eigen::Map<const Mat>(v.data(), n, n));
  return out;
}

ThirdQuantSpectrum third_quantization_spectrum(double omega_c, double kappa_minus, double kappa_plus, int n_levels) {
  if (!(kappa_minus > kappa_plus) || kappa_plus < 0) throw InputError("need kappa_minus > kappa_plus >= 0");
  if (n_levels < 0) throw InputError("n_levels must be >= 0");
  ThirdQuantSpectrum s;
  s.eta = (kappa_minus + kappa_plus) / (kappa_minus - kappa_plus);
  const double half = 0.5 * (kappa_minus - kappa_plus);
  for (int tot = 0; tot <= n_levels; ++tot)
    for (int mu = 0; mu <= tot; ++mu) {
      const int nu = tot - mu;
      const cd lam(omega_c * (mu - nu), -half * (mu + nu));
      s.modes.push_back({mu, nu, lam, cd(0, -1) * lam});
    }
  return s;
}

QuadraticModel kitaev_dissipative_chain(int n_sites, double gamma, bool periodic) {
  if (n_sites < 2) throw InputError("Kitaev chain needs at least two sites");
  if (gamma < 0) throw InputError("gamma must be >= 0");
  QuadraticModel m;
  m.statistics = Statistics::Fermion;
  m.h = Mat::Zero(n_sites, n_sites);
  const int bonds = periodic ? n_sites : n_sites - 1;
  const double s = std::sqrt(gamma) * 0.5;
  for (int b = 0; b < bonds; ++b) {
    const int i = b, j = (b + 1) % n_sites;
    LinearJump l{Vec::Zero(n_sites), Vec::Zero(n_sites)};
    l.p(i) += s;
    l.p(j) -= s;
    l.q(i) += s;
    l.q(j) += s;
    m.jumps.push_back(l);
  }
  return m;
}

DampingModes damping_modes(const QuadraticModel& m, double tol) {
  if (m.statistics != Statistics::Fermion) throw InputError("damping_modes expects a fermionic model");
  const CovarianceGenerator g = covariance_generator(m);
  EigResult e = eig(g.x, true);
  const int d = static_cast<int>(e.values.size());
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return e.values(a).real() > e.values(b).real(); });
  DampingModes out;
  out.rates.resize(d);
  out.vectors.resize(d, d);
  for (int i = 0; i < d; ++i) {
    out.rates(i) = -2.0 * e.values(order[i]).real();
    out.vectors.col(i) = e.right.col(order[i]);
    if (std::abs(out.rates(i)) < tol) out.dark.push_back(i);
  }
  return out;
}

DampingModes majorana_dark_modes(int n_sites, double gamma, bool periodic) {
  if (periodic) throw InputError("periodic Kitaev chain has no edge modes");
  if (n_sites < 2) throw InputError("Kitaev chain needs at least two sites");
  return damping_modes(kitaev_dissipative_chain(n_sites, gamma, false));
}

std::string correlations_csv(const std::vector<CorrelationMatrix>& series) {
  std::ostringstream os;
  os << std::setprecision(15) << "i,j,re,im,t\n";
  for (const auto& c : series)
    for (int i = 0; i < c.c.rows(); ++i)
      for (int j = 0; j < c.c.cols(); ++j)
        os << i << ',' << j << ',' << c.c(i, j).real() << ',' << c.c(i, j).imag() << ',' << c.t << '\n';
  return os.str();
}

}  // namespace oqs
