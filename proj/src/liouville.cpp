#include "oqs/liouville.hpp"

#include <json.hpp>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace oqs {

Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unvec(const Vec& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d) throw InputError("unvec: size mismatch");
  return Eigen::Map<const Mat>(v.data(), d, d);
}

Operator SuperOperator::apply(const Operator& rho) const {
  if (rho.dim() != d) throw InputError("SuperOperator::apply: dimension mismatch");
  Vec y = matrix * vec(rho.matrix);
  return {unvec(y, d), basis};
}

namespace {

SpMat sparse_identity(int d) {
  SpMat i(d, d);
  i.setIdentity();
  return i;
}

SpMat kron(const SpMat& a, const SpMat& b) {
  SpMat out;
  out = Eigen::kroneckerProduct(a, b);
  return out;
}

double l1_norm(const SpMat& m) {
  double best = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    double s = 0.0;
    for (SpMat::InnerIterator it(m, k); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

// descending real part, then ascending |Im|, then ascending Im
std::vector<int> spectral_order(const Vec& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const cd x = v[a], y = v[b];
    const double tol = 1e-12 * (1.0 + std::max(std::abs(x), std::abs(y)));
    if (std::abs(x.real() - y.real()) > tol) return x.real() > y.real();
    if (std::abs(std::abs(x.imag()) - std::abs(y.imag())) > tol) return std::abs(x.imag()) < std::abs(y.imag());
    return x.imag() < y.imag();
  });
  return idx;
}

Mat herm(const Mat& m) { return 0.5 * (m + m.adjoint()); }

// Normalize a kernel vector into a density matrix.
Operator density_from_vector(const Vec& r, int d, const Basis& b, bool strict) {
  Mat x = unvec(r, d);
  cd tr = x.trace();
  if (std::abs(tr) < 1e-12 * x.norm()) throw NumericalError("steady state: kernel vector is traceless");
  x = herm(x / tr);
  Eigen::SelfAdjointEigenSolver<Mat> es(x);
  RVec w = es.eigenvalues();
  if (strict && w.minCoeff() < -1e-8)
    throw NumericalError("steady state: negative eigenvalue " + std::to_string(w.minCoeff()));
  for (auto& v : w)
    if (v < 0 && v >= -1e-8) v = 0.0;
  x = es.eigenvectors() * w.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
  x /= x.trace().real();
  return {herm(x), b};
}

}  // namespace

SuperOperator vectorize(const Operator& h, const std::vector<Operator>& jumps) {
  const int d = h.dim();
  if (d > kMaxDim) throw ResourceError("vectorize: dimension " + std::to_string(d) + " exceeds cap " + std::to_string(kMaxDim));
  for (const auto& l : jumps)
    if (l.dim() != d) throw InputError("vectorize: jump operator dimension mismatch");
  const SpMat id = sparse_identity(d);
  const SpMat hs = to_sparse(h.matrix);
  SpMat out = (-I1) * (kron(id, hs) - kron(SpMat(hs.transpose()), id));
  for (const auto& l : jumps) {
    const SpMat ls = to_sparse(l.matrix);
    const SpMat ldl = to_sparse(l.matrix.adjoint() * l.matrix);
    out += kron(SpMat(ls.conjugate()), ls);
    out -= 0.5 * kron(id, ldl);
    out -= 0.5 * kron(SpMat(ldl.transpose()), id);
  }
  out.prune(cd(0.0), 0.0);
  out.makeCompressed();
  return {out, h.basis, d};
}

SuperOperator vectorize(const ModelSpec& model) {
  if (model.dim() > kMaxDim) throw ResourceError("vectorize: model dimension exceeds cap");
  return vectorize(model.hamiltonian(), model.jumps());
}

Operator lindblad_apply(const Operator& h, const std::vector<Operator>& jumps, const Operator& rho) {
  Mat out = -I1 * (h.matrix * rho.matrix - rho.matrix * h.matrix);
  for (const auto& l : jumps) {
    Mat ldl = l.matrix.adjoint() * l.matrix;
    out += l.matrix * rho.matrix * l.matrix.adjoint() - 0.5 * (ldl * rho.matrix + rho.matrix * ldl);
  }
  return {out, rho.basis};
}

Operator lindblad_apply(const ModelSpec& model, const Operator& rho) {
  return lindblad_apply(model.hamiltonian(), model.jumps(), rho);
}

Operator adjoint_apply(const Operator& h, const std::vector<Operator>& jumps, const Operator& o) {
  Mat out = I1 * (h.matrix * o.matrix - o.matrix * h.matrix);
  for (const auto& l : jumps) {
    Mat ldl = l.matrix.adjoint() * l.matrix;
    out += l.matrix.adjoint() * o.matrix * l.matrix - 0.5 * (ldl * o.matrix + o.matrix * ldl);
  }
  return {out, o.basis};
}

Operator adjoint_apply(const ModelSpec& model, const Operator& o) {
  return adjoint_apply(model.hamiltonian(), model.jumps(), o);
}

void check_density_matrix(const Operator& rho, double tol) {
  const Mat& m = rho.matrix;
  if (m.rows() == 0) throw InputError("density matrix is empty");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) throw InputError("density matrix is not Hermitian");
  if (std::abs(m.trace() - 1.0) > tol) throw InputError("density matrix does not have unit trace");
  if (eigvalsh(herm(m)).minCoeff() < -tol) throw InputError("density matrix is not positive");
}

EvolveResult evolve(const SuperOperator& l, const Operator& rho0, const std::vector<double>& t_grid,
                    const OdeOptions& opt) {
  if (rho0.dim() != l.d) throw InputError("evolve: initial state dimension mismatch");
  check_density_matrix(rho0);
  auto rhs = [&](double, const Vec& y, Vec& dy) { dy.noalias() = l.matrix * y; };
  auto ys = ode_solve(RhsC(rhs), vec(rho0.matrix), t_grid, opt);
  EvolveResult r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& y : ys) {
    Mat x = unvec(y, l.d);
    if ((x - x.adjoint()).cwiseAbs().maxCoeff() > 1e-8 || std::abs(x.trace() - 1.0) > 1e-8)
      throw NumericalError("evolve: trace or Hermiticity drifted beyond 1e-8");
    x = herm(x);
    r.min_eigenvalue = std::min(r.min_eigenvalue, eigvalsh(x).minCoeff());
    r.states.emplace_back(std::move(x), rho0.basis);
  }
  r.positivity_violated = r.min_eigenvalue < -1e-6;
  return r;
}

Operator propagate_expm(const SuperOperator& l, const Operator& rho0, double t) {
  if (l.size() > 400) throw ResourceError("propagate_expm: only for d^2 <= 400");
  Mat e = (l.dense() * t).exp();
  return {unvec(e * vec(rho0.matrix), l.d), rho0.basis};
}

// ---- spectra ----

Operator SpectralData::right_mode(int mu) const {
  if (right.cols() <= mu) throw InputError("right_mode: eigenvectors not available");
  return {unvec(right.col(mu), d), basis};
}

Operator SpectralData::left_mode(int mu) const {
  if (left.cols() <= mu) throw InputError("left_mode: eigenvectors not available");
  return {unvec(left.col(mu), d), basis};
}

SpectralData spectrum(const SuperOperator& l, bool vectors, const SpectrumOptions& opt) {
  if (l.size() > opt.max_dense)
    throw ResourceError("spectrum: superoperator dimension " + std::to_string(l.size()) +
                        " above dense cap; use slow_modes");
  EigResult e = eig(l.dense(), vectors);
  auto order = spectral_order(e.values);
  const int n = static_cast<int>(order.size());
  SpectralData s;
  s.d = l.d;
  s.basis = l.basis;
  s.values.resize(n);
  for (int k = 0; k < n; ++k) s.values[k] = e.values[order[k]];
  s.scale = n ? s.values.cwiseAbs().maxCoeff() : 0.0;
  if (vectors) {
    s.right.resize(n, n);
    s.left.resize(n, n);
    for (int k = 0; k < n; ++k) {
      s.right.col(k) = e.right.col(order[k]);
      s.left.col(k) = e.left.col(order[k]);
    }
    // biorthonormalize inside clusters of (numerically) degenerate eigenvalues
    const double ctol = 1e-8 * std::max(1.0, s.scale);
    for (int k = 0; k < n;) {
      int end = k + 1;
      while (end < n && std::abs(s.values[end] - s.values[k]) < ctol) ++end;
      const int m = end - k;
      Mat g = s.left.middleCols(k, m).adjoint() * s.right.middleCols(k, m);
      Eigen::FullPivLU<Mat> lu(g);
      if (lu.isInvertible()) s.left.middleCols(k, m) = s.left.middleCols(k, m) * lu.inverse().adjoint();
      k = end;
    }
    Mat g = s.left.adjoint() * s.right;
    g -= Mat::Identity(n, n);
    s.defect = n ? g.cwiseAbs().maxCoeff() : 0.0;
  }
  return s;
}

SpectralData slow_modes(const SpMat& block, int nev, cd sigma) {
  const int n = static_cast<int>(block.rows());
  const double norm = l1_norm(block);
  // L itself is singular; shift off zero so the factorization stays regular
  if (sigma == cd(0.0)) sigma = cd(1e-7 * norm, 0.0);
  SparseEigResult r = eigs_near(block, sigma, std::min(nev, n - 2), true);
  auto order = spectral_order(r.values);
  SpectralData s;
  s.complete = false;
  s.values.resize(order.size());
  s.right.resize(n, order.size());
  for (size_t k = 0; k < order.size(); ++k) {
    s.values[k] = r.values[order[k]];
    s.right.col(k) = r.vectors.col(order[k]);
  }
  s.scale = norm;
  return s;
}

SpectralData slow_modes(const SuperOperator& l, int nev, cd sigma) {
  SpectralData s = slow_modes(l.matrix, nev, sigma);
  s.d = l.d;
  s.basis = l.basis;
  return s;
}

int kernel_count(const SpectralData& s, double zero_tol_rel) {
  const double tol = zero_tol_rel * std::max(s.scale, 1e-300);
  int k = 0;
  for (auto v : s.values)
    if (std::abs(v) <= tol) ++k;
  return k;
}

double adr(const SpectralData& s, double zero_tol_rel) {
  const double tol = zero_tol_rel * std::max(s.scale, 1e-300);
  double best = std::numeric_limits<double>::infinity();
  for (auto v : s.values)
    if (std::abs(v) > tol) best = std::min(best, -v.real());
  if (!std::isfinite(best)) throw NumericalError("adr: no nonzero modes");
  return best;
}

Vec decay_coefficients(const SpectralData& s, const Operator& rho0) {
  if (s.left.cols() == 0) throw InputError("decay_coefficients: left eigenvectors not available");
  return s.left.adjoint() * vec(rho0.matrix);
}

SteadyState steady_state(const SuperOperator& l, const SpectrumOptions& opt) {
  SteadyState out;
  Vec r;
  if (l.size() <= opt.max_dense) {
    EigResult e = eig(l.dense(), true);
    const double scale = e.values.cwiseAbs().maxCoeff();
    const double tol = opt.zero_tol_rel * scale;
    int best = 0;
    int kd = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < e.values.size(); ++i) {
      double a = std::abs(e.values[i]);
      if (a < std::abs(e.values[best])) best = i;
      if (a <= tol)
        ++kd;
      else
        gap = std::min(gap, a);
    }
    if (kd == 0) throw NumericalError("steady state: no eigenvalue within tolerance of zero");
    if (gap < 100.0 * tol) throw NumericalError("steady state: kernel ill-conditioned (eigenvalue near tolerance)");
    out.kernel_dim = kd;
    r = e.right.col(best);
  } else {
    const double norm = l1_norm(l.matrix);
    const double tol = opt.zero_tol_rel * norm;
    int nev = std::max(2, opt.nev);
    while (true) {
      SparseEigResult e = eigs_near(l.matrix, cd(1e-7 * norm, 0.0), nev, true);
      int kd = 0, best = 0;
      for (int i = 0; i < e.values.size(); ++i) {
        if (std::abs(e.values[i]) <= tol) ++kd;
        if (std::abs(e.values[i]) < std::abs(e.values[best])) best = i;
      }
      if (kd == 0) throw NumericalError("steady state: no eigenvalue within tolerance of zero");
      if (kd < e.values.size() || nev >= 64 || nev >= l.size() - 3) {
        out.kernel_dim = kd;
        r = e.vectors.col(best);
        break;
      }
      nev *= 2;
    }
  }
  out.rho = density_from_vector(r, l.d, l.basis, out.kernel_dim == 1);
  out.residual = (l.matrix * vec(out.rho.matrix)).norm();
  return out;
}

// ---- sectors ----

namespace {

std::vector<int> integer_charges(const Operator& charge, int d) {
  if (charge.dim() != d) throw InputError("charge dimension mismatch");
  const Mat& q = charge.matrix;
  Mat off = q;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() > 1e-12) throw InputError("charge must be diagonal in the product basis");
  std::vector<int> out(d);
  const double q0 = q(0, 0).real();
  for (int i = 0; i < d; ++i) {
    if (std::abs(q(i, i).imag()) > 1e-12) throw InputError("charge must be Hermitian");
    double dq = q(i, i).real() - q0;
    if (std::abs(dq - std::round(dq)) > 1e-9) throw InputError("charge eigenvalues are not integer spaced");
    out[i] = static_cast<int>(std::lround(dq));
  }
  return out;
}

template <class Key>
SectorDecomposition split(const SuperOperator& l, const std::vector<Key>& label) {
  double bad = 0.0;
  for (int k = 0; k < l.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(l.matrix, k); it; ++it)
      if (label[it.row()] != label[it.col()]) bad += std::norm(it.value());
  SectorDecomposition out;
  out.defect = std::sqrt(bad) / std::max(l.matrix.norm(), 1e-300);
  std::map<Key, std::vector<int>> groups;
  for (int i = 0; i < static_cast<int>(label.size()); ++i) groups[label[i]].push_back(i);
  for (auto& [key, idx] : groups) {
    SectorBlock b;
    if constexpr (std::is_same_v<Key, int>) {
      b.k = key;
    } else {
      b.q_left = key.first;
      b.q_right = key.second;
      b.k = key.first - key.second;
    }
    b.indices = std::move(idx);
    out.blocks.push_back(std::move(b));
  }
  return out;
}

}  // namespace

SectorDecomposition symmetry_sectors(const SuperOperator& l, const Operator& charge) {
  auto q = integer_charges(charge, l.d);
  std::vector<int> label(l.size());
  for (int j = 0; j < l.d; ++j)
    for (int i = 0; i < l.d; ++i) label[i + l.d * j] = q[i] - q[j];
  auto out = split(l, label);
  if (out.defect > 1e-9) throw InputError("symmetry check failed: defect " + std::to_string(out.defect));
  return out;
}

SectorDecomposition strong_symmetry_sectors(const SuperOperator& l, const Operator& charge) {
  auto q = integer_charges(charge, l.d);
  std::vector<std::pair<int, int>> label(l.size());
  for (int j = 0; j < l.d; ++j)
    for (int i = 0; i < l.d; ++i) label[i + l.d * j] = {q[i], q[j]};
  auto out = split(l, label);
  out.strong = true;
  if (out.defect > 1e-9) throw InputError("strong symmetry check failed: defect " + std::to_string(out.defect));
  return out;
}

SpMat restrict_block(const SuperOperator& l, const std::vector<int>& indices) {
  std::vector<int> map(l.size(), -1);
  for (int k = 0; k < static_cast<int>(indices.size()); ++k) map[indices[k]] = k;
  std::vector<Eigen::Triplet<cd>> trip;
  for (int c : indices)
    for (SpMat::InnerIterator it(l.matrix, c); it; ++it)
      if (map[it.row()] >= 0) trip.emplace_back(map[it.row()], map[c], it.value());
  const int n = static_cast<int>(indices.size());
  SpMat out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SpectralData spectrum_by_sectors(const SuperOperator& l, const SectorDecomposition& sec, const SpectrumOptions& opt) {
  std::vector<cd> vals;
  std::vector<int> lab;
  SpectralData s;
  s.d = l.d;
  s.basis = l.basis;
  const bool strong = sec.strong;
  for (size_t bi = 0; bi < sec.blocks.size(); ++bi) {
    const auto& b = sec.blocks[bi];
    SpMat blk = restrict_block(l, b.indices);
    const int n = static_cast<int>(b.indices.size());
    Vec v;
    if (n <= opt.max_dense) {
      v = eigvals(Mat(blk));
    } else {
      v = eigs_near(blk, cd(1e-7 * l1_norm(blk), 0.0), std::min(opt.nev, n - 2), false).values;
      s.complete = false;
    }
    for (auto x : v) {
      vals.push_back(x);
      lab.push_back(strong ? static_cast<int>(bi) : b.k);
    }
  }
  Vec all = Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  auto order = spectral_order(all);
  s.values.resize(order.size());
  for (size_t k = 0; k < order.size(); ++k) {
    s.values[k] = all[order[k]];
    s.sector.push_back(lab[order[k]]);
  }
  s.scale = s.complete ? (s.size() ? s.values.cwiseAbs().maxCoeff() : 0.0) : l1_norm(l.matrix);
  return s;
}

// ---- correlations ----

std::vector<cd> two_time_correlation(const SuperOperator& l, const Operator& rho_ss, const Operator& a,
                                     const Operator& b, const std::vector<double>& tau_grid, const OdeOptions& opt) {
  if (tau_grid.empty() || tau_grid.front() != 0.0) throw InputError("two_time_correlation: tau grid must start at 0");
  const double res = (l.matrix * vec(rho_ss.matrix)).norm();
  if (res > 1e-7 * std::max(1.0, l.matrix.norm())) throw InputError("two_time_correlation: rho_ss is not stationary");
  auto rhs = [&](double, const Vec& y, Vec& dy) { dy.noalias() = l.matrix * y; };
  auto ys = ode_solve(RhsC(rhs), vec(b.matrix * rho_ss.matrix), tau_grid, opt);
  std::vector<cd> out;
  out.reserve(ys.size());
  for (const auto& y : ys) out.push_back((a.matrix * unvec(y, l.d)).trace());
  return out;
}

FdtResult fdt_ratio(const SuperOperator& l, const Operator& rho_ss, const Operator& a,
                    const std::vector<double>& omega_grid, const FdtOptions& opt) {
  a.assert_hermitian(1e-12);
  if (omega_grid.empty()) throw InputError("fdt_ratio: empty frequency grid");
  const int n = l.size();
  const double res = (l.matrix * vec(rho_ss.matrix)).norm();
  if (res > 1e-7 * std::max(1.0, l.matrix.norm())) throw InputError("fdt_ratio: rho_ss is not stationary");
  double wmax = 1.0;
  for (double w : omega_grid) wmax = std::max(wmax, std::abs(w));
  const double dt = opt.dtau > 0 ? opt.dtau : 0.02 / wmax;
  const int block = 2000;

  // both correlators in one state: <A(tau)A> from A rho, <A A(tau)> from rho A
  Vec y(2 * n);
  y.head(n) = vec(a.matrix * rho_ss.matrix);
  y.tail(n) = vec(rho_ss.matrix * a.matrix);
  auto rhs = [&](double, const Vec& x, Vec& dx) {
    dx.resize(x.size());
    dx.head(n).noalias() = l.matrix * x.head(n);
    dx.tail(n).noalias() = l.matrix * x.tail(n);
  };
  auto corr = [&](const Vec& x, cd& c1, cd& c2) {
    c1 = (a.matrix * unvec(x.head(n), l.d)).trace();
    c2 = (a.matrix * unvec(x.tail(n), l.d)).trace();
  };

  std::vector<double> s_tau, k_tau;  // S(tau) real, commutator/i real
  cd c1, c2;
  corr(y, c1, c2);
  s_tau.push_back(0.5 * (c1 + c2).real());
  k_tau.push_back(((c1 - c2) / I1).real());
  const double s0 = std::abs(s_tau[0]);
  if (s0 == 0.0) throw NumericalError("fdt_ratio: vanishing equal-time correlator");

  double t = 0.0, prev_max = std::numeric_limits<double>::infinity(), last_max = 0.0;
  while (true) {
    std::vector<double> grid(block + 1);
    for (int k = 0; k <= block; ++k) grid[k] = t + k * dt;
    auto ys = ode_solve(RhsC(rhs), y, grid, OdeOptions{1e-10, 1e-12});
    double m = 0.0;
    for (int k = 1; k <= block; ++k) {
      corr(ys[k], c1, c2);
      s_tau.push_back(0.5 * (c1 + c2).real());
      k_tau.push_back(((c1 - c2) / I1).real());
      m = std::max({m, std::abs(c1), std::abs(c2)});
    }
    y = ys.back();
    t = grid.back();
    prev_max = last_max > 0 ? last_max : prev_max;
    last_max = m;
    if (m < opt.envelope * s0) break;
    if (t > opt.max_tau) throw NumericalError("fdt_ratio: correlator did not decay within max_tau");
  }

  FdtResult r;
  r.t_max = t;
  const double window = block * dt;
  double rate = std::isfinite(prev_max) && prev_max > last_max ? std::log(prev_max / last_max) / window : 0.0;
  r.tail_estimate = rate > 0 ? 2.0 * last_max / rate : 2.0 * last_max * window;

  double chi_max = 0.0;
  const size_t m = s_tau.size();
  for (double w : omega_grid) {
    double sw = 0.0, cw = 0.0;
    for (size_t k = 0; k < m; ++k) {
      const double wt = (k == 0 || k + 1 == m) ? 0.5 : 1.0;
      const double tau = k * dt;
      sw += wt * std::cos(w * tau) * s_tau[k];
      // chi(tau) = i * (i k_tau) = -k_tau ; Im of int e^{i w tau} chi(tau)
      cw += wt * std::sin(w * tau) * (-k_tau[k]);
    }
    r.omega.push_back(w);
    r.s.push_back(2.0 * sw * dt);
    r.chi_im.push_back(cw * dt);
    chi_max = std::max(chi_max, std::abs(cw * dt));
  }
  for (size_t i = 0; i < r.omega.size(); ++i) {
    if (std::abs(r.chi_im[i]) < opt.noise_floor * chi_max || std::abs(r.chi_im[i]) < r.tail_estimate)
      throw NumericalError("fdt_ratio: Im chi below noise floor at omega = " + std::to_string(r.omega[i]));
    r.ratio.push_back(r.s[i] / r.chi_im[i]);
  }
  return r;
}

// ---- metastability ----

MetastableSplit metastable_split(const SpectralData& s, double zero_tol_rel) {
  const int mu = kernel_count(s, zero_tol_rel);
  if (mu != 1) throw InputError("metastable_split: needs a unique steady state");
  if (s.size() <= mu || s.right.cols() <= mu) throw InputError("metastable_split: first decaying mode not available");
  Mat x = unvec(s.right.col(mu), s.d);
  // Decaying modes are traceless. Near-degenerate slow modes pick up a small admixture of the
  // steady state; removing the trace removes it.
  Mat r0 = unvec(s.right.col(0), s.d);
  x -= (x.trace() / r0.trace()) * r0;
  const cd c = (x.adjoint() * x.adjoint()).trace();
  const double theta = 0.5 * std::arg(c);
  Mat y = std::exp(I1 * theta) * x;
  MetastableSplit out;
  out.lambda = s.values[mu];
  out.residual = (y - y.adjoint()).norm() / y.norm();
  if (out.residual > 1e-6)
    throw NumericalError("metastable_split: first mode not Hermitizable (residual " + std::to_string(out.residual) + ")");
  Eigen::SelfAdjointEigenSolver<Mat> es(herm(y));
  const RVec w = es.eigenvalues();
  RVec pos = w.cwiseMax(0.0), neg = (-w).cwiseMax(0.0);
  if (pos.sum() <= 0 || neg.sum() <= 0) throw NumericalError("metastable_split: mode is not traceless");
  const Mat& v = es.eigenvectors();
  out.lower = {herm(v * (pos / pos.sum()).cast<cd>().asDiagonal() * v.adjoint()), s.basis};
  out.upper = {herm(v * (neg / neg.sum()).cast<cd>().asDiagonal() * v.adjoint()), s.basis};
  return out;
}

// ---- perturbation theory ----

Operator perturbative_steady_state(const SuperOperator& l0, const SuperOperator& l1, double eps, int order) {
  if (l0.d != l1.d) throw InputError("perturbative_steady_state: dimension mismatch");
  if (order < 0) throw InputError("perturbative_steady_state: negative order");
  if (l0.size() > kMaxDenseSuper) throw ResourceError("perturbative_steady_state: above dense cap");
  SteadyState ss = steady_state(l0);
  if (ss.kernel_dim != 1) throw InputError("perturbative_steady_state: degenerate L0 kernel");
  const Vec r0 = vec(ss.rho.matrix);
  // Minimum-norm least squares is the Moore-Penrose inverse; the kernel part is then fixed by
  // requiring each correction to be traceless.
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(l0.dense());
  cod.setThreshold(1e-10);
  Vec term = r0, total = r0;
  double p = 1.0;
  for (int i = 1; i <= order; ++i) {
    Vec b = -(l1.matrix * term);
    Vec x = cod.solve(b);
    x -= unvec(x, l0.d).trace() * r0;
    term = x;
    p *= eps;
    total += p * term;
  }
  return {herm(unvec(total, l0.d)), l0.basis};
}

// ---- export ----

std::string spectrum_csv(const SpectralData& s) {
  std::ostringstream os;
  os.precision(17);
  os << "re,im,sector\n";
  for (int i = 0; i < s.size(); ++i) {
    os << s.values[i].real() << ',' << s.values[i].imag() << ',';
    if (!s.sector.empty()) os << s.sector[i];
    os << '\n';
  }
  return os.str();
}

std::string spectrum_json(const SpectralData& s) {
  nlohmann::json j;
  j["eigenvalues"] = nlohmann::json::array();
  for (int i = 0; i < s.size(); ++i) j["eigenvalues"].push_back({s.values[i].real(), s.values[i].imag()});
  if (!s.sector.empty()) j["sector"] = s.sector;
  j["biorthogonality_defect"] = s.defect;
  j["complete"] = s.complete;
  j["scale"] = s.scale;
  return j.dump();
}

}  // namespace oqs
