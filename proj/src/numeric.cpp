#include "oqs/numeric.hpp"

#include <arpack/arpack.hpp>
#include <lapacke.h>

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace oqs {

EigResult eig(const Mat& a, bool vectors) {
  if (a.rows() != a.cols()) throw InputError("eig: matrix not square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Mat work = a;
  EigResult r;
  r.values.resize(n);
  if (vectors) {
    r.right.resize(n, n);
    r.left.resize(n, n);
  }
  if (n == 0) return r;
  auto* ap = reinterpret_cast<lapack_complex_double*>(work.data());
  auto* wp = reinterpret_cast<lapack_complex_double*>(r.values.data());
  auto* vl = vectors ? reinterpret_cast<lapack_complex_double*>(r.left.data()) : nullptr;
  auto* vr = vectors ? reinterpret_cast<lapack_complex_double*>(r.right.data()) : nullptr;
  lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', vectors ? 'V' : 'N', n,
                                  ap, n, wp, vl, n, vr, n);
  if (info != 0) throw NumericalError("zgeev failed with info " + std::to_string(info));
  return r;
}

Vec eigvals(const Mat& a) { return eig(a, false).values; }

RVec eigvalsh(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Mat sqrtm_psd(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
  RVec w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const Mat& a, const Mat& b) {
  Mat sa = sqrtm_psd(a);
  Mat m = sa * b * sa;
  RVec w = eigvalsh(0.5 * (m + m.adjoint()));
  double f = 0.0;
  for (double x : w) f += std::sqrt(std::max(x, 0.0));
  return f;
}

double trace_distance(const Mat& a, const Mat& b) {
  Mat d = a - b;
  RVec w = eigvalsh(0.5 * (d + d.adjoint()));
  return 0.5 * w.cwiseAbs().sum();
}

SparseEigResult eigs_near(const SpMat& a, cd sigma, int nev, bool vectors, int ncv, double tol) {
  const int n = static_cast<int>(a.rows());
  if (nev < 1 || nev >= n - 1) throw InputError("eigs_near: need 1 <= nev < n-1");
  if (ncv <= 0) ncv = std::max(2 * nev + 1, 24);
  ncv = std::min(ncv, n);

  SpMat shifted = a;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
  shifted.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw NumericalError("eigs_near: sparse LU failed");

  a_int ido = 0, info = 1;
  std::vector<cd> resid(n), v(static_cast<size_t>(n) * ncv), workd(3 * static_cast<size_t>(n));
  const a_int lworkl = 3 * ncv * ncv + 5 * ncv;
  std::vector<cd> workl(lworkl);
  std::vector<double> rwork(ncv);
  a_int iparam[11] = {0}, ipntr[14] = {0};
  iparam[0] = 1;
  iparam[2] = 3000;
  iparam[6] = 1;
  // deterministic start vector
  for (int i = 0; i < n; ++i) resid[i] = cd(1.0 + 0.37 * std::sin(1.3 * i + 0.2), 0.11 * std::cos(0.7 * i));

  Vec x(n), y(n);
  while (true) {
    arpack::naupd(ido, arpack::bmat::identity, n, arpack::which::largest_magnitude, nev, tol,
                  resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(),
                  lworkl, rwork.data(), info);
    if (ido == -1 || ido == 1) {
      Eigen::Map<Vec> in(workd.data() + ipntr[0] - 1, n);
      Eigen::Map<Vec> out(workd.data() + ipntr[1] - 1, n);
      out = lu.solve(Vec(in));
    } else {
      break;
    }
  }
  if (info < 0) throw NumericalError("znaupd failed with info " + std::to_string(info));
  if (info == 1) throw NumericalError("znaupd: maximum iterations reached");

  std::vector<a_int> select(ncv, 1);
  std::vector<cd> d(nev + 1), z(static_cast<size_t>(n) * (nev + 1)), workev(2 * ncv);
  a_int rvec = vectors ? 1 : 0;
  a_int info2 = 0;
  arpack::neupd(rvec, arpack::howmny::ritz_vectors, select.data(), d.data(), z.data(), n, cd(0.0),
                workev.data(), arpack::bmat::identity, n, arpack::which::largest_magnitude, nev,
                tol, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(),
                lworkl, rwork.data(), info2);
  if (info2 != 0) throw NumericalError("zneupd failed with info " + std::to_string(info2));

  const int nconv = static_cast<int>(iparam[4]);
  std::vector<int> order(nconv);
  for (int i = 0; i < nconv; ++i) order[i] = i;
  // sort by distance to sigma (largest |theta| first)
  std::sort(order.begin(), order.end(), [&](int i, int j) { return std::abs(d[i]) > std::abs(d[j]); });
  SparseEigResult r;
  r.values.resize(nconv);
  if (vectors) r.vectors.resize(n, nconv);
  for (int k = 0; k < nconv; ++k) {
    int i = order[k];
    r.values[k] = sigma + 1.0 / d[i];
    if (vectors) r.vectors.col(k) = Eigen::Map<Vec>(z.data() + static_cast<size_t>(i) * n, n);
  }
  return r;
}

namespace {

template <class V>
double err_norm(const V& e, const V& y0, const V& y1, double atol, double rtol) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double q = std::abs(e[i]) / sc;
    s += q * q;
  }
  return e.size() ? std::sqrt(s / static_cast<double>(e.size())) : 0.0;
}

template <class V>
std::vector<V> dopri(const std::function<void(double, const V&, V&)>& f, const V& y0,
                     const std::vector<double>& tg, const OdeOptions& opt) {
  static constexpr double c2 = 1. / 5, c3 = 3. / 10, c4 = 4. / 5, c5 = 8. / 9;
  static constexpr double a21 = 1. / 5;
  static constexpr double a31 = 3. / 40, a32 = 9. / 40;
  static constexpr double a41 = 44. / 45, a42 = -56. / 15, a43 = 32. / 9;
  static constexpr double a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561,
                          a54 = -212. / 729;
  static constexpr double a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247,
                          a64 = 49. / 176, a65 = -5103. / 18656;
  static constexpr double b1 = 35. / 384, b3 = 500. / 1113, b4 = 125. / 192, b5 = -2187. / 6784,
                          b6 = 11. / 84;
  static constexpr double e1 = 71. / 57600, e3 = -71. / 16695, e4 = 71. / 1920,
                          e5 = -17253. / 339200, e6 = 22. / 525, e7 = -1. / 40;

  std::vector<V> out;
  if (tg.empty()) return out;
  for (size_t i = 1; i < tg.size(); ++i)
    if (tg[i] < tg[i - 1]) throw InputError("ode_solve: time grid must be nondecreasing");
  out.reserve(tg.size());
  out.push_back(y0);
  double t = tg.front();
  V y = y0, k1, k2, k3, k4, k5, k6, k7, yt, ynew, err;
  f(t, y, k1);
  double h = opt.h0;
  if (h <= 0.0) {
    double d0 = y.norm(), d1 = k1.norm();
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    double span = tg.back() - tg.front();
    if (span > 0) h = std::min(h, span);
  }
  long steps = 0;
  for (size_t gi = 1; gi < tg.size(); ++gi) {
    const double tend = tg[gi];
    while (t < tend) {
      if (++steps > opt.max_steps) throw NumericalError("ode_solve: step budget exhausted");
      if (opt.hmax > 0) h = std::min(h, opt.hmax);
      bool last = false;
      if (t + h >= tend) {
        h = tend - t;
        last = true;
      }
      yt = y + h * a21 * k1;
      f(t + c2 * h, yt, k2);
      yt = y + h * (a31 * k1 + a32 * k2);
      f(t + c3 * h, yt, k3);
      yt = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      f(t + c4 * h, yt, k4);
      yt = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(t + c5 * h, yt, k5);
      yt = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(t + h, yt, k6);
      ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      f(t + h, ynew, k7);
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double en = err_norm(err, y, ynew, opt.atol, opt.rtol);
      if (!std::isfinite(en)) throw NumericalError("ode_solve: non-finite error estimate");
      if (en <= 1.0) {
        t = last ? tend : t + h;
        y = ynew;
        k1 = k7;
        double fac = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
        if (!last) h *= fac;
      } else {
        h *= std::max(0.1, 0.9 * std::pow(en, -0.2));
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
          throw NumericalError("ode_solve: step size underflow");
      }
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace

std::vector<Vec> ode_solve(const RhsC& f, const Vec& y0, const std::vector<double>& t_grid,
                           const OdeOptions& opt) {
  return dopri<Vec>(f, y0, t_grid, opt);
}

std::vector<RVec> ode_solve(const RhsR& f, const RVec& y0, const std::vector<double>& t_grid,
                            const OdeOptions& opt) {
  return dopri<RVec>(f, y0, t_grid, opt);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  v.back() = b;
  return v;
}

std::vector<double> logspace(double a, double b, int n) {
  if (a <= 0 || b <= 0) throw InputError("logspace: endpoints must be positive");
  auto l = linspace(std::log(a), std::log(b), n);
  for (auto& x : l) x = std::exp(x);
  l.front() = a;
  l.back() = b;
  return l;
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("linear_fit: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

SpMat to_sparse(const Mat& m, double tol) {
  std::vector<Eigen::Triplet<cd>> tr;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, j)) > tol) tr.emplace_back(static_cast<int>(i), static_cast<int>(j), m(i, j));
  SpMat s(m.rows(), m.cols());
  s.setFromTriplets(tr.begin(), tr.end());
  return s;
}

}  // namespace oqs
