#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oqs {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<cd>;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cd I1{0.0, 1.0};

/// Bad input: unknown names, out-of-range indices, violated preconditions.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A solve that ran but did not meet its tolerance.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Problem too large for the configured caps.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense general eigendecomposition (LAPACK zgeev).
struct EigResult {
  Vec values;
  Mat right;  // columns
  Mat left;   // columns, l^H A = lambda l^H
};
EigResult eig(const Mat& a, bool vectors = true);
Vec eigvals(const Mat& a);

/// Eigenvalues of a Hermitian matrix, ascending.
RVec eigvalsh(const Mat& a);

/// Matrix square root of a positive semidefinite Hermitian matrix.
Mat sqrtm_psd(const Mat& a);

/// Fidelity Tr sqrt(sqrt(A) B sqrt(A)).
double fidelity(const Mat& a, const Mat& b);

/// Trace distance ½‖A−B‖₁ for Hermitian arguments.
double trace_distance(const Mat& a, const Mat& b);

// Shift-invert Arnoldi (ARPACK) for eigenvalues of a sparse matrix nearest sigma.
struct SparseEigResult {
  Vec values;
  Mat vectors;
};
SparseEigResult eigs_near(const SpMat& a, cd sigma, int nev, bool vectors = true,
                          int ncv = 0, double tol = 1e-12);

// Adaptive Dormand–Prince 5(4).
struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-9;
  double h0 = 0.0;        // 0 picks a step from the first derivative
  double hmax = 0.0;      // 0 means unbounded
  long max_steps = 50'000'000;
};

using RhsC = std::function<void(double, const Vec&, Vec&)>;
using RhsR = std::function<void(double, const RVec&, RVec&)>;

/// Integrate y' = f(t,y) and return y at every point of t_grid (t_grid[0] is the start).
std::vector<Vec> ode_solve(const RhsC& f, const Vec& y0, const std::vector<double>& t_grid,
                           const OdeOptions& opt = {});
std::vector<RVec> ode_solve(const RhsR& f, const RVec& y0, const std::vector<double>& t_grid,
                            const OdeOptions& opt = {});

/// Evenly spaced grid [a, b] with n points.
std::vector<double> linspace(double a, double b, int n);
/// Log-spaced grid from a to b (both > 0).
std::vector<double> logspace(double a, double b, int n);

/// Least-squares slope and intercept of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

SpMat to_sparse(const Mat& m, double tol = 0.0);

}  // namespace oqs
