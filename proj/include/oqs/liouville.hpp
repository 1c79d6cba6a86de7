#pragma once

// Vectorized Lindbladian and everything built on it.
// vec(rho) is column-major: element (i, j) sits at i + d*j.

#include "oqs/models.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace oqs {

/// Full eigensolves are dense below this superoperator dimension; above it the
/// shift-invert Arnoldi path is used for the few modes nearest zero.
inline constexpr int kMaxDenseSuper = 4096;

struct SuperOperator {
  SpMat matrix;  // d^2 x d^2
  Basis basis;
  int d = 0;

  int size() const { return d * d; }
  Mat dense() const { return Mat(matrix); }
  Operator apply(const Operator& rho) const;
};

Vec vec(const Mat& m);
Mat unvec(const Vec& v, int d);

/// L = -i(I(x)H - H^T(x)I) + sum conj(L)(x)L - 1/2 I(x)L^dag L - 1/2 (L^dag L)^T (x) I.
SuperOperator vectorize(const ModelSpec& model);
SuperOperator vectorize(const Operator& h, const std::vector<Operator>& jumps);

/// -i[H,rho] + sum D[L]rho, computed without a superoperator.
Operator lindblad_apply(const Operator& h, const std::vector<Operator>& jumps, const Operator& rho);
Operator lindblad_apply(const ModelSpec& model, const Operator& rho);

/// i[H,O] + sum (L^dag O L - 1/2 {L^dag L, O}).
Operator adjoint_apply(const ModelSpec& model, const Operator& o);
Operator adjoint_apply(const Operator& h, const std::vector<Operator>& jumps, const Operator& o);

/// Throws InputError unless rho is Hermitian, unit trace and positive to tol.
void check_density_matrix(const Operator& rho, double tol = 1e-10);

struct EvolveResult {
  std::vector<Operator> states;
  double min_eigenvalue = 0.0;     // smallest eigenvalue over all outputs
  bool positivity_violated = false;  // min_eigenvalue < -1e-6
};

EvolveResult evolve(const SuperOperator& l, const Operator& rho0, const std::vector<double>& t_grid,
                    const OdeOptions& opt = {});

/// exp(L t) vec(rho0) by dense matrix exponential; cross-check helper for d^2 <= 400.
Operator propagate_expm(const SuperOperator& l, const Operator& rho0, double t);

struct SpectrumOptions {
  double zero_tol_rel = 1e-9;  // relative to the spectral radius
  int max_dense = kMaxDenseSuper;
  int nev = 6;                 // modes requested on the sparse path
};

struct SteadyState {
  Operator rho;
  int kernel_dim = 1;
  double residual = 0.0;  // ||L rho||
};

SteadyState steady_state(const SuperOperator& l, const SpectrumOptions& opt = {});

struct SpectralData {
  Vec values;  // descending real part
  Mat right;   // columns; empty if not requested
  Mat left;    // columns, normalized so left^H right = 1 per mode
  double defect = 0.0;  // max |left^H right - I|
  double scale = 0.0;   // spectral radius (or a norm bound on the sparse path)
  bool complete = true; // false when only modes near zero were computed
  std::vector<int> sector;  // optional labels
  Basis basis;
  int d = 0;

  int size() const { return static_cast<int>(values.size()); }
  Operator right_mode(int mu) const;
  Operator left_mode(int mu) const;
};

SpectralData spectrum(const SuperOperator& l, bool vectors = true, const SpectrumOptions& opt = {});

/// The nev eigenvalues nearest sigma (shift-invert Arnoldi), right vectors only.
SpectralData slow_modes(const SuperOperator& l, int nev, cd sigma = 0.0);
SpectralData slow_modes(const SpMat& block, int nev, cd sigma = 0.0);

/// Smallest -Re lambda among modes with |lambda| above zero_tol_rel * scale.
double adr(const SpectralData& s, double zero_tol_rel = 1e-9);

/// Number of eigenvalues with |lambda| <= zero_tol_rel * scale.
int kernel_count(const SpectralData& s, double zero_tol_rel = 1e-9);

/// Expansion coefficients c_mu = <<l_mu|rho0>> of rho(t) = sum c_mu e^{lambda_mu t} r_mu.
Vec decay_coefficients(const SpectralData& s, const Operator& rho0);

/// Eigenvalues with |Im| below this are treated as real.
inline constexpr double kRealTol = 1e-10;

// ---- symmetry sectors ----

struct SectorBlock {
  int k = 0;          // weak: q_i - q_j; strong: unused
  int q_left = 0;     // strong blocks only
  int q_right = 0;
  std::vector<int> indices;  // into vec(rho)
};

struct SectorDecomposition {
  std::vector<SectorBlock> blocks;
  double defect = 0.0;  // norm of L entries coupling different blocks, relative to ||L||
  bool strong = false;
};

/// Weak-symmetry blocks k = q_i - q_j for a charge diagonal in the product basis with
/// integer-spaced eigenvalues. Throws InputError when L couples different k beyond 1e-9.
SectorDecomposition symmetry_sectors(const SuperOperator& l, const Operator& charge);

/// Strong-symmetry blocks (q_i, q_j): requires the charge to commute with H and every jump.
SectorDecomposition strong_symmetry_sectors(const SuperOperator& l, const Operator& charge);

/// Submatrix of L on one block.
SpMat restrict_block(const SuperOperator& l, const std::vector<int>& indices);

/// Eigenvalues of every block, labelled by sector k (or by block index for strong blocks).
SpectralData spectrum_by_sectors(const SuperOperator& l, const SectorDecomposition& sec,
                                 const SpectrumOptions& opt = {});

// ---- correlations ----

/// Tr[A e^{L tau}(B rho_ss)] on tau_grid (tau_grid[0] must be 0).
std::vector<cd> two_time_correlation(const SuperOperator& l, const Operator& rho_ss, const Operator& a,
                                     const Operator& b, const std::vector<double>& tau_grid,
                                     const OdeOptions& opt = {});

struct FdtOptions {
  double dtau = 0.0;          // 0: 0.02 / max(1, max|omega|)
  double envelope = 1e-6;     // stop once |S(tau)| stays below envelope * |S(0)|
  double max_tau = 1e5;
  double noise_floor = 1e-10;  // relative to max |Im chi|
};

struct FdtResult {
  std::vector<double> omega;
  std::vector<double> s;       // S_A(omega)
  std::vector<double> chi_im;  // Im chi_A(omega)
  std::vector<double> ratio;   // S / Im chi
  double t_max = 0.0;
  double tail_estimate = 0.0;  // bound on the truncated part of the transforms
};

/// S_A(tau) = 1/2 <{A(tau), A}>, chi_A(tau) = i Theta(tau) <[A(tau), A]>, trapezoidal transforms.
FdtResult fdt_ratio(const SuperOperator& l, const Operator& rho_ss, const Operator& a,
                    const std::vector<double>& omega_grid, const FdtOptions& opt = {});

// ---- metastability ----

struct MetastableSplit {
  Operator lower;   // from the positive part of rho_1
  Operator upper;   // from the negated negative part
  double residual = 0.0;  // non-Hermiticity after phase fixing, relative
  cd lambda;
};

/// Uses the first mode after the kernel. Throws NumericalError when it is not Hermitizable.
MetastableSplit metastable_split(const SpectralData& s, double zero_tol_rel = 1e-9);

// ---- perturbation theory ----

/// sum_{i<=order} eps^i rho^(i) with rho^(i) = -L0^+ L1 rho^(i-1), each correction traceless.
Operator perturbative_steady_state(const SuperOperator& l0, const SuperOperator& l1, double eps, int order);

// ---- export ----

std::string spectrum_csv(const SpectralData& s);
std::string spectrum_json(const SpectralData& s);

}  // namespace oqs
