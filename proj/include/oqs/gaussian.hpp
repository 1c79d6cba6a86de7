#pragma once

// Quadratic Lindbladians: H = sum h_ij a_i^dag a_j + 1/2 (k_ij a_i^dag a_j^dag + h.c.),
// L_mu = p_mu . a + q_mu . a^dag, solved at the level of two-point functions.

#include "oqs/numeric.hpp"

#include <string>
#include <utility>
#include <vector>

namespace oqs {

enum class Statistics { Boson, Fermion };

struct LinearJump {
  Vec p;  // coefficients of a_i
  Vec q;  // coefficients of a_i^dag
};

struct QuadraticModel {
  Mat h;  // Hermitian
  Mat k;  // symmetric for bosons, antisymmetric for fermions; empty means zero
  std::vector<LinearJump> jumps;
  Statistics statistics = Statistics::Boson;

  int modes() const { return static_cast<int>(h.rows()); }
  /// Throws InputError on shape, Hermiticity or pairing-symmetry violations.
  void validate() const;
};

/// C_ij = <a_i a_j^dag>, F_ij = <a_i a_j>.
struct CorrelationMatrix {
  Mat c;
  Mat f;
  double t = 0.0;
};

/// Vacuum (C = I, F = 0) on n modes.
CorrelationMatrix vacuum_correlations(int n);

/// Bosons: Nambu moments G_ab = <alpha_a alpha_b> with alpha = (a, a^dag).
/// Fermions: Majorana covariance Gamma_ab = (i/2)<[w_a, w_b]>, w_2j = c_j + c_j^dag,
/// w_2j+1 = i(c_j^dag - c_j). Both obey dG/dt = X G + G X^T + Y.
struct CovarianceGenerator {
  Mat x;
  Mat y;
  Statistics statistics = Statistics::Boson;
};

CovarianceGenerator covariance_generator(const QuadraticModel& m);

Mat to_covariance(const CorrelationMatrix& c, Statistics s);
CorrelationMatrix from_covariance(const Mat& g, Statistics s, double t = 0.0);

/// Integrates the two-point equations on t_grid (t_grid[0] is the start).
std::vector<CorrelationMatrix> covariance_evolve(const QuadraticModel& m, const CorrelationMatrix& c0,
                                                 const std::vector<double>& t_grid, const OdeOptions& opt = {});

/// Unique stationary two-point functions; NumericalError if X has eigenvalues with Re >= -1e-10.
CorrelationMatrix covariance_steady_state(const QuadraticModel& m);

/// Physicality: bosons C - I positive semidefinite; fermions eigenvalues of C in [0, 1].
/// Returns the largest violation (0 when physical).
double physicality_violation(const CorrelationMatrix& c, Statistics s);

/// C_ij = <a_i^dag a_j> under H = -J sum (a_i^dag a_i+1 + h.c.) (open chain) and dephasing
/// L_i = sqrt(gamma_phi) n_i:
/// dC_ij/dt = -iJ(C_i-1,j + C_i+1,j) + iJ(C_i,j-1 + C_i,j+1) - gamma_phi (1 - delta_ij) C_ij.
std::vector<Mat> dephasing_correlation_evolve(double j, double gamma_phi, const Mat& c0,
                                              const std::vector<double>& t_grid, bool periodic = false,
                                              const OdeOptions& opt = {});

struct ThirdQuantMode {
  int mu = 0;
  int nu = 0;
  cd lambda;       // omega_c (mu - nu) - i (k- - k+)/2 (mu + nu)
  cd liouvillian;  // the same eigenvalue in the d rho/dt = L rho convention: -i lambda
};

struct ThirdQuantSpectrum {
  std::vector<ThirdQuantMode> modes;  // all mu + nu <= n_levels, ordered by mu + nu then mu
  double eta = 0.0;                   // (k- + k+)/(k- - k+)
};

/// Pumped and decaying single mode. Throws InputError unless kappa_minus > kappa_plus >= 0.
ThirdQuantSpectrum third_quantization_spectrum(double omega_c, double kappa_minus, double kappa_plus, int n_levels);

/// Dissipative Kitaev chain: L_j = sqrt(gamma) l_j, l_j = (C_j^dag + A_j)/2 with
/// C_j^dag = c_j^dag + c_j+1^dag and A_j = c_j - c_j+1 (the factor 1/2 makes l_j canonical).
QuadraticModel kitaev_dissipative_chain(int n_sites, double gamma, bool periodic = false);

struct DampingModes {
  RVec rates;        // 2 x (-Re) eigenvalues of X, ascending: occupation damping rate per Majorana mode
  Mat vectors;       // corresponding eigenvectors of X (columns, Majorana basis)
  std::vector<int> dark;  // indices with rate below tol
};

/// Damping spectrum of a fermionic quadratic model.
DampingModes damping_modes(const QuadraticModel& m, double tol = 1e-10);

/// Kitaev chain on an open chain: the two zero-damping Majorana modes and the bulk rates.
/// Throws InputError for periodic chains or n_sites < 2.
DampingModes majorana_dark_modes(int n_sites, double gamma, bool periodic = false);

/// Rows "i,j,re,im,t" for every element of every matrix in the series.
std::string correlations_csv(const std::vector<CorrelationMatrix>& series);

}  // namespace oqs
