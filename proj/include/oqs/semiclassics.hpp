#pragma once

// Mean-field, rate-equation and Fokker-Planck integrators.

#include "oqs/models.hpp"
#include "oqs/numeric.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace oqs {

// ---- Gutzwiller (product-state) mean field ----

/// A model split into single-site and two-site pieces.
struct LocalModel {
  Basis basis;
  std::vector<Mat> h_site;  // one per site (zero when absent)
  struct Pair {
    int i = 0, j = 0;  // i < j
    Mat h;             // on site i (x) site j, index a_i * d_j + a_j
  };
  std::vector<Pair> pairs;
  std::vector<std::vector<Mat>> jumps;  // per site, sqrt(rate) included

  int n_sites() const { return static_cast<int>(basis.size()); }
};

/// Splits every Hamiltonian term by its support. Throws InputError when a Hamiltonian term acts
/// on more than two sites or a jump acts on more than one.
LocalModel local_model(const ModelSpec& m, double tol = 1e-12);

struct MeanFieldState {
  double t = 0.0;
  std::vector<Mat> rho;  // per-site density matrices
};

/// d rho_i/dt = -i[h_i + Theta_i, rho_i] + sum D[L] rho_i, Theta_i = Tr_j[(1 x rho_j) h_ij].
std::vector<MeanFieldState> gutzwiller_evolve(const LocalModel& m, const std::vector<Mat>& rho0,
                                              const std::vector<double>& t_grid, const OdeOptions& opt = {});
std::vector<MeanFieldState> gutzwiller_evolve(const ModelSpec& m, const std::vector<Mat>& rho0,
                                              const std::vector<double>& t_grid, const OdeOptions& opt = {});

/// The mean-field Hamiltonian of one site given all the others.
Mat gutzwiller_field(const LocalModel& m, const std::vector<Mat>& rho, int site);

// ---- XYZ mean field ----

/// L = sqrt(gamma) sigma^- on every site, coordination z. These are the magnetization equations
/// of H = sum_<ij> sum_a (J_a/2) sigma^a_i sigma^a_j (catalog "xyz" with J_a halved).
struct XyzMeanField {
  double jx = 0.9, jy = 1.0, jz = 1.0;
  double gamma = 1.0;
  double z = 4.0;
};

/// Uniform ansatz: one vector (sx, sy, sz).
RVec xyz_meanfield_rhs(const XyzMeanField& p, const RVec& s);
std::vector<RVec> xyz_meanfield(const XyzMeanField& p, const RVec& s0, const std::vector<double>& t_grid,
                                const OdeOptions& opt = {});
/// Per-site mode on a graph; s0 holds (sx, sy, sz) for site 0, then site 1, ... (z is ignored).
std::vector<RVec> xyz_meanfield(const XyzMeanField& p, const LatticeGraph& g, const RVec& s0,
                                const std::vector<double>& t_grid, const OdeOptions& opt = {});

/// Jacobian of the uniform equations at s.
RMat xyz_jacobian(const XyzMeanField& p, const RVec& s);
/// Largest real part of the linearization around the down state (0, 0, -1).
double xyz_stability(const XyzMeanField& p);

/// First J_y in [jy_lo, jy_hi] where the down state turns unstable, bisected to tol. Defaults:
/// jy_lo = min(jx, jz), jy_hi = max(jx, jz) + 10 max(1, gamma). NumericalError without a sign change.
double xyz_critical(double jx, double jz, double gamma, double z = 4.0, double jy_lo = NAN, double jy_hi = NAN,
                    double tol = 1e-6);

// ---- Boundary time crystal ----

/// dSx/dt = (k/S) Sx Sz, dSy/dt = -w0 Sz + (k/S) Sy Sz, dSz/dt = w0 Sy - (k/S)(Sx^2 + Sy^2).
RVec btc_rhs(double omega0, double kappa, double S, const RVec& s);
/// Requires |s0| = S to 1e-8.
std::vector<RVec> btc_dynamics(double omega0, double kappa, double S, const RVec& s0,
                               const std::vector<double>& t_grid, const OdeOptions& opt = {});

/// Sx / (Sy - (omega0/kappa) S), constant along trajectories.
double btc_invariant(double omega0, double kappa, double S, const RVec& s);

enum class FixedPointKind { Stable, Unstable, Oscillatory };
std::string to_string(FixedPointKind k);

struct BtcFixedPoint {
  RVec s;           // on the unit sphere (S = 1)
  Vec eigenvalues;  // of the flow restricted to the tangent plane, in units of kappa
  FixedPointKind kind = FixedPointKind::Stable;
};

/// eta = omega0 / kappa. Eigenvalues scale with kappa.
std::vector<BtcFixedPoint> btc_fixed_points(double eta, double kappa = 1.0);
/// Relaxation rate towards the stable fixed point, kappa sqrt(1 - eta^2); 0 for eta >= 1.
double btc_relaxation_rate(double omega0, double kappa);
std::string btc_fixed_points_json(const std::vector<BtcFixedPoint>& fps);

// ---- Bogoliubov theory with an effective loss ----

/// Both roots -i kappa +- sqrt(e_k (e_k + 2 mu) - kappa^2), e_k = k^2 / 2m.
std::pair<Vec, Vec> bogoliubov_dispersion(double mu, double mass, double kappa, const std::vector<double>& k);
/// Small-k diffusion constant of the slow root: nu ~ -i D k^2 with D = mu / (2 m kappa).
double bogoliubov_diffusion(double mu, double mass, double kappa);
/// |k| at which the two roots coalesce.
double bogoliubov_exceptional_k(double mu, double mass, double kappa);

// ---- Two-body losses ----

struct MomentumSeries {
  std::vector<double> t;
  std::vector<RVec> nk;
  std::vector<double> density;  // mean of nk
};

/// dn_k/dt = -2 kappa2 n n_k with n the mean occupation.
MomentumSeries weak_loss_evolve(const RVec& nk0, double kappa2, const std::vector<double>& t_grid,
                                const OdeOptions& opt = {});
double weak_loss_density(double n0, double kappa2, double t);

/// Gamma = (gamma/2) t_h^2 / (U^2 + (gamma/2)^2).
double zeno_rate(double t_h, double u, double gamma);

/// Rapidity rate equation on k = 2 pi j / L, L = nk0.size():
/// dn_k/dt = -(4 Gamma / L) sum_q (sin k - sin q)^2 n_q n_k.
MomentumSeries strong_loss_evolve(const RVec& nk0, double gamma, const std::vector<double>& t_grid,
                                  const OdeOptions& opt = {});
std::vector<double> momentum_grid(int l);

// ---- Two-site Bose-Hubbard with dephasing ----

/// Population rate equation in rescaled time tau:
/// d rho_n/dtau = N^2 [W_n+1 (rho_n+1 - rho_n) - W_n (rho_n - rho_n-1)],
/// W_n+1 = (n+1)(N-n)/(n - N/2 + 1/2)^2, so the continuum limit is d_s(D d_s p), D = 1/(4s^2) - 1.
/// Starts from rho_n = delta_n,N/2. N must be even (odd N has a resonant, infinite rate).
struct TwoSiteResult {
  std::vector<double> tau;
  RVec s;                  // n/N - 1/2
  std::vector<RVec> rho;   // rho_nn
  std::vector<RVec> p;     // N rho_nn
  std::vector<double> coherence;
  std::vector<double> norm;
};
TwoSiteResult twosite_dephasing(int n, const std::vector<double>& tau_grid);
/// (sqrt 2 / Gamma(1/4)) tau^-1/4 exp(-s^4 / 4 tau).
double twosite_scaling_profile(double s, double tau);

// ---- export ----

/// Header row then one row per entry; '.' decimals, 17 significant digits.
std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);
/// Columns t, k, nk.
std::string momentum_csv(const MomentumSeries& s);

}  // namespace oqs
