#pragma once

// Catalog of Hamiltonian + jump-operator models.

#include "oqs/hilbert.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oqs {

using Params = std::map<std::string, double>;

struct HamiltonianTerm {
  cd coefficient;
  Operator op;  // Hermitian by itself
  std::string label;
};

/// rate >= 0; op already carries the sqrt(rate) factor.
struct JumpTerm {
  double rate;
  Operator op;
  std::string label;
};

struct ModelSpec {
  std::string name;
  LatticeGraph graph;
  Basis basis;
  std::vector<HamiltonianTerm> hamiltonian_terms;
  std::vector<JumpTerm> jump_terms;
  Params params;

  int dim() const { return total_dim(basis); }
  Operator hamiltonian() const;
  std::vector<Operator> jumps() const;
  /// Rates nonnegative, H Hermitian to 1e-12, all operators on the declared basis.
  void validate() const;
};

/// Catalog names: single_mode, xyz, transverse_ising, ising, xx_dephasing, xxz_dephasing,
/// bose_hubbard, dicke, kerr, btc, hardcore_loss, bec_engineering, absorbing,
/// dissipative_computation. Unset parameters take the defaults in catalog_defaults().
/// Lattice models read n_sites/periodic (chain) or lx/ly (open square) unless a graph is given.
ModelSpec build_model(const std::string& name, const Params& params = {},
                      const std::optional<LatticeGraph>& graph = std::nullopt);

std::vector<std::string> catalog_names();
Params catalog_defaults(const std::string& name);

/// Dissipative computation on n qubits (qubit i is site i, register last) with full-space
/// qubit unitaries U_1..U_T.
ModelSpec build_dissipative_computation(int n_qubits, const std::vector<Mat>& gates);
/// Random nearest-neighbour two-qubit circuit of depth T.
std::vector<Mat> random_circuit(int n_qubits, int T, unsigned long long seed);
/// The stationary state (1/(T+1)) sum_t |psi_t><psi_t| (x) |t><t|.
Operator dissipative_computation_rho0(int n_qubits, const std::vector<Mat>& gates);

/// Condensate state (b_{k=0}^dagger)^N / sqrt(N!) |0> on a truncated boson basis.
Vec bec_state(const Basis& basis, int n_particles);

/// Sum_mu L_mu^dagger L_mu.
Operator parent_hamiltonian(const ModelSpec& model);

/// Semiclassical photon densities n/N of the scaled Kerr model, ascending (one or three roots).
std::vector<double> kerr_semiclassical_densities(double delta, double u_tilde, double f_tilde, double kappa);

/// Strong-dephasing population generator of the XXZ chain with L = sqrt(gamma) sigma^z:
/// dp/dt = -K p with K = (Jxy^2 / 16 gamma) sum_<ij> (1 - sigma_i . sigma_j), a ferromagnetic
/// Heisenberg model. Zero modes are the fully symmetric multiplet.
Operator strong_dephasing_k(const LatticeGraph& graph, double jxy, double gamma);

std::string to_json(const ModelSpec& m);
ModelSpec model_from_json(const std::string& text);

}  // namespace oqs
