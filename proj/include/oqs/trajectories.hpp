#pragma once

// Quantum-jump and quantum-state-diffusion unravellings.

#include "oqs/models.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace oqs {

struct JumpEvent {
  double t;
  int channel;
};

struct MeasurementRecord {
  std::vector<JumpEvent> jumps;            // quantum jumps only
  std::vector<std::vector<double>> noise;  // QSD: dxi per step, per channel (if recorded)
};

enum class Unravelling { QuantumJump, Diffusion };

std::string to_string(Unravelling u);
Unravelling unravelling_from_string(const std::string& s);

struct TrajectoryOptions {
  double dt = 1e-3;          // upper bound on the internal step
  bool record_noise = false;
  bool keep_states = true;   // store psi at every grid point
};

/// One run: psi on t_grid plus its record.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  MeasurementRecord record;
  Basis basis;
  std::uint64_t seed = 0;
  long index = 0;
  Unravelling method = Unravelling::QuantumJump;
};

/// Sparse copy of (H, L_mu) shared by all trajectories of an ensemble.
struct TrajectoryModel {
  SpMat h;
  std::vector<SpMat> jumps;
  SpMat h_eff;                 // H - i/2 sum L^dag L
  std::vector<SpMat> ldl;      // L^dag L per channel
  Basis basis;
  double h_norm = 0.0;         // max absolute row sum of H
  double max_rate = 0.0;       // largest ||L^dag L|| row-sum bound

  explicit TrajectoryModel(const ModelSpec& m);
  TrajectoryModel(const Operator& h, const std::vector<Operator>& jumps);
  int dim() const { return static_cast<int>(h.rows()); }
};

/// Callback invoked at each grid point; used to stream observables without keeping states.
using StateVisitor = std::function<void(int grid_index, const Vec& psi)>;

/// Fixed-step first-order jump scheme. Throws InputError if a step has sum_mu p_mu >= 0.1.
Trajectory qjump_run(const TrajectoryModel& m, const Vec& psi0, const std::vector<double>& t_grid,
                     std::uint64_t seed, long index = 0, const TrajectoryOptions& opt = {},
                     const StateVisitor& visit = {});
Trajectory qjump_run(const ModelSpec& m, const Vec& psi0, const std::vector<double>& t_grid,
                     std::uint64_t seed, const TrajectoryOptions& opt = {});

/// Diffusive unravelling with one real Wiener increment per channel.
/// Throws InputError unless dt * max(rate, ||H||) < 0.05.
Trajectory qsd_run(const TrajectoryModel& m, const Vec& psi0, const std::vector<double>& t_grid,
                   std::uint64_t seed, long index = 0, const TrajectoryOptions& opt = {},
                   const StateVisitor& visit = {});
Trajectory qsd_run(const ModelSpec& m, const Vec& psi0, const std::vector<double>& t_grid,
                   std::uint64_t seed, const TrajectoryOptions& opt = {});

struct TrajectoryPoint {
  double t = 0.0;
  double entropy = 0.0;  // von Neumann entropy of the kept sites
  double purity = 1.0;   // Tr rho_A^2
  std::vector<cd> expectations;
};

/// Reduced density matrix of a pure state on the kept sites.
Mat reduced_state(const Vec& psi, const Basis& basis, const std::vector<int>& keep);
/// -Tr rho ln rho, with 0 ln 0 = 0.
double entanglement_entropy(const Mat& rho_a);

/// keep must be a proper nonempty subset of the sites.
std::vector<TrajectoryPoint> trajectory_observables(const Trajectory& traj, const std::vector<int>& keep,
                                                    const std::vector<Operator>& observables = {});

struct EnsembleResult {
  std::vector<double> times;
  std::vector<Operator> rho;                // empty unless accumulated
  std::vector<std::vector<double>> mean;    // [observable][time], real part of <O>
  std::vector<std::vector<double>> sem;     // standard error of the mean
  long n_traj = 0;
};

/// Streaming mean of |psi><psi| and of observables.
class EnsembleAccumulator {
 public:
  EnsembleAccumulator(std::vector<double> times, Basis basis, std::vector<Operator> observables,
                      bool keep_rho = true);
  void add_state(int grid_index, const Vec& psi);
  void finish_trajectory() { ++n_; }
  void add(const Trajectory& traj);
  EnsembleResult result() const;
  long count() const { return n_; }

 private:
  std::vector<double> times_;
  Basis basis_;
  std::vector<Operator> obs_;
  std::vector<SpMat> obs_sp_;
  bool keep_rho_;
  std::vector<Mat> rho_sum_;
  std::vector<std::vector<double>> s1_, s2_;
  long n_ = 0;
};

/// Throws InputError on an empty ensemble or mismatched grids.
EnsembleResult ensemble_average(const std::vector<Trajectory>& runs,
                                const std::vector<Operator>& observables = {});

struct EnsembleOptions {
  Unravelling method = Unravelling::QuantumJump;
  long n_traj = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  bool keep_rho = true;
  TrajectoryOptions traj;
};

/// Runs n_traj trajectories (index 0..n-1) and reduces them in index order, so the result
/// does not depend on the thread count.
EnsembleResult run_ensemble(const ModelSpec& model, const Vec& psi0, const std::vector<double>& t_grid,
                            const std::vector<Operator>& observables, const EnsembleOptions& opt);
EnsembleResult run_ensemble(const TrajectoryModel& model, const Vec& psi0, const std::vector<double>& t_grid,
                            const std::vector<Operator>& observables, const EnsembleOptions& opt);

/// One JSON object per line: index, seed, method, jump events, optional noise.
std::string trajectories_jsonl(const std::vector<Trajectory>& runs);
/// t, then mean and stderr columns per observable.
std::string ensemble_csv(const EnsembleResult& r, const std::vector<std::string>& names = {});

}  // namespace oqs
