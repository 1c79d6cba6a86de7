#include "oqs/trajectories.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

namespace oqs {

namespace {

double row_sum_norm(const SpMat& m) {
  RVec rows = RVec::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return m.rows() ? rows.maxCoeff() : 0.0;
}

std::mt19937_64 make_rng(std::uint64_t seed, long index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  return std::mt19937_64(seq);
}

void check_psi0(const TrajectoryModel& m, const Vec& psi0, const std::vector<double>& t_grid) {
  if (psi0.size() != m.dim()) throw InputError("initial state has the wrong dimension");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw InputError("initial state is not normalized");
  if (t_grid.empty()) throw InputError("empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw InputError("time grid must be strictly increasing");
}

// Steps per grid interval so that each step is <= dt.
int n_steps(double span, double dt) { return std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9))); }

Vec rk4_linear(const SpMat& a, const Vec& psi, cd factor, double h) {
  // psi' = factor * A psi
  Vec k1 = factor * (a * psi);
  Vec k2 = factor * (a * (psi + 0.5 * h * k1));
  Vec k3 = factor * (a * (psi + 0.5 * h * k2));
  Vec k4 = factor * (a * (psi + h * k3));
  return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void store(Trajectory& tr, const TrajectoryOptions& opt, const StateVisitor& visit, int gi, const Vec& psi) {
  if (opt.keep_states) tr.states.push_back(psi);
  if (visit) visit(gi, psi);
}

}  // namespace

std::string to_string(Unravelling u) { return u == Unravelling::QuantumJump ? "jump" : "diffusion"; }

Unravelling unravelling_from_string(const std::string& s) {
  if (s == "jump" || s == "qjump") return Unravelling::QuantumJump;
  if (s == "diffusion" || s == "qsd") return Unravelling::Diffusion;
  throw InputError("unknown unravelling: " + s);
}

TrajectoryModel::TrajectoryModel(const ModelSpec& m) : TrajectoryModel(m.hamiltonian(), m.jumps()) {}

TrajectoryModel::TrajectoryModel(const Operator& hop, const std::vector<Operator>& js) : basis(hop.basis) {
  hop.assert_hermitian(1e-10);
  h = to_sparse(hop.matrix);
  h_eff = h;
  for (const auto& j : js) {
    if (j.dim() != hop.dim()) throw InputError("jump operator dimension mismatch");
    SpMat l = to_sparse(j.matrix);
    SpMat ll = SpMat(l.adjoint()) * l;
    h_eff -= cd(0.0, 0.5) * ll;
    max_rate = std::max(max_rate, row_sum_norm(ll));
    jumps.push_back(std::move(l));
    ldl.push_back(std::move(ll));
  }
  h_norm = row_sum_norm(h);
}

Trajectory qjump_run(const TrajectoryModel& m, const Vec& psi0, const std::vector<double>& t_grid,
                     std::uint64_t seed, long index, const TrajectoryOptions& opt, const StateVisitor& visit) {
  check_psi0(m, psi0, t_grid);
  if (!(opt.dt > 0)) throw InputError("dt must be positive");
  Trajectory tr{t_grid, {}, {}, m.basis, seed, index, Unravelling::QuantumJump};
  auto rng = make_rng(seed, index);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int nc = static_cast<int>(m.jumps.size());
  Vec psi = psi0;
  std::vector<Vec> lpsi(nc);
  std::vector<double> p(nc);
  store(tr, opt, visit, 0, psi);
  double t = t_grid[0];
  for (std::size_t g = 1; g < t_grid.size(); ++g) {
    const int ns = n_steps(t_grid[g] - t_grid[g - 1], opt.dt);
    const double h = (t_grid[g] - t_grid[g - 1]) / ns;
    for (int s = 0; s < ns; ++s) {
      double total = 0.0;
      for (int c = 0; c < nc; ++c) {
        lpsi[c] = m.jumps[c] * psi;
        p[c] = h * lpsi[c].squaredNorm();
        total += p[c];
      }
      if (total >= 0.1)
        throw InputError("jump probability per step " + std::to_string(total) + " >= 0.1; reduce dt");
      const double r = uni(rng);
      t = t_grid[g - 1] + (s + 1) * h;
      if (r < total) {
        double acc = 0.0;
        int c = 0;
        for (; c < nc - 1; ++c) {
          acc += p[c];
          if (r < acc) break;
        }
        psi = lpsi[c] / lpsi[c].norm();
        tr.record.jumps.push_back({t, c});
      } else {
        psi = rk4_linear(m.h_eff, psi, cd(0.0, -1.0), h);
        psi /= psi.norm();
      }
    }
    store(tr, opt, visit, static_cast<int>(g), psi);
  }
  return tr;
}

Trajectory qjump_run(const ModelSpec& m, const Vec& psi0, const std::vector<double>& t_grid, std::uint64_t seed,
                     const TrajectoryOptions& opt) {
  return qjump_run(TrajectoryModel(m), psi0, t_grid, seed, 0, opt);
}

Trajectory qsd_run(const TrajectoryModel& m, const Vec& psi0, const std::vector<double>& t_grid, std::uint64_t seed,
                   long index, const TrajectoryOptions& opt, const StateVisitor& visit) {
  check_psi0(m, psi0, t_grid);
  if (!(opt.dt > 0)) throw InputError("dt must be positive");
  if (opt.dt * std::max(m.max_rate, m.h_norm) >= 0.05)
    throw InputError("dt * max(rate, ||H||) = " + std::to_string(opt.dt * std::max(m.max_rate, m.h_norm)) +
                     " >= 0.05; reduce dt");
  Trajectory tr{t_grid, {}, {}, m.basis, seed, index, Unravelling::Diffusion};
  auto rng = make_rng(seed, index);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int nc = static_cast<int>(m.jumps.size());
  // -i H_eff - 1/2 sum (|l|^2 - 2 conj(l) L), with l = <L> and H_eff = H - i/2 sum L^dag L
  std::vector<Vec> lx(nc);
  auto drift = [&](const Vec& x, Vec& out) {
    out.noalias() = cd(0.0, -1.0) * (m.h_eff * x);
    const double nn = x.squaredNorm();
    for (int c = 0; c < nc; ++c) {
      lx[c].noalias() = m.jumps[c] * x;
      const cd l = x.dot(lx[c]) / nn;
      out += std::conj(l) * lx[c] - (0.5 * std::norm(l)) * x;
    }
  };

  Vec psi = psi0;
  store(tr, opt, visit, 0, psi);
  std::vector<double> dxi(nc);
  const Eigen::Index d = psi.size();
  Vec noise(d), k1(d), k2(d), k3(d), k4(d), tmp(d);
  for (std::size_t g = 1; g < t_grid.size(); ++g) {
    const int ns = n_steps(t_grid[g] - t_grid[g - 1], opt.dt);
    const double h = (t_grid[g] - t_grid[g - 1]) / ns;
    const double sq = std::sqrt(h);
    for (int s = 0; s < ns; ++s) {
      noise.setZero();
      for (int c = 0; c < nc; ++c) {
        dxi[c] = sq * gauss(rng);
        tmp.noalias() = m.jumps[c] * psi;
        const cd l = psi.dot(tmp);
        noise += dxi[c] * (tmp - l * psi);
      }
      drift(psi, k1);
      tmp = psi + 0.5 * h * k1;
      drift(tmp, k2);
      tmp = psi + 0.5 * h * k2;
      drift(tmp, k3);
      tmp = psi + h * k3;
      drift(tmp, k4);
      psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4) + noise;
      psi /= psi.norm();
      if (opt.record_noise) tr.record.noise.push_back(dxi);
    }
    store(tr, opt, visit, static_cast<int>(g), psi);
  }
  return tr;
}

Trajectory qsd_run(const ModelSpec& m, const Vec& psi0, const std::vector<double>& t_grid, std::uint64_t seed,
                   const TrajectoryOptions& opt) {
  return qsd_run(TrajectoryModel(m), psi0, t_grid, seed, 0, opt);
}

Mat reduced_state(const Vec& psi, const Basis& basis, const std::vector<int>& keep) {
  const int n = static_cast<int>(basis.size());
  if (psi.size() != total_dim(basis)) throw InputError("reduced_state: dimension mismatch");
  std::vector<char> kept(n, 0);
  for (int k : keep) {
    if (k < 0 || k >= n) throw InputError("reduced_state: site out of range");
    if (kept[k]) throw InputError("reduced_state: repeated site");
    kept[k] = 1;
  }
  int da = 1, db = 1;
  for (int i = 0; i < n; ++i) (kept[i] ? da : db) *= basis[i].dim;
  Mat mtx = Mat::Zero(da, db);
  for (int idx = 0; idx < psi.size(); ++idx) {
    int rem = idx, a = 0, b = 0, sa = 1, sb = 1;
    for (int i = n - 1; i >= 0; --i) {
      const int d = basis[i].dim, digit = rem % d;
      rem /= d;
      if (kept[i]) {
        a += digit * sa;
        sa *= d;
      } else {
        b += digit * sb;
        sb *= d;
      }
    }
    mtx(a, b) = psi(idx);
  }
  return mtx * mtx.adjoint();
}

double entanglement_entropy(const Mat& rho_a) {
  RVec ev = eigvalsh(0.5 * (rho_a + rho_a.adjoint()));
  double s = 0.0;
  for (double p : ev)
    if (p > 1e-15) s -= p * std::log(p);
  return std::max(0.0, s);
}

std::vector<TrajectoryPoint> trajectory_observables(const Trajectory& traj, const std::vector<int>& keep,
                                                    const std::vector<Operator>& observables) {
  const int n = static_cast<int>(traj.basis.size());
  if (keep.empty() || static_cast<int>(keep.size()) >= n)
    throw InputError("partition must keep a proper nonempty subset of sites");
  if (traj.states.size() != traj.times.size()) throw InputError("trajectory has no stored states");
  std::vector<TrajectoryPoint> out;
  for (std::size_t g = 0; g < traj.states.size(); ++g) {
    const Vec& psi = traj.states[g];
    Mat ra = reduced_state(psi, traj.basis, keep);
    TrajectoryPoint pt;
    pt.t = traj.times[g];
    pt.entropy = entanglement_entropy(ra);
    pt.purity = (ra * ra).trace().real();
    for (const auto& o : observables) pt.expectations.push_back(psi.dot(o.matrix * psi));
    out.push_back(std::move(pt));
  }
  return out;
}

EnsembleAccumulator::EnsembleAccumulator(std::vector<double> times, Basis basis, std::vector<Operator> observables,
                                         bool keep_rho)
    : times_(std::move(times)), basis_(std::move(basis)), obs_(std::move(observables)), keep_rho_(keep_rho) {
  const int d = total_dim(basis_);
  for (const auto& o : obs_)
    if (o.dim() != d) throw InputError("observable dimension mismatch");
  for (const auto& o : obs_) obs_sp_.push_back(to_sparse(o.matrix));
  if (keep_rho_) rho_sum_.assign(times_.size(), Mat::Zero(d, d));
  s1_.assign(obs_.size(), std::vector<double>(times_.size(), 0.0));
  s2_ = s1_;
}

void EnsembleAccumulator::add_state(int gi, const Vec& psi) {
  if (keep_rho_) rho_sum_[gi].noalias() += psi * psi.adjoint();
  for (std::size_t k = 0; k < obs_.size(); ++k) {
    const double e = psi.dot(obs_sp_[k] * psi).real();
    s1_[k][gi] += e;
    s2_[k][gi] += e * e;
  }
}

void EnsembleAccumulator::add(const Trajectory& traj) {
  if (traj.times != times_ || traj.states.size() != times_.size())
    throw InputError("trajectory grid does not match the ensemble");
  for (std::size_t g = 0; g < traj.states.size(); ++g) add_state(static_cast<int>(g), traj.states[g]);
  finish_trajectory();
}

EnsembleResult EnsembleAccumulator::result() const {
  if (n_ == 0) throw InputError("empty ensemble");
  EnsembleResult r;
  r.times = times_;
  r.n_traj = n_;
  const double n = static_cast<double>(n_);
  for (const auto& m : rho_sum_) r.rho.emplace_back(Mat(m / n), basis_);
  r.mean = s1_;
  r.sem = s1_;
  for (std::size_t k = 0; k < obs_.size(); ++k)
    for (std::size_t g = 0; g < times_.size(); ++g) {
      const double mu = s1_[k][g] / n;
      const double var = n > 1 ? std::max(0.0, (s2_[k][g] - n * mu * mu) / (n - 1)) : 0.0;
      r.mean[k][g] = mu;
      r.sem[k][g] = std::sqrt(var / n);
    }
  return r;
}

EnsembleResult ensemble_average(const std::vector<Trajectory>& runs, const std::vector<Operator>& observables) {
  if (runs.empty()) throw InputError("empty ensemble");
  EnsembleAccumulator acc(runs[0].times, runs[0].basis, observables, true);
  for (const auto& r : runs) acc.add(r);
  return acc.result();
}

EnsembleResult run_ensemble(const ModelSpec& model, const Vec& psi0, const std::vector<double>& t_grid,
                            const std::vector<Operator>& observables, const EnsembleOptions& opt) {
  return run_ensemble(TrajectoryModel(model), psi0, t_grid, observables, opt);
}

EnsembleResult run_ensemble(const TrajectoryModel& model, const Vec& psi0, const std::vector<double>& t_grid,
                            const std::vector<Operator>& observables, const EnsembleOptions& opt) {
  if (opt.n_traj < 1) throw InputError("n_traj must be >= 1");
  if (opt.threads < 1) throw InputError("threads must be >= 1");
  EnsembleAccumulator acc(t_grid, model.basis, observables, opt.keep_rho);
  TrajectoryOptions topt = opt.traj;
  topt.keep_states = true;
  auto run_one = [&](long i) {
    return opt.method == Unravelling::QuantumJump ? qjump_run(model, psi0, t_grid, opt.seed, i, topt)
                                                   : qsd_run(model, psi0, t_grid, opt.seed, i, topt);
  };
  const long chunk = 8L * opt.threads;
  std::vector<Trajectory> buf;
  for (long start = 0; start < opt.n_traj; start += chunk) {
    const long n = std::min(chunk, opt.n_traj - start);
    buf.assign(n, {});
    if (opt.threads == 1) {
      for (long i = 0; i < n; ++i) buf[i] = run_one(start + i);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errs(opt.threads);
      for (int w = 0; w < opt.threads; ++w)
        pool.emplace_back([&, w] {
          try {
            for (long i = w; i < n; i += opt.threads) buf[i] = run_one(start + i);
          } catch (...) {
            errs[w] = std::current_exception();
          }
        });
      for (auto& th : pool) th.join();
      for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    }
    for (const auto& tr : buf) acc.add(tr);
  }
  return acc.result();
}

std::string trajectories_jsonl(const std::vector<Trajectory>& runs) {
  std::ostringstream os;
  for (const auto& r : runs) {
    nlohmann::json j;
    j["index"] = r.index;
    j["seed"] = r.seed;
    j["method"] = to_string(r.method);
    j["times"] = r.times;
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : r.record.jumps) ev.push_back({e.t, e.channel});
    j["jumps"] = ev;
    if (!r.record.noise.empty()) j["noise"] = r.record.noise;
    os << j.dump() << '\n';
  }
  return os.str();
}

std::string ensemble_csv(const EnsembleResult& r, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << std::setprecision(12) << "t";
  for (std::size_t k = 0; k < r.mean.size(); ++k) {
    const std::string nm = k < names.size() ? names[k] : "O" + std::to_string(k);
    os << ',' << nm << "_mean," << nm << "_sem";
  }
  os << '\n';
  for (std::size_t g = 0; g < r.times.size(); ++g) {
    os << r.times[g];
    for (std::size_t k = 0; k < r.mean.size(); ++k) os << ',' << r.mean[k][g] << ',' << r.sem[k][g];
    os << '\n';
  }
  return os.str();
}

}  // namespace oqs
