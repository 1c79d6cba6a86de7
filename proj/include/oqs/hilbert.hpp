#pragma once

// Local bases, lattice graphs and dense operators on tensor-product spaces.
// Site 0 is the slowest-varying index of every product basis.

#include "oqs/numeric.hpp"

#include <string>
#include <utility>
#include <vector>

namespace oqs {

/// Largest full Hilbert-space dimension accepted by dense routines.
inline constexpr int kMaxDim = 4096;

enum class BasisKind { SpinHalf, Boson, HardcoreBoson, CollectiveSpin, Qudit };

std::string to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& s);

/// One site. Spin-half: index 0 is |up>. Bosons: Fock states ascending.
/// CollectiveSpin: m = S, S-1, ..., -S. Qudit: plain register |0>..|d-1>.
struct LocalBasis {
  BasisKind kind = BasisKind::SpinHalf;
  int dim = 2;

  static LocalBasis spin_half() { return {BasisKind::SpinHalf, 2}; }
  static LocalBasis hardcore() { return {BasisKind::HardcoreBoson, 2}; }
  static LocalBasis boson(int n_max);
  static LocalBasis collective(int two_s);
  static LocalBasis qudit(int d);

  void validate() const;
  bool operator==(const LocalBasis&) const = default;
};

using Basis = std::vector<LocalBasis>;

int total_dim(const Basis& b);

enum class Geometry { ChainOpen, ChainPeriodic, SquareOpen, AllToAll, Star, Custom };

std::string to_string(Geometry g);
Geometry geometry_from_string(const std::string& s);

struct LatticeGraph {
  int n_sites = 0;
  std::vector<std::pair<int, int>> edges;
  Geometry geometry = Geometry::Custom;

  static LatticeGraph chain(int n, bool periodic = false);
  static LatticeGraph square(int lx, int ly);
  static LatticeGraph all_to_all(int n);
  /// Site 0 is the hub.
  static LatticeGraph star(int n);
  static LatticeGraph custom(int n, std::vector<std::pair<int, int>> edges);

  void validate() const;
  int coordination(int site) const;
  std::vector<int> neighbours(int site) const;
  bool operator==(const LatticeGraph&) const = default;
};

struct Operator {
  Mat matrix;
  Basis basis;

  Operator() = default;
  Operator(Mat m, Basis b);

  int dim() const { return static_cast<int>(matrix.rows()); }
  bool is_hermitian(double tol = 1e-12) const;
  /// Throws if not Hermitian to tol.
  const Operator& assert_hermitian(double tol = 1e-12) const;
  Operator adjoint() const { return {matrix.adjoint(), basis}; }
  cd trace() const { return matrix.trace(); }
};

Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(cd s, const Operator& a);
Operator identity(const Basis& b);

/// Single-site matrices. Names: id; spin-half sx sy sz sp sm (sp = |up><down|), n (=sp sm);
/// bosons and hard-core bosons a adag n; collective spin Sx Sy Sz Sp Sm; qudit id only.
Operator local_operator(const LocalBasis& basis, const std::string& name);

/// Identity everywhere except op at site.
Operator embed(const Operator& op, int site, const Basis& basis);

/// Tensor product of single-site operators at distinct sites (identity elsewhere).
/// Built by Kronecker products, so it costs O(dim^2).
Operator product(const std::vector<std::pair<int, Mat>>& factors, const Basis& basis);

/// Reduced operator on the kept sites (kept order follows site order).
Operator partial_trace(const Operator& rho, const std::vector<int>& keep);

/// Population of the top Fock level of a boson site; leakage diagnostic for truncation.
double top_level_population(const Operator& rho, int site);
/// Same for a pure state.
double top_level_population(const Vec& psi, const Basis& basis, int site);

/// Product state from per-site local state vectors.
Vec product_state(const std::vector<Vec>& local);

/// |k> of a single site as a vector.
Vec basis_vector(int dim, int k);

/// Projector |psi><psi| on a basis.
Operator projector(const Vec& psi, const Basis& basis);

}  // namespace oqs
