#include "oqs/hilbert.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <set>

namespace oqs {

std::string to_string(BasisKind k) {
  switch (k) {
    case BasisKind::SpinHalf: return "spin-half";
    case BasisKind::Boson: return "boson-truncated";
    case BasisKind::HardcoreBoson: return "hardcore-boson";
    case BasisKind::CollectiveSpin: return "collective-spin";
    case BasisKind::Qudit: return "qudit";
  }
  return "?";
}

BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "spin-half") return BasisKind::SpinHalf;
  if (s == "boson-truncated") return BasisKind::Boson;
  if (s == "hardcore-boson") return BasisKind::HardcoreBoson;
  if (s == "collective-spin") return BasisKind::CollectiveSpin;
  if (s == "qudit") return BasisKind::Qudit;
  throw InputError("unknown basis kind: " + s);
}

LocalBasis LocalBasis::boson(int n_max) {
  LocalBasis b{BasisKind::Boson, n_max + 1};
  b.validate();
  return b;
}

LocalBasis LocalBasis::collective(int two_s) {
  LocalBasis b{BasisKind::CollectiveSpin, two_s + 1};
  b.validate();
  return b;
}

LocalBasis LocalBasis::qudit(int d) {
  LocalBasis b{BasisKind::Qudit, d};
  b.validate();
  return b;
}

void LocalBasis::validate() const {
  if (dim < 2) throw InputError("local dimension must be >= 2");
  if ((kind == BasisKind::SpinHalf || kind == BasisKind::HardcoreBoson) && dim != 2)
    throw InputError(to_string(kind) + " must have dim 2");
}

int total_dim(const Basis& b) {
  long d = 1;
  for (const auto& lb : b) {
    lb.validate();
    d *= lb.dim;
    if (d > (1L << 30)) throw ResourceError("Hilbert space dimension overflow");
  }
  return static_cast<int>(d);
}

std::string to_string(Geometry g) {
  switch (g) {
    case Geometry::ChainOpen: return "chain-open";
    case Geometry::ChainPeriodic: return "chain-periodic";
    case Geometry::SquareOpen: return "square-open";
    case Geometry::AllToAll: return "all-to-all";
    case Geometry::Star: return "star";
    case Geometry::Custom: return "custom";
  }
  return "?";
}

Geometry geometry_from_string(const std::string& s) {
  for (auto g : {Geometry::ChainOpen, Geometry::ChainPeriodic, Geometry::SquareOpen,
                 Geometry::AllToAll, Geometry::Star, Geometry::Custom})
    if (to_string(g) == s) return g;
  throw InputError("unknown geometry: " + s);
}

LatticeGraph LatticeGraph::chain(int n, bool periodic) {
  if (n < 1) throw InputError("chain needs n >= 1");
  LatticeGraph g;
  g.n_sites = n;
  g.geometry = periodic ? Geometry::ChainPeriodic : Geometry::ChainOpen;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  if (periodic && n > 2) g.edges.emplace_back(n - 1, 0);
  return g;
}

LatticeGraph LatticeGraph::square(int lx, int ly) {
  if (lx < 1 || ly < 1) throw InputError("square lattice needs lx, ly >= 1");
  LatticeGraph g;
  g.n_sites = lx * ly;
  g.geometry = Geometry::SquareOpen;
  auto id = [lx](int x, int y) { return y * lx + x; };
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      if (x + 1 < lx) g.edges.emplace_back(id(x, y), id(x + 1, y));
      if (y + 1 < ly) g.edges.emplace_back(id(x, y), id(x, y + 1));
    }
  return g;
}

LatticeGraph LatticeGraph::all_to_all(int n) {
  LatticeGraph g;
  g.n_sites = n;
  g.geometry = Geometry::AllToAll;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
  return g;
}

LatticeGraph LatticeGraph::star(int n) {
  LatticeGraph g;
  g.n_sites = n;
  g.geometry = Geometry::Star;
  for (int j = 1; j < n; ++j) g.edges.emplace_back(0, j);
  return g;
}

LatticeGraph LatticeGraph::custom(int n, std::vector<std::pair<int, int>> edges) {
  LatticeGraph g;
  g.n_sites = n;
  g.edges = std::move(edges);
  g.geometry = Geometry::Custom;
  g.validate();
  return g;
}

void LatticeGraph::validate() const {
  if (n_sites < 1) throw InputError("graph needs at least one site");
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a == b) throw InputError("self-edge in lattice graph");
    if (a < 0 || b < 0 || a >= n_sites || b >= n_sites) throw InputError("edge endpoint out of range");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) throw InputError("duplicate edge");
  }
}

int LatticeGraph::coordination(int site) const { return static_cast<int>(neighbours(site).size()); }

std::vector<int> LatticeGraph::neighbours(int site) const {
  std::vector<int> nb;
  for (auto [a, b] : edges) {
    if (a == site) nb.push_back(b);
    if (b == site) nb.push_back(a);
  }
  return nb;
}

Operator::Operator(Mat m, Basis b) : matrix(std::move(m)), basis(std::move(b)) {
  const int d = total_dim(basis);
  if (matrix.rows() != d || matrix.cols() != d)
    throw InputError("operator matrix dimension does not match its basis");
}

bool Operator::is_hermitian(double tol) const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, matrix.cwiseAbs().maxCoeff());
}

const Operator& Operator::assert_hermitian(double tol) const {
  if (!is_hermitian(tol)) throw InputError("operator is not Hermitian");
  return *this;
}

static void same_basis(const Operator& a, const Operator& b) {
  if (a.basis != b.basis) throw InputError("operators live on different bases");
}

Operator operator+(const Operator& a, const Operator& b) {
  same_basis(a, b);
  return {a.matrix + b.matrix, a.basis};
}
Operator operator-(const Operator& a, const Operator& b) {
  same_basis(a, b);
  return {a.matrix - b.matrix, a.basis};
}
Operator operator*(const Operator& a, const Operator& b) {
  same_basis(a, b);
  return {a.matrix * b.matrix, a.basis};
}
Operator operator*(cd s, const Operator& a) { return {s * a.matrix, a.basis}; }

Operator identity(const Basis& b) {
  int d = total_dim(b);
  return {Mat::Identity(d, d), b};
}

Operator local_operator(const LocalBasis& basis, const std::string& name) {
  basis.validate();
  const int d = basis.dim;
  Mat m = Mat::Zero(d, d);
  if (name == "id") return {Mat::Identity(d, d), {basis}};
  switch (basis.kind) {
    case BasisKind::SpinHalf:
      if (name == "sx") m << 0, 1, 1, 0;
      else if (name == "sy") m << 0, -I1, I1, 0;
      else if (name == "sz") m << 1, 0, 0, -1;
      else if (name == "sp") m << 0, 1, 0, 0;
      else if (name == "sm") m << 0, 0, 1, 0;
      else if (name == "n") m << 1, 0, 0, 0;
      else throw InputError("operator '" + name + "' not defined on spin-half");
      break;
    case BasisKind::Boson:
    case BasisKind::HardcoreBoson:
      if (name == "a") {
        for (int n = 1; n < d; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
      } else if (name == "adag") {
        for (int n = 1; n < d; ++n) m(n, n - 1) = std::sqrt(static_cast<double>(n));
      } else if (name == "n") {
        for (int n = 0; n < d; ++n) m(n, n) = n;
      } else {
        throw InputError("operator '" + name + "' not defined on " + to_string(basis.kind));
      }
      break;
    case BasisKind::CollectiveSpin: {
      const double s = 0.5 * (d - 1);
      Mat sp = Mat::Zero(d, d);
      // index k <-> m = s - k
      for (int k = 1; k < d; ++k) {
        double mm = s - k;
        sp(k - 1, k) = std::sqrt(s * (s + 1) - mm * (mm + 1));
      }
      if (name == "Sz") {
        for (int k = 0; k < d; ++k) m(k, k) = s - k;
      } else if (name == "Sp") {
        m = sp;
      } else if (name == "Sm") {
        m = sp.adjoint();
      } else if (name == "Sx") {
        m = 0.5 * (sp + sp.adjoint());
      } else if (name == "Sy") {
        m = -0.5 * I1 * (sp - sp.adjoint());
      } else {
        throw InputError("operator '" + name + "' not defined on collective-spin");
      }
      break;
    }
    case BasisKind::Qudit:
      throw InputError("operator '" + name + "' not defined on qudit");
  }
  return {m, {basis}};
}

Operator embed(const Operator& op, int site, const Basis& basis) {
  if (site < 0 || site >= static_cast<int>(basis.size())) throw InputError("embed: site out of range");
  if (op.basis.size() != 1) throw InputError("embed: operator is not single-site");
  if (!(op.basis[0] == basis[site])) throw InputError("embed: local basis mismatch");
  return product({{site, op.matrix}}, basis);
}

Operator product(const std::vector<std::pair<int, Mat>>& factors, const Basis& basis) {
  const int n = static_cast<int>(basis.size());
  std::vector<Mat> loc(n);
  for (int i = 0; i < n; ++i) loc[i] = Mat::Identity(basis[i].dim, basis[i].dim);
  for (const auto& [site, m] : factors) {
    if (site < 0 || site >= n) throw InputError("product: site out of range");
    if (m.rows() != basis[site].dim || m.cols() != basis[site].dim)
      throw InputError("product: factor dimension mismatch");
    loc[site] = loc[site] * m;
  }
  // Group identity runs to keep the Kronecker chain short.
  Mat acc = Mat::Identity(1, 1);
  int i = 0;
  while (i < n) {
    bool is_id = loc[i].isIdentity(0.0);
    if (is_id) {
      int d = 1;
      while (i < n && loc[i].isIdentity(0.0)) d *= basis[i++].dim;
      Mat t = Eigen::kroneckerProduct(acc, Mat::Identity(d, d)).eval();
      acc = std::move(t);
    } else {
      Mat t = Eigen::kroneckerProduct(acc, loc[i]).eval();
      acc = std::move(t);
      ++i;
    }
  }
  return {acc, basis};
}

Operator partial_trace(const Operator& rho, const std::vector<int>& keep_in) {
  const int n = static_cast<int>(rho.basis.size());
  std::vector<int> keep = keep_in;
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.empty() || static_cast<int>(keep.size()) >= n) throw InputError("partial_trace: keep must be a nonempty proper subset");
  for (int k : keep)
    if (k < 0 || k >= n) throw InputError("partial_trace: site out of range");
  std::vector<bool> kept(n, false);
  for (int k : keep) kept[k] = true;

  Basis kb, tb;
  for (int i = 0; i < n; ++i) (kept[i] ? kb : tb).push_back(rho.basis[i]);
  const int dk = total_dim(kb), dt = total_dim(tb);
  const int d = rho.dim();
  // full index -> (kept index, traced index)
  std::vector<int> ki(d), ti(d);
  std::vector<int> digit(n, 0);
  for (int idx = 0; idx < d; ++idx) {
    int a = 0, b = 0;
    for (int s = 0; s < n; ++s) {
      if (kept[s]) a = a * rho.basis[s].dim + digit[s];
      else b = b * rho.basis[s].dim + digit[s];
    }
    ki[idx] = a;
    ti[idx] = b;
    for (int s = n - 1; s >= 0; --s) {
      if (++digit[s] < rho.basis[s].dim) break;
      digit[s] = 0;
    }
  }
  // full index from (kept, traced)
  std::vector<int> full(static_cast<size_t>(dk) * dt);
  for (int idx = 0; idx < d; ++idx) full[static_cast<size_t>(ki[idx]) * dt + ti[idx]] = idx;
  Mat r = Mat::Zero(dk, dk);
  for (int a = 0; a < dk; ++a)
    for (int b = 0; b < dk; ++b) {
      cd s = 0;
      for (int t = 0; t < dt; ++t) s += rho.matrix(full[static_cast<size_t>(a) * dt + t], full[static_cast<size_t>(b) * dt + t]);
      r(a, b) = s;
    }
  return {r, kb};
}

double top_level_population(const Operator& rho, int site) {
  if (site < 0 || site >= static_cast<int>(rho.basis.size())) throw InputError("site out of range");
  const auto& lb = rho.basis[site];
  if (lb.kind != BasisKind::Boson) throw InputError("top_level_population needs a truncated boson site");
  Mat p = Mat::Zero(lb.dim, lb.dim);
  p(lb.dim - 1, lb.dim - 1) = 1.0;
  return (product({{site, p}}, rho.basis).matrix * rho.matrix).trace().real();
}

double top_level_population(const Vec& psi, const Basis& basis, int site) {
  if (site < 0 || site >= static_cast<int>(basis.size())) throw InputError("site out of range");
  if (basis[site].kind != BasisKind::Boson) throw InputError("top_level_population needs a truncated boson site");
  int inner = 1;
  for (size_t s = site + 1; s < basis.size(); ++s) inner *= basis[s].dim;
  const int ds = basis[site].dim;
  double p = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    if ((i / inner) % ds == ds - 1) p += std::norm(psi[i]);
  return p;
}

Vec product_state(const std::vector<Vec>& local) {
  Vec acc = Vec::Ones(1);
  for (const auto& v : local) {
    Vec t = Eigen::kroneckerProduct(acc, v).eval();
    acc = std::move(t);
  }
  return acc;
}

Vec basis_vector(int dim, int k) {
  if (k < 0 || k >= dim) throw InputError("basis_vector: index out of range");
  Vec v = Vec::Zero(dim);
  v[k] = 1.0;
  return v;
}

Operator projector(const Vec& psi, const Basis& basis) { return {psi * psi.adjoint(), basis}; }

}  // namespace oqs
