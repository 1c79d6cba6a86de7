#include "oqs/nlce.hpp"

#include "oqs/liouville.hpp"

#include <json.hpp>

#include <Eigen/SparseLU>

#include <algorithm>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace oqs {

std::string to_string(LatticeKind k) { return k == LatticeKind::Chain ? "chain" : "square"; }

LatticeKind lattice_kind_from_string(const std::string& s) {
  if (s == "chain") return LatticeKind::Chain;
  if (s == "square") return LatticeKind::Square;
  throw InputError("unknown lattice '" + s + "' (chain, square)");
}

namespace {

using Adj = std::vector<std::vector<char>>;

Adj adjacency(int n, const std::vector<std::pair<int, int>>& edges) {
  Adj a(n, std::vector<char>(n, 0));
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw InputError("cluster: bad edge");
    a[i][j] = a[j][i] = 1;
  }
  return a;
}

std::string bits(const Adj& a, const std::vector<int>& perm) {
  const int n = static_cast<int>(a.size());
  std::string s;
  s.reserve(n * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) s.push_back(a[perm[i]][perm[j]] ? '1' : '0');
  return s;
}

}  // namespace

Cluster make_cluster(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 1) throw InputError("cluster: need at least one site");
  if (n > 10) throw ResourceError("cluster: canonical form limited to 10 sites");
  Adj a = adjacency(n, edges);
  std::vector<int> perm(n), best;
  std::iota(perm.begin(), perm.end(), 0);
  std::string best_bits;
  // maximal bit string: dense rows first, a fixed choice among isomorphic labellings
  do {
    std::string b = bits(a, perm);
    if (best.empty() || b > best_bits) {
      best_bits = b;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  Cluster c;
  c.n_sites = n;
  c.key = std::to_string(n) + ":" + best_bits;
  int p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (best_bits[p++] == '1') c.edges.push_back({i, j});
  return c;
}

LatticeGraph Cluster::graph() const { return LatticeGraph::custom(n_sites, edges); }

bool Cluster::connected() const {
  std::vector<int> seen(n_sites, 0), stack = {0};
  seen[0] = 1;
  Adj a = adjacency(n_sites, edges);
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w = 0; w < n_sites; ++w)
      if (a[v][w] && !seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == n_sites;
}

std::vector<ClusterCount> enumerate_clusters(LatticeKind lattice, int max_order, int cap) {
  if (cap < 0) cap = lattice == LatticeKind::Chain ? 8 : 6;
  if (max_order < 1) throw InputError("enumerate_clusters: order must be >= 1");
  if (max_order > cap) throw ResourceError("enumerate_clusters: order " + std::to_string(max_order) + " exceeds cap " + std::to_string(cap));
  using P = std::pair<int, int>;
  const std::vector<P> steps = lattice == LatticeKind::Chain ? std::vector<P>{{1, 0}, {-1, 0}}
                                                             : std::vector<P>{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  // fixed animals, normalized so the lexicographically smallest site is the origin
  auto normalize = [](std::vector<P> s) {
    std::sort(s.begin(), s.end());
    const P o = s.front();
    for (auto& p : s) p = {p.first - o.first, p.second - o.second};
    return s;
  };
  std::map<std::string, ClusterCount> classes;
  std::set<std::vector<P>> level = {{{0, 0}}};
  for (int n = 1; n <= max_order; ++n) {
    for (const auto& s : level) {
      std::vector<std::pair<int, int>> edges;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const int dx = std::abs(s[i].first - s[j].first), dy = std::abs(s[i].second - s[j].second);
          if (dx + dy == 1) edges.push_back({i, j});
        }
      Cluster c = make_cluster(n, edges);
      auto it = classes.find(c.key);
      if (it == classes.end()) classes.emplace(c.key, ClusterCount{c, 1});
      else ++it->second.embeddings;
    }
    if (n == max_order) break;
    std::set<std::vector<P>> next;
    for (const auto& s : level)
      for (const auto& p : s)
        for (const auto& d : steps) {
          P q{p.first + d.first, p.second + d.second};
          if (std::find(s.begin(), s.end(), q) != s.end()) continue;
          auto t = s;
          t.push_back(q);
          next.insert(normalize(t));
        }
    level = std::move(next);
  }
  std::vector<ClusterCount> out;
  for (auto& [k, v] : classes) out.push_back(v);
  std::sort(out.begin(), out.end(), [](const ClusterCount& a, const ClusterCount& b) {
    return a.cluster.n_sites != b.cluster.n_sites ? a.cluster.n_sites < b.cluster.n_sites : a.cluster.key < b.cluster.key;
  });
  return out;
}

std::vector<ClusterCount> subclusters(const Cluster& c) {
  const int n = c.n_sites;
  Adj a = adjacency(n, c.edges);
  std::map<std::string, ClusterCount> found;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    std::vector<std::pair<int, int>> e;
    for (size_t x = 0; x < idx.size(); ++x)
      for (size_t y = x + 1; y < idx.size(); ++y)
        if (a[idx[x]][idx[y]]) e.push_back({int(x), int(y)});
    Cluster s = make_cluster(static_cast<int>(idx.size()), e);
    if (!s.connected()) continue;
    auto it = found.find(s.key);
    if (it == found.end()) found.emplace(s.key, ClusterCount{s, 1});
    else ++it->second.embeddings;
  }
  std::vector<ClusterCount> out;
  for (auto& [k, v] : found) out.push_back(v);
  return out;
}

double WeightTable::property(const Cluster& c) {
  auto it = props_.find(c.key);
  if (it != props_.end()) return it->second;
  const double p = property_(c);
  props_[c.key] = p;
  return p;
}

double WeightTable::weight(const Cluster& c) {
  auto it = weights_.find(c.key);
  if (it != weights_.end()) return it->second;
  // disconnected graphs are not memoized under a property: P(A u B) = P(A) + P(B)
  double p;
  if (c.connected()) {
    p = property(c);
  } else {
    p = 0;
    Adj a = adjacency(c.n_sites, c.edges);
    std::vector<int> comp(c.n_sites, -1);
    int nc = 0;
    for (int s = 0; s < c.n_sites; ++s) {
      if (comp[s] >= 0) continue;
      std::vector<int> stack = {s}, members;
      comp[s] = nc;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        members.push_back(v);
        for (int w = 0; w < c.n_sites; ++w)
          if (a[v][w] && comp[w] < 0) comp[w] = nc, stack.push_back(w);
      }
      std::sort(members.begin(), members.end());
      std::vector<std::pair<int, int>> e;
      for (size_t x = 0; x < members.size(); ++x)
        for (size_t y = x + 1; y < members.size(); ++y)
          if (a[members[x]][members[y]]) e.push_back({int(x), int(y)});
      p += property(make_cluster(static_cast<int>(members.size()), e));
      ++nc;
    }
  }
  double w = p;
  for (const auto& s : subclusters(c)) w -= s.embeddings * weight(s.cluster);
  weights_[c.key] = w;
  return w;
}

std::vector<double> euler_resum(const std::vector<double>& a, int start) {
  if (start < 0) throw InputError("euler_resum: start must be >= 0");
  std::vector<double> out;
  double head = 0;
  for (size_t r = 0; r < a.size(); ++r) {
    if (static_cast<int>(r) < start) {
      head += a[r];
      out.push_back(head);
      continue;
    }
    // v_m = (-1)^m a_{start+m}, m = 0..r-start
    std::vector<double> v;
    for (size_t m = start; m <= r; ++m) v.push_back(((m - start) % 2 ? -1.0 : 1.0) * a[m]);
    double tail = 0, scale = 0.5, sign = 1;
    while (!v.empty()) {
      tail += sign * scale * v[0];
      for (size_t i = 0; i + 1 < v.size(); ++i) v[i] = v[i + 1] - v[i];
      v.pop_back();
      scale *= 0.5;
      sign = -sign;
    }
    out.push_back(head + tail);
  }
  return out;
}

NlceSeries nlce_series(LatticeKind lattice, int max_order, const ClusterProperty& property, int cap, int euler_start) {
  auto cs = enumerate_clusters(lattice, max_order, cap);
  WeightTable table(property);
  NlceSeries s;
  s.order_sums.assign(max_order, 0.0);
  for (const auto& c : cs) s.order_sums[c.cluster.n_sites - 1] += c.embeddings * table.weight(c.cluster);
  double acc = 0;
  for (int r = 1; r <= max_order; ++r) {
    s.order.push_back(r);
    acc += s.order_sums[r - 1];
    s.partial.push_back(acc);
  }
  s.euler = euler_resum(s.order_sums, euler_start);
  return s;
}

namespace {

// Unique steady state: one row of L replaced by the trace condition, sparse LU.
Operator unique_steady_state(const ModelSpec& m) {
  SuperOperator l = vectorize(m);
  const int d = l.d;
  SpMat a = l.matrix;
  a.prune([](int row, int, const cd&) { return row != 0; });
  std::vector<Eigen::Triplet<cd>> t;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < d; ++i) t.emplace_back(0, i * (d + 1), 1.0);
  SpMat b(a.rows(), a.cols());
  b.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(b);
  if (lu.info() != Eigen::Success) throw NumericalError("nlce: steady state is not unique on cluster");
  Vec rhs = Vec::Zero(a.rows());
  rhs(0) = 1.0;
  Vec x = lu.solve(rhs);
  Mat rho = Eigen::Map<const Mat>(x.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint());
  if ((l.matrix * x).norm() > 1e-8 * std::max(1.0, x.norm()) || !x.allFinite())
    throw NumericalError("nlce: steady-state solve inaccurate");
  return Operator(rho, m.basis);
}

double site_sum(const ModelSpec& m, const Operator& rho, const std::vector<std::pair<std::string, double>>& ops) {
  double s = 0;
  const int n = static_cast<int>(m.basis.size());
  for (int i = 0; i < n; ++i) {
    Operator red = n == 1 ? rho : partial_trace(rho, {i});
    for (const auto& [name, w] : ops) s += w * (local_operator(m.basis[i], name).matrix * red.matrix).trace().real();
  }
  return s;
}

}  // namespace

ClusterProperty steady_state_property(const std::string& model, const Params& params, const std::string& local_op) {
  return [=](const Cluster& c) {
    ModelSpec m = build_model(model, params, c.graph());
    return site_sum(m, unique_steady_state(m), {{local_op, 1.0}});
  };
}

double susceptibility_on_cluster(const Cluster& c, const Params& xyz_params, double dh) {
  if (!(dh > 0)) throw InputError("susceptibility: dh must be > 0");
  const int n_angles = 8;
  auto response = [&](double theta, double h) {
    auto mag = [&](double field) {
      Params p = xyz_params;
      p["hx"] = field * std::cos(theta);
      p["hy"] = field * std::sin(theta);
      ModelSpec m = build_model("xyz", p, c.graph());
      return site_sum(m, unique_steady_state(m), {{"sx", std::cos(theta)}, {"sy", std::sin(theta)}});
    };
    return (mag(h) - mag(-h)) / (2 * h);
  };
  double avg_h = 0, avg_h2 = 0;
  for (int k = 0; k < n_angles; ++k) {
    const double theta = std::numbers::pi * k / n_angles;
    avg_h += response(theta, dh) / n_angles;
    avg_h2 += response(theta, 0.5 * dh) / n_angles;
  }
  if (std::abs(avg_h - avg_h2) > 0.01 * std::abs(avg_h2) + 1e-9)
    throw NumericalError("susceptibility: finite-difference noise floor reached (dh and dh/2 disagree)");
  return (4 * avg_h2 - avg_h) / 3;
}

ClusterProperty susceptibility_property(const Params& xyz_params, double dh) {
  return [=](const Cluster& c) { return susceptibility_on_cluster(c, xyz_params, dh); };
}

std::string nlce_csv(const NlceSeries& s) {
  std::ostringstream os;
  os.precision(17);
  os << "order,bare,euler\n";
  for (size_t i = 0; i < s.order.size(); ++i) os << s.order[i] << ',' << s.partial[i] << ',' << s.euler[i] << '\n';
  return os.str();
}

std::string clusters_json(const std::vector<ClusterCount>& cs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cs) {
    nlohmann::json e;
    e["n_sites"] = c.cluster.n_sites;
    e["key"] = c.cluster.key;
    e["embeddings"] = c.embeddings;
    e["edges"] = nlohmann::json::array();
    for (auto [i, j] : c.cluster.edges) e["edges"].push_back({i, j});
    arr.push_back(e);
  }
  return arr.dump(2);
}

}  // namespace oqs
