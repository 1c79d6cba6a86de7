#pragma once

// Numerical linked-cluster expansion for steady-state observables per lattice site.

#include "oqs/models.hpp"

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oqs {

enum class LatticeKind { Chain, Square };
std::string to_string(LatticeKind k);
LatticeKind lattice_kind_from_string(const std::string& s);

/// A graph on n_sites vertices with edges (i < j). Clusters produced here are relabelled into
/// canonical vertex order, so isomorphic graphs compare equal field by field.
struct Cluster {
  int n_sites = 0;
  std::vector<std::pair<int, int>> edges;
  std::string key;  // canonical form: "n:" + minimal upper-triangle adjacency bits

  LatticeGraph graph() const;
  bool connected() const;
};

/// Builds a cluster from any labelling (disconnected graphs allowed) and canonicalizes it.
Cluster make_cluster(int n_sites, std::vector<std::pair<int, int>> edges);

struct ClusterCount {
  Cluster cluster;
  long embeddings = 0;  // per-site lattice constant
};

/// Connected clusters with 1..max_order sites, ordered by size then key. ResourceError when
/// max_order exceeds cap (cap < 0 picks 8 for chains, 6 for the square lattice).
std::vector<ClusterCount> enumerate_clusters(LatticeKind lattice, int max_order, int cap = -1);

/// Connected induced subgraphs of c on proper vertex subsets, grouped by key, with counts.
std::vector<ClusterCount> subclusters(const Cluster& c);

/// Extensive property of a finite cluster (sum over its sites). Must depend only on the graph.
using ClusterProperty = std::function<double(const Cluster&)>;

/// W(c) = P(c) - sum over proper connected subclusters s of count(s) W(s), memoized by key.
class WeightTable {
 public:
  explicit WeightTable(ClusterProperty property) : property_(std::move(property)) {}
  double property(const Cluster& c);
  double weight(const Cluster& c);
  const std::map<std::string, double>& weights() const { return weights_; }

 private:
  ClusterProperty property_;
  std::map<std::string, double> props_;
  std::map<std::string, double> weights_;
};

struct NlceSeries {
  std::vector<int> order;
  std::vector<double> order_sums;  // sum over clusters of size R of l(c) W(c)
  std::vector<double> partial;     // S_R
  std::vector<double> euler;       // resummed partial sums
};

NlceSeries nlce_series(LatticeKind lattice, int max_order, const ClusterProperty& property, int cap = -1,
                       int euler_start = 2);

/// Forward-difference Euler transform of sum_n a_n (a = order_sums). The first euler_start terms
/// are summed directly; the tail u_m = a_{start+m} is written as sum (-1)^m v_m and replaced by
/// sum_k (-1)^k (Delta^k v)_0 / 2^{k+1}. Entry R uses the terms up to order R.
std::vector<double> euler_resum(const std::vector<double>& order_sums, int euler_start = 2);

/// Steady-state sum over sites of <local op> for a catalog model built on the cluster graph.
ClusterProperty steady_state_property(const std::string& model, const Params& params, const std::string& local_op);

/// Susceptibility of the in-plane magnetization of the catalog "xyz" model on a cluster, averaged
/// over 8 field angles theta_k = pi k / 8 (exact for responses with period pi up to degree 7).
/// Central differences with dh and dh/2 combined by Richardson; NumericalError when they differ
/// by more than 1%.
double susceptibility_on_cluster(const Cluster& c, const Params& xyz_params, double dh = 1e-4);
ClusterProperty susceptibility_property(const Params& xyz_params, double dh = 1e-4);

/// Columns order, bare, euler.
std::string nlce_csv(const NlceSeries& s);
/// Cluster inventory: n_sites, edges, key, embeddings.
std::string clusters_json(const std::vector<ClusterCount>& cs);

}  // namespace oqs
