#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "hdl/rng.hpp"

namespace hdl {

using Ordering = std::vector<int>;

// Directed acyclic graph over nodes labeled 1..p. Acyclicity is validated
// at construction; instances are immutable afterwards and safe to share
// across threads.
class Dag {
  public:
    Dag(int p, std::vector<std::pair<int, int>> edges);

    int node_count() const { return p_; }

    const std::vector<int>& parents(int v) const;
    const std::vector<int>& children(int v) const;

    // Strict ancestors/descendants: v itself is excluded. Sorted output.
    std::vector<int> ancestors(int v) const;
    std::vector<int> descendants(int v) const;

    bool has_edge(int u, int v) const;

    // Edge list sorted by (u, v).
    std::vector<std::pair<int, int>> edges() const;
    int edge_count() const { return edge_count_; }

    // Kahn's algorithm, smallest label first among available roots.
    Ordering topological_sort() const;

    // true iff no edge (u, v) places v before u in `order`.
    // `order` must be a permutation of 1..p.
    bool is_consistent_ordering(const Ordering& order) const;

    // true iff the topological order is unique (every Kahn step has
    // exactly one available root).
    bool has_unique_topological_order() const;

  private:
    void check_node(int v) const;

    int p_ = 0;
    int edge_count_ = 0;
    std::vector<std::vector<int>> parents_;   // index 0 unused
    std::vector<std::vector<int>> children_;  // index 0 unused
};

// Dag plus a coefficient matrix; coeffs(v-1, u-1) is the direct effect of
// node u on node v and must be nonzero exactly on the edge set.
class WeightedDag {
  public:
    WeightedDag(Dag dag, Eigen::MatrixXd coeffs);

    const Dag& dag() const { return dag_; }
    const Eigen::MatrixXd& coeffs() const { return coeffs_; }
    double coeff(int v, int u) const { return coeffs_(v - 1, u - 1); }
    int node_count() const { return dag_.node_count(); }

  private:
    Dag dag_;
    Eigen::MatrixXd coeffs_;
};

// Validates that `order` is a permutation of 1..p.
bool is_permutation_of_nodes(const Ordering& order, int p);

// Random DAG with forced backbone edges (v-1, v). Node v >= 2 receives
// d_v ~ uniform{1..min(v-1, J)} parents: the backbone parent with weight
// uniform on (-1,-.5) u (.5,1), plus d_v - 1 parents drawn uniformly
// without replacement from {1..v-2} with weights of magnitude 1/5 and
// uniform sign. The backbone makes the topological order unique.
WeightedDag random_dag(int p, int max_in_degree, Rng& rng);
WeightedDag random_dag(int p, int max_in_degree, std::uint64_t seed);

// Chain backbone with weights uniform on (-1,-.65) u (.65,1); nodes
// 1..n_hubs act as hubs and every non-hub node gains one edge of weight
// +-1/5 from a uniformly chosen hub (coalesced with the backbone edge when
// the drawn hub is already the backbone parent). Hub out-degree grows with
// p while the max in-degree stays at 2.
WeightedDag hub_dag(int p, int n_hubs, Rng& rng);
WeightedDag hub_dag(int p, int n_hubs, std::uint64_t seed);

}  // namespace hdl
