#include "hdl/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <string>

#include "hdl/errors.hpp"

namespace hdl {

namespace {

std::string edge_str(int u, int v) {
    return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

}  // namespace

Dag::Dag(int p, std::vector<std::pair<int, int>> edges) : p_(p) {
    if (p_ < 0) throw input_error("node count must be nonnegative");
    parents_.assign(p_ + 1, {});
    children_.assign(p_ + 1, {});
    std::set<std::pair<int, int>> seen;
    for (const auto& [u, v] : edges) {
        if (u < 1 || u > p_ || v < 1 || v > p_)
            throw input_error("edge " + edge_str(u, v) + " has a label outside 1.." +
                              std::to_string(p_));
        if (u == v) throw structure_error("self-loop at node " + std::to_string(u));
        if (!seen.insert({u, v}).second)
            throw structure_error("duplicate edge " + edge_str(u, v));
        parents_[v].push_back(u);
        children_[u].push_back(v);
    }
    for (int v = 1; v <= p_; ++v) {
        std::sort(parents_[v].begin(), parents_[v].end());
        std::sort(children_[v].begin(), children_[v].end());
    }
    edge_count_ = static_cast<int>(seen.size());
    topological_sort();  // throws structure_error on a cycle
}

void Dag::check_node(int v) const {
    if (v < 1 || v > p_)
        throw input_error("unknown node label " + std::to_string(v) +
                          " (graph has " + std::to_string(p_) + " nodes)");
}

const std::vector<int>& Dag::parents(int v) const {
    check_node(v);
    return parents_[v];
}

const std::vector<int>& Dag::children(int v) const {
    check_node(v);
    return children_[v];
}

std::vector<int> Dag::ancestors(int v) const {
    check_node(v);
    std::vector<bool> seen(p_ + 1, false);
    std::vector<int> stack = parents_[v];
    std::vector<int> out;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        if (seen[u]) continue;
        seen[u] = true;
        out.push_back(u);
        for (int w : parents_[u])
            if (!seen[w]) stack.push_back(w);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> Dag::descendants(int v) const {
    check_node(v);
    std::vector<bool> seen(p_ + 1, false);
    std::vector<int> stack = children_[v];
    std::vector<int> out;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        if (seen[u]) continue;
        seen[u] = true;
        out.push_back(u);
        for (int w : children_[u])
            if (!seen[w]) stack.push_back(w);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Dag::has_edge(int u, int v) const {
    check_node(u);
    check_node(v);
    return std::binary_search(parents_[v].begin(), parents_[v].end(), u);
}

std::vector<std::pair<int, int>> Dag::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edge_count_);
    for (int u = 1; u <= p_; ++u)
        for (int v : children_[u]) out.push_back({u, v});
    std::sort(out.begin(), out.end());
    return out;
}

Ordering Dag::topological_sort() const {
    std::vector<int> indegree(p_ + 1, 0);
    for (int v = 1; v <= p_; ++v)
        indegree[v] = static_cast<int>(parents_[v].size());
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int v = 1; v <= p_; ++v)
        if (indegree[v] == 0) ready.push(v);
    Ordering order;
    order.reserve(p_);
    while (!ready.empty()) {
        const int v = ready.top();
        ready.pop();
        order.push_back(v);
        for (int w : children_[v])
            if (--indegree[w] == 0) ready.push(w);
    }
    if (static_cast<int>(order.size()) != p_)
        throw structure_error("graph contains a directed cycle");
    return order;
}

bool Dag::is_consistent_ordering(const Ordering& order) const {
    if (!is_permutation_of_nodes(order, p_))
        throw input_error("ordering is not a permutation of 1.." +
                          std::to_string(p_));
    std::vector<int> position(p_ + 1, 0);
    for (int i = 0; i < p_; ++i) position[order[i]] = i;
    for (int v = 1; v <= p_; ++v)
        for (int u : parents_[v])
            if (position[u] > position[v]) return false;
    return true;
}

bool Dag::has_unique_topological_order() const {
    std::vector<int> indegree(p_ + 1, 0);
    for (int v = 1; v <= p_; ++v)
        indegree[v] = static_cast<int>(parents_[v].size());
    std::vector<int> ready;
    for (int v = 1; v <= p_; ++v)
        if (indegree[v] == 0) ready.push_back(v);
    int placed = 0;
    while (ready.size() == 1) {
        const int v = ready.back();
        ready.pop_back();
        ++placed;
        for (int w : children_[v])
            if (--indegree[w] == 0) ready.push_back(w);
    }
    return placed == p_;
}

bool is_permutation_of_nodes(const Ordering& order, int p) {
    if (static_cast<int>(order.size()) != p) return false;
    std::vector<bool> seen(p + 1, false);
    for (int v : order) {
        if (v < 1 || v > p || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

WeightedDag::WeightedDag(Dag dag, Eigen::MatrixXd coeffs)
    : dag_(std::move(dag)), coeffs_(std::move(coeffs)) {
    const int p = dag_.node_count();
    if (coeffs_.rows() != p || coeffs_.cols() != p)
        throw structure_error("coefficient matrix shape does not match node count");
    for (int v = 1; v <= p; ++v) {
        for (int u = 1; u <= p; ++u) {
            const bool edge = dag_.has_edge(u, v);
            const double b = coeffs_(v - 1, u - 1);
            if (edge && b == 0.0)
                throw structure_error("edge " + edge_str(u, v) + " carries weight 0");
            if (!edge && b != 0.0)
                throw structure_error("nonzero coefficient off the edge set at " +
                                      edge_str(u, v));
        }
    }
}

namespace {

// Partial Fisher-Yates draw of k distinct values from {1..m}, sorted.
std::vector<int> sample_without_replacement(int m, int k, Rng& rng) {
    std::vector<int> pool(m);
    for (int i = 0; i < m; ++i) pool[i] = i + 1;
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.uniform_int(m - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<int> out(pool.begin(), pool.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

WeightedDag random_dag(int p, int max_in_degree, Rng& rng) {
    if (p < 2) throw input_error("random_dag requires at least 2 nodes");
    if (max_in_degree < 1) throw input_error("max in-degree must be >= 1");
    std::vector<std::pair<int, int>> edges;
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(p, p);
    for (int v = 2; v <= p; ++v) {
        const int cap = std::min(v - 1, max_in_degree);
        const int d = 1 + static_cast<int>(rng.uniform_int(cap));
        const double magnitude = rng.uniform(0.5, 1.0);
        const double backbone = rng.sign() * magnitude;
        edges.push_back({v - 1, v});
        coeffs(v - 1, v - 2) = backbone;
        if (d > 1) {
            for (int u : sample_without_replacement(v - 2, d - 1, rng)) {
                edges.push_back({u, v});
                coeffs(v - 1, u - 1) = rng.sign() * 0.2;
            }
        }
    }
    return WeightedDag(Dag(p, std::move(edges)), std::move(coeffs));
}

WeightedDag random_dag(int p, int max_in_degree, std::uint64_t seed) {
    Rng rng(seed);
    return random_dag(p, max_in_degree, rng);
}

WeightedDag hub_dag(int p, int n_hubs, Rng& rng) {
    if (n_hubs < 1) throw input_error("hub count must be >= 1");
    if (n_hubs >= p) throw input_error("hub count must be below the node count");
    std::vector<std::pair<int, int>> edges;
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(p, p);
    for (int v = 2; v <= p; ++v) {
        const double magnitude = rng.uniform(0.65, 1.0);
        edges.push_back({v - 1, v});
        coeffs(v - 1, v - 2) = rng.sign() * magnitude;
    }
    for (int v = n_hubs + 1; v <= p; ++v) {
        const int hub = 1 + static_cast<int>(rng.uniform_int(n_hubs));
        const double weight = rng.sign() * 0.2;
        if (hub == v - 1) continue;  // backbone edge already present
        edges.push_back({hub, v});
        coeffs(v - 1, hub - 1) = weight;
    }
    return WeightedDag(Dag(p, std::move(edges)), std::move(coeffs));
}

WeightedDag hub_dag(int p, int n_hubs, std::uint64_t seed) {
    Rng rng(seed);
    return hub_dag(p, n_hubs, rng);
}

}  // namespace hdl
