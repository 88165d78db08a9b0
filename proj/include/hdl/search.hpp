#pragma once

#include <optional>
#include <vector>

#include "hdl/aggregates.hpp"
#include "hdl/sem.hpp"

namespace hdl {

enum class Stat { MinMax, MaxMin };

const char* stat_name(Stat stat);
Stat stat_from_name(const std::string& name);

struct EstimateConfig {
    int max_in_degree = 3;
    int moment_order = 4;
    double alpha = 0.8;
    Stat stat = Stat::MaxMin;
    double initial_cutoff = 0.0;
    // When set, the cutoff stays at this value for the whole run instead of
    // rising with the root statistics.
    std::optional<double> fixed_cutoff;
};

struct StepDiagnostics {
    int root = 0;
    double root_stat = 0.0;
    double cutoff = 0.0;  // in force after the step's update
};

struct GraphEstimate {
    Ordering ordering;
    std::vector<std::vector<int>> parents;  // parents[v-1], sorted
    std::vector<StepDiagnostics> steps;
    std::vector<int> capped_nodes;  // nodes where the in-degree cap bound
    double final_cutoff = 0.0;

    std::vector<std::pair<int, int>> edges() const;
};

// max(g_prev, alpha * root_stat); the cutoff never decreases.
double update_cutoff(double g_prev, double alpha, double root_stat);

// Candidate parents of v among the placed nodes: p survives when the
// minimum of |tau_{v.C->p}| over all C within the placed set (p excluded,
// |C| <= J) strictly exceeds the cutoff.
std::vector<int> prune_candidates(const TauSource& source, int v,
                                  const std::vector<int>& placed, int J, int K,
                                  double cutoff);

// One pruning pass per node against its predecessors in the ordering,
// using the final cutoff; keeps at most J survivors ranked by their
// minimum statistic (ties to the smaller label). Nodes where the cap
// bound are appended to `capped` when given.
std::vector<std::vector<int>> final_parents(const TauSource& source,
                                            const Ordering& ordering, int J,
                                            int K, double cutoff,
                                            std::vector<int>* capped = nullptr);

// Iterative root identification: at each step every unplaced node is
// scored by an aggregate of |tau| over adjustment sets drawn from its
// candidate parents, the smallest score is declared a root (ties to the
// smallest label), and the rising cutoff prunes candidate parents as the
// placed prefix grows. MinMax rescans its statistic from scratch each
// step; MaxMin keeps running minima and only evaluates adjustment sets
// containing the newest root.
GraphEstimate estimate_graph(const TauSource& source,
                             const EstimateConfig& config);

// Convenience wrapper: centers the data and runs the search on plug-in
// estimates.
GraphEstimate estimate_graph(const Dataset& dataset,
                             const EstimateConfig& config);

// Running minima per candidate parent for one node, extended with exactly
// the adjustment sets that contain each newly placed node. Pairs whose
// minimum has fallen to the cutoff are frozen; the retained set matches a
// full prune_candidates scan at every step.
class PruneScan {
  public:
    PruneScan(const TauSource& source, int v, int J, int K);

    void extend(const std::vector<int>& placed_before, int newly_placed,
                double cutoff);
    std::vector<int> retained(const std::vector<int>& placed,
                              double cutoff) const;
    double current_min(int u) const;

  private:
    const TauSource& source_;
    int v_;
    int J_;
    int K_;
    std::vector<double> min_;  // indexed by node label
};

}  // namespace hdl
