#include "hdl/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hdl/errors.hpp"
#include "hdl/moments.hpp"
#include "hdl/subsets.hpp"

namespace hdl {

const char* stat_name(Stat stat) {
    return stat == Stat::MinMax ? "minmax" : "maxmin";
}

Stat stat_from_name(const std::string& name) {
    if (name == "minmax") return Stat::MinMax;
    if (name == "maxmin") return Stat::MaxMin;
    throw input_error("unknown statistic '" + name + "' (use minmax or maxmin)");
}

std::vector<std::pair<int, int>> GraphEstimate::edges() const {
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < parents.size(); ++i)
        for (int u : parents[i]) out.push_back({u, static_cast<int>(i) + 1});
    std::sort(out.begin(), out.end());
    return out;
}

double update_cutoff(double g_prev, double alpha, double root_stat) {
    if (g_prev < 0.0) throw input_error("cutoff must be nonnegative");
    return std::max(g_prev, alpha * root_stat);
}

namespace {

struct PairMin {
    int node = 0;
    double min_abs_tau = 0.0;
};

// Minimum of |tau_{v.C->p}| over C within `ground` (|C| <= J, p excluded)
// for every p in `ground`. Pairs are abandoned once their minimum reaches
// the cutoff; survivors carry exact minima.
std::vector<PairMin> scan_prune_minima(const TauSource& source, int v,
                                       const std::vector<int>& ground, int J,
                                       int K, double cutoff) {
    const int p_count = source.variable_count();
    std::vector<double> minima(p_count + 1,
                               std::numeric_limits<double>::infinity());
    std::vector<int> sorted_ground = ground;
    std::sort(sorted_ground.begin(), sorted_ground.end());

    std::vector<int> candidates;
    std::vector<double> taus;
    for_each_subset_up_to(sorted_ground, J, [&](const std::vector<int>& C) {
        candidates.clear();
        for (int p : sorted_ground)
            if (!sorted_contains(C, p) && minima[p] > cutoff)
                candidates.push_back(p);
        if (!candidates.empty()) {
            taus.resize(candidates.size());
            source.tau_batch(v, C, candidates, K, taus);
            for (std::size_t i = 0; i < candidates.size(); ++i)
                minima[candidates[i]] =
                    std::min(minima[candidates[i]], std::abs(taus[i]));
        }
        return true;
    });

    std::vector<PairMin> out;
    out.reserve(sorted_ground.size());
    for (int p : sorted_ground) out.push_back({p, minima[p]});
    return out;
}

}  // namespace

std::vector<int> prune_candidates(const TauSource& source, int v,
                                  const std::vector<int>& placed, int J, int K,
                                  double cutoff) {
    for (int p : placed)
        if (p == v) throw input_error("v may not appear in the placed set");
    std::vector<int> out;
    for (const PairMin& pair : scan_prune_minima(source, v, placed, J, K, cutoff))
        if (pair.min_abs_tau > cutoff) out.push_back(pair.node);
    return out;
}

std::vector<std::vector<int>> final_parents(const TauSource& source,
                                            const Ordering& ordering, int J,
                                            int K, double cutoff,
                                            std::vector<int>* capped) {
    const int p = static_cast<int>(ordering.size());
    std::vector<std::vector<int>> parents(p);
    std::vector<int> placed;
    for (int i = 0; i < p; ++i) {
        const int v = ordering[i];
        std::vector<PairMin> minima =
            scan_prune_minima(source, v, placed, J, K, cutoff);
        std::vector<PairMin> survivors;
        for (const PairMin& pair : minima)
            if (pair.min_abs_tau > cutoff) survivors.push_back(pair);
        if (static_cast<int>(survivors.size()) > J) {
            std::sort(survivors.begin(), survivors.end(),
                      [](const PairMin& a, const PairMin& b) {
                          if (a.min_abs_tau != b.min_abs_tau)
                              return a.min_abs_tau > b.min_abs_tau;
                          return a.node < b.node;
                      });
            survivors.resize(J);
            if (capped) capped->push_back(v);
        }
        std::vector<int>& out = parents[v - 1];
        for (const PairMin& pair : survivors) out.push_back(pair.node);
        std::sort(out.begin(), out.end());
        placed = sorted_with(std::move(placed), v);
    }
    return parents;
}

PruneScan::PruneScan(const TauSource& source, int v, int J, int K)
    : source_(source), v_(v), J_(J), K_(K) {
    const int p = source.variable_count();
    min_.assign(p + 1, std::numeric_limits<double>::infinity());
    std::vector<int> others;
    for (int u = 1; u <= p; ++u)
        if (u != v) others.push_back(u);
    if (others.empty()) return;
    std::vector<double> taus(others.size());
    source.tau_batch(v_, {}, others, K_, taus);
    for (std::size_t i = 0; i < others.size(); ++i)
        min_[others[i]] = std::abs(taus[i]);
}

void PruneScan::extend(const std::vector<int>& placed_before, int newly_placed,
                       double cutoff) {
    const int p = source_.variable_count();
    std::vector<int> candidates;
    std::vector<double> taus;
    std::vector<int> C;
    for_each_subset_up_to(placed_before, J_ - 1, [&](const std::vector<int>& S) {
        C = sorted_with(S, newly_placed);
        candidates.clear();
        for (int u = 1; u <= p; ++u) {
            if (u == v_ || sorted_contains(C, u)) continue;
            if (min_[u] <= cutoff) continue;  // frozen
            candidates.push_back(u);
        }
        if (!candidates.empty()) {
            taus.resize(candidates.size());
            source_.tau_batch(v_, C, candidates, K_, taus);
            for (std::size_t i = 0; i < candidates.size(); ++i)
                min_[candidates[i]] =
                    std::min(min_[candidates[i]], std::abs(taus[i]));
        }
        return true;
    });
}

std::vector<int> PruneScan::retained(const std::vector<int>& placed,
                                     double cutoff) const {
    std::vector<int> out;
    for (int p : placed)
        if (min_[p] > cutoff) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
}

double PruneScan::current_min(int u) const {
    if (u < 1 || u >= static_cast<int>(min_.size()))
        throw input_error("unknown node label " + std::to_string(u));
    return min_[u];
}

GraphEstimate estimate_graph(const TauSource& source,
                             const EstimateConfig& config) {
    const int p = source.variable_count();
    GraphEstimate out;
    if (p == 0) return out;
    if (config.moment_order <= 2) throw input_error("moment order must exceed 2");
    if (config.max_in_degree < 0) throw input_error("max in-degree must be >= 0");
    if (config.alpha < 0.0) throw input_error("alpha must be nonnegative");
    const int J = config.max_in_degree;
    const int K = config.moment_order;

    std::vector<int> remaining;
    for (int v = 1; v <= p; ++v) remaining.push_back(v);
    std::vector<int> placed;
    double g = config.fixed_cutoff.value_or(config.initial_cutoff);
    if (g < 0.0) throw input_error("cutoff must be nonnegative");

    std::vector<MaxMinState> states;  // MaxMin path, indexed by v - 1
    std::vector<PruneScan> scans;     // MinMax path, indexed by v - 1
    if (p > 1) {
        if (config.stat == Stat::MaxMin) {
            states.reserve(p);
            for (int v = 1; v <= p; ++v)
                states.push_back(
                    MaxMinState::initial(source, v, sorted_without(remaining, v), K));
        } else {
            scans.reserve(p);
            for (int v = 1; v <= p; ++v) scans.push_back(PruneScan(source, v, J, K));
        }
    }

    for (int z = 1; z <= p; ++z) {
        int root = remaining.front();
        double root_stat = 0.0;
        if (remaining.size() > 1) {
            double best = std::numeric_limits<double>::infinity();
            for (int v : remaining) {
                const std::vector<int> others = sorted_without(remaining, v);
                double stat_v = 0.0;
                try {
                    if (config.stat == Stat::MaxMin) {
                        stat_v = states[v - 1].value(others);
                    } else {
                        const std::vector<int> candidates =
                            scans[v - 1].retained(placed, g);
                        stat_v = t1_minmax(source, v, candidates, others, J, K);
                    }
                } catch (const numeric_error& e) {
                    throw numeric_error("step " + std::to_string(z) + ", node " +
                                        std::to_string(v) + ": " + e.what());
                }
                if (stat_v < best) {
                    best = stat_v;
                    root = v;
                }
            }
            root_stat = best;
        }

        if (!config.fixed_cutoff)
            g = update_cutoff(g, config.alpha, root_stat);
        out.steps.push_back({root, root_stat, g});
        remaining = sorted_without(std::move(remaining), root);

        if (!remaining.empty()) {
            if (config.stat == Stat::MaxMin) {
                for (int v : remaining) {
                    const double root_min = states[v - 1].entry(root).min_abs_tau;
                    states[v - 1].drop_candidate(root);
                    if (root_min > g)
                        states[v - 1] = t2_update(std::move(states[v - 1]), root,
                                                  source, J, K);
                }
            } else {
                for (int v : remaining) scans[v - 1].extend(placed, root, g);
            }
        }
        placed = sorted_with(std::move(placed), root);
        out.ordering.push_back(root);
    }

    out.final_cutoff = g;
    try {
        out.parents = final_parents(source, out.ordering, J, K, g,
                                    &out.capped_nodes);
    } catch (const numeric_error& e) {
        throw numeric_error("final parent selection: " + std::string(e.what()));
    }
    return out;
}

GraphEstimate estimate_graph(const Dataset& dataset,
                             const EstimateConfig& config) {
    if (dataset.sample_count() < 2)
        throw input_error("need at least 2 observations");
    MomentCache::Options options;
    options.memoize = false;  // the search visits each (v, C) once
    MomentCache cache(dataset, config.moment_order, options);
    SampleTauSource source(cache);
    return estimate_graph(source, config);
}

}  // namespace hdl
