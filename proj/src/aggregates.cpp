#include "hdl/aggregates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hdl/errors.hpp"
#include "hdl/subsets.hpp"

namespace hdl {

void TauSource::tau_batch(int v, const std::vector<int>& C,
                          std::span<const int> candidates, int K,
                          std::span<double> out) const {
    if (out.size() != candidates.size())
        throw input_error("output span size mismatch");
    for (std::size_t i = 0; i < candidates.size(); ++i)
        out[i] = tau(v, candidates[i], C, K);
}

double SampleTauSource::tau(int v, int u, const std::vector<int>& C,
                            int K) const {
    return cache_.tau_hat(v, u, C, K);
}

void SampleTauSource::tau_batch(int v, const std::vector<int>& C,
                                std::span<const int> candidates, int K,
                                std::span<double> out) const {
    cache_.tau_hat_batch(v, C, candidates, K, out);
}

double PopulationTauSource::tau(int v, int u, const std::vector<int>& C,
                                int K) const {
    return oracle_.tau(v, u, C, K);
}

namespace {

void check_aggregate_inputs(int v, const std::vector<int>& V1,
                            const std::vector<int>& V2) {
    if (V2.empty())
        throw input_error("candidate set V2 must be nonempty");
    for (int u : V2) {
        if (u == v) throw input_error("v may not appear in V2");
        if (std::find(V1.begin(), V1.end(), u) != V1.end())
            throw input_error("V1 and V2 must be disjoint");
    }
    if (std::find(V1.begin(), V1.end(), v) != V1.end())
        throw input_error("v may not appear in V1");
}

// Lexicographically-first tie break on the minimizing set.
bool improves_min(double value, const std::vector<int>& set, double best,
                  const std::vector<int>& best_set) {
    if (value < best) return true;
    if (value > best) return false;
    return std::lexicographical_compare(set.begin(), set.end(),
                                        best_set.begin(), best_set.end());
}

}  // namespace

double t1_minmax(const TauSource& source, int v, const std::vector<int>& V1,
                 const std::vector<int>& V2, int J, int K) {
    check_aggregate_inputs(v, V1, V2);
    const int size = std::min<int>(J, static_cast<int>(V1.size()));
    FixedSizeSubsets family(V1, size);
    std::vector<int> C;
    std::vector<double> taus(V2.size());
    double best = std::numeric_limits<double>::infinity();
    while (family.next(C)) {
        source.tau_batch(v, C, V2, K, taus);
        double worst = 0.0;
        for (double t : taus) worst = std::max(worst, std::abs(t));
        best = std::min(best, worst);
    }
    return best;
}

double t2_maxmin(const TauSource& source, int v, const std::vector<int>& V1,
                 const std::vector<int>& V2, int J, int K) {
    check_aggregate_inputs(v, V1, V2);
    const int size = std::min<int>(J, static_cast<int>(V1.size()));
    FixedSizeSubsets family(V1, size);
    std::vector<int> C;
    std::vector<double> taus(V2.size());
    std::vector<double> minima(V2.size(),
                               std::numeric_limits<double>::infinity());
    while (family.next(C)) {
        source.tau_batch(v, C, V2, K, taus);
        for (std::size_t i = 0; i < V2.size(); ++i)
            minima[i] = std::min(minima[i], std::abs(taus[i]));
    }
    double best = 0.0;
    for (double m : minima) best = std::max(best, m);
    return best;
}

MaxMinState MaxMinState::initial(const TauSource& source, int v,
                                 const std::vector<int>& candidates, int K) {
    MaxMinState state;
    state.v_ = v;
    state.K_ = K;
    const int p = source.variable_count();
    state.entries_.resize(p + 1);
    state.entry_valid_.assign(p + 1, false);
    if (candidates.empty()) return state;
    std::vector<double> taus(candidates.size());
    source.tau_batch(v, {}, candidates, K, taus);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const int u = candidates[i];
        state.entries_[u] = {std::abs(taus[i]), {}};
        state.entry_valid_[u] = true;
    }
    return state;
}

bool MaxMinState::has_entry(int u) const {
    return u >= 1 && u < static_cast<int>(entry_valid_.size()) &&
           entry_valid_[u];
}

const MaxMinState::Entry& MaxMinState::entry(int u) const {
    if (!has_entry(u))
        throw state_error("no stored minimum for candidate " + std::to_string(u));
    return entries_[u];
}

void MaxMinState::drop_candidate(int u) {
    if (u >= 1 && u < static_cast<int>(entry_valid_.size()))
        entry_valid_[u] = false;
}

double MaxMinState::value(const std::vector<int>& candidates) const {
    double best = 0.0;
    for (int u : candidates) best = std::max(best, entry(u).min_abs_tau);
    return best;
}

MaxMinState t2_update(MaxMinState state, int newly_ordered,
                      const TauSource& source, int J, int K) {
    if (K != state.K_)
        throw state_error("state was built for a different statistic order");
    if (sorted_contains(state.ground_, newly_ordered))
        throw state_error("node " + std::to_string(newly_ordered) +
                          " is already in the candidate set");
    if (newly_ordered == state.v_)
        throw state_error("the state's own node cannot join its candidate set");
    // The node joins the conditioning ground, so it stops being a candidate.
    state.drop_candidate(newly_ordered);

    const std::vector<int> old_ground = state.ground_;
    state.ground_ = sorted_with(old_ground, newly_ordered);

    std::vector<int> candidates;
    for (int u = 1; u < static_cast<int>(state.entry_valid_.size()); ++u)
        if (state.entry_valid_[u]) candidates.push_back(u);
    if (candidates.empty()) return state;

    std::vector<double> taus(candidates.size());
    const bool replace =
        static_cast<int>(state.ground_.size()) <= J;
    if (replace) {
        // Family collapses to the single whole-ground set.
        source.tau_batch(state.v_, state.ground_, candidates, K, taus);
        for (std::size_t i = 0; i < candidates.size(); ++i)
            state.entries_[candidates[i]] = {std::abs(taus[i]), state.ground_};
        return state;
    }

    // Ground set exceeds J: previous size-J subsets stay in the family and
    // the new subsets are exactly those containing the new node.
    FixedSizeSubsets partial(old_ground, J - 1);
    std::vector<int> S;
    std::vector<int> C;
    while (partial.next(S)) {
        C = sorted_with(S, newly_ordered);
        source.tau_batch(state.v_, C, candidates, K, taus);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            auto& e = state.entries_[candidates[i]];
            const double value = std::abs(taus[i]);
            if (improves_min(value, C, e.min_abs_tau, e.best_set))
                e = {value, C};
        }
    }
    return state;
}

}  // namespace hdl
