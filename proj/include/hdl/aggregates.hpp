#pragma once

#include <span>
#include <vector>

#include "hdl/moments.hpp"
#include "hdl/oracle.hpp"

namespace hdl {

// Evaluates the direction statistic tau for (v, C) against candidate
// parents u. The ordering search runs unchanged against sample estimates
// or exact population values.
class TauSource {
  public:
    virtual ~TauSource() = default;
    virtual int variable_count() const = 0;
    virtual double tau(int v, int u, const std::vector<int>& C, int K) const = 0;
    // One (v, C) against many candidates; default loops tau().
    virtual void tau_batch(int v, const std::vector<int>& C,
                           std::span<const int> candidates, int K,
                           std::span<double> out) const;
};

// Plug-in estimates from a sample moment cache.
class SampleTauSource : public TauSource {
  public:
    explicit SampleTauSource(const MomentCache& cache) : cache_(cache) {}
    int variable_count() const override { return cache_.variable_count(); }
    double tau(int v, int u, const std::vector<int>& C, int K) const override;
    void tau_batch(int v, const std::vector<int>& C,
                   std::span<const int> candidates, int K,
                   std::span<double> out) const override;

  private:
    const MomentCache& cache_;
};

// Exact population values from an oracle.
class PopulationTauSource : public TauSource {
  public:
    explicit PopulationTauSource(const PopulationOracle& oracle)
        : oracle_(oracle) {}
    int variable_count() const override { return oracle_.node_count(); }
    double tau(int v, int u, const std::vector<int>& C, int K) const override;

  private:
    const PopulationOracle& oracle_;
};

// min over adjustment sets C (size exactly min(J, |V1|), drawn from V1) of
// the max over u in V2 of |tau_{v.C->u}|. V2 must be nonempty and disjoint
// from V1 u {v}.
double t1_minmax(const TauSource& source, int v, const std::vector<int>& V1,
                 const std::vector<int>& V2, int J, int K);

// max over u in V2 of the min over the same family of |tau_{v.C->u}|.
// Never exceeds t1_minmax on the same inputs.
double t2_maxmin(const TauSource& source, int v, const std::vector<int>& V1,
                 const std::vector<int>& V2, int J, int K);

// Running max-min state for one node v: for every candidate u it stores
// the minimum of |tau_{v.C->u}| over the adjustment family of the current
// ground set, with the minimizing C (lexicographically first on ties).
// The ground set only grows, one node per update, so stored minima always
// equal a fresh full enumeration.
class MaxMinState {
  public:
    struct Entry {
        double min_abs_tau = 0.0;
        std::vector<int> best_set;
    };

    // Evaluates the empty ground set: one entry |tau_{v.{}->u}| per u.
    static MaxMinState initial(const TauSource& source, int v,
                               const std::vector<int>& candidates, int K);

    int node() const { return v_; }
    const std::vector<int>& ground() const { return ground_; }
    bool has_entry(int u) const;
    const Entry& entry(int u) const;
    void drop_candidate(int u);

    // max over the given candidates of the stored minima.
    double value(const std::vector<int>& candidates) const;

  private:
    friend MaxMinState t2_update(MaxMinState state, int newly_ordered,
                                 const TauSource& source, int J, int K);
    int v_ = 0;
    int K_ = 0;
    std::vector<int> ground_;
    std::vector<Entry> entries_;      // indexed by node label
    std::vector<bool> entry_valid_;   // indexed by node label
};

// Extends the state's ground set with one newly ordered node and refreshes
// the stored minima with exactly the adjustment sets that contain it.
// Throws state_error if the node is already in the ground set.
MaxMinState t2_update(MaxMinState state, int newly_ordered,
                      const TauSource& source, int J, int K);

}  // namespace hdl
