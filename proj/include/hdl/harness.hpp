#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdl/graph.hpp"
#include "hdl/search.hpp"

namespace hdl {

// Kendall rank correlation between an estimated ordering and the unique
// topological order of the truth graph. Throws input_error on a size
// mismatch or when the truth order is not unique (backbone-free graphs),
// in which case only consistency metrics are meaningful.
double kendall_tau(const Ordering& estimated, const Dag& truth);

struct StructuralMetrics {
    double precision = 1.0;
    double recall = 1.0;
    bool exact = false;
    bool ordering_consistent = false;
};

StructuralMetrics structural_metrics(const GraphEstimate& estimate,
                                     const WeightedDag& truth);

enum class Scenario { Random, Hub };

const char* scenario_name(Scenario s);

struct ExperimentConfig {
    Scenario scenario = Scenario::Random;
    std::vector<int> p_values = {5, 10};
    std::vector<double> n_multipliers = {50.0, 10.0};  // n = round(mult * p)
    std::vector<Stat> stats = {Stat::MinMax, Stat::MaxMin};
    int max_in_degree = 3;
    int moment_order = 4;
    double alpha = 0.8;
    int hub_count = 3;
    int replications = 100;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct ReplicateRecord {
    std::string scenario;
    std::string stat;
    int p = 0;
    int n = 0;
    int replicate = 0;
    std::uint64_t dataset_seed = 0;
    double kendall = 0.0;
    bool exact = false;
    bool ordering_consistent = false;
    double precision = 0.0;
    double recall = 0.0;
    double wall_ms = 0.0;
    std::string error;  // nonempty when the replicate failed
};

struct CellSummary {
    std::string scenario;
    std::string stat;
    int p = 0;
    int n = 0;
    int count = 0;
    int failures = 0;
    double median_kendall = 0.0;
    double mean_kendall = 0.0;
    double exact_rate = 0.0;
    double mean_wall_ms = 0.0;
};

struct ExperimentResult {
    std::vector<ReplicateRecord> records;
    std::vector<CellSummary> summarize() const;

    // One line per replicate; excludes wall-clock so reruns with the same
    // seed are byte-identical. Timings go to the companion file below.
    std::string records_csv() const;
    std::string timing_csv() const;
    std::string summary_json() const;
};

// Grid over (p, n multiplier, stat): random graphs with uniform errors
// drawn by the generation rule of the low-dimensional study. Failures are
// recorded per replicate without aborting the grid.
ExperimentResult run_low_dim(const ExperimentConfig& config);

// Shared-seed datasets timed under both statistics, sequentially on one
// worker so wall-clock comparisons are free of contention.
ExperimentResult run_timing(const ExperimentConfig& config);

// Random (bounded in-degree) or hub graphs with n a fraction of p.
ExperimentResult run_high_dim(const ExperimentConfig& config);

// Builds the SEM used by the simulation studies: generated graph plus
// uniform errors with standard deviations drawn uniformly from (.8, 1).
Sem study_sem(Scenario scenario, int p, int max_in_degree, int hub_count,
              std::uint64_t seed, int moment_order);

}  // namespace hdl
