#include "hdl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "hdl/errors.hpp"
#include "hdl/numeric.hpp"

namespace hdl {

double kendall_tau(const Ordering& estimated, const Dag& truth) {
    const int p = truth.node_count();
    if (!is_permutation_of_nodes(estimated, p))
        throw input_error("estimated ordering is not a permutation of the "
                          "truth graph's nodes");
    if (!truth.has_unique_topological_order())
        throw input_error("truth graph admits several topological orders; "
                          "rank correlation against it is not defined");
    if (p < 2) return 1.0;
    const Ordering truth_order = truth.topological_sort();
    std::vector<int> pos_est(p + 1), pos_true(p + 1);
    for (int i = 0; i < p; ++i) pos_est[estimated[i]] = i;
    for (int i = 0; i < p; ++i) pos_true[truth_order[i]] = i;
    long long concordant = 0, discordant = 0;
    for (int a = 1; a <= p; ++a) {
        for (int b = a + 1; b <= p; ++b) {
            const int de = pos_est[a] - pos_est[b];
            const int dt = pos_true[a] - pos_true[b];
            if ((de > 0) == (dt > 0))
                ++concordant;
            else
                ++discordant;
        }
    }
    const double pairs = 0.5 * p * (p - 1);
    return (concordant - discordant) / pairs;
}

StructuralMetrics structural_metrics(const GraphEstimate& estimate,
                                     const WeightedDag& truth) {
    if (static_cast<int>(estimate.parents.size()) != truth.node_count())
        throw input_error("estimate and truth have different node sets");
    const auto estimated = estimate.edges();
    const auto actual = truth.dag().edges();
    std::size_t hits = 0;
    for (const auto& e : estimated)
        if (std::binary_search(actual.begin(), actual.end(), e)) ++hits;
    StructuralMetrics out;
    out.precision = estimated.empty()
                        ? 1.0
                        : static_cast<double>(hits) / estimated.size();
    out.recall = actual.empty() ? 1.0 : static_cast<double>(hits) / actual.size();
    out.ordering_consistent = truth.dag().is_consistent_ordering(estimate.ordering);
    out.exact = (estimated == actual) && out.ordering_consistent;
    return out;
}

const char* scenario_name(Scenario s) {
    return s == Scenario::Random ? "random" : "hub";
}

Sem study_sem(Scenario scenario, int p, int max_in_degree, int hub_count,
              std::uint64_t seed, int moment_order) {
    Rng rng(seed);
    WeightedDag wdag = scenario == Scenario::Random
                           ? random_dag(p, max_in_degree, rng)
                           : hub_dag(p, hub_count, rng);
    std::vector<ErrorSpec> errors;
    errors.reserve(p);
    for (int v = 0; v < p; ++v) {
        const double sigma = rng.uniform(0.8, 1.0);
        errors.push_back(ErrorSpec::uniform(sigma * sigma, 2 * moment_order));
    }
    return Sem(std::move(wdag), std::move(errors));
}

namespace {

int sample_size(double multiplier, int p) {
    const int n = static_cast<int>(std::lround(multiplier * p));
    return std::max(n, 2);
}

struct Task {
    Scenario scenario;
    Stat stat;
    int p;
    int n;
    int replicate;
    std::uint64_t sem_seed;
    std::uint64_t data_seed;
};

ReplicateRecord run_task(const Task& task, const ExperimentConfig& config) {
    ReplicateRecord rec;
    rec.scenario = scenario_name(task.scenario);
    rec.stat = stat_name(task.stat);
    rec.p = task.p;
    rec.n = task.n;
    rec.replicate = task.replicate;
    rec.dataset_seed = task.data_seed;
    try {
        const Sem sem = study_sem(task.scenario, task.p, config.max_in_degree,
                                  config.hub_count, task.sem_seed,
                                  config.moment_order);
        const Dataset data = simulate(sem, task.n, task.data_seed);
        EstimateConfig est;
        est.max_in_degree = config.max_in_degree;
        est.moment_order = config.moment_order;
        est.alpha = config.alpha;
        est.stat = task.stat;
        const auto start = std::chrono::steady_clock::now();
        const GraphEstimate estimate = estimate_graph(data, est);
        const auto stop = std::chrono::steady_clock::now();
        rec.wall_ms =
            std::chrono::duration<double, std::milli>(stop - start).count();
        rec.kendall = kendall_tau(estimate.ordering, sem.dag());
        const StructuralMetrics metrics = structural_metrics(estimate, sem.wdag());
        rec.exact = metrics.exact;
        rec.ordering_consistent = metrics.ordering_consistent;
        rec.precision = metrics.precision;
        rec.recall = metrics.recall;
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

std::vector<ReplicateRecord> run_tasks(const std::vector<Task>& tasks,
                                       const ExperimentConfig& config) {
    std::vector<ReplicateRecord> records(tasks.size());
    const int threads = std::max(1, config.threads);
    if (threads == 1 || tasks.size() <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            records[i] = run_task(tasks[i], config);
        return records;
    }
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex m;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            while (true) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(m);
                    if (next >= tasks.size()) return;
                    i = next++;
                }
                records[i] = run_task(tasks[i], config);
            }
        });
    }
    for (auto& t : pool) t.join();
    return records;
}

// Replicate seeds depend only on (p, multiplier index, replicate), never on
// the statistic, so the same datasets are shared across stat variants.
std::uint64_t task_stream(int p_index, int n_index, int replicate, int kind) {
    return (static_cast<std::uint64_t>(p_index) << 40) ^
           (static_cast<std::uint64_t>(n_index) << 28) ^
           (static_cast<std::uint64_t>(replicate) << 4) ^
           static_cast<std::uint64_t>(kind);
}

}  // namespace

ExperimentResult run_low_dim(const ExperimentConfig& config) {
    if (config.replications < 1) throw input_error("need at least one replicate");
    std::vector<Task> tasks;
    for (std::size_t pi = 0; pi < config.p_values.size(); ++pi) {
        for (std::size_t ni = 0; ni < config.n_multipliers.size(); ++ni) {
            const int p = config.p_values[pi];
            const int n = sample_size(config.n_multipliers[ni], p);
            for (int rep = 0; rep < config.replications; ++rep) {
                const std::uint64_t sem_seed = Rng::derive(
                    config.seed, task_stream(static_cast<int>(pi),
                                             static_cast<int>(ni), rep, 0));
                const std::uint64_t data_seed = Rng::derive(
                    config.seed, task_stream(static_cast<int>(pi),
                                             static_cast<int>(ni), rep, 1));
                for (Stat stat : config.stats)
                    tasks.push_back({config.scenario, stat, p, n, rep, sem_seed,
                                     data_seed});
            }
        }
    }
    ExperimentResult out;
    out.records = run_tasks(tasks, config);
    return out;
}

ExperimentResult run_timing(const ExperimentConfig& config) {
    ExperimentConfig sequential = config;
    sequential.threads = 1;  // one worker keeps wall-clock comparable
    sequential.stats = {Stat::MinMax, Stat::MaxMin};
    return run_low_dim(sequential);
}

ExperimentResult run_high_dim(const ExperimentConfig& config) {
    return run_low_dim(config);
}

std::vector<CellSummary> ExperimentResult::summarize() const {
    std::map<std::tuple<std::string, std::string, int, int>,
             std::vector<const ReplicateRecord*>>
        cells;
    for (const auto& rec : records)
        cells[{rec.scenario, rec.stat, rec.p, rec.n}].push_back(&rec);
    std::vector<CellSummary> out;
    for (const auto& [key, recs] : cells) {
        CellSummary cell;
        cell.scenario = std::get<0>(key);
        cell.stat = std::get<1>(key);
        cell.p = std::get<2>(key);
        cell.n = std::get<3>(key);
        std::vector<double> kendalls;
        double kendall_sum = 0.0, wall_sum = 0.0;
        int exact_count = 0;
        for (const ReplicateRecord* rec : recs) {
            if (!rec->error.empty()) {
                ++cell.failures;
                continue;
            }
            ++cell.count;
            kendalls.push_back(rec->kendall);
            kendall_sum += rec->kendall;
            wall_sum += rec->wall_ms;
            if (rec->exact) ++exact_count;
        }
        if (cell.count > 0) {
            cell.median_kendall = median(kendalls);
            cell.mean_kendall = kendall_sum / cell.count;
            cell.exact_rate = static_cast<double>(exact_count) / cell.count;
            cell.mean_wall_ms = wall_sum / cell.count;
        }
        out.push_back(cell);
    }
    return out;
}

namespace {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<const ReplicateRecord*> sorted_records(
    const std::vector<ReplicateRecord>& records) {
    std::vector<const ReplicateRecord*> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(&r);
    std::sort(out.begin(), out.end(),
              [](const ReplicateRecord* a, const ReplicateRecord* b) {
                  return std::tie(a->scenario, a->p, a->n, a->stat, a->replicate) <
                         std::tie(b->scenario, b->p, b->n, b->stat, b->replicate);
              });
    return out;
}

}  // namespace

std::string ExperimentResult::records_csv() const {
    std::string out =
        "scenario,stat,p,n,replicate,seed,kendall,exact,ordering_consistent,"
        "precision,recall,error\n";
    for (const ReplicateRecord* r : sorted_records(records)) {
        out += r->scenario + "," + r->stat + "," + std::to_string(r->p) + "," +
               std::to_string(r->n) + "," + std::to_string(r->replicate) + "," +
               std::to_string(r->dataset_seed) + "," + format_double(r->kendall) +
               "," + (r->exact ? "1" : "0") + "," +
               (r->ordering_consistent ? "1" : "0") + "," +
               format_double(r->precision) + "," + format_double(r->recall) +
               "," + r->error + "\n";
    }
    return out;
}

std::string ExperimentResult::timing_csv() const {
    std::string out = "scenario,stat,p,n,replicate,seed,wall_ms\n";
    for (const ReplicateRecord* r : sorted_records(records)) {
        out += r->scenario + "," + r->stat + "," + std::to_string(r->p) + "," +
               std::to_string(r->n) + "," + std::to_string(r->replicate) + "," +
               std::to_string(r->dataset_seed) + "," + format_double(r->wall_ms) +
               "\n";
    }
    return out;
}

std::string ExperimentResult::summary_json() const {
    std::string out = "[";
    bool first = true;
    for (const CellSummary& cell : summarize()) {
        if (!first) out += ",";
        first = false;
        out += "\n  {\"scenario\":\"" + cell.scenario + "\",\"stat\":\"" +
               cell.stat + "\",\"p\":" + std::to_string(cell.p) +
               ",\"n\":" + std::to_string(cell.n) +
               ",\"count\":" + std::to_string(cell.count) +
               ",\"failures\":" + std::to_string(cell.failures) +
               ",\"median_kendall\":" + format_double(cell.median_kendall) +
               ",\"mean_kendall\":" + format_double(cell.mean_kendall) +
               ",\"exact_rate\":" + format_double(cell.exact_rate) +
               ",\"mean_wall_ms\":" + format_double(cell.mean_wall_ms) + "}";
    }
    out += "\n]\n";
    return out;
}

}  // namespace hdl
