#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "hdl/graph.hpp"

namespace hdl {

// Centered Gaussian moments of variance `variance` up to order K-1, with
// the order-K moment shifted by `offset`: m_K = offset for odd K and
// (K-1)!! * variance^{K/2} + offset for even K. Returns m_1..m_K.
std::vector<double> gaussian_offset_moments(double variance, double offset,
                                            int order);

// Per-node error law: a variance, a moment sequence m_1..m_max, and a
// sampler family. Custom-moment specs need not be realizable by any
// distribution; they are accepted by population computations but refused
// by the simulator.
class ErrorSpec {
  public:
    enum class Family { Uniform, Gaussian, CustomMoments };

    static ErrorSpec uniform(double variance, int max_order = 12);
    static ErrorSpec gaussian(double variance, int max_order = 12);
    // Moment list m_1..m_len; requires m_1 = 0 and m_2 > 0.
    static ErrorSpec custom(std::vector<double> moments);
    static ErrorSpec gaussian_offset(double variance, double offset, int order);

    Family family() const { return family_; }
    double variance() const { return moments_[2]; }
    int max_order() const { return static_cast<int>(moments_.size()) - 1; }

    // E(eps^k); k = 0 yields 1. Throws input_error above max_order().
    double moment(int k) const;

    // m_k minus the matching centered-Gaussian moment.
    double offset(int k) const;

    // Half-width of the uniform sampler (Family::Uniform only).
    double uniform_half_width() const;

    std::string family_name() const;

  private:
    ErrorSpec(Family family, std::vector<double> moments_with_zero);
    Family family_;
    std::vector<double> moments_;  // moments_[k] = E(eps^k), moments_[0] = 1
};

ErrorSpec::Family error_family_from_name(const std::string& name);

// Full structural model: coefficients plus one error law per node.
class Sem {
  public:
    Sem(WeightedDag wdag, std::vector<ErrorSpec> errors);

    const WeightedDag& wdag() const { return wdag_; }
    const Dag& dag() const { return wdag_.dag(); }
    const std::vector<ErrorSpec>& errors() const { return errors_; }
    const ErrorSpec& error(int v) const { return errors_[v - 1]; }
    int node_count() const { return wdag_.node_count(); }

    bool all_gaussian(int order) const;

  private:
    WeightedDag wdag_;
    std::vector<ErrorSpec> errors_;
};

// Observation matrix with positional column labels (column j <-> node j+1).
class Dataset {
  public:
    Dataset(Eigen::MatrixXd values, std::vector<std::string> labels);

    int sample_count() const { return static_cast<int>(values_.rows()); }
    int variable_count() const { return static_cast<int>(values_.cols()); }
    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& labels() const { return labels_; }

  private:
    Eigen::MatrixXd values_;
    std::vector<std::string> labels_;
};

// Draws n i.i.d. observations: errors row by row, then each node resolved
// in topological order. The error matrix is generated in fixed-size row
// blocks, each from a stream derived from (seed, block), so results are
// reproducible and blocks could be filled in parallel.
Dataset simulate(const Sem& sem, int n, std::uint64_t seed);

}  // namespace hdl
