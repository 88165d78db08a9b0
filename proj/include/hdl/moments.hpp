#pragma once

#include <Eigen/Dense>
#include <memory>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "hdl/oracle.hpp"
#include "hdl/sem.hpp"

namespace hdl {

// Source of raw mixed moments E(prod_j Y_{h_j}^{a_j}). The plug-in
// direction statistic is a fixed rational function of these, so the same
// assembly code runs against sample moments and against exact population
// moments.
class MomentProvider {
  public:
    virtual ~MomentProvider() = default;
    virtual int variable_count() const = 0;
    // `nodes` with matching `powers`; repeated nodes are allowed and
    // collapse by summing powers. Total power is capped by max_power().
    virtual double mixed_moment(const std::vector<int>& nodes,
                                const std::vector<int>& powers) const = 0;
    virtual int max_power() const = 0;

    double second_moment(int a, int b) const;
};

struct MomentOptions {
    bool memoize = true;
    bool standardize = false;
};

// Sample moments over a dataset that is mean-centered once at construction
// (optionally scaled to unit variance). Memo tables fill idempotently under
// a shared mutex, so concurrent readers are safe; enabling or disabling
// memoization never changes a returned value.
class MomentCache : public MomentProvider {
  public:
    using Options = MomentOptions;

    MomentCache(const Dataset& dataset, int moment_order,
                Options options = Options());

    int sample_count() const { return static_cast<int>(data_.rows()); }
    int variable_count() const override { return static_cast<int>(data_.cols()); }
    int moment_order() const { return moment_order_; }
    int max_power() const override { return 2 * moment_order_; }
    const Eigen::MatrixXd& data() const { return data_; }

    double mixed_moment(const std::vector<int>& nodes,
                        const std::vector<int>& powers) const override;

    // Least-squares coefficients of node v on the set C from uncentered
    // second moments of the centered data. Throws numeric_error naming C
    // when the Gram block is singular or ill-conditioned.
    Eigen::VectorXd fit_regression(int v, const std::vector<int>& C) const;

    // (1/n) sum_i r_i^s y_{u,i}^r with r_i the residual of v on C.
    double residual_cross_moment(int v, const std::vector<int>& C, int u,
                                 int s, int r) const;

    // Plug-in direction statistic
    //   m(K-1,1) m(2,0) - m(K,0) m(1,1)
    // over the residual cross moments above.
    double tau_hat(int v, int u, const std::vector<int>& C, int K) const;

    // Evaluates tau_hat for one (v, C) against many candidates without
    // touching the memo tables; the residual and its powers are computed
    // once. Used by the search loops where every (v, C) is visited once.
    void tau_hat_batch(int v, const std::vector<int>& C,
                       std::span<const int> candidates, int K,
                       std::span<double> out) const;

  private:
    struct Regression {
        Eigen::VectorXd beta;
        std::shared_ptr<const Eigen::VectorXd> residual;
    };

    Regression compute_regression(int v, const std::vector<int>& C) const;
    Regression regression_entry(int v, const std::vector<int>& C) const;
    double moments_from_residual(const Eigen::VectorXd& residual, int u, int s,
                                 int r) const;

    Eigen::MatrixXd data_;
    int moment_order_;
    Options options_;

    mutable std::shared_mutex moment_mutex_;
    mutable std::unordered_map<std::string, double> moment_memo_;
    mutable std::shared_mutex regression_mutex_;
    mutable std::unordered_map<std::string, Regression> regression_memo_;
    mutable std::shared_mutex tau_mutex_;
    mutable std::unordered_map<std::string, double> tau_memo_;
};

// Exact mixed moments of the model variables, expanded over independent
// error moments. Mirrors the sample cache's interface so the plug-in
// statistic can be evaluated at the population.
class PopulationMomentProvider : public MomentProvider {
  public:
    explicit PopulationMomentProvider(const PopulationOracle& oracle,
                                      int moment_order);

    int variable_count() const override;
    int max_power() const override { return moment_order_; }
    double mixed_moment(const std::vector<int>& nodes,
                        const std::vector<int>& powers) const override;

  private:
    const PopulationOracle& oracle_;
    int moment_order_;
};

// Regression coefficients assembled from any moment provider.
Eigen::VectorXd plugin_regression(const MomentProvider& provider, int v,
                                  const std::vector<int>& C);

// The plug-in direction statistic as an explicit polynomial in raw mixed
// moments: residual powers are expanded multinomially instead of averaging
// a residual column. Evaluating this on exact population moments
// reproduces the population statistic.
double plugin_tau(const MomentProvider& provider, int v, int u,
                  const std::vector<int>& C, int K);

}  // namespace hdl
