#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "hdl/sem.hpp"

namespace hdl {

// (I - B)^{-1}; throws structure_error when I - B is singular (which
// signals a cyclic coefficient matrix).
Eigen::MatrixXd total_effects(const Eigen::MatrixXd& coeffs);

// Population regression coefficients of node v onto the set C, computed
// from a covariance matrix: (Sigma_CC)^{-1} Sigma_Cv. Empty C yields an
// empty vector. Throws numeric_error when Sigma_CC is singular or has
// condition number above 1e12.
Eigen::VectorXd population_regression(const Eigen::MatrixXd& sigma, int v,
                                      const std::vector<int>& C);

struct FaithfulnessWitness {
    int parent = 0;
    int child = 0;
    std::vector<int> adjustment;
    double residual_effect = 0.0;
};

struct FaithfulnessReport {
    bool faithful = true;
    std::optional<FaithfulnessWitness> witness;
};

// Inputs to the closed-form direction statistic: the residual total effect
// plus variance/order-K offset of the two aggregate error components (the
// part of the adjusted residual not shared with the candidate parent, and
// the parent's own component).
struct TauComponents {
    double residual_effect = 0.0;
    double residual_variance = 0.0;
    double residual_offset = 0.0;
    double parent_variance = 0.0;
    double parent_offset = 0.0;
};

// pi * (pi^{K-2} * parent_offset * residual_variance
//        - residual_offset * parent_variance).
// Valid when the adjusted residual and the candidate parent share no error
// source and every error has Gaussian moments below order K.
double tau_unconfounded(double residual_effect, double residual_variance,
                        double parent_variance, double residual_offset,
                        double parent_offset, int K);

// Exact population quantities of a SEM: total effects, covariance, the
// direction statistic by moment propagation. Immutable and thread-safe.
class PopulationOracle {
  public:
    explicit PopulationOracle(Sem sem);

    const Sem& sem() const { return sem_; }
    int node_count() const { return sem_.node_count(); }
    const Eigen::MatrixXd& total_effects() const { return effects_; }
    double total_effect(int v, int u) const { return effects_(v - 1, u - 1); }
    const Eigen::MatrixXd& covariance() const { return covariance_; }
    double min_eigenvalue() const { return min_eigenvalue_; }

    // Largest |E(eps_v^k)| over nodes and k <= order (reported, not enforced).
    double max_abs_error_moment(int order) const;

    Eigen::VectorXd regression(int v, const std::vector<int>& C) const;

    // Residual total effect pi_{vu.C} = pi_vu - sum_c beta_{vc.C} pi_cu.
    double residual_effect(int v, int u, const std::vector<int>& C) const;

    // Error-space coefficients of the adjusted residual Y_{v.C}: entry k
    // holds pi_{vk.C} (1 at v itself, 0 outside An(v) u An(C)).
    Eigen::VectorXd residual_coefficients(int v, const std::vector<int>& C) const;

    // true when no strict ancestor of u reaches v by a directed path that
    // avoids C and u.
    bool confounding_free(int v, int u, const std::vector<int>& C) const;

    // Exact value of the order-K direction statistic
    //   E(Y_{v.C}^{K-1} Y_u) E(Y_{v.C}^2) - E(Y_{v.C}^K) E(Y_{v.C} Y_u),
    // expanded over products of independent error moments. Handles shared
    // ancestry between Y_{v.C} and Y_u exactly. Requires error moments up
    // to order K.
    double tau(int v, int u, const std::vector<int>& C, int K) const;

    // Aggregates the per-node variances and order-K offsets into the two
    // components entering the closed form (residual variance = sum of
    // squared coefficients times variances, offset = sum of K-th coefficient
    // powers times offsets).
    TauComponents tau_components(int v, int u, const std::vector<int>& C,
                                 int K) const;

    // Closed-form route: tau_unconfounded on tau_components. Matches tau()
    // on confounding-free configurations with Gaussian-offset moments.
    double tau_closed_form(int v, int u, const std::vector<int>& C, int K) const;

    // Checks every edge (u, v) against every adjustment set of size at most
    // max_subset drawn from the non-descendants of v (excluding u, v): the
    // distribution is parentally faithful when all residual total effects
    // stay away from zero. Returns the first violation in (edge, size,
    // lexicographic) order otherwise.
    FaithfulnessReport parental_faithfulness(int max_subset,
                                             double tolerance = 1e-9) const;

    // Smallest |tau| over edges (u, v) and adjustment sets C with |C| <= J,
    // C disjoint from de(v) u {u, v}. Zero under unfaithfulness; positive
    // gamma certifies a margin for cutoff-based pruning.
    double gamma_scan(int J, int K) const;

  private:
    Sem sem_;
    Eigen::MatrixXd effects_;
    Eigen::MatrixXd covariance_;
    double min_eigenvalue_ = 0.0;
};

}  // namespace hdl
