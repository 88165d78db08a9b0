#include "hdl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hdl/errors.hpp"
#include "hdl/numeric.hpp"
#include "hdl/subsets.hpp"

namespace hdl {

namespace {

std::string set_str(const std::vector<int>& C) {
    std::string out = "{";
    for (std::size_t i = 0; i < C.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(C[i]);
    }
    return out + "}";
}

void check_node(int v, int p) {
    if (v < 1 || v > p)
        throw input_error("unknown node label " + std::to_string(v));
}

}  // namespace

Eigen::MatrixXd total_effects(const Eigen::MatrixXd& coeffs) {
    const int p = static_cast<int>(coeffs.rows());
    if (coeffs.cols() != p) throw input_error("coefficient matrix must be square");
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(p, p) - coeffs;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    if (!lu.isInvertible())
        throw structure_error("I - B is singular; coefficients admit no "
                              "recursive solution");
    return lu.inverse();
}

Eigen::VectorXd population_regression(const Eigen::MatrixXd& sigma, int v,
                                      const std::vector<int>& C) {
    const int p = static_cast<int>(sigma.rows());
    if (v < 1 || v > p) throw input_error("unknown node label " + std::to_string(v));
    for (int c : C) {
        if (c < 1 || c > p) throw input_error("unknown node label " + std::to_string(c));
        if (c == v) throw input_error("regression target cannot appear in C");
    }
    const int m = static_cast<int>(C.size());
    if (m == 0) return Eigen::VectorXd(0);

    Eigen::MatrixXd gram(m, m);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
        rhs(i) = sigma(C[i] - 1, v - 1);
        for (int j = 0; j < m; ++j) gram(i, j) = sigma(C[i] - 1, C[j] - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0 || hi / lo > 1e12)
        throw numeric_error("covariance block for C = " + set_str(C) +
                            " is singular or ill-conditioned");
    return es.eigenvectors() *
           (es.eigenvectors().transpose() * rhs).cwiseQuotient(es.eigenvalues());
}

double tau_unconfounded(double residual_effect, double residual_variance,
                        double parent_variance, double residual_offset,
                        double parent_offset, int K) {
    if (K <= 2) throw input_error("moment order must exceed 2");
    return residual_effect *
           (std::pow(residual_effect, K - 2) * parent_offset * residual_variance -
            residual_offset * parent_variance);
}

PopulationOracle::PopulationOracle(Sem sem) : sem_(std::move(sem)) {
    effects_ = hdl::total_effects(sem_.wdag().coeffs());
    const int p = sem_.node_count();
    Eigen::VectorXd variances(p);
    for (int v = 1; v <= p; ++v) variances(v - 1) = sem_.error(v).variance();
    covariance_ = effects_ * variances.asDiagonal() * effects_.transpose();
    covariance_ = 0.5 * (covariance_ + covariance_.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance_);
    min_eigenvalue_ = es.eigenvalues().minCoeff();
    if (min_eigenvalue_ <= 0.0)
        throw numeric_error("population covariance is not positive definite");
}

double PopulationOracle::max_abs_error_moment(int order) const {
    double out = 0.0;
    for (const auto& e : sem_.errors())
        for (int k = 1; k <= order && k <= e.max_order(); ++k)
            out = std::max(out, std::abs(e.moment(k)));
    return out;
}

Eigen::VectorXd PopulationOracle::regression(int v, const std::vector<int>& C) const {
    return population_regression(covariance_, v, C);
}

double PopulationOracle::residual_effect(int v, int u,
                                         const std::vector<int>& C) const {
    check_node(u, node_count());
    if (u == v) throw input_error("residual effect needs two distinct nodes");
    if (sorted_contains(C, u))
        throw input_error("candidate parent may not appear in the adjustment set");
    const Eigen::VectorXd beta = regression(v, C);
    double out = total_effect(v, u);
    for (std::size_t i = 0; i < C.size(); ++i)
        out -= beta(static_cast<int>(i)) * total_effect(C[i], u);
    return out;
}

Eigen::VectorXd PopulationOracle::residual_coefficients(
    int v, const std::vector<int>& C) const {
    const Eigen::VectorXd beta = regression(v, C);
    Eigen::VectorXd coeff = effects_.row(v - 1).transpose();
    for (std::size_t i = 0; i < C.size(); ++i)
        coeff -= beta(static_cast<int>(i)) * effects_.row(C[i] - 1).transpose();
    return coeff;
}

bool PopulationOracle::confounding_free(int v, int u,
                                        const std::vector<int>& C) const {
    const Dag& dag = sem_.dag();
    const int p = node_count();
    check_node(v, p);
    check_node(u, p);
    std::vector<bool> blocked(p + 1, false);
    blocked[u] = true;
    for (int c : C) blocked[c] = true;

    // Reverse reachability from v through unblocked nodes.
    std::vector<bool> reaches_v(p + 1, false);
    std::vector<int> stack{v};
    reaches_v[v] = true;
    while (!stack.empty()) {
        const int w = stack.back();
        stack.pop_back();
        for (int q : dag.parents(w)) {
            if (blocked[q] || reaches_v[q]) continue;
            reaches_v[q] = true;
            stack.push_back(q);
        }
    }
    for (int z : dag.ancestors(u))
        if (!blocked[z] && reaches_v[z]) return false;
    return true;
}

double PopulationOracle::tau(int v, int u, const std::vector<int>& C,
                             int K) const {
    if (K <= 2) throw input_error("moment order must exceed 2");
    check_node(u, node_count());
    if (u == v) throw input_error("direction statistic needs two distinct nodes");
    if (sorted_contains(C, u))
        throw input_error("candidate parent may not appear in the adjustment set");
    const int p = node_count();
    for (const auto& e : sem_.errors()) {
        if (e.max_order() < K)
            throw input_error("error moments available only to order " +
                              std::to_string(e.max_order()) +
                              ", need order " + std::to_string(K));
    }

    const Eigen::VectorXd a = residual_coefficients(v, C);
    const Eigen::VectorXd b = effects_.row(u - 1).transpose();

    // joint(s, r) = E((a' eps)^s (b' eps)^r), built one error term at a
    // time: appending an independent eps_k multiplies in its binomially
    // weighted moments.
    const int smax = K;
    auto idx = [&](int s, int r) { return s * 2 + r; };
    std::vector<double> joint(2 * (smax + 1), 0.0);
    std::vector<double> next(2 * (smax + 1), 0.0);
    joint[idx(0, 0)] = 1.0;
    for (int k = 1; k <= p; ++k) {
        const double ak = a(k - 1);
        const double bk = b(k - 1);
        const ErrorSpec& err = sem_.error(k);
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s <= smax; ++s) {
            for (int r = 0; r <= 1; ++r) {
                // Split (s, r) between the prefix sum and eps_k.
                double acc = 0.0;
                for (int i = 0; i <= s; ++i) {
                    for (int j = 0; j <= r; ++j) {
                        const double prefix = joint[idx(s - i, r - j)];
                        if (prefix == 0.0) continue;
                        if (i > 0 && ak == 0.0) continue;
                        if (j > 0 && bk == 0.0) continue;
                        const double w = binomial(s, i) * binomial(r, j) *
                                         std::pow(ak, i) * std::pow(bk, j) *
                                         err.moment(i + j);
                        acc += w * prefix;
                    }
                }
                next[idx(s, r)] = acc;
            }
        }
        joint.swap(next);
    }

    return joint[idx(K - 1, 1)] * joint[idx(2, 0)] -
           joint[idx(K, 0)] * joint[idx(1, 1)];
}

TauComponents PopulationOracle::tau_components(int v, int u,
                                               const std::vector<int>& C,
                                               int K) const {
    const int p = node_count();
    const Eigen::VectorXd a = residual_coefficients(v, C);
    const Eigen::VectorXd b = effects_.row(u - 1).transpose();
    TauComponents out;
    out.residual_effect = a(u - 1);

    // Nodes feeding the parent side split into those whose entire influence
    // on the residual routes through the parent (coefficient proportional
    // via the residual effect) and the rest; the former aggregate with the
    // parent, everything else with the residual.
    const double pi = out.residual_effect;
    for (int k = 1; k <= p; ++k) {
        const double ak = a(k - 1);
        const double bk = b(k - 1);
        const ErrorSpec& err = sem_.error(k);
        const bool ancestor_of_u = (bk != 0.0);
        const double scale = std::max({1.0, std::abs(ak), std::abs(pi * bk)});
        const bool proportional = std::abs(ak - pi * bk) <= 1e-12 * scale;
        if (ancestor_of_u && proportional) {
            out.parent_variance += bk * bk * err.variance();
            out.parent_offset += std::pow(bk, K) * err.offset(K);
        } else {
            out.residual_variance += ak * ak * err.variance();
            out.residual_offset += std::pow(ak, K) * err.offset(K);
        }
    }
    return out;
}

double PopulationOracle::tau_closed_form(int v, int u,
                                         const std::vector<int>& C,
                                         int K) const {
    const TauComponents c = tau_components(v, u, C, K);
    return tau_unconfounded(c.residual_effect, c.residual_variance,
                            c.parent_variance, c.residual_offset,
                            c.parent_offset, K);
}

FaithfulnessReport PopulationOracle::parental_faithfulness(
    int max_subset, double tolerance) const {
    const Dag& dag = sem_.dag();
    const int p = node_count();
    FaithfulnessReport report;
    for (const auto& [u, v] : dag.edges()) {
        std::vector<int> ground;
        const std::vector<int> de = dag.descendants(v);
        for (int w = 1; w <= p; ++w) {
            if (w == u || w == v || sorted_contains(de, w)) continue;
            ground.push_back(w);
        }
        bool ok = true;
        FaithfulnessWitness witness;
        for_each_subset_up_to(ground, max_subset, [&](const std::vector<int>& C) {
            const double effect = residual_effect(v, u, C);
            if (std::abs(effect) <= tolerance) {
                ok = false;
                witness = {u, v, C, effect};
                return false;
            }
            return true;
        });
        if (!ok) {
            report.faithful = false;
            report.witness = witness;
            return report;
        }
    }
    return report;
}

double PopulationOracle::gamma_scan(int J, int K) const {
    const Dag& dag = sem_.dag();
    const int p = node_count();
    double gamma = std::numeric_limits<double>::infinity();
    for (const auto& [u, v] : dag.edges()) {
        std::vector<int> ground;
        const std::vector<int> de = dag.descendants(v);
        for (int w = 1; w <= p; ++w) {
            if (w == u || w == v || sorted_contains(de, w)) continue;
            ground.push_back(w);
        }
        for_each_subset_up_to(ground, J, [&](const std::vector<int>& C) {
            gamma = std::min(gamma, std::abs(tau(v, u, C, K)));
            return true;
        });
    }
    if (!std::isfinite(gamma)) return 0.0;  // edgeless graph
    return gamma;
}

}  // namespace hdl
