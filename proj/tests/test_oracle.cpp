#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "hdl/errors.hpp"
#include "hdl/oracle.hpp"
#include "hdl/subsets.hpp"

using namespace hdl;

namespace {

// ---- independent reference implementations ------------------------------
// No matrix inversion, no moment-propagation recursion: total effects come
// from explicit path enumeration, regressions from Cramer-style solves,
// and joint moments from exhaustive expansion over error-index tuples.

double brute_total_effect(const WeightedDag& wdag, int v, int u) {
    if (u == v) return 1.0;
    double total = 0.0;
    std::function<void(int, double)> walk = [&](int node, double weight) {
        for (int child : wdag.dag().children(node)) {
            const double w = weight * wdag.coeff(child, node);
            if (child == v)
                total += w;
            else
                walk(child, w);
        }
    };
    walk(u, 1.0);
    return total;
}

Eigen::MatrixXd brute_covariance(const Sem& sem) {
    const int p = sem.node_count();
    Eigen::MatrixXd sigma(p, p);
    for (int a = 1; a <= p; ++a) {
        for (int b = 1; b <= p; ++b) {
            double acc = 0.0;
            for (int k = 1; k <= p; ++k)
                acc += brute_total_effect(sem.wdag(), a, k) *
                       brute_total_effect(sem.wdag(), b, k) *
                       sem.error(k).variance();
            sigma(a - 1, b - 1) = acc;
        }
    }
    return sigma;
}

std::vector<double> brute_regression(const Sem& sem, int v,
                                     const std::vector<int>& C) {
    const Eigen::MatrixXd sigma = brute_covariance(sem);
    const int m = static_cast<int>(C.size());
    Eigen::MatrixXd gram(m, m);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
        rhs(i) = sigma(C[i] - 1, v - 1);
        for (int j = 0; j < m; ++j) gram(i, j) = sigma(C[i] - 1, C[j] - 1);
    }
    // Gaussian elimination with partial pivoting, written out by hand.
    std::vector<double> beta(m, 0.0);
    std::vector<std::vector<double>> aug(m, std::vector<double>(m + 1));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) aug[i][j] = gram(i, j);
        aug[i][m] = rhs(i);
    }
    for (int col = 0; col < m; ++col) {
        int pivot = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        std::swap(aug[col], aug[pivot]);
        for (int r = col + 1; r < m; ++r) {
            const double f = aug[r][col] / aug[col][col];
            for (int j = col; j <= m; ++j) aug[r][j] -= f * aug[col][j];
        }
    }
    for (int r = m - 1; r >= 0; --r) {
        double acc = aug[r][m];
        for (int j = r + 1; j < m; ++j) acc -= aug[r][j] * beta[j];
        beta[r] = acc / aug[r][r];
    }
    return beta;
}

// E((a' eps)^s (b' eps)^r) by brute expansion over index tuples.
double brute_joint_moment(const Sem& sem, const std::vector<double>& a,
                          const std::vector<double>& b, int s, int r) {
    const int p = sem.node_count();
    const int total = s + r;
    std::vector<int> index(total, 1);
    double acc = 0.0;
    while (true) {
        double coeff = 1.0;
        for (int i = 0; i < s; ++i) coeff *= a[index[i] - 1];
        for (int i = s; i < total; ++i) coeff *= b[index[i] - 1];
        if (coeff != 0.0) {
            std::map<int, int> counts;
            for (int k : index) counts[k]++;
            double moment = 1.0;
            for (const auto& [node, count] : counts)
                moment *= sem.error(node).moment(count);
            acc += coeff * moment;
        }
        int j = 0;
        while (j < total && index[j] == p) {
            index[j] = 1;
            ++j;
        }
        if (j == total) break;
        ++index[j];
    }
    return acc;
}

double brute_tau(const Sem& sem, int v, int u, const std::vector<int>& C,
                 int K) {
    const int p = sem.node_count();
    const std::vector<double> beta = brute_regression(sem, v, C);
    std::vector<double> a(p), b(p);
    for (int k = 1; k <= p; ++k) {
        double coeff = brute_total_effect(sem.wdag(), v, k);
        for (std::size_t i = 0; i < C.size(); ++i)
            coeff -= beta[i] * brute_total_effect(sem.wdag(), C[i], k);
        a[k - 1] = coeff;
        b[k - 1] = brute_total_effect(sem.wdag(), u, k);
    }
    return brute_joint_moment(sem, a, b, K - 1, 1) *
               brute_joint_moment(sem, a, b, 2, 0) -
           brute_joint_moment(sem, a, b, K, 0) *
               brute_joint_moment(sem, a, b, 1, 1);
}

// ---- shared fixtures -----------------------------------------------------

WeightedDag single_edge(double beta) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
    b(1, 0) = beta;
    return WeightedDag(Dag(2, {{1, 2}}), b);
}

// Triangle 1->2->3 with a direct 1->3 edge; weights chosen so the total
// effect of 1 on 3 cancels exactly.
Sem cancelling_triangle() {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 3);
    b(1, 0) = 1.0;   // 1 -> 2
    b(2, 0) = 1.0;   // 1 -> 3
    b(2, 1) = -1.0;  // 2 -> 3
    WeightedDag wdag(Dag(3, {{1, 2}, {1, 3}, {2, 3}}), b);
    std::vector<ErrorSpec> errors(3, ErrorSpec::uniform(1.0, 8));
    return Sem(std::move(wdag), std::move(errors));
}

// Two source nodes feeding two sinks; the (2, 4) edge cancels after
// adjusting for node 3.
Sem cancelling_square() {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 4);
    b(2, 0) = 1.0;  // 1 -> 3
    b(2, 1) = 1.0;  // 2 -> 3
    b(3, 0) = 2.0;  // 1 -> 4
    b(3, 1) = 1.0;  // 2 -> 4
    WeightedDag wdag(Dag(4, {{1, 3}, {1, 4}, {2, 3}, {2, 4}}), b);
    std::vector<ErrorSpec> errors = {
        ErrorSpec::uniform(1.0, 8), ErrorSpec::uniform(1.0, 8),
        ErrorSpec::uniform(1.0, 8), ErrorSpec::uniform(2.0, 8)};
    return Sem(std::move(wdag), std::move(errors));
}

Sem random_offset_sem(int p, int J, std::uint64_t seed, int K) {
    Rng rng(seed);
    WeightedDag wdag = random_dag(p, J, rng);
    std::vector<ErrorSpec> errors;
    for (int v = 0; v < p; ++v) {
        const double variance = rng.uniform(0.5, 1.5);
        const double offset = rng.sign() * rng.uniform(0.5, 1.5);
        errors.push_back(ErrorSpec::gaussian_offset(variance, offset, K));
    }
    return Sem(std::move(wdag), std::move(errors));
}

}  // namespace

TEST_CASE("total effects") {
    Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(3, 3);
    chain(1, 0) = 1.0;
    chain(2, 1) = 1.0;
    const Eigen::MatrixXd pi = total_effects(chain);
    CHECK(pi(2, 0) == doctest::Approx(1.0));
    CHECK(pi(0, 0) == 1.0);

    const Eigen::MatrixXd eye = total_effects(Eigen::MatrixXd::Zero(3, 3));
    CHECK(eye == Eigen::MatrixXd::Identity(3, 3));

    const PopulationOracle oracle(cancelling_triangle());
    CHECK(oracle.total_effect(3, 1) == doctest::Approx(0.0).epsilon(1e-14));

    Eigen::MatrixXd cyclic = Eigen::MatrixXd::Zero(2, 2);
    cyclic(0, 1) = 1.0;
    cyclic(1, 0) = 1.0;
    CHECK_THROWS_AS(total_effects(cyclic), structure_error);
}

TEST_CASE("population covariance") {
    const Sem sem(single_edge(1.0),
                  {ErrorSpec::uniform(1.0, 8), ErrorSpec::uniform(1.0, 8)});
    const PopulationOracle oracle(sem);
    CHECK(oracle.covariance()(0, 0) == doctest::Approx(1.0));
    CHECK(oracle.covariance()(0, 1) == doctest::Approx(1.0));
    CHECK(oracle.covariance()(1, 1) == doctest::Approx(2.0));
    CHECK(oracle.min_eigenvalue() > 0.0);

    const WeightedDag empty(Dag(2, {}), Eigen::MatrixXd::Zero(2, 2));
    const PopulationOracle diag(
        Sem(empty, {ErrorSpec::uniform(1.0), ErrorSpec::uniform(1.0)}));
    CHECK(diag.covariance() == Eigen::MatrixXd::Identity(2, 2));
}

TEST_CASE("population covariance matches brute path sums") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Sem sem = random_offset_sem(6, 3, seed, 4);
        const PopulationOracle oracle(sem);
        const Eigen::MatrixXd brute = brute_covariance(sem);
        CHECK((oracle.covariance() - brute).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("total effects vanish outside ancestor sets") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Sem sem = random_offset_sem(2 + seed % 7, 3, seed, 4);
        const PopulationOracle oracle(sem);
        const Dag& dag = sem.dag();
        for (int v = 1; v <= dag.node_count(); ++v) {
            const auto anc = dag.ancestors(v);
            for (int u = 1; u <= dag.node_count(); ++u) {
                if (u == v) continue;
                if (!sorted_contains(anc, u))
                    CHECK(oracle.total_effect(v, u) == doctest::Approx(0.0));
            }
        }
    }
}

TEST_CASE("population regression") {
    const Sem sem(single_edge(1.0),
                  {ErrorSpec::uniform(1.0, 8), ErrorSpec::uniform(1.0, 8)});
    const PopulationOracle oracle(sem);
    const Eigen::VectorXd beta = oracle.regression(2, {1});
    CHECK(beta.size() == 1);
    CHECK(beta(0) == doctest::Approx(1.0));
    CHECK(oracle.regression(2, {}).size() == 0);

    // Independent nodes: zero coefficients.
    const WeightedDag empty(Dag(3, {}), Eigen::MatrixXd::Zero(3, 3));
    const PopulationOracle diag(Sem(empty, {ErrorSpec::uniform(1.0),
                                            ErrorSpec::uniform(2.0),
                                            ErrorSpec::uniform(3.0)}));
    const Eigen::VectorXd zero = diag.regression(1, {2, 3});
    CHECK(zero.cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    CHECK_THROWS_AS(oracle.regression(2, {2}), input_error);
}

TEST_CASE("regression matches brute elimination on random models") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Sem sem = random_offset_sem(6, 3, seed + 50, 4);
        const PopulationOracle oracle(sem);
        const std::vector<int> C = {1, 3, 5};
        const Eigen::VectorXd beta = oracle.regression(6, C);
        const std::vector<double> brute = brute_regression(sem, 6, C);
        for (int i = 0; i < 3; ++i)
            CHECK(beta(i) == doctest::Approx(brute[i]).epsilon(1e-9));
    }
}

TEST_CASE("residual total effects") {
    const PopulationOracle square(cancelling_square());
    CHECK(square.residual_effect(4, 2, {3}) == doctest::Approx(0.0).epsilon(1e-12));

    const Sem sem(single_edge(0.7),
                  {ErrorSpec::uniform(1.0, 8), ErrorSpec::uniform(1.0, 8)});
    const PopulationOracle oracle(sem);
    CHECK(oracle.residual_effect(2, 1, {}) == doctest::Approx(0.7));
    // No ancestry: the unadjusted effect is zero.
    CHECK(oracle.residual_effect(1, 2, {}) == doctest::Approx(0.0));
}

TEST_CASE("parental faithfulness audit") {
    const PopulationOracle triangle(cancelling_triangle());
    const FaithfulnessReport bad = triangle.parental_faithfulness(2);
    REQUIRE_FALSE(bad.faithful);
    CHECK(bad.witness->parent == 1);
    CHECK(bad.witness->child == 3);
    CHECK(bad.witness->adjustment.empty());

    const PopulationOracle square(cancelling_square());
    const FaithfulnessReport bad2 = square.parental_faithfulness(2);
    REQUIRE_FALSE(bad2.faithful);
    CHECK(bad2.witness->parent == 2);
    CHECK(bad2.witness->child == 4);
    CHECK(bad2.witness->adjustment == std::vector<int>{3});

    const Sem sem(single_edge(0.9),
                  {ErrorSpec::uniform(1.0, 8), ErrorSpec::uniform(1.0, 8)});
    CHECK(PopulationOracle(sem).parental_faithfulness(2).faithful);
}

TEST_CASE("closed form direction statistic") {
    // Zero offsets kill the statistic outright.
    CHECK(tau_unconfounded(1.3, 1.0, 1.0, 0.0, 0.0, 4) == 0.0);
    // Equal parameters cancel at unit residual effect.
    CHECK(tau_unconfounded(1.0, 1.0, 1.0, -1.2, -1.2, 4) == 0.0);
    // Distinct variances: pi * (eta_parent * var_residual
    //                           - eta_residual * var_parent) = -0.3.
    CHECK(tau_unconfounded(1.0, 0.5, 1.0, -0.3, -1.2, 4) ==
          doctest::Approx(-0.3).epsilon(1e-14));
}

TEST_CASE("single edge statistic value") {
    const Sem sem(single_edge(1.0),
                  {ErrorSpec::uniform(1.0, 8), ErrorSpec::uniform(0.5, 8)});
    const PopulationOracle oracle(sem);
    CHECK(oracle.tau(2, 1, {}, 4) == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK(oracle.tau_closed_form(2, 1, {}, 4) ==
          doctest::Approx(-0.3).epsilon(1e-12));
    const TauComponents c = oracle.tau_components(2, 1, {}, 4);
    CHECK(c.residual_effect == doctest::Approx(1.0));
    CHECK(c.residual_variance == doctest::Approx(0.5));
    CHECK(c.parent_variance == doctest::Approx(1.0));
    CHECK(c.residual_offset == doctest::Approx(-0.3));
    CHECK(c.parent_offset == doctest::Approx(-1.2));
}

TEST_CASE("moment propagation agrees with brute expansion") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const int p = 3 + static_cast<int>(seed % 2);
        const Sem sem = random_offset_sem(p, 2, seed + 100, 4);
        const PopulationOracle oracle(sem);
        for (int v = 1; v <= p; ++v) {
            for (int u = 1; u <= p; ++u) {
                if (u == v) continue;
                std::vector<int> others;
                for (int w = 1; w <= p; ++w)
                    if (w != u && w != v) others.push_back(w);
                for_each_subset_up_to(others, 2, [&](const std::vector<int>& C) {
                    CHECK(oracle.tau(v, u, C, 4) ==
                          doctest::Approx(brute_tau(sem, v, u, C, 4))
                              .epsilon(1e-9));
                    return true;
                });
            }
        }
    }
}

TEST_CASE("statistic vanishes when parents are covered") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const int p = 3 + static_cast<int>(seed % 4);
        const Sem sem = random_offset_sem(p, 3, seed + 300, 4);
        const PopulationOracle oracle(sem);
        const Dag& dag = sem.dag();
        for (int v = 1; v <= p; ++v) {
            const auto pa = dag.parents(v);
            const auto de = dag.descendants(v);
            for (int u = 1; u <= p; ++u) {
                if (u == v || sorted_contains(pa, u)) continue;
                std::vector<int> ground;
                for (int w = 1; w <= p; ++w)
                    if (w != u && w != v && !sorted_contains(de, w))
                        ground.push_back(w);
                for_each_subset_up_to(ground, p, [&](const std::vector<int>& C) {
                    bool covers = true;
                    for (int q : pa)
                        if (!sorted_contains(C, q)) covers = false;
                    if (covers)
                        CHECK(std::abs(oracle.tau(v, u, C, 4)) < 1e-10);
                    return true;
                });
            }
        }
    }
}

TEST_CASE("gaussian moments give a zero statistic without shared ancestry") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed + 900);
        WeightedDag wdag = random_dag(5, 3, rng);
        std::vector<ErrorSpec> errors;
        for (int v = 0; v < 5; ++v)
            errors.push_back(ErrorSpec::gaussian(rng.uniform(0.5, 1.5), 8));
        const Sem sem(std::move(wdag), std::move(errors));
        const PopulationOracle oracle(sem);
        for (int v = 1; v <= 5; ++v) {
            for (int u = 1; u <= 5; ++u) {
                if (u == v) continue;
                std::vector<int> others;
                for (int w = 1; w <= 5; ++w)
                    if (w != u && w != v) others.push_back(w);
                for_each_subset_up_to(others, 2, [&](const std::vector<int>& C) {
                    if (oracle.confounding_free(v, u, C))
                        CHECK(std::abs(oracle.tau(v, u, C, 4)) < 1e-10);
                    return true;
                });
            }
        }
    }
}

TEST_CASE("closed form matches moment propagation without shared ancestry") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const int p = 4 + static_cast<int>(seed % 3);
        const Sem sem = random_offset_sem(p, 3, seed + 1234, 4);
        const PopulationOracle oracle(sem);
        for (int v = 1; v <= p; ++v) {
            for (int u = 1; u <= p; ++u) {
                if (u == v) continue;
                std::vector<int> others;
                for (int w = 1; w <= p; ++w)
                    if (w != u && w != v) others.push_back(w);
                for_each_subset_up_to(others, 2, [&](const std::vector<int>& C) {
                    if (oracle.confounding_free(v, u, C)) {
                        CHECK(oracle.tau(v, u, C, 4) ==
                              doctest::Approx(oracle.tau_closed_form(v, u, C, 4))
                                  .epsilon(1e-10));
                        ++checked;
                    }
                    return true;
                });
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("generic offsets keep edge statistics away from zero") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const int p = 4 + static_cast<int>(seed % 3);
        const Sem sem = random_offset_sem(p, 3, seed + 7000, 4);
        const PopulationOracle oracle(sem);
        if (!oracle.parental_faithfulness(3, 1e-6).faithful) continue;
        const Dag& dag = sem.dag();
        for (const auto& [u, v] : dag.edges()) {
            const auto de = dag.descendants(v);
            std::vector<int> ground;
            for (int w = 1; w <= p; ++w)
                if (w != u && w != v && !sorted_contains(de, w))
                    ground.push_back(w);
            for_each_subset_up_to(ground, 3, [&](const std::vector<int>& C) {
                CHECK(std::abs(oracle.tau(v, u, C, 4)) > 1e-9);
                return true;
            });
        }
    }
}

TEST_CASE("gamma scan reports the smallest edge statistic") {
    const Sem sem(single_edge(1.0),
                  {ErrorSpec::uniform(1.0, 8), ErrorSpec::uniform(0.5, 8)});
    const PopulationOracle oracle(sem);
    CHECK(oracle.gamma_scan(3, 4) == doctest::Approx(0.3).epsilon(1e-12));

    const PopulationOracle unfaithful(cancelling_triangle());
    CHECK(unfaithful.gamma_scan(2, 4) < 1e-12);
}

TEST_CASE("odd moment order sees skewed errors") {
    // A skewed third moment flips sign between the two directions.
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
    b(1, 0) = 1.0;
    const WeightedDag wdag(Dag(2, {{1, 2}}), b);
    std::vector<ErrorSpec> errors = {ErrorSpec::custom({0.0, 1.0, 0.8}),
                                     ErrorSpec::custom({0.0, 1.0, -0.4})};
    const PopulationOracle oracle(Sem(wdag, std::move(errors)));
    const double forward = oracle.tau(2, 1, {}, 3);
    CHECK(forward == doctest::Approx(oracle.tau_closed_form(2, 1, {}, 3))
                         .epsilon(1e-12));
    CHECK(std::abs(forward) > 1e-3);
}

TEST_CASE("moment order checks") {
    const Sem sem(single_edge(1.0), {ErrorSpec::uniform(1.0, 4),
                                     ErrorSpec::uniform(1.0, 4)});
    const PopulationOracle oracle(sem);
    CHECK_THROWS_AS(oracle.tau(2, 1, {}, 6), input_error);
    CHECK_THROWS_AS(oracle.tau(2, 1, {}, 2), input_error);
    CHECK_THROWS_AS(oracle.tau(2, 2, {}, 4), input_error);
}
