#include <doctest.h>

#include <cmath>

#include "hdl/errors.hpp"
#include "hdl/numeric.hpp"
#include "hdl/sem.hpp"

using namespace hdl;

namespace {

WeightedDag single_edge(double beta) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
    b(1, 0) = beta;
    return WeightedDag(Dag(2, {{1, 2}}), b);
}

double col_mean(const Eigen::VectorXd& col) {
    return pairwise_sum(col.data(), col.size()) / col.size();
}

double col_var(const Eigen::VectorXd& col) {
    const double m = col_mean(col);
    return pairwise_dot(col.data(), col.data(), col.size()) / col.size() - m * m;
}

}  // namespace

TEST_CASE("gaussian offset moments") {
    const auto plain = gaussian_offset_moments(1.0, 0.0, 4);
    CHECK(plain[2] == 0.0);   // m3
    CHECK(plain[3] == 3.0);   // m4

    const auto shifted = gaussian_offset_moments(1.0, -1.2, 4);
    CHECK(shifted[3] == doctest::Approx(1.8).epsilon(1e-14));

    const auto odd = gaussian_offset_moments(1.0, 2.0, 3);
    CHECK(odd[2] == 2.0);
}

TEST_CASE("uniform error moments") {
    const ErrorSpec spec = ErrorSpec::uniform(1.0, 8);
    const double a = spec.uniform_half_width();
    CHECK(a == doctest::Approx(std::sqrt(3.0)));
    CHECK(spec.moment(2) == doctest::Approx(a * a / 3.0));
    CHECK(spec.moment(4) == doctest::Approx(std::pow(a, 4) / 5.0));
    CHECK(spec.moment(3) == 0.0);
    CHECK(spec.moment(1) == 0.0);
    // A fourth moment of 9/5 sits 1.2 below the Gaussian value of 3.
    CHECK(spec.offset(4) == doctest::Approx(-1.2).epsilon(1e-14));
    CHECK_THROWS_AS(spec.moment(9), input_error);
}

TEST_CASE("error spec validation") {
    CHECK_THROWS_AS(ErrorSpec::uniform(0.0), input_error);
    CHECK_THROWS_AS(ErrorSpec::custom({0.5, 1.0}), input_error);   // m1 != 0
    CHECK_THROWS_AS(ErrorSpec::custom({0.0, -1.0}), input_error);  // m2 <= 0
    const ErrorSpec ok = ErrorSpec::custom({0.0, 2.0, 0.5});
    CHECK(ok.variance() == 2.0);
    CHECK(ok.moment(3) == 0.5);
}

TEST_CASE("sem validation") {
    CHECK_THROWS_AS(Sem(single_edge(1.0), {ErrorSpec::uniform(1.0)}),
                    structure_error);
    const Sem sem(single_edge(1.0),
                  {ErrorSpec::uniform(1.0), ErrorSpec::uniform(0.5)});
    CHECK(sem.node_count() == 2);
    CHECK_FALSE(sem.all_gaussian(4));
    const Sem gauss(single_edge(1.0),
                    {ErrorSpec::gaussian(1.0), ErrorSpec::gaussian(0.5)});
    CHECK(gauss.all_gaussian(4));
}

TEST_CASE("simulate refuses custom moment specs") {
    const Sem sem(single_edge(1.0), {ErrorSpec::gaussian_offset(1.0, 0.5, 4),
                                     ErrorSpec::uniform(1.0)});
    CHECK_THROWS_AS(simulate(sem, 10, 0), input_error);
}

TEST_CASE("simulate: no edges gives independent error draws") {
    const WeightedDag empty(Dag(2, {}), Eigen::MatrixXd::Zero(2, 2));
    const Sem sem(empty, {ErrorSpec::uniform(1.0), ErrorSpec::uniform(0.25)});
    const Dataset data = simulate(sem, 200000, 123);
    CHECK(data.sample_count() == 200000);
    CHECK(std::abs(col_mean(data.values().col(0))) < 0.01);
    CHECK(col_var(data.values().col(0)) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(col_var(data.values().col(1)) == doctest::Approx(0.25).epsilon(0.02));
    // Uniform with unit variance never exceeds sqrt(3).
    CHECK(data.values().col(0).maxCoeff() <= std::sqrt(3.0));
    CHECK(data.values().col(0).minCoeff() >= -std::sqrt(3.0));
}

TEST_CASE("simulate is deterministic and block-stable") {
    const Sem sem(single_edge(0.8),
                  {ErrorSpec::uniform(0.9), ErrorSpec::uniform(0.7)});
    const Dataset a = simulate(sem, 5000, 77);
    const Dataset b = simulate(sem, 5000, 77);
    CHECK(a.values() == b.values());
    const Dataset c = simulate(sem, 5000, 78);
    CHECK(a.values() != c.values());
    // A shorter run is a prefix of a longer one: blocks only depend on the
    // master seed and their own index.
    const Dataset d = simulate(sem, 9000, 77);
    CHECK(d.values().topRows(5000) == a.values());
}

TEST_CASE("simulate matches the population covariance") {
    // Monte Carlo check: sample covariance of a large draw approximates
    // Pi D Pi' = [[1, 1], [1, 2]] for a unit-weight edge and unit variances.
    const Sem sem(single_edge(1.0),
                  {ErrorSpec::uniform(1.0), ErrorSpec::uniform(1.0)});
    const int n = 1000000;
    const Dataset data = simulate(sem, n, 2024);
    const auto& y = data.values();
    const double c00 = pairwise_dot(y.col(0).data(), y.col(0).data(), n) / n;
    const double c01 = pairwise_dot(y.col(0).data(), y.col(1).data(), n) / n;
    const double c11 = pairwise_dot(y.col(1).data(), y.col(1).data(), n) / n;
    // Standard errors are of order sqrt(Var/n) ~ 1e-3; allow 5 of them.
    CHECK(c00 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(c01 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(c11 == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("scaled uniform errors reproduce the target variance") {
    const double sigma2 = 0.85;
    const WeightedDag empty(Dag(1, {}), Eigen::MatrixXd::Zero(1, 1));
    const Sem sem(empty, {ErrorSpec::uniform(sigma2)});
    const Dataset data = simulate(sem, 400000, 9);
    CHECK(col_var(data.values().col(0)) == doctest::Approx(sigma2).epsilon(0.02));
}

TEST_CASE("sample moments converge at the root-n rate") {
    // log-log slope of |m_hat - m| against n, averaged over seeds, should
    // sit near -1/2 for the second and fourth moments.
    const Sem sem(single_edge(0.9),
                  {ErrorSpec::uniform(1.0), ErrorSpec::uniform(0.6)});
    const std::vector<int> sizes = {1000, 10000, 100000, 1000000};
    const double exact2 = 0.81 * 1.0 + 0.6;  // E(Y2^2) = beta^2 var1 + var2
    std::vector<double> errors;
    for (int n : sizes) {
        double err = 0.0;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const Dataset data = simulate(sem, n, 1000 + seed);
            const double m2 =
                pairwise_dot(data.values().col(1).data(),
                             data.values().col(1).data(), n) / n;
            err += std::abs(m2 - exact2);
        }
        errors.push_back(err / 3.0);
    }
    double slope_sum = 0.0;
    for (std::size_t i = 1; i < sizes.size(); ++i)
        slope_sum += (std::log(errors[i]) - std::log(errors[i - 1])) /
                     (std::log(double(sizes[i])) - std::log(double(sizes[i - 1])));
    const double slope = slope_sum / (sizes.size() - 1);
    CHECK(slope < -0.25);
    CHECK(slope > -0.85);
}

TEST_CASE("dataset rejects non-finite values") {
    Eigen::MatrixXd values(2, 2);
    values << 1.0, 2.0, 3.0, std::nan("");
    CHECK_THROWS_AS(Dataset(values, {"a", "b"}), input_error);
}
