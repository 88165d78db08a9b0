#include "hdl/moments.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>
#include <utility>

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

// Sorted (node, power) pairs with duplicates merged and zero powers dropped.
std::vector<std::pair<int, int>> normalize_monomial(
    const std::vector<int>& nodes, const std::vector<int>& powers, int p) {
    if (nodes.size() != powers.size())
        throw input_error("node and power lists must have equal length");
    std::vector<std::pair<int, int>> terms;
    terms.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] < 1 || nodes[i] > p)
            throw input_error("unknown node label " + std::to_string(nodes[i]));
        if (powers[i] < 0) throw input_error("moment powers must be nonnegative");
        if (powers[i] > 0) terms.push_back({nodes[i], powers[i]});
    }
    std::sort(terms.begin(), terms.end());
    std::vector<std::pair<int, int>> merged;
    for (const auto& t : terms) {
        if (!merged.empty() && merged.back().first == t.first)
            merged.back().second += t.second;
        else
            merged.push_back(t);
    }
    return merged;
}

int total_power(const std::vector<std::pair<int, int>>& monomial) {
    int total = 0;
    for (const auto& [node, power] : monomial) total += power;
    return total;
}

std::string monomial_key(const std::vector<std::pair<int, int>>& monomial) {
    std::string key;
    for (const auto& [node, power] : monomial) {
        key += std::to_string(node);
        key += '^';
        key += std::to_string(power);
        key += ' ';
    }
    return key;
}

std::string regression_key(int v, const std::vector<int>& C) {
    std::string key = std::to_string(v);
    key += '|';
    for (int c : C) {
        key += std::to_string(c);
        key += ',';
    }
    return key;
}

Eigen::VectorXd solve_gram(const Eigen::MatrixXd& gram,
                           const Eigen::VectorXd& rhs,
                           const std::vector<int>& C) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0 || hi / lo > 1e12)
        throw numeric_error("second-moment block for C = " + set_str(C) +
                            " is singular or ill-conditioned");
    return es.eigenvectors() *
           (es.eigenvectors().transpose() * rhs).cwiseQuotient(es.eigenvalues());
}

// Elementwise residual^s via repeated multiplication; both the memoized
// and the batch path must build powers the same way so their sums agree
// bit for bit.
Eigen::VectorXd column_power(const Eigen::VectorXd& column, int s) {
    Eigen::VectorXd out = Eigen::VectorXd::Ones(column.size());
    for (int i = 0; i < s; ++i) out = out.cwiseProduct(column);
    return out;
}

}  // namespace

double MomentProvider::second_moment(int a, int b) const {
    if (a == b) return mixed_moment({a}, {2});
    return mixed_moment({a, b}, {1, 1});
}

MomentCache::MomentCache(const Dataset& dataset, int moment_order,
                         Options options)
    : data_(dataset.values()), moment_order_(moment_order), options_(options) {
    if (moment_order_ < 3)
        throw input_error("moment order must exceed 2");
    const int n = sample_count();
    const int p = variable_count();
    for (int j = 0; j < p; ++j) {
        const double mean = pairwise_sum(data_.col(j).data(), n) / n;
        data_.col(j).array() -= mean;
    }
    if (options_.standardize) {
        for (int j = 0; j < p; ++j) {
            const double ms =
                pairwise_dot(data_.col(j).data(), data_.col(j).data(), n) / n;
            if (ms <= 0.0)
                throw numeric_error("column " + std::to_string(j + 1) +
                                    " is constant; cannot standardize");
            data_.col(j) /= std::sqrt(ms);
        }
    }
}

double MomentCache::mixed_moment(const std::vector<int>& nodes,
                                 const std::vector<int>& powers) const {
    const auto monomial = normalize_monomial(nodes, powers, variable_count());
    if (total_power(monomial) > max_power())
        throw input_error("moment power exceeds the configured bound of " +
                          std::to_string(max_power()));
    const std::string key = monomial_key(monomial);
    if (options_.memoize) {
        std::shared_lock lock(moment_mutex_);
        auto it = moment_memo_.find(key);
        if (it != moment_memo_.end()) return it->second;
    }
    const int n = sample_count();
    Eigen::VectorXd prod = Eigen::VectorXd::Ones(n);
    for (const auto& [node, power] : monomial)
        for (int k = 0; k < power; ++k)
            prod = prod.cwiseProduct(data_.col(node - 1));
    const double value = pairwise_sum(prod.data(), n) / n;
    if (options_.memoize) {
        std::unique_lock lock(moment_mutex_);
        moment_memo_.emplace(key, value);
    }
    return value;
}

MomentCache::Regression MomentCache::compute_regression(
    int v, const std::vector<int>& C) const {
    const int n = sample_count();
    const int m = static_cast<int>(C.size());
    Regression entry;
    if (m == 0) {
        entry.beta = Eigen::VectorXd(0);
        entry.residual = std::make_shared<Eigen::VectorXd>(data_.col(v - 1));
        return entry;
    }
    Eigen::MatrixXd gram(m, m);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
        rhs(i) = pairwise_dot(data_.col(C[i] - 1).data(),
                              data_.col(v - 1).data(), n) / n;
        for (int j = 0; j <= i; ++j) {
            gram(i, j) = gram(j, i) =
                pairwise_dot(data_.col(C[i] - 1).data(),
                             data_.col(C[j] - 1).data(), n) / n;
        }
    }
    entry.beta = solve_gram(gram, rhs, C);
    auto residual = std::make_shared<Eigen::VectorXd>(data_.col(v - 1));
    for (int i = 0; i < m; ++i)
        *residual -= entry.beta(i) * data_.col(C[i] - 1);
    entry.residual = std::move(residual);
    return entry;
}

MomentCache::Regression MomentCache::regression_entry(
    int v, const std::vector<int>& C) const {
    if (v < 1 || v > variable_count())
        throw input_error("unknown node label " + std::to_string(v));
    for (int c : C) {
        if (c < 1 || c > variable_count())
            throw input_error("unknown node label " + std::to_string(c));
        if (c == v) throw input_error("regression target cannot appear in C");
    }
    if (!options_.memoize) return compute_regression(v, C);
    const std::string key = regression_key(v, C);
    {
        std::shared_lock lock(regression_mutex_);
        auto it = regression_memo_.find(key);
        if (it != regression_memo_.end()) return it->second;
    }
    Regression entry = compute_regression(v, C);
    std::unique_lock lock(regression_mutex_);
    return regression_memo_.emplace(key, std::move(entry)).first->second;
}

Eigen::VectorXd MomentCache::fit_regression(int v,
                                            const std::vector<int>& C) const {
    return regression_entry(v, C).beta;
}

double MomentCache::moments_from_residual(const Eigen::VectorXd& residual,
                                          int u, int s, int r) const {
    const int n = sample_count();
    Eigen::VectorXd term = column_power(residual, s);
    for (int k = 0; k < r; ++k) term = term.cwiseProduct(data_.col(u - 1));
    return pairwise_sum(term.data(), n) / n;
}

double MomentCache::residual_cross_moment(int v, const std::vector<int>& C,
                                          int u, int s, int r) const {
    if (s < 0 || r < 0 || s + r > moment_order_)
        throw input_error("residual cross moment needs s + r <= " +
                          std::to_string(moment_order_));
    if (u == v || sorted_contains(C, u))
        throw input_error("candidate node may not appear in {v} or C");
    if (u < 1 || u > variable_count())
        throw input_error("unknown node label " + std::to_string(u));
    const Regression entry = regression_entry(v, C);
    return moments_from_residual(*entry.residual, u, s, r);
}

double MomentCache::tau_hat(int v, int u, const std::vector<int>& C,
                            int K) const {
    if (K <= 2) throw input_error("moment order must exceed 2");
    if (K > moment_order_)
        throw input_error("statistic order exceeds the configured bound");
    if (u == v) throw input_error("direction statistic needs two distinct nodes");
    const std::string key =
        std::to_string(u) + "@" + std::to_string(K) + "#" + regression_key(v, C);
    if (options_.memoize) {
        std::shared_lock lock(tau_mutex_);
        auto it = tau_memo_.find(key);
        if (it != tau_memo_.end()) return it->second;
    }
    const double mK1 = residual_cross_moment(v, C, u, K - 1, 1);
    const double m20 = residual_cross_moment(v, C, u, 2, 0);
    const double mK0 = residual_cross_moment(v, C, u, K, 0);
    const double m11 = residual_cross_moment(v, C, u, 1, 1);
    const double value = mK1 * m20 - mK0 * m11;
    if (options_.memoize) {
        std::unique_lock lock(tau_mutex_);
        tau_memo_.emplace(key, value);
    }
    return value;
}

void MomentCache::tau_hat_batch(int v, const std::vector<int>& C,
                                std::span<const int> candidates, int K,
                                std::span<double> out) const {
    if (K <= 2) throw input_error("moment order must exceed 2");
    if (K > moment_order_)
        throw input_error("statistic order exceeds the configured bound");
    if (out.size() != candidates.size())
        throw input_error("output span size mismatch");
    const Regression entry = compute_regression(v, C);
    const Eigen::VectorXd& res = *entry.residual;
    const int n = sample_count();

    const Eigen::VectorXd res2 = column_power(res, 2);
    const Eigen::VectorXd resK1 = column_power(res, K - 1);
    const double m20 = pairwise_sum(res2.data(), n) / n;
    const double mK0 = pairwise_dot(resK1.data(), res.data(), n) / n;

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const int u = candidates[i];
        if (u == v || sorted_contains(C, u))
            throw input_error("candidate node may not appear in {v} or C");
        const double* yu = data_.col(u - 1).data();
        const double mK1 = pairwise_dot(resK1.data(), yu, n) / n;
        const double m11 = pairwise_dot(res.data(), yu, n) / n;
        out[i] = mK1 * m20 - mK0 * m11;
    }
}

PopulationMomentProvider::PopulationMomentProvider(
    const PopulationOracle& oracle, int moment_order)
    : oracle_(oracle), moment_order_(moment_order) {
    if (moment_order_ < 3) throw input_error("moment order must exceed 2");
    for (const auto& e : oracle_.sem().errors()) {
        if (e.max_order() < moment_order_)
            throw input_error("error moments available only to order " +
                              std::to_string(e.max_order()));
    }
}

int PopulationMomentProvider::variable_count() const {
    return oracle_.node_count();
}

double PopulationMomentProvider::mixed_moment(
    const std::vector<int>& nodes, const std::vector<int>& powers) const {
    const int p = variable_count();
    const auto monomial = normalize_monomial(nodes, powers, p);
    if (total_power(monomial) > moment_order_)
        throw input_error("moment power exceeds the configured bound of " +
                          std::to_string(moment_order_));
    const int m = static_cast<int>(monomial.size());
    if (m == 0) return 1.0;

    // Mixed-radix table over partial exponent assignments; one pass per
    // error term folds its binomially weighted moments into the table.
    std::vector<int> radix(m);
    int states = 1;
    for (int j = 0; j < m; ++j) {
        radix[j] = monomial[j].second + 1;
        states *= radix[j];
    }
    auto decode = [&](int code, std::vector<int>& e) {
        for (int j = 0; j < m; ++j) {
            e[j] = code % radix[j];
            code /= radix[j];
        }
    };

    const Eigen::MatrixXd& effects = oracle_.total_effects();
    std::vector<double> table(states, 0.0), next(states, 0.0);
    table[0] = 1.0;
    std::vector<int> target(m), sub(m);
    for (int k = 1; k <= p; ++k) {
        const ErrorSpec& err = oracle_.sem().error(k);
        std::vector<double> coeff(m);
        for (int j = 0; j < m; ++j)
            coeff[j] = effects(monomial[j].first - 1, k - 1);
        std::fill(next.begin(), next.end(), 0.0);
        for (int code = 0; code < states; ++code) {
            decode(code, target);
            // Enumerate how much of each factor's exponent eps_k absorbs.
            double acc = 0.0;
            std::vector<int> d(m, 0);
            while (true) {
                double w = 1.0;
                int deg = 0;
                int prev_code = 0;
                int stride = 1;
                bool zero = false;
                for (int j = 0; j < m; ++j) {
                    if (d[j] > 0 && coeff[j] == 0.0) { zero = true; break; }
                    w *= binomial(target[j], d[j]) * std::pow(coeff[j], d[j]);
                    deg += d[j];
                    prev_code += (target[j] - d[j]) * stride;
                    stride *= radix[j];
                }
                if (!zero && table[prev_code] != 0.0)
                    acc += w * err.moment(deg) * table[prev_code];
                // Next assignment d <= target in mixed radix.
                int j = 0;
                while (j < m && d[j] == target[j]) {
                    d[j] = 0;
                    ++j;
                }
                if (j == m) break;
                ++d[j];
            }
            next[code] = acc;
        }
        table.swap(next);
    }
    return table[states - 1];
}

Eigen::VectorXd plugin_regression(const MomentProvider& provider, int v,
                                  const std::vector<int>& C) {
    const int m = static_cast<int>(C.size());
    for (int c : C)
        if (c == v) throw input_error("regression target cannot appear in C");
    if (m == 0) return Eigen::VectorXd(0);
    Eigen::MatrixXd gram(m, m);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
        rhs(i) = provider.second_moment(C[i], v);
        for (int j = 0; j <= i; ++j)
            gram(i, j) = gram(j, i) = provider.second_moment(C[i], C[j]);
    }
    return solve_gram(gram, rhs, C);
}

namespace {

// E((Y_v - beta' Y_C)^s Y_u^r) expanded into raw mixed moments.
double residual_moment_from_provider(const MomentProvider& provider, int v,
                                     const std::vector<int>& C,
                                     const Eigen::VectorXd& beta, int u, int s,
                                     int r) {
    const int m = static_cast<int>(C.size());
    std::vector<int> nodes(m + 2);
    nodes[0] = v;
    for (int j = 0; j < m; ++j) nodes[j + 1] = C[j];
    nodes[m + 1] = u;

    double total = 0.0;
    std::vector<int> powers(m + 2, 0);
    powers[m + 1] = r;
    // Compositions of s over the m+1 residual factors.
    std::vector<int> w(m + 1, 0);
    w[0] = s;
    while (true) {
        double coeff = 1.0;
        int remaining = s;
        for (int j = 0; j <= m; ++j) {
            coeff *= binomial(remaining, w[j]);
            remaining -= w[j];
        }
        for (int j = 1; j <= m; ++j) coeff *= std::pow(-beta(j - 1), w[j]);
        for (int j = 0; j <= m; ++j) powers[j] = w[j];
        if (coeff != 0.0)
            total += coeff * provider.mixed_moment(nodes, powers);
        if (m == 0) break;
        if (w[0] > 0) {
            --w[0];
            ++w[1];
        } else {
            int j = 1;
            while (j <= m && w[j] == 0) ++j;
            if (j >= m) break;  // last composition (or s = 0)
            w[0] = w[j] - 1;
            w[j] = 0;
            ++w[j + 1];
        }
    }
    return total;
}

}  // namespace

double plugin_tau(const MomentProvider& provider, int v, int u,
                  const std::vector<int>& C, int K) {
    if (K <= 2) throw input_error("moment order must exceed 2");
    if (u == v || sorted_contains(C, u))
        throw input_error("candidate node may not appear in {v} or C");
    const Eigen::VectorXd beta = plugin_regression(provider, v, C);
    const double mK1 = residual_moment_from_provider(provider, v, C, beta, u, K - 1, 1);
    const double m20 = residual_moment_from_provider(provider, v, C, beta, u, 2, 0);
    const double mK0 = residual_moment_from_provider(provider, v, C, beta, u, K, 0);
    const double m11 = residual_moment_from_provider(provider, v, C, beta, u, 1, 1);
    return mK1 * m20 - mK0 * m11;
}

}  // namespace hdl
