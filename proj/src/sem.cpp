#include "hdl/sem.hpp"

#include <cmath>
#include <string>

#include "hdl/errors.hpp"
#include "hdl/numeric.hpp"

namespace hdl {

std::vector<double> gaussian_offset_moments(double variance, double offset,
                                            int order) {
    if (variance <= 0.0) throw input_error("variance must be positive");
    if (order <= 2) throw input_error("moment order must exceed 2");
    std::vector<double> moments(order);
    for (int k = 1; k < order; ++k)
        moments[k - 1] = gaussian_central_moment(k, variance);
    moments[order - 1] = gaussian_central_moment(order, variance) + offset;
    return moments;
}

ErrorSpec::ErrorSpec(Family family, std::vector<double> moments_with_zero)
    : family_(family), moments_(std::move(moments_with_zero)) {
    if (moments_.size() < 3)
        throw input_error("error spec needs moments at least up to order 2");
    moments_[0] = 1.0;
    if (moments_[1] != 0.0)
        throw input_error("error terms must be centered (first moment 0)");
    if (moments_[2] <= 0.0)
        throw input_error("error variance must be positive");
}

ErrorSpec ErrorSpec::uniform(double variance, int max_order) {
    if (variance <= 0.0) throw input_error("variance must be positive");
    if (max_order < 2) throw input_error("max_order must be >= 2");
    // Centered uniform with half-width a has E(eps^{2j}) = a^{2j}/(2j+1).
    const double a2 = 3.0 * variance;
    std::vector<double> m(max_order + 1, 0.0);
    for (int k = 2; k <= max_order; k += 2)
        m[k] = std::pow(a2, k / 2.0) / (k + 1);
    return ErrorSpec(Family::Uniform, std::move(m));
}

ErrorSpec ErrorSpec::gaussian(double variance, int max_order) {
    if (variance <= 0.0) throw input_error("variance must be positive");
    if (max_order < 2) throw input_error("max_order must be >= 2");
    std::vector<double> m(max_order + 1, 0.0);
    for (int k = 2; k <= max_order; ++k)
        m[k] = gaussian_central_moment(k, variance);
    return ErrorSpec(Family::Gaussian, std::move(m));
}

ErrorSpec ErrorSpec::custom(std::vector<double> moments) {
    std::vector<double> m(moments.size() + 1, 0.0);
    for (std::size_t i = 0; i < moments.size(); ++i) m[i + 1] = moments[i];
    return ErrorSpec(Family::CustomMoments, std::move(m));
}

ErrorSpec ErrorSpec::gaussian_offset(double variance, double offset, int order) {
    return custom(gaussian_offset_moments(variance, offset, order));
}

double ErrorSpec::moment(int k) const {
    if (k < 0) throw input_error("moment order must be nonnegative");
    if (k > max_order())
        throw input_error("error moment of order " + std::to_string(k) +
                          " requested but only orders up to " +
                          std::to_string(max_order()) + " are available");
    return moments_[k];
}

double ErrorSpec::offset(int k) const {
    return moment(k) - gaussian_central_moment(k, variance());
}

double ErrorSpec::uniform_half_width() const {
    if (family_ != Family::Uniform)
        throw input_error("half-width defined only for uniform error specs");
    return std::sqrt(3.0 * variance());
}

std::string ErrorSpec::family_name() const {
    switch (family_) {
        case Family::Uniform: return "uniform";
        case Family::Gaussian: return "gaussian";
        case Family::CustomMoments: return "custom-moments";
    }
    return "unknown";
}

ErrorSpec::Family error_family_from_name(const std::string& name) {
    if (name == "uniform") return ErrorSpec::Family::Uniform;
    if (name == "gaussian") return ErrorSpec::Family::Gaussian;
    if (name == "custom-moments") return ErrorSpec::Family::CustomMoments;
    throw input_error("unknown sampler family '" + name + "'");
}

Sem::Sem(WeightedDag wdag, std::vector<ErrorSpec> errors)
    : wdag_(std::move(wdag)), errors_(std::move(errors)) {
    if (static_cast<int>(errors_.size()) != wdag_.node_count())
        throw structure_error("error list length does not match node count");
}

bool Sem::all_gaussian(int order) const {
    for (const auto& e : errors_) {
        for (int k = 3; k <= order && k <= e.max_order(); ++k) {
            if (std::abs(e.offset(k)) > 1e-12 * std::max(1.0, std::abs(e.moment(k))))
                return false;
        }
    }
    return true;
}

Dataset::Dataset(Eigen::MatrixXd values, std::vector<std::string> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
    if (values_.rows() < 1) throw input_error("dataset needs at least one row");
    if (static_cast<int>(labels_.size()) != values_.cols())
        throw input_error("label count does not match column count");
    for (int i = 0; i < values_.rows(); ++i)
        for (int j = 0; j < values_.cols(); ++j)
            if (!std::isfinite(values_(i, j)))
                throw input_error("non-finite value at row " + std::to_string(i + 1) +
                                  ", column " + std::to_string(j + 1));
}

namespace {
constexpr int kSimBlock = 4096;

double draw_error(const ErrorSpec& spec, Rng& rng) {
    switch (spec.family()) {
        case ErrorSpec::Family::Uniform:
            return rng.symmetric_uniform(spec.uniform_half_width());
        case ErrorSpec::Family::Gaussian:
            return std::sqrt(spec.variance()) * rng.normal();
        case ErrorSpec::Family::CustomMoments:
            break;
    }
    throw input_error("custom-moment error specs cannot be sampled");
}
}  // namespace

Dataset simulate(const Sem& sem, int n, std::uint64_t seed) {
    if (n < 1) throw input_error("sample count must be >= 1");
    const int p = sem.node_count();
    for (const auto& e : sem.errors()) {
        if (e.family() == ErrorSpec::Family::CustomMoments)
            throw input_error("custom-moment error specs cannot be sampled");
    }

    Eigen::MatrixXd values(n, p);
    const Ordering topo = sem.dag().topological_sort();
    const Eigen::MatrixXd& coeffs = sem.wdag().coeffs();

    for (int block = 0; block * kSimBlock < n; ++block) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(block)));
        const int lo = block * kSimBlock;
        const int hi = std::min(n, lo + kSimBlock);
        for (int i = lo; i < hi; ++i)
            for (int j = 0; j < p; ++j)
                values(i, j) = draw_error(sem.error(j + 1), rng);
    }

    // Resolve each node in topological order: Y_v = sum_u beta_vu Y_u + eps_v.
    for (int v : topo) {
        for (int u : sem.dag().parents(v))
            values.col(v - 1) += coeffs(v - 1, u - 1) * values.col(u - 1);
    }

    std::vector<std::string> labels(p);
    for (int j = 0; j < p; ++j) labels[j] = "Y" + std::to_string(j + 1);
    return Dataset(std::move(values), std::move(labels));
}

}  // namespace hdl
