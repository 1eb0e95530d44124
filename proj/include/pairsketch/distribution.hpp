#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "partition.hpp"

namespace pairsketch {

/// Probabilities over the groups of a partition. Weights are finite,
/// nonnegative and sum to 1 within 1e-12.
class SamplingDistribution {
public:
    static constexpr double sum_tolerance = 1e-12;

    SamplingDistribution(Partition support, std::vector<double> weights)
        : support_(std::move(support)), weights_(std::move(weights))
    {
        if (weights_.size() != support_.size()) {
            throw std::invalid_argument("SamplingDistribution: " + std::to_string(weights_.size()) +
                                        " weights for " + std::to_string(support_.size()) + " groups");
        }
        double sum = 0.0;
        for (double w : weights_) {
            if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("SamplingDistribution: invalid weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > sum_tolerance) {
            throw std::invalid_argument("SamplingDistribution: weights sum to " + std::to_string(sum));
        }
    }

    const Partition& support() const noexcept { return support_; }
    std::span<const double> weights() const noexcept { return weights_; }
    double operator[](std::size_t l) const noexcept { return weights_[l]; }
    std::size_t size() const noexcept { return weights_.size(); }

    bool operator==(const SamplingDistribution&) const = default;

private:
    Partition support_;
    std::vector<double> weights_;
};

namespace detail {

inline void check_conformal(const DenseMatrix& a, const DenseMatrix& b, const Partition& p)
{
    if (a.cols() != b.rows()) throw dimension_error("A.cols != B.rows");
    if (p.n() != a.cols()) {
        throw dimension_error("partition covers " + std::to_string(p.n()) + " indices but A has " +
                              std::to_string(a.cols()) + " columns");
    }
}

// Divides by the fixed-order sum; the caller guarantees sum > 0.
inline std::vector<double> normalized(std::vector<double> w)
{
    double sum = 0.0;
    for (double x : w) sum += x;
    for (double& x : w) x /= sum;
    return w;
}

} // namespace detail

/// ||A(:, group) B(group, :)||_F^2.
inline double element_weight_sq(const DenseMatrix& a, const DenseMatrix& b, std::span<const std::size_t> group)
{
    return squared_frobenius_norm(block_product(a, b, group));
}

/// The element weight ||A(:, group) B(group, :)||_F. Singleton groups use
/// ||A(:, j)|| ||B(j, :)||, which is the same quantity for a rank-1 block.
inline double element_weight(const DenseMatrix& a, const DenseMatrix& b, std::span<const std::size_t> group)
{
    return std::sqrt(element_weight_sq(a, b, group));
}

inline std::vector<double> element_weights(const DenseMatrix& a, const DenseMatrix& b, const Partition& p)
{
    detail::check_conformal(a, b, p);
    std::vector<double> w(p.size());
    if (p.is_finest()) {
        // Column/row norm products: avoids forming n rank-1 blocks.
        std::vector<double> col(a.cols(), 0.0);
        for (std::size_t i = 0; i < a.rows(); ++i) {
            const auto r = a.row(i);
            for (std::size_t j = 0; j < a.cols(); ++j) col[j] += r[j] * r[j];
        }
        for (std::size_t j = 0; j < a.cols(); ++j) {
            w[j] = std::sqrt(col[j]) * std::sqrt(squared_frobenius_norm(b.row(j)));
        }
        return w;
    }
    for (std::size_t l = 0; l < p.size(); ++l) w[l] = element_weight(a, b, p.group(l));
    return w;
}

inline SamplingDistribution uniform_distribution(const Partition& p)
{
    return SamplingDistribution(p, std::vector<double>(p.size(), 1.0 / static_cast<double>(p.size())));
}

/// Probabilities proportional to the element weights: the minimiser of the
/// expected squared Frobenius error for this partition. Groups with zero
/// weight get probability zero. Throws numeric_error when AB has no nonzero
/// block (every weight is zero).
inline SamplingDistribution optimal_distribution(const DenseMatrix& a, const DenseMatrix& b, const Partition& p)
{
    auto w = element_weights(a, b, p);
    if (std::none_of(w.begin(), w.end(), [](double x) { return x > 0.0; })) {
        throw numeric_error("optimal_distribution: all element weights are zero");
    }
    return SamplingDistribution(p, detail::normalized(std::move(w)));
}

/// Group probability = sum of the finest-partition probabilities of its
/// members. `p_finest` must be supported on finest(n).
inline SamplingDistribution aggregate_distribution(const SamplingDistribution& p_finest, const Partition& p)
{
    if (!p_finest.support().is_finest()) {
        throw std::invalid_argument("aggregate_distribution: source is not over the finest partition");
    }
    if (p_finest.support().n() != p.n()) {
        throw std::invalid_argument("aggregate_distribution: source covers " + std::to_string(p_finest.support().n()) +
                                    " indices, partition covers " + std::to_string(p.n()));
    }
    std::vector<double> w(p.size(), 0.0);
    for (std::size_t l = 0; l < p.size(); ++l)
        for (std::size_t idx : p.group(l)) w[l] += p_finest[idx];
    return SamplingDistribution(p, std::move(w));
}

/// Pairs the indices of the finest-partition distribution.
inline Partition pair_partition(const SamplingDistribution& p_finest, PairingStrategy strategy)
{
    if (!p_finest.support().is_finest()) {
        throw std::invalid_argument("pair_partition: distribution is not over the finest partition");
    }
    return pair_partition(p_finest.weights(), strategy);
}

struct DistributionStats {
    double max;
    double mean;
    double min;
};

inline DistributionStats stats(const SamplingDistribution& d)
{
    const auto w = d.weights();
    double sum = 0.0;
    for (double x : w) sum += x;
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    return {*hi, sum / static_cast<double>(w.size()), *lo};
}

} // namespace pairsketch
