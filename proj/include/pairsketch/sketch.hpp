#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "distribution.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "partition.hpp"
#include "rng.hpp"

namespace pairsketch {

struct SketchConfig {
    std::size_t c = 1;      // number of draws
    std::uint64_t seed = 0; // master seed; draw i uses rng::uniform(seed, i)
};

struct SketchResult {
    DenseMatrix estimate;
    std::vector<std::size_t> draws;  // group index of each draw, 0-based
    std::vector<std::size_t> counts; // draws per group
};

/// Inverse-CDF categorical sampler over a cumulative array with binary
/// search. Zero-probability groups are never returned.
class CategoricalSampler {
public:
    explicit CategoricalSampler(std::span<const double> probabilities) : cumulative_(probabilities.size())
    {
        if (probabilities.empty()) throw std::invalid_argument("CategoricalSampler: empty distribution");
        double run = 0.0;
        for (std::size_t l = 0; l < probabilities.size(); ++l) {
            run += probabilities[l];
            cumulative_[l] = run;
        }
        if (!(run > 0.0)) throw std::invalid_argument("CategoricalSampler: total probability is zero");
    }

    /// Maps u in [0, 1) to the first group whose cumulative mass exceeds
    /// u * total.
    std::size_t operator()(double u) const noexcept
    {
        const double target = u * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        if (it == cumulative_.end()) {
            // u * total rounded onto the final boundary; take the last group with mass.
            it = std::prev(cumulative_.end());
            while (it != cumulative_.begin() && *std::prev(it) == *it) --it;
        }
        return static_cast<std::size_t>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
};

/// c independent draws from `dist`. Draw i depends only on (seed, i).
inline std::vector<std::size_t> sample_indices(const SamplingDistribution& dist, std::size_t c, std::uint64_t seed)
{
    if (c == 0) throw std::invalid_argument("sample_indices: c must be at least 1");
    const CategoricalSampler sampler(dist.weights());
    std::vector<std::size_t> draws(c);
    for (std::size_t i = 0; i < c; ++i) draws[i] = sampler(rng::uniform(seed, i));
    return draws;
}

inline std::vector<std::size_t> draw_counts(std::span<const std::size_t> draws, std::size_t groups)
{
    std::vector<std::size_t> counts(groups, 0);
    for (std::size_t r : draws) {
        if (r >= groups) throw std::out_of_range("draw index outside the partition");
        ++counts[r];
    }
    return counts;
}

namespace detail {

inline void check_sketch_inputs(const DenseMatrix& a, const DenseMatrix& b, const SamplingDistribution& dist)
{
    check_conformal(a, b, dist.support());
}

// Scale applied to group l's block: (# draws of l) / (c p_l).
inline double contribution_scale(std::size_t count, std::size_t c, double p)
{
    return static_cast<double>(count) / (static_cast<double>(c) * p);
}

} // namespace detail

/// Part of a sketch attributable to group l:
///   (1/c) sum_i [r_i == l] / p_l * A(:, group_l) B(group_l, :).
/// Zero when l was never drawn.
inline DenseMatrix element_contribution(const DenseMatrix& a, const DenseMatrix& b, const SamplingDistribution& dist,
                                        std::span<const std::size_t> draws, std::size_t l)
{
    detail::check_sketch_inputs(a, b, dist);
    const auto& p = dist.support();
    if (l >= p.size()) throw std::out_of_range("element_contribution: group index out of range");
    if (draws.empty()) throw std::invalid_argument("element_contribution: empty draw log");
    const auto count = static_cast<std::size_t>(std::count(draws.begin(), draws.end(), l));
    std::vector<double> out(a.rows() * b.cols(), 0.0);
    if (count > 0) detail::add_scaled_block(out, a, b, p.group(l), detail::contribution_scale(count, draws.size(), dist[l]));
    return DenseMatrix(a.rows(), b.cols(), std::move(out));
}

inline DenseMatrix element_contribution(const DenseMatrix& a, const DenseMatrix& b, const Partition& p,
                                        const SamplingDistribution& dist, std::span<const std::size_t> draws,
                                        std::size_t l)
{
    if (!(dist.support() == p)) throw std::invalid_argument("element_contribution: distribution is not over P");
    return element_contribution(a, b, dist, draws, l);
}

/// Estimate from an existing draw log:
///   S = (1/c) sum_i A(:, g_{r_i}) B(g_{r_i}, :) / p_{r_i},
/// accumulated group by group in ascending group order, so the result equals
/// the sum of element_contribution over all groups bit for bit.
inline DenseMatrix estimate_from_draws(const DenseMatrix& a, const DenseMatrix& b, const SamplingDistribution& dist,
                                       std::span<const std::size_t> draws)
{
    detail::check_sketch_inputs(a, b, dist);
    if (draws.empty()) throw std::invalid_argument("estimate_from_draws: empty draw log");
    const auto& p = dist.support();
    const auto counts = draw_counts(draws, p.size());
    std::vector<double> out(a.rows() * b.cols(), 0.0);
    std::vector<double> part(out.size());
    for (std::size_t l = 0; l < p.size(); ++l) {
        if (counts[l] == 0) continue;
        if (!(dist[l] > 0.0)) throw std::invalid_argument("draw of a zero-probability group");
        std::fill(part.begin(), part.end(), 0.0);
        detail::add_scaled_block(part, a, b, p.group(l), detail::contribution_scale(counts[l], draws.size(), dist[l]));
        for (std::size_t e = 0; e < out.size(); ++e) out[e] += part[e];
    }
    return DenseMatrix(a.rows(), b.cols(), std::move(out));
}

/// Randomised approximation of AB over the partition `dist.support()`.
inline SketchResult sketch(const DenseMatrix& a, const DenseMatrix& b, const SamplingDistribution& dist,
                           const SketchConfig& cfg)
{
    detail::check_sketch_inputs(a, b, dist);
    auto draws = sample_indices(dist, cfg.c, cfg.seed);
    auto counts = draw_counts(draws, dist.size());
    auto estimate = estimate_from_draws(a, b, dist, draws);
    return {std::move(estimate), std::move(draws), std::move(counts)};
}

inline SketchResult sketch(const DenseMatrix& a, const DenseMatrix& b, const Partition& p,
                           const SamplingDistribution& dist, const SketchConfig& cfg)
{
    if (!(dist.support() == p)) throw std::invalid_argument("sketch: distribution is not over the given partition");
    return sketch(a, b, dist, cfg);
}

struct PairwisePlan {
    SamplingDistribution finest;     // optimal over finest(n)
    SamplingDistribution aggregated; // summed over the pairs; support() is the pairing
};

/// Optimal finest distribution, pairing by `strategy`, pair probabilities
/// p_pair = p_o(first) + p_o(second).
inline PairwisePlan pairwise_plan(const DenseMatrix& a, const DenseMatrix& b, PairingStrategy strategy)
{
    if (a.cols() < 2) throw std::invalid_argument("pairwise sketch needs n >= 2");
    auto p_o = optimal_distribution(a, b, finest(a.cols()));
    auto pairing = pair_partition(p_o, strategy);
    auto p_pair = aggregate_distribution(p_o, pairing);
    return {std::move(p_o), std::move(p_pair)};
}

/// Sketch over a pairwise partition. Each draw of pair {i, j} adds
/// (a_i b_i^T + a_j b_j^T) / (c p_pair).
inline SketchResult sketch_pairwise(const DenseMatrix& a, const DenseMatrix& b, PairingStrategy strategy,
                                    const SketchConfig& cfg)
{
    const auto plan = pairwise_plan(a, b, strategy);
    return sketch(a, b, plan.aggregated, cfg);
}

} // namespace pairsketch
