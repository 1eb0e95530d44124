#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

// Partitions of the inner index set of a product AB.
//
// Indices are 0-based throughout the C++ API. The JSON form (see
// partition_json.hpp) is an array of arrays of 1-based indices.
namespace pairsketch {

using IndexGroup = std::vector<std::size_t>;

struct PartitionViolation {
    enum class Kind { empty_ground_set, empty_group, out_of_range, overlap, coverage };
    Kind kind;
    std::string message;
};

/// Checks that `groups` is an ordered partition of {0, ..., n-1}: groups are
/// nonempty, indices are in range, no index appears twice and every index is
/// covered. Reports the first violation found in scan order.
inline std::optional<PartitionViolation> validate(std::size_t n, std::span<const IndexGroup> groups)
{
    using K = PartitionViolation::Kind;
    if (n == 0) return PartitionViolation{K::empty_ground_set, "ground set is empty (n = 0)"};
    std::vector<char> seen(n, 0);
    std::size_t covered = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) return PartitionViolation{K::empty_group, "group " + std::to_string(g) + " is empty"};
        for (std::size_t idx : groups[g]) {
            if (idx >= n) {
                return PartitionViolation{K::out_of_range, "index " + std::to_string(idx) + " in group " +
                                                                std::to_string(g) + " is outside [0, " +
                                                                std::to_string(n) + ")"};
            }
            if (seen[idx]) {
                return PartitionViolation{K::overlap,
                                          "index " + std::to_string(idx) + " appears more than once (group " +
                                              std::to_string(g) + ")"};
            }
            seen[idx] = 1;
            ++covered;
        }
    }
    if (covered != n) {
        const auto missing = static_cast<std::size_t>(std::find(seen.begin(), seen.end(), 0) - seen.begin());
        return PartitionViolation{K::coverage, "index " + std::to_string(missing) + " is not covered (" +
                                                   std::to_string(covered) + " of " + std::to_string(n) + ")"};
    }
    return std::nullopt;
}

/// An ordered list of disjoint nonempty index groups covering {0, ..., n-1}.
class Partition {
public:
    Partition(std::size_t n, std::vector<IndexGroup> groups) : n_(n), groups_(std::move(groups))
    {
        if (auto v = validate(n_, groups_)) throw std::invalid_argument("invalid partition: " + v->message);
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return groups_.size(); }
    std::span<const std::size_t> group(std::size_t l) const { return groups_.at(l); }
    const std::vector<IndexGroup>& groups() const noexcept { return groups_; }

    bool is_finest() const noexcept { return groups_.size() == n_ && is_identity_order(); }

    bool operator==(const Partition&) const = default;

private:
    bool is_identity_order() const noexcept
    {
        for (std::size_t i = 0; i < groups_.size(); ++i)
            if (groups_[i].size() != 1 || groups_[i][0] != i) return false;
        return true;
    }

    std::size_t n_;
    std::vector<IndexGroup> groups_;
};

inline Partition finest(std::size_t n)
{
    if (n == 0) throw std::invalid_argument("finest: n must be positive");
    std::vector<IndexGroup> groups(n);
    for (std::size_t i = 0; i < n; ++i) groups[i] = {i};
    return Partition(n, std::move(groups));
}

inline Partition single_group(std::size_t n)
{
    if (n == 0) throw std::invalid_argument("single_group: n must be positive");
    IndexGroup all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return Partition(n, {std::move(all)});
}

/// Builds a partition from user-supplied groups (any coarsening of the
/// finest partition). Throws std::invalid_argument naming the violation.
inline Partition coarsen(std::vector<IndexGroup> groups, std::size_t n) { return Partition(n, std::move(groups)); }

enum class PairingKind { enhanced, random, balanced, simple };

struct PairingStrategy {
    PairingKind kind = PairingKind::enhanced;
    std::uint64_t seed = 0; // used by PairingKind::random only

    bool operator==(const PairingStrategy&) const = default;
};

inline std::string_view to_string(PairingKind k) noexcept
{
    switch (k) {
    case PairingKind::enhanced: return "enhanced";
    case PairingKind::random: return "random";
    case PairingKind::balanced: return "balanced";
    case PairingKind::simple: return "simple";
    }
    return "unknown";
}

inline std::optional<PairingKind> parse_pairing_kind(std::string_view s) noexcept
{
    if (s == "enhanced") return PairingKind::enhanced;
    if (s == "random") return PairingKind::random;
    if (s == "balanced") return PairingKind::balanced;
    if (s == "simple") return PairingKind::simple;
    return std::nullopt;
}

namespace detail {

inline std::vector<std::size_t> ascending_order(std::span<const double> weights)
{
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return weights[a] < weights[b]; });
    return order;
}

// Fisher-Yates driven by the counter stream: step i uses derive(seed, i).
inline std::vector<std::size_t> random_order(std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::uint64_t stream = rng::derive(seed, rng::pairing_stream);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = rng::bounded(rng::derive(stream, i), i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

inline Partition consecutive_pairs(const std::vector<std::size_t>& order)
{
    const std::size_t n = order.size();
    std::vector<IndexGroup> groups;
    groups.reserve((n + 1) / 2);
    for (std::size_t j = 0; j + 1 < n; j += 2) groups.push_back({order[j], order[j + 1]});
    if (n % 2) groups.push_back({order[n - 1]});
    return Partition(n, std::move(groups));
}

} // namespace detail

/// Pairs the n indices according to `strategy`, using the finest-partition
/// probabilities for the sorted strategies.
///
///   enhanced  ascending stable sort, then consecutive pairs
///   balanced  largest with smallest, second largest with second smallest...
///   random    seeded uniform permutation, then consecutive pairs
///   simple    identity order, consecutive pairs
///
/// Odd n leaves one index as a trailing singleton group (for balanced, the
/// median of the sorted order).
inline Partition pair_partition(std::span<const double> finest_probabilities, PairingStrategy strategy)
{
    const std::size_t n = finest_probabilities.size();
    if (n < 2) throw std::invalid_argument("pair_partition: need at least 2 indices");

    switch (strategy.kind) {
    case PairingKind::enhanced: return detail::consecutive_pairs(detail::ascending_order(finest_probabilities));
    case PairingKind::random: return detail::consecutive_pairs(detail::random_order(n, strategy.seed));
    case PairingKind::simple: {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        return detail::consecutive_pairs(order);
    }
    case PairingKind::balanced: {
        const auto sorted = detail::ascending_order(finest_probabilities);
        std::vector<IndexGroup> groups;
        groups.reserve((n + 1) / 2);
        for (std::size_t j = 0; j < n / 2; ++j) groups.push_back({sorted[n - 1 - j], sorted[j]});
        if (n % 2) groups.push_back({sorted[n / 2]});
        return Partition(n, std::move(groups));
    }
    }
    throw std::invalid_argument("pair_partition: unknown strategy");
}

} // namespace pairsketch
