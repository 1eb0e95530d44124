#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "distribution.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "partition.hpp"

// Closed-form error expectations and probabilistic bounds for partition
// sketches.
namespace pairsketch {

/// Quantities entering the matrix Bernstein tail bound.
///
///   M  = sum_l w_l                 (w_l the element weight of group l)
///   U1 = max_l w_l / p_l
///   U2 = sum_l w_l^2 / p_l
///
/// Groups with w_l = 0 and p_l = 0 contribute nothing.
struct BoundReport {
    double M = 0.0;
    double U1 = 0.0;
    double U2 = 0.0;
    double ab_spectral = 0.0;
    double ab_frobenius = 0.0;
    std::size_t m_rows = 0;
    std::size_t rho_cols = 0;
};

namespace detail {

// Squared element weights; finest partitions use ||a_j||^2 ||b_j||^2.
inline std::vector<double> element_weights_sq(const DenseMatrix& a, const DenseMatrix& b, const Partition& p)
{
    check_conformal(a, b, p);
    std::vector<double> w(p.size());
    if (p.is_finest() && p.n() > 1) {
        std::vector<double> col(a.cols(), 0.0);
        for (std::size_t i = 0; i < a.rows(); ++i) {
            const auto r = a.row(i);
            for (std::size_t j = 0; j < a.cols(); ++j) col[j] += r[j] * r[j];
        }
        for (std::size_t j = 0; j < a.cols(); ++j) w[j] = col[j] * squared_frobenius_norm(b.row(j));
        return w;
    }
    for (std::size_t l = 0; l < p.size(); ++l) w[l] = element_weight_sq(a, b, p.group(l));
    return w;
}

// Sum of w_l^2 / p_l; throws when a group with weight has zero probability.
inline double inverse_weighted_sum(std::span<const double> weights_sq, const SamplingDistribution& dist)
{
    double s = 0.0;
    for (std::size_t l = 0; l < weights_sq.size(); ++l) {
        if (weights_sq[l] == 0.0) continue;
        if (!(dist[l] > 0.0)) {
            throw std::invalid_argument("group " + std::to_string(l) +
                                        " has nonzero element weight but zero probability");
        }
        s += weights_sq[l] / dist[l];
    }
    return s;
}

// (first - second) / c, clamping cancellation noise at the scale of `first`.
inline double nonnegative_difference(double first, double second, std::size_t c)
{
    const double diff = first - second;
    if (diff < 0.0) {
        if (-diff > 1e-12 * std::max(first, 1.0)) {
            throw numeric_error("expected error evaluated negative beyond rounding: " + std::to_string(diff));
        }
        return 0.0;
    }
    return diff / static_cast<double>(c);
}

} // namespace detail

inline BoundReport bound_report(const DenseMatrix& a, const DenseMatrix& b, const SamplingDistribution& dist,
                                double spectral_tol = 1e-10)
{
    const auto& p = dist.support();
    const auto w = element_weights(a, b, p);
    BoundReport r;
    for (std::size_t l = 0; l < w.size(); ++l) {
        r.M += w[l];
        if (w[l] == 0.0) continue;
        if (!(dist[l] > 0.0)) throw std::invalid_argument("bound_report: weighted group has zero probability");
        r.U1 = std::max(r.U1, w[l] / dist[l]);
        r.U2 += w[l] * w[l] / dist[l];
    }
    const auto ab = multiply(a, b);
    r.ab_spectral = spectral_norm(ab, spectral_tol);
    r.ab_frobenius = frobenius_norm(ab);
    r.m_rows = a.rows();
    r.rho_cols = b.cols();
    return r;
}

/// E ||AB - S||_F^2 = (1/c) sum_l w_l^2 / p_l - ||AB||_F^2 / c.
inline double expected_frobenius_error_sq(const DenseMatrix& a, const DenseMatrix& b, const SamplingDistribution& dist,
                                          std::size_t c)
{
    if (c == 0) throw std::invalid_argument("c must be at least 1");
    const auto wsq = detail::element_weights_sq(a, b, dist.support());
    const double first = detail::inverse_weighted_sum(wsq, dist);
    return detail::nonnegative_difference(first, squared_frobenius_norm(multiply(a, b)), c);
}

inline double expected_frobenius_error_sq(const DenseMatrix& a, const DenseMatrix& b, const Partition& p,
                                          const SamplingDistribution& dist, std::size_t c)
{
    if (!(dist.support() == p)) throw std::invalid_argument("distribution is not over the given partition");
    return expected_frobenius_error_sq(a, b, dist, c);
}

/// Expected squared Frobenius error under the optimal distribution:
/// ((sum_l w_l)^2 - ||AB||_F^2) / c. Zero when AB has no weight at all.
inline double optimal_expected_error(const DenseMatrix& a, const DenseMatrix& b, const Partition& p, std::size_t c)
{
    if (c == 0) throw std::invalid_argument("c must be at least 1");
    const auto w = element_weights(a, b, p);
    double m = 0.0;
    for (double x : w) m += x;
    return detail::nonnegative_difference(m * m, squared_frobenius_norm(multiply(a, b)), c);
}

/// P(||S - AB||_2 > eps) <= (m + rho) exp(-c eps^2 / (2 sigma^2 + eps L)),
/// sigma^2 = ||AB||_2^2 + 2 M ||AB||_2 + U2, L = ||AB||_2 + U1.
/// Not clamped to 1.
inline double bernstein_tail_bound(const BoundReport& r, std::size_t c, double epsilon)
{
    if (!(epsilon > 0.0)) throw std::invalid_argument("bernstein_tail_bound: epsilon must be positive");
    if (c == 0) throw std::invalid_argument("bernstein_tail_bound: c must be at least 1");
    const double s = r.ab_spectral;
    const double sigma_sq = s * s + 2.0 * r.M * s + r.U2;
    const double range = s + r.U1;
    const double dims = static_cast<double>(r.m_rows + r.rho_cols);
    return dims * std::exp(-static_cast<double>(c) * epsilon * epsilon / (2.0 * sigma_sq + epsilon * range));
}

namespace detail {

inline double log_binomial_pmf(std::size_t j, std::size_t n, double log_xi, double log_1m_xi)
{
    const double dn = static_cast<double>(n), dj = static_cast<double>(j);
    return std::lgamma(dn + 1.0) - std::lgamma(dj + 1.0) - std::lgamma(dn - dj + 1.0) + dj * log_xi +
           (dn - dj) * log_1m_xi;
}

// Sum of pmf(j) for j in [lo, hi], term by term from log space.
inline double binomial_mass(std::size_t lo, std::size_t hi, std::size_t n, double xi)
{
    if (xi == 0.0) return lo == 0 ? 1.0 : 0.0;
    if (xi == 1.0) return hi >= n && lo <= n ? 1.0 : 0.0;
    const double lx = std::log(xi), l1 = std::log1p(-xi);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += std::exp(log_binomial_pmf(j, n, lx, l1));
    return std::clamp(s, 0.0, 1.0);
}

} // namespace detail

/// F(s; N, xi) = P(X <= s) for X ~ Binomial(N, xi).
inline double binomial_cdf(long long s, std::size_t trials, double xi)
{
    if (!(xi >= 0.0 && xi <= 1.0)) throw std::invalid_argument("binomial_cdf: xi outside [0, 1]");
    if (s < 0) return 0.0;
    if (static_cast<unsigned long long>(s) >= trials) return 1.0;
    return detail::binomial_mass(0, static_cast<std::size_t>(s), trials, xi);
}

/// 1 - F(s; N, xi) summed over the upper tail directly, so tiny tails keep
/// their relative accuracy.
inline double binomial_sf(long long s, std::size_t trials, double xi)
{
    if (!(xi >= 0.0 && xi <= 1.0)) throw std::invalid_argument("binomial_sf: xi outside [0, 1]");
    if (s < 0) return 1.0;
    if (static_cast<unsigned long long>(s) >= trials) return 0.0;
    return detail::binomial_mass(static_cast<std::size_t>(s) + 1, trials, trials, xi);
}

struct ThresholdResult {
    bool feasible = false;
    std::optional<std::size_t> s_c; // present iff feasible
};

/// Smallest s in [2, c] with s >= 100 c (1 - F(s - 2; c - 1, 1/k)).
/// Requires k^(c-1) >= 100 (checked in log space); otherwise the result is
/// flagged infeasible and carries no threshold.
inline ThresholdResult min_draw_threshold(std::size_t c, std::size_t k)
{
    if (c < 2) throw std::invalid_argument("min_draw_threshold: c must be at least 2");
    if (k < 1) throw std::invalid_argument("min_draw_threshold: k must be at least 1");
    const double log_power = static_cast<double>(c - 1) * std::log(static_cast<double>(k));
    if (log_power < std::log(100.0)) return {false, std::nullopt};

    const double xi = 1.0 / static_cast<double>(k);
    const double scale = 100.0 * static_cast<double>(c);
    for (std::size_t s = 2; s < c; ++s) {
        const double tail = binomial_sf(static_cast<long long>(s) - 2, c - 1, xi);
        if (static_cast<double>(s) >= scale * tail) return {true, s};
    }
    // At s = c the tail is k^-(c-1), so the condition is exactly the
    // feasibility check above; evaluating it in floating point could round
    // the boundary case k^(c-1) = 100 the wrong way.
    return {true, c};
}

/// k (s_c - 1) / c * ||A||_2 ||B||_2: with probability at least 0.99 a
/// uniform-probability sketch has spectral norm below this.
inline double uniform_spectral_bound(const DenseMatrix& a, const DenseMatrix& b, std::size_t c, std::size_t k,
                                     std::size_t s_c, double spectral_tol = 1e-10)
{
    if (c == 0) throw std::invalid_argument("uniform_spectral_bound: c must be at least 1");
    if (s_c < 1) throw std::invalid_argument("uniform_spectral_bound: s_c must be at least 1");
    const double factor = static_cast<double>(k) * static_cast<double>(s_c - 1) / static_cast<double>(c);
    return factor * spectral_norm(a, spectral_tol) * spectral_norm(b, spectral_tol);
}

/// Almost-sure and variance bounds for a single draw of the finest sampler
/// (M1, u1) and of a pairing sampler (M2, u2), both under the optimal
/// finest probabilities. With w_j = ||a_j|| ||b_j|| and W = sum_j w_j:
///
///   M1 = 2 max_r (W - w_r)            u1 = 4/W sum_j w_j (W - w_j)^2
///   M2 = 2 max_g (W - s_g)            u2 = 4/W sum_g s_g (W - s_g)^2
///
/// where s_g is the total weight of group g of the pairing.
struct PairingComparators {
    double M1 = 0.0;
    double M2 = 0.0;
    double u1 = 0.0;
    double u2 = 0.0;
};

inline PairingComparators pairing_comparators(const DenseMatrix& a, const DenseMatrix& b, const Partition& pairing)
{
    const auto w = element_weights(a, b, finest(a.cols()));
    if (pairing.n() != w.size()) throw dimension_error("pairing_comparators: pairing does not cover A's columns");
    double total = 0.0;
    for (double x : w) total += x;
    PairingComparators out;
    if (total == 0.0) return out;
    for (double x : w) {
        out.M1 = std::max(out.M1, 2.0 * (total - x));
        out.u1 += x * (total - x) * (total - x);
    }
    for (const auto& g : pairing.groups()) {
        double s = 0.0;
        for (std::size_t idx : g) s += w[idx];
        out.M2 = std::max(out.M2, 2.0 * std::max(total - s, 0.0));
        out.u2 += s * (total - s) * (total - s);
    }
    out.u1 *= 4.0 / total;
    out.u2 *= 4.0 / total;
    return out;
}

/// (m + rho) exp(-c eps^2 / (2 u + eps M)): the Bernstein bound built from a
/// comparator pair (M1, u1) or (M2, u2).
inline double comparator_tail_bound(std::size_t m_plus_rho, std::size_t c, double epsilon, double range,
                                    double variance)
{
    if (!(epsilon > 0.0)) throw std::invalid_argument("comparator_tail_bound: epsilon must be positive");
    return static_cast<double>(m_plus_rho) *
           std::exp(-static_cast<double>(c) * epsilon * epsilon / (2.0 * variance + epsilon * range));
}

struct ExactExpectation {
    DenseMatrix mean_estimate;
    double expected_error_sq;
};

/// Exact E[S] and E||AB - S||_F^2 by enumerating all k^c draw sequences.
/// Limited to k^c <= max_outcomes.
inline ExactExpectation brute_force_expectation(const DenseMatrix& a, const DenseMatrix& b,
                                                const SamplingDistribution& dist, std::size_t c,
                                                std::uint64_t max_outcomes = 1'000'000)
{
    const auto& p = dist.support();
    detail::check_conformal(a, b, p);
    if (c == 0) throw std::invalid_argument("brute_force_expectation: c must be at least 1");
    const std::size_t k = p.size();
    std::uint64_t outcomes = 1;
    for (std::size_t i = 0; i < c; ++i) {
        if (outcomes > max_outcomes / k) throw std::invalid_argument("brute_force_expectation: k^c too large");
        outcomes *= k;
    }

    const auto ab = multiply(a, b);
    const std::size_t cells = ab.size();
    // Y_l = block_l / p_l for groups that can be drawn.
    std::vector<std::vector<double>> scaled(k);
    for (std::size_t l = 0; l < k; ++l) {
        if (!(dist[l] > 0.0)) continue;
        const auto blk = block_product(a, b, p.group(l));
        scaled[l].resize(cells);
        for (std::size_t e = 0; e < cells; ++e) scaled[l][e] = blk.values()[e] / dist[l];
    }

    std::vector<double> mean(cells, 0.0), s(cells);
    std::vector<std::size_t> seq(c, 0);
    double err = 0.0;
    const double inv_c = 1.0 / static_cast<double>(c);
    for (std::uint64_t o = 0; o < outcomes; ++o) {
        double prob = 1.0;
        for (std::size_t r : seq) prob *= dist[r];
        if (prob > 0.0) {
            std::fill(s.begin(), s.end(), 0.0);
            for (std::size_t r : seq)
                for (std::size_t e = 0; e < cells; ++e) s[e] += scaled[r][e];
            double d2 = 0.0;
            for (std::size_t e = 0; e < cells; ++e) {
                s[e] *= inv_c;
                mean[e] += prob * s[e];
                const double d = ab.values()[e] - s[e];
                d2 += d * d;
            }
            err += prob * d2;
        }
        for (std::size_t pos = 0; pos < c; ++pos) { // odometer
            if (++seq[pos] < k) break;
            seq[pos] = 0;
        }
    }
    return {DenseMatrix(ab.rows(), ab.cols(), std::move(mean)), err};
}

} // namespace pairsketch
