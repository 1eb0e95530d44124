#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace pairsketch {

/// Row-major dense real matrix. Immutable after construction; every entry is
/// finite and both dimensions are positive.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values))
    {
        if (rows_ == 0 || cols_ == 0) {
            throw dimension_error("DenseMatrix: dimensions must be positive");
        }
        if (values_.size() != rows_ * cols_) {
            throw dimension_error("DenseMatrix: expected " + std::to_string(rows_ * cols_) +
                                  " values, got " + std::to_string(values_.size()));
        }
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("DenseMatrix: non-finite entry");
            }
        }
    }

    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : DenseMatrix(from_rows(rows))
    {
    }

    static DenseMatrix zeros(std::size_t rows, std::size_t cols)
    {
        return DenseMatrix(rows, cols, std::vector<double>(rows * cols, 0.0));
    }

    static DenseMatrix identity(std::size_t n)
    {
        std::vector<double> v(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
        return DenseMatrix(n, n, std::move(v));
    }

    static DenseMatrix diagonal(std::span<const double> d)
    {
        const std::size_t n = d.size();
        std::vector<double> v(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) v[i * n + i] = d[i];
        return DenseMatrix(n, n, std::move(v));
    }

    /// Entries drawn independently from U[0, 1) on the counter stream `seed`
    /// (entry index = row-major position).
    static DenseMatrix uniform(std::size_t rows, std::size_t cols, std::uint64_t seed)
    {
        std::vector<double> v(rows * cols);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng::uniform(seed, i);
        return DenseMatrix(rows, cols, std::move(v));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> row(std::size_t i) const noexcept
    {
        return std::span<const double>(values_).subspan(i * cols_, cols_);
    }

    bool operator==(const DenseMatrix&) const = default;

private:
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows)
    {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.begin()->size();
        std::vector<double> v;
        v.reserve(r * c);
        for (const auto& row : rows) {
            if (row.size() != c) throw dimension_error("DenseMatrix: ragged initializer");
            v.insert(v.end(), row.begin(), row.end());
        }
        return DenseMatrix(r, c, std::move(v));
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

inline DenseMatrix transpose(const DenseMatrix& a)
{
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) v[j * a.rows() + i] = a(i, j);
    return DenseMatrix(a.cols(), a.rows(), std::move(v));
}

/// Exact product AB. Each entry is summed over the inner index in ascending
/// order.
inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.cols() != b.rows()) {
        throw dimension_error("multiply: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                              " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    const std::size_t m = a.rows(), n = a.cols(), p = b.cols();
    std::vector<double> out(m * p, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double* dst = out.data() + i * p;
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            const auto brow = b.row(k);
            for (std::size_t j = 0; j < p; ++j) dst[j] += aik * brow[j];
        }
    }
    return DenseMatrix(m, p, std::move(out));
}

inline DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw dimension_error("subtract: shape mismatch");
    std::vector<double> v(a.size());
    const auto av = a.values(), bv = b.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] - bv[i];
    return DenseMatrix(a.rows(), a.cols(), std::move(v));
}

inline double squared_frobenius_norm(std::span<const double> values) noexcept
{
    double s = 0.0;
    for (double v : values) s += v * v;
    return s;
}

inline double squared_frobenius_norm(const DenseMatrix& a) noexcept
{
    return squared_frobenius_norm(a.values());
}

inline double frobenius_norm(const DenseMatrix& a) noexcept { return std::sqrt(squared_frobenius_norm(a)); }

/// Squared Frobenius distance without materialising the difference.
inline double squared_frobenius_distance(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw dimension_error("distance: shape mismatch");
    const auto av = a.values(), bv = b.values();
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
        const double d = av[i] - bv[i];
        s += d * d;
    }
    return s;
}

namespace detail {

// Gram matrix of the smaller side: A A^T when rows <= cols, A^T A otherwise.
inline std::vector<double> small_gram(const DenseMatrix& a, std::size_t& dim)
{
    const std::size_t m = a.rows(), n = a.cols();
    if (m <= n) {
        dim = m;
        std::vector<double> g(m * m);
        for (std::size_t i = 0; i < m; ++i) {
            const auto ri = a.row(i);
            for (std::size_t j = i; j < m; ++j) {
                const auto rj = a.row(j);
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += ri[k] * rj[k];
                g[i * m + j] = s;
                g[j * m + i] = s;
            }
        }
        return g;
    }
    dim = n;
    std::vector<double> g(n * n, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const auto rk = a.row(k);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = rk[i];
            if (v == 0.0) continue;
            for (std::size_t j = i; j < n; ++j) g[i * n + j] += v * rk[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) g[i * n + j] = g[j * n + i];
    return g;
}

struct PowerOutcome {
    double eigenvalue;
    bool converged;
};

// Largest eigenvalue of a small symmetric matrix h (b x b) by cyclic Jacobi
// rotations.
inline double jacobi_top_eigenvalue(std::vector<double> h, std::size_t b)
{
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            diag += h[i * b + i] * h[i * b + i];
            for (std::size_t j = i + 1; j < b; ++j) off += h[i * b + j] * h[i * b + j];
        }
        if (off <= 1e-32 * diag || off == 0.0) break;
        for (std::size_t p = 0; p < b; ++p) {
            for (std::size_t q = p + 1; q < b; ++q) {
                const double apq = h[p * b + q];
                if (apq == 0.0) continue;
                const double theta = (h[q * b + q] - h[p * b + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
                for (std::size_t k = 0; k < b; ++k) { // columns p, q
                    const double hkp = h[k * b + p], hkq = h[k * b + q];
                    h[k * b + p] = c * hkp - sn * hkq;
                    h[k * b + q] = sn * hkp + c * hkq;
                }
                for (std::size_t k = 0; k < b; ++k) { // rows p, q
                    const double hpk = h[p * b + k], hqk = h[q * b + k];
                    h[p * b + k] = c * hpk - sn * hqk;
                    h[q * b + k] = sn * hpk + c * hqk;
                }
            }
        }
    }
    double top = h[0];
    for (std::size_t i = 1; i < b; ++i) top = std::max(top, h[i * b + i]);
    return top;
}

// Modified Gram-Schmidt on the b columns of q (dim x b, column-major).
// Columns that vanish against the earlier ones are set to zero.
inline void orthonormalize(std::vector<double>& q, std::size_t dim, std::size_t b)
{
    for (std::size_t j = 0; j < b; ++j) {
        double* qj = q.data() + j * dim;
        double before = 0.0;
        for (std::size_t i = 0; i < dim; ++i) before += qj[i] * qj[i];
        for (std::size_t k = 0; k < j; ++k) {
            const double* qk = q.data() + k * dim;
            double d = 0.0;
            for (std::size_t i = 0; i < dim; ++i) d += qk[i] * qj[i];
            for (std::size_t i = 0; i < dim; ++i) qj[i] -= d * qk[i];
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) nrm += qj[i] * qj[i];
        if (!(nrm > 1e-28 * before) || nrm == 0.0) {
            std::fill(qj, qj + dim, 0.0);
            continue;
        }
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < dim; ++i) qj[i] /= nrm;
    }
}

// Block power iteration on the symmetric PSD matrix g (dim x dim) from the
// column-major start block q. Each step forms Z = G Q, takes the top
// eigenvalue of the Rayleigh-Ritz matrix Q^T Z, and sets Q = orth(Z). Stops
// when that value changes by at most tol relative.
inline PowerOutcome power_iterate(const std::vector<double>& g, std::size_t dim, std::vector<double> q,
                                  std::size_t b, double tol, std::size_t max_iters)
{
    std::vector<double> z(dim * b), h(b * b);
    double prev = 0.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        for (std::size_t j = 0; j < b; ++j) {
            const double* qj = q.data() + j * dim;
            double* zj = z.data() + j * dim;
            for (std::size_t i = 0; i < dim; ++i) {
                const double* gi = g.data() + i * dim;
                double s = 0.0;
                for (std::size_t k = 0; k < dim; ++k) s += gi[k] * qj[k];
                zj[i] = s;
            }
        }
        for (std::size_t r = 0; r < b; ++r)
            for (std::size_t c = r; c < b; ++c) {
                double s = 0.0;
                for (std::size_t i = 0; i < dim; ++i) s += q[r * dim + i] * z[c * dim + i];
                h[r * b + c] = s;
                h[c * b + r] = s;
            }
        const double rq = jacobi_top_eigenvalue(h, b);
        q = z;
        orthonormalize(q, dim, b);
        if (rq == 0.0 && std::all_of(q.begin(), q.end(), [](double x) { return x == 0.0; })) return {0.0, true};
        if (it > 0 && std::abs(rq - prev) <= tol * std::abs(rq)) return {rq, true};
        prev = rq;
    }
    return {prev, false};
}

inline std::vector<double> start_block(std::size_t dim, std::size_t b, std::uint64_t seed)
{
    std::vector<double> q(dim * b);
    for (std::size_t i = 0; i < dim; ++i) q[i] = 1.0;
    for (std::size_t j = 1; j < b; ++j)
        for (std::size_t i = 0; i < dim; ++i) q[j * dim + i] = rng::uniform(rng::derive(seed, j), i) - 0.5;
    orthonormalize(q, dim, b);
    return q;
}

} // namespace detail

/// Largest singular value of A by block power iteration on the smaller Gram
/// matrix G.
///
/// The start block is the normalised all-ones vector followed by three fixed
/// pseudo-random vectors (rng::uniform(derive(0x5eed, j), i) - 0.5),
/// orthonormalised. Iteration stops when the top Rayleigh-Ritz value changes
/// by at most `tol` relative. The block makes the rate depend on the fifth
/// eigenvalue of G rather than the second, so a nearly repeated top singular
/// value (common for symmetric indefinite matrices) does not stall it.
///
/// Since the top eigenvalue of the r x r matrix G is at least ||G||_F / sqrt(r),
/// a converged value below that bound means the start block missed the
/// dominant eigenvector; the iteration is then repeated from a second fixed
/// block (seed 0x5eed + 1).
///
/// Throws numeric_error if the iteration does not converge within max_iters.
inline double spectral_norm(const DenseMatrix& a, double tol = 1e-10, std::size_t max_iters = 10000)
{
    if (!(tol > 0.0)) throw std::invalid_argument("spectral_norm: tol must be positive");
    if (max_iters == 0) throw std::invalid_argument("spectral_norm: max_iters must be positive");

    std::size_t dim = 0;
    const auto g = detail::small_gram(a, dim);
    const double gram_frob = std::sqrt(squared_frobenius_norm(g));
    if (gram_frob == 0.0) return 0.0;
    const double lower = gram_frob / std::sqrt(static_cast<double>(dim));
    const std::size_t b = std::min<std::size_t>(dim, 4);

    auto outcome = detail::power_iterate(g, dim, detail::start_block(dim, b, 0x5eed), b, tol, max_iters);
    if (outcome.converged && outcome.eigenvalue < lower * (1.0 - 1e-8)) {
        const auto retry = detail::power_iterate(g, dim, detail::start_block(dim, b, 0x5eed + 1), b, tol, max_iters);
        if (!retry.converged || retry.eigenvalue > outcome.eigenvalue) outcome = retry;
    }
    if (!outcome.converged) {
        throw numeric_error("spectral_norm: power iteration did not converge in " + std::to_string(max_iters) +
                            " iterations");
    }
    return std::sqrt(std::max(outcome.eigenvalue, 0.0));
}

/// A(:, group) * B(group, :), summed over the group in its listed order.
/// Indices are 0-based.
inline DenseMatrix block_product(const DenseMatrix& a, const DenseMatrix& b, std::span<const std::size_t> group)
{
    if (a.cols() != b.rows()) throw dimension_error("block_product: inner dimensions differ");
    if (group.empty()) throw std::invalid_argument("block_product: empty group");
    for (std::size_t k : group) {
        if (k >= a.cols()) throw std::out_of_range("block_product: index " + std::to_string(k) + " out of range");
    }
    const std::size_t m = a.rows(), p = b.cols();
    std::vector<double> out(m * p, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double* dst = out.data() + i * p;
        for (std::size_t k : group) {
            const double aik = a(i, k);
            const auto brow = b.row(k);
            for (std::size_t j = 0; j < p; ++j) dst[j] += aik * brow[j];
        }
    }
    return DenseMatrix(m, p, std::move(out));
}

namespace detail {

// dst += scale * (A(:, group) B(group, :)). The block entry is formed first
// (group order) and scaled afterwards, so scale == 1 adds the block exactly.
inline void add_scaled_block(std::vector<double>& dst, const DenseMatrix& a, const DenseMatrix& b,
                             std::span<const std::size_t> group, double scale)
{
    const std::size_t m = a.rows(), p = b.cols();
    std::vector<double> tmp(p);
    for (std::size_t i = 0; i < m; ++i) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (std::size_t k : group) {
            const double aik = a(i, k);
            const auto brow = b.row(k);
            for (std::size_t j = 0; j < p; ++j) tmp[j] += aik * brow[j];
        }
        double* d = dst.data() + i * p;
        for (std::size_t j = 0; j < p; ++j) d[j] += scale * tmp[j];
    }
}

} // namespace detail

} // namespace pairsketch
