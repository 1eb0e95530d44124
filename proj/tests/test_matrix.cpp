#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "test_support.hpp"

using namespace pairsketch;
using pairsketch::support::random_matrix;

namespace {

double eigen_spectral_norm(const DenseMatrix& a)
{
    Eigen::MatrixXd m(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

} // namespace

TEST(DenseMatrix, RejectsBadConstruction)
{
    EXPECT_THROW(DenseMatrix(0, 2, {}), dimension_error);
    EXPECT_THROW(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), dimension_error);
    EXPECT_THROW(DenseMatrix(1, 2, {1.0, std::nan("")}), std::invalid_argument);
    EXPECT_THROW(DenseMatrix(1, 1, {INFINITY}), std::invalid_argument);
    EXPECT_THROW((DenseMatrix{{1.0, 2.0}, {3.0}}), dimension_error);
}

TEST(Multiply, Examples)
{
    EXPECT_EQ(multiply(DenseMatrix::identity(2), DenseMatrix::identity(2)), DenseMatrix::identity(2));
    EXPECT_EQ(multiply(DenseMatrix{{1, 2}, {3, 4}}, DenseMatrix::zeros(2, 2)), DenseMatrix::zeros(2, 2));
    EXPECT_EQ(multiply(DenseMatrix{{1, 2}, {3, 4}}, DenseMatrix{{5}, {6}}), (DenseMatrix{{17}, {39}}));
}

TEST(Multiply, DimensionMismatch)
{
    EXPECT_THROW(multiply(DenseMatrix::zeros(2, 3), DenseMatrix::zeros(2, 3)), dimension_error);
}

TEST(Multiply, MatchesNaiveReference)
{
    std::mt19937_64 gen(11);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_matrix(gen, 1 + t % 5, 2 + t % 7);
        const auto b = random_matrix(gen, a.cols(), 1 + t % 4);
        EXPECT_LE(support::max_abs_diff(multiply(a, b), support::naive_product(a, b)), 1e-14);
    }
}

TEST(FrobeniusNorm, Examples)
{
    EXPECT_EQ(frobenius_norm(DenseMatrix::zeros(3, 3)), 0.0);
    EXPECT_DOUBLE_EQ(frobenius_norm(DenseMatrix::identity(3)), std::sqrt(3.0));
    EXPECT_DOUBLE_EQ(frobenius_norm(DenseMatrix{{3, 4}}), 5.0);
}

TEST(SpectralNorm, Examples)
{
    EXPECT_NEAR(spectral_norm(DenseMatrix::identity(4)), 1.0, 1e-12);
    const std::vector<double> d{1.0, 5.0, 2.0};
    EXPECT_NEAR(spectral_norm(DenseMatrix::diagonal(d)), 5.0, 1e-9);
    EXPECT_NEAR(spectral_norm(DenseMatrix{{0, 2}, {0, 0}}), 2.0, 1e-12);
    EXPECT_EQ(spectral_norm(DenseMatrix::zeros(3, 2)), 0.0);
}

TEST(SpectralNorm, StartVectorOrthogonalToTopSingularVector)
{
    // Top eigenvector (1, -1)/sqrt 2 of the Gram matrix is orthogonal to all-ones.
    EXPECT_NEAR(spectral_norm(DenseMatrix{{1, -1}, {-1, 1}}), 2.0, 1e-9);
    EXPECT_NEAR(spectral_norm(DenseMatrix{{2, -2, 0}, {-2, 2, 0}, {0, 0, 1}}), 4.0, 1e-8);
}

TEST(SpectralNorm, AgreesWithSvdOracle)
{
    std::mt19937_64 gen(3);
    for (int t = 0; t < 40; ++t) {
        const auto a = random_matrix(gen, support::random_size(gen, 1, 12), support::random_size(gen, 1, 12));
        const double ref = eigen_spectral_norm(a);
        EXPECT_NEAR(spectral_norm(a), ref, 1e-8 * ref) << a.rows() << "x" << a.cols();
    }
}

TEST(SpectralNorm, NearlyRepeatedTopSingularValue)
{
    // Symmetric indefinite with eigenvalues +-lambda up to 1e-5 relative:
    // single-vector power iteration would need ~1e6 steps here.
    std::mt19937_64 gen(7);
    const auto q = random_matrix(gen, 30, 30);
    std::vector<double> d(30, 0.0);
    for (std::size_t i = 0; i < 30; ++i) d[i] = 0.1 * static_cast<double>(i % 7);
    d[0] = 4.0;
    d[1] = -4.0 * (1.0 - 1e-5);
    // Orthogonalise q by Gram-Schmidt, then form Q D Q^T.
    std::vector<std::vector<double>> cols(30, std::vector<double>(30));
    for (std::size_t j = 0; j < 30; ++j) {
        for (std::size_t i = 0; i < 30; ++i) cols[j][i] = q(i, j);
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 30; ++i) dot += cols[k][i] * cols[j][i];
            for (std::size_t i = 0; i < 30; ++i) cols[j][i] -= dot * cols[k][i];
        }
        double nrm = 0.0;
        for (double x : cols[j]) nrm += x * x;
        for (double& x : cols[j]) x /= std::sqrt(nrm);
    }
    std::vector<double> m(900, 0.0);
    for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = 0; j < 30; ++j)
            for (std::size_t k = 0; k < 30; ++k) m[i * 30 + j] += cols[k][i] * d[k] * cols[k][j];
    const DenseMatrix a(30, 30, m);
    const double ref = eigen_spectral_norm(a);
    EXPECT_NEAR(spectral_norm(a), ref, 1e-9 * ref);
}

TEST(SpectralNorm, NonConvergenceIsAnError)
{
    std::mt19937_64 gen(5);
    const auto a = random_matrix(gen, 6, 6);
    EXPECT_THROW(spectral_norm(a, 1e-10, 1), numeric_error);
    EXPECT_THROW(spectral_norm(a, 0.0), std::invalid_argument);
}

TEST(BlockProduct, Examples)
{
    const DenseMatrix a{{1, 2}, {3, 4}};
    const DenseMatrix b{{5, 6}, {7, 8}};
    const std::vector<std::size_t> all{0, 1};
    EXPECT_EQ(block_product(a, b, all), multiply(a, b));
    const std::vector<std::size_t> first{0};
    EXPECT_EQ(block_product(DenseMatrix::identity(2), DenseMatrix::identity(2), first), (DenseMatrix{{1, 0}, {0, 0}}));
    const std::vector<std::size_t> second{1};
    EXPECT_EQ(block_product(a, b, second), (DenseMatrix{{14, 16}, {28, 32}}));
}

TEST(BlockProduct, Errors)
{
    const auto a = DenseMatrix::identity(2);
    const std::vector<std::size_t> bad{2};
    const std::vector<std::size_t> none;
    EXPECT_THROW(block_product(a, a, bad), std::out_of_range);
    EXPECT_THROW(block_product(a, a, none), std::invalid_argument);
    const std::vector<std::size_t> ok{0};
    EXPECT_THROW(block_product(a, DenseMatrix::identity(3), ok), dimension_error);
}

TEST(MatrixProperties, BlocksOfAnyPartitionSumToProduct)
{
    std::mt19937_64 gen(17);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = support::random_size(gen, 1, 12);
        const auto a = random_matrix(gen, support::random_size(gen, 1, 6), n);
        const auto b = random_matrix(gen, n, support::random_size(gen, 1, 6));
        const auto p = support::random_partition(gen, n);
        const auto ab = multiply(a, b);
        std::vector<double> sum(ab.size(), 0.0);
        double frob_sum = 0.0;
        for (std::size_t l = 0; l < p.size(); ++l) {
            const auto blk = block_product(a, b, p.group(l));
            frob_sum += frobenius_norm(blk);
            for (std::size_t e = 0; e < sum.size(); ++e) sum[e] += blk.values()[e];
        }
        const DenseMatrix total(ab.rows(), ab.cols(), sum);
        EXPECT_LE(support::max_abs_diff(total, ab), 1e-12 * std::max(1.0, support::max_abs(ab)));
        EXPECT_LE(frobenius_norm(ab), frob_sum + 1e-12);
        EXPECT_LE(spectral_norm(ab), frobenius_norm(ab) * (1.0 + 1e-12) + 1e-14);
    }
}

TEST(MatrixIo, CsvRoundTripIsExact)
{
    std::mt19937_64 gen(23);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_matrix(gen, support::random_size(gen, 1, 8), support::random_size(gen, 1, 8), -1e6, 1e6);
        EXPECT_EQ(io::parse_csv(io::to_csv(a)), a);
        EXPECT_EQ(io::parse_binary(io::to_binary(a)), a);
    }
}

TEST(MatrixIo, CsvParsing)
{
    EXPECT_EQ(io::parse_csv("1, 2.5\n-3,4e1\n\n"), (DenseMatrix{{1, 2.5}, {-3, 40}}));
    EXPECT_EQ(io::parse_csv("1,2\r\n3,4\r\n"), (DenseMatrix{{1, 2}, {3, 4}}));
    EXPECT_THROW(io::parse_csv("1,2\n3\n"), io_error);
    EXPECT_THROW(io::parse_csv("1,x\n"), io_error);
    EXPECT_THROW(io::parse_csv("1,,2\n"), io_error);
    EXPECT_THROW(io::parse_csv(""), io_error);
    EXPECT_THROW(io::parse_csv("nan\n"), io_error);
}

TEST(MatrixIo, BinaryLayout)
{
    const auto bytes = io::to_binary(DenseMatrix{{1.0, -2.0}});
    ASSERT_EQ(bytes.size(), 16u + 16u);
    EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 1); // rows, little-endian
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2); // cols
    // 1.0 = 0x3FF0000000000000, most significant byte last.
    EXPECT_EQ(static_cast<unsigned char>(bytes[16 + 7]), 0x3F);
    EXPECT_EQ(static_cast<unsigned char>(bytes[16 + 6]), 0xF0);
    // -2.0 = 0xC000000000000000.
    EXPECT_EQ(static_cast<unsigned char>(bytes[24 + 7]), 0xC0);
    EXPECT_THROW(io::parse_binary(bytes.substr(0, 20)), io_error);
    EXPECT_THROW(io::parse_binary("short"), io_error);
}
