#include <gtest/gtest.h>

#include <complex>
#include <random>

#include "cmwave/numerics.hpp"

using namespace cmwave;

namespace {

std::vector<cplx> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> v(n);
    for (auto& x : v) x = {g(rng), g(rng)};
    return v;
}

double norm2(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

}  // namespace

TEST(DftMatrix, SizeOneIsIdentity) {
    const auto f = dft_matrix(1);
    ASSERT_EQ(f.rows(), 1u);
    EXPECT_NEAR(std::abs(f(0, 0) - cplx{1.0, 0.0}), 0.0, 1e-15);
}

TEST(DftMatrix, SizeTwoMatchesDefinition) {
    const auto f = dft_matrix(2);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(f(0, 0) - cplx{s, 0.0}), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(f(0, 1) - cplx{s, 0.0}), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(f(1, 0) - cplx{s, 0.0}), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(f(1, 1) - cplx{-s, 0.0}), 0.0, 1e-15);
}

TEST(DftMatrix, UnitVectorSpreadsToConstantMagnitude) {
    const auto f = dft_matrix(8);
    std::vector<cplx> e0(8, cplx{0.0, 0.0});
    e0[0] = 1.0;
    const auto y = f.apply(e0);
    for (const auto& v : y) {
        EXPECT_NEAR(std::abs(v), 1.0 / std::sqrt(8.0), 1e-12);
    }
}

TEST(DftMatrix, ForwardTimesInverseIsIdentity) {
    for (const std::size_t n : {2u, 3u, 8u}) {
        const auto prod = dft_matrix(n) * dft_matrix(n, true);
        const auto ident = ComplexMatrix::identity(n);
        EXPECT_LT(prod.max_abs_diff(ident), 1e-12);
    }
}

TEST(DftMatrix, ZeroSizeRejected) { EXPECT_THROW(dft_matrix(0), std::invalid_argument); }

TEST(DftMatrix, UnitarityOnRandomVectors) {
    std::mt19937_64 rng(101);
    for (const std::size_t n : {2u, 3u, 8u, 16u}) {
        const auto f = dft_matrix(n);
        for (int rep = 0; rep < 20; ++rep) {
            const auto x = random_vector(rng, n);
            const double ratio = norm2(f.apply(x)) / norm2(x);
            EXPECT_GE(ratio, 1.0 - 1e-10);
            EXPECT_LE(ratio, 1.0 + 1e-10);
        }
    }
}

TEST(DftMatrix, ParsevalRoundTrip) {
    std::mt19937_64 rng(202);
    const auto fwd = dft_matrix(16);
    const auto inv = dft_matrix(16, true);
    const auto x = random_vector(rng, 16);
    const auto back = inv.apply(fwd.apply(x));
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(std::abs(back[i] - x[i]), 0.0, 1e-10);
    }
}

TEST(HermitianEigen, IdentityHasUnitEigenvaluesFullRank) {
    const auto result = hermitian_eigen(ComplexMatrix::identity(3), 1e-10);
    ASSERT_EQ(result.eigenvalues.size(), 3u);
    for (const double v : result.eigenvalues) EXPECT_NEAR(v, 1.0, 1e-12);
    EXPECT_EQ(result.rank, 3u);
}

TEST(HermitianEigen, ZeroMatrixHasRankZero) {
    const ComplexMatrix z(3, 3);
    const auto result = hermitian_eigen(z, 1e-10);
    EXPECT_EQ(result.rank, 0u);
}

TEST(HermitianEigen, RankOneOuterProduct) {
    // v v^H for a unit vector has eigenvalues (1, 0, 0); the nonzero one equals
    // the trace, which pins the characteristic polynomial at these sizes.
    std::mt19937_64 rng(7);
    auto v = random_vector(rng, 3);
    const double n = norm2(v);
    for (auto& x : v) x /= n;
    ComplexMatrix a(3, 3);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) a(r, c) = v[r] * std::conj(v[c]);
    const auto result = hermitian_eigen(a, 1e-10);
    EXPECT_NEAR(result.eigenvalues[0], 1.0, 1e-10);
    EXPECT_NEAR(result.eigenvalues[1], 0.0, 1e-10);
    EXPECT_NEAR(result.eigenvalues[2], 0.0, 1e-10);
    EXPECT_EQ(result.rank, 1u);
}

TEST(HermitianEigen, EigenvalueSumMatchesTrace) {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        // C^H C is Hermitian PSD.
        ComplexMatrix c(4, 4);
        std::normal_distribution<double> g(0.0, 1.0);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t k = 0; k < 4; ++k) c(r, k) = {g(rng), g(rng)};
        const auto a = c.adjoint() * c;
        const auto result = hermitian_eigen(a, 1e-10);
        double sum = 0.0;
        for (const double v : result.eigenvalues) sum += v;
        const double trace = a.trace().real();
        EXPECT_NEAR(sum, trace, 1e-8 * std::max(1.0, std::abs(trace)));
        for (std::size_t i = 1; i < result.eigenvalues.size(); ++i) {
            EXPECT_GE(result.eigenvalues[i - 1], result.eigenvalues[i]);
        }
    }
}

TEST(HermitianEigen, ProjectorRankConsistency) {
    // rank(A) + rank(I - A) = n for a Hermitian projector A.
    std::mt19937_64 rng(13);
    const std::size_t n = 5;
    const std::size_t k = 2;
    // Orthonormalize k random vectors.
    std::vector<std::vector<cplx>> basis;
    while (basis.size() < k) {
        auto v = random_vector(rng, n);
        for (const auto& b : basis) {
            cplx proj{0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) proj += std::conj(b[i]) * v[i];
            for (std::size_t i = 0; i < n; ++i) v[i] -= proj * b[i];
        }
        const double len = norm2(v);
        if (len < 1e-6) continue;
        for (auto& x : v) x /= len;
        basis.push_back(v);
    }
    ComplexMatrix a(n, n);
    for (const auto& b : basis)
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) a(r, c) += b[r] * std::conj(b[c]);
    ComplexMatrix complement(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            complement(r, c) = (r == c ? cplx{1.0, 0.0} : cplx{0.0, 0.0}) - a(r, c);
    const auto ra = hermitian_eigen(a, 1e-10).rank;
    const auto rc = hermitian_eigen(complement, 1e-10).rank;
    EXPECT_EQ(ra + rc, n);
}

TEST(HermitianEigen, RejectsBadInput) {
    EXPECT_THROW(hermitian_eigen(ComplexMatrix(2, 3), 1e-10), std::invalid_argument);
    ComplexMatrix notherm(2, 2);
    notherm(0, 1) = {1.0, 0.0};
    notherm(1, 0) = {0.5, 0.0};
    EXPECT_THROW(hermitian_eigen(notherm, 1e-10), std::invalid_argument);
}

TEST(CircularShift, ZeroDelayIsIdentity) {
    const auto p = circular_shift_matrix(4, 0);
    EXPECT_LT(p.max_abs_diff(ComplexMatrix::identity(4)), 1e-15);
}

TEST(CircularShift, ForwardShiftMatchesDefinition) {
    const auto p = circular_shift_matrix(4, 1);
    const std::vector<cplx> x{{1, 0}, {2, 0}, {3, 0}, {4, 0}};
    const auto y = p.apply(x);
    EXPECT_EQ(y[0], (cplx{4, 0}));
    EXPECT_EQ(y[1], (cplx{1, 0}));
    EXPECT_EQ(y[2], (cplx{2, 0}));
    EXPECT_EQ(y[3], (cplx{3, 0}));
}

TEST(CircularShift, ShiftsComposeToIdentity) {
    for (std::size_t l = 1; l < 6; ++l) {
        const auto prod = circular_shift_matrix(6, l) * circular_shift_matrix(6, 6 - l);
        EXPECT_EQ(prod.max_abs_diff(ComplexMatrix::identity(6)), 0.0);
    }
}

TEST(CircularShift, PermutationIsOrthogonal) {
    const auto p = circular_shift_matrix(5, 2);
    const auto prod = p.adjoint() * p;
    EXPECT_EQ(prod.max_abs_diff(ComplexMatrix::identity(5)), 0.0);
}

TEST(CircularShift, DelayOutOfRangeRejected) {
    EXPECT_THROW(circular_shift_matrix(4, 4), std::invalid_argument);
}
