#include "hsr/errors.hpp"
#include "hsr/matcore.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace hsr;
using namespace hsr::test;

TEST(SymEig, DiagonalInput) {
    Matrix a(2, 2);
    a << 3, 0, 0, 1;
    const auto eig = sym_eig(a);
    EXPECT_DOUBLE_EQ(eig.values(0), 3.0);
    EXPECT_DOUBLE_EQ(eig.values(1), 1.0);
    EXPECT_NEAR(std::abs(eig.vectors(0, 0)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(eig.vectors(1, 1)), 1.0, 1e-15);
}

TEST(SymEig, TwoByTwoClassic) {
    Matrix a(2, 2);
    a << 2, 1, 1, 2;
    const auto eig = sym_eig(a);
    EXPECT_NEAR(eig.values(0), 3.0, 1e-14);
    EXPECT_NEAR(eig.values(1), 1.0, 1e-14);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(eig.vectors(0, 0)), s, 1e-14);
    EXPECT_NEAR(eig.vectors(0, 0) * eig.vectors(1, 0), 0.5, 1e-14);
    EXPECT_NEAR(eig.vectors(0, 1) * eig.vectors(1, 1), -0.5, 1e-14);
}

TEST(SymEig, ReconstructionAndOrthogonality) {
    for (Index n : {1, 2, 8, 17, 64}) {
        const Matrix a = random_symmetric(n, 100 + n);
        const auto eig = sym_eig(a);
        const Matrix rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
        EXPECT_LE((rebuilt - a).norm(), 1e-10 * a.norm()) << n;
        EXPECT_LE((eig.vectors.transpose() * eig.vectors - Matrix::Identity(n, n)).norm(), 1e-10) << n;
        for (Index i = 1; i < n; ++i) {
            EXPECT_GE(eig.values(i - 1), eig.values(i));
        }
    }
}

TEST(SymEig, RejectsBadInput) {
    EXPECT_THROW(sym_eig(Matrix::Zero(2, 3)), DimensionError);
    Matrix asym(2, 2);
    asym << 1, 2, 0, 1;
    EXPECT_THROW(sym_eig(asym), DomainError);
    EXPECT_THROW(sym_eig(Matrix(0, 0)), DimensionError);
    Matrix nan = Matrix::Identity(2, 2);
    nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(sym_eig(nan), DomainError);
}

TEST(SpdPower, DiagonalSquareRoot) {
    Matrix a(2, 2);
    a << 4, 0, 0, 9;
    const Matrix r = spd_power(a, 0.5);
    EXPECT_NEAR(r(0, 0), 2.0, 1e-14);
    EXPECT_NEAR(r(1, 1), 3.0, 1e-14);
    EXPECT_NEAR(r(0, 1), 0.0, 1e-14);
}

TEST(SpdPower, ZerothPowerIsIdentity) {
    const Matrix a = random_spd(6, 3);
    EXPECT_LE((spd_power(a, 0.0) - Matrix::Identity(6, 6)).norm(), 1e-12);
}

TEST(SpdPower, InverseSquareRootOfClassic) {
    Matrix a(2, 2);
    a << 2, 1, 1, 2;
    // Eigenpairs (3, (1,1)/√2) and (1, (1,−1)/√2).
    Matrix u(2, 2);
    u << 1, 1, 1, -1;
    u /= std::sqrt(2.0);
    Vector d(2);
    d << 1.0 / std::sqrt(3.0), 1.0;
    const Matrix expected = u * d.asDiagonal() * u.transpose();
    EXPECT_LE((spd_power(a, -0.5) - expected).norm(), 1e-14);
}

TEST(SpdPower, GroupLaw) {
    const Matrix a = random_spd(7, 11);
    EXPECT_LE(rel_err(spd_power(a, 1.0), a), 1e-12);
    EXPECT_LE(rel_err(spd_power(spd_power(a, 0.5), 2.0), a), 1e-8);
    for (double p : {-0.5, 0.5, 1.0}) {
        for (double q : {-0.5, 0.5, 1.0}) {
            EXPECT_LE(rel_err(spd_power(a, p) * spd_power(a, q), spd_power(a, p + q)), 1e-7) << p << " " << q;
        }
    }
}

TEST(SpdPower, SingularInputThrows) {
    Matrix a(2, 2);
    a << 1, 0, 0, 0;
    EXPECT_THROW(spd_power(a, 0.5), DomainError);
    a(1, 1) = -1.0;
    EXPECT_THROW(spd_power(a, 0.5), DomainError);
}

TEST(Svd, DiagonalWithZero) {
    Matrix x(2, 2);
    x << 5, 0, 0, 0;
    const Vector s = singular_values(x);
    EXPECT_DOUBLE_EQ(s(0), 5.0);
    EXPECT_DOUBLE_EQ(s(1), 0.0);
}

TEST(Svd, UnitRankOne) {
    const Vector u = random_matrix(5, 1, 1).col(0).normalized();
    const Vector v = random_matrix(7, 1, 2).col(0).normalized();
    const Vector s = singular_values(u * v.transpose());
    EXPECT_NEAR(s(0), 1.0, 1e-14);
    for (Index i = 1; i < s.size(); ++i) {
        EXPECT_NEAR(s(i), 0.0, 1e-14);
    }
}

TEST(Svd, ReconstructsAndMatchesGramEigenvalues) {
    for (auto [m, n] : {std::pair<Index, Index>{6, 10}, {10, 6}, {1, 5}, {9, 9}}) {
        const Matrix x = random_matrix(m, n, 31 * m + n);
        const Svd d = svd(x);
        EXPECT_LE((d.u * d.sigma.asDiagonal() * d.v.transpose() - x).norm(), 1e-12 * x.norm());
        const Vector gram = sym_eigenvalues(m <= n ? Matrix(x * x.transpose()) : Matrix(x.transpose() * x));
        for (Index i = 0; i < d.sigma.size(); ++i) {
            EXPECT_LE(rel_err(d.sigma(i) * d.sigma(i), gram(i)), 1e-9);
            if (i > 0) {
                EXPECT_GE(d.sigma(i - 1), d.sigma(i));
            }
        }
    }
}

TEST(NuclearNorm, ClosedForms) {
    Matrix x(2, 2);
    x << 3, 0, 0, 4;
    EXPECT_NEAR(nuclear_norm(x), 7.0, 1e-14);
    EXPECT_EQ(nuclear_norm(Matrix::Zero(3, 4)), 0.0);
    const Matrix r = random_matrix(5, 5, 9);
    EXPECT_LE(rel_err(nuclear_norm(r), jacobi_singular_values(r).sum()), 1e-12);
}

TEST(LambdaMax, SmallCases) {
    Matrix d(2, 2);
    d << 7, 0, 0, 2;
    EXPECT_NEAR(lambda_max(d), 7.0, 1e-9);
    EXPECT_NEAR(lambda_max(Matrix::Identity(5, 5)), 1.0, 1e-12);
}

TEST(LambdaMax, AgreesWithDenseEigensolver) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix b = random_matrix(12, 20, seed);
        const Matrix a = b * b.transpose();
        const double expected = sym_eigenvalues(a)(0);
        const double got = lambda_max(a);
        EXPECT_LE(rel_err(got, expected), 1e-8);
        const Vector probe = random_matrix(12, 1, seed + 50).col(0);
        EXPECT_GE(got * (1 + 1e-12), probe.dot(a * probe) / probe.squaredNorm());
    }
}

TEST(PowerIteration, ColdStartEscapesNonDominantOnesVector) {
    // The all-ones vector is an eigenvector for the smaller eigenvalue 1.
    Matrix a(2, 2);
    a << 2, -1, -1, 2;
    EXPECT_NEAR(lambda_max(a), 3.0, 1e-9);
}

TEST(PowerIteration, IterationCapThrows) {
    Matrix a(2, 2);
    a << 1.0, 0.0, 0.0, 0.999999;
    Vector start(2);
    start << 1.0, 1.0;
    const auto apply = [&](const Vector& v) -> Vector { return a * v; };
    EXPECT_THROW(power_iteration(apply, 2, start, PowerIterationOptions{1e-16, 5}), ConvergenceError);
}

TEST(LambdaMaxGram, BlurDownsampleOperator) {
    // 8×8 image, 3×3 box-like kernel, factor 2, built by hand.
    const int w = 8, factor = 2, lw = 4;
    std::vector<SparseMatrix::Entry> entries;
    for (int li = 0; li < lw; ++li) {
        for (int lj = 0; lj < lw; ++lj) {
            const int ci = factor * li + 1, cj = factor * lj + 1;
            std::vector<std::pair<int, int>> support;
            for (int di = -1; di <= 1; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (ci + di >= 0 && ci + di < w && cj + dj >= 0 && cj + dj < w) {
                        support.emplace_back(ci + di, cj + dj);
                    }
                }
            }
            for (auto [i, j] : support) {
                entries.push_back({i * w + j, li * lw + lj, 1.0 / static_cast<double>(support.size())});
            }
        }
    }
    const SparseMatrix g(w * w, lw * lw, entries);
    const Matrix gd = g.to_dense();
    const double expected = sym_eigenvalues(gd * gd.transpose())(0);
    EXPECT_LE(rel_err(lambda_max_gram(g), expected), 1e-8);
}

TEST(SparseMatrix, CanonicalEntries) {
    const SparseMatrix s(3, 3, {{2, 1, 4.0}, {0, 2, 1.0}, {0, 0, 0.0}, {1, 1, -2.0}});
    ASSERT_EQ(s.nnz(), 3);
    EXPECT_EQ(s.entries()[0], (SparseMatrix::Entry{0, 2, 1.0}));
    EXPECT_EQ(s.entries()[1], (SparseMatrix::Entry{1, 1, -2.0}));
    EXPECT_EQ(s.entries()[2], (SparseMatrix::Entry{2, 1, 4.0}));
    EXPECT_THROW(SparseMatrix(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), DomainError);
    EXPECT_THROW(SparseMatrix(2, 2, {{2, 0, 1.0}}), DimensionError);
    EXPECT_THROW(SparseMatrix(2, 2, {{0, 0, std::numeric_limits<double>::infinity()}}), DomainError);
}

TEST(SparseMatrix, PermuteRows) {
    const Matrix d = random_matrix(4, 3, 5);
    const SparseMatrix s = SparseMatrix::from_dense(d);
    const std::vector<Index> new_of_old{2, 0, 3, 1};
    const Matrix p = s.permute_rows(new_of_old).to_dense();
    for (Index r = 0; r < 4; ++r) {
        EXPECT_EQ(p.row(new_of_old[static_cast<std::size_t>(r)]), d.row(r));
    }
}

TEST(SparseApply, IdentityAndZero) {
    const Matrix x = random_matrix(3, 5, 1);
    EXPECT_EQ(sparse_apply_right(x, SparseMatrix::identity(5)), x);
    EXPECT_EQ(sparse_apply_right_t(x, SparseMatrix::identity(5)), x);
    const SparseMatrix zero(5, 2, {});
    EXPECT_EQ(sparse_apply_right(x, zero), Matrix::Zero(3, 2));
}

TEST(SparseApply, MatchesDenseOracle) {
    Matrix gd = random_matrix(9, 3, 7);
    for (Index i = 0; i < gd.size(); i += 2) {
        gd.data()[i] = 0.0;
    }
    const SparseMatrix g = SparseMatrix::from_dense(gd);
    const Matrix x = random_matrix(4, 9, 8);
    EXPECT_LE(rel_err(sparse_apply_right(x, g), naive_product(x, gd)), 1e-12);
    const Matrix y = random_matrix(4, 3, 9);
    EXPECT_LE(rel_err(sparse_apply_right_t(y, g), naive_product(y, gd.transpose())), 1e-12);
    EXPECT_THROW(sparse_apply_right(y, g), DimensionError);
    EXPECT_THROW(sparse_apply_right_t(x, g), DimensionError);
}
