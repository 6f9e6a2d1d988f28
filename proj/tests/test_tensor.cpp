#include "oracles.hpp"

#include <trstream/tensor.hpp>

#include <gtest/gtest.h>

#include <numeric>

using namespace trstream;

namespace {

DenseTensor iota_tensor(const Shape& s) {
    DenseTensor x(s);
    std::iota(x.values().begin(), x.values().end(), 1.0);
    return x;
}

std::vector<double> row(const DenseTensor& m, std::size_t r) {
    std::vector<double> out;
    for (std::size_t c = 0; c < m.shape()[1]; ++c) out.push_back(m(r, c));
    return out;
}

} // namespace

TEST(LinearIndex, Examples) {
    const Shape s{2, 3, 4};
    EXPECT_EQ(linear_index({1, 1, 1}, s), 1u);
    EXPECT_EQ(linear_index({2, 1, 1}, s), 2u);
    EXPECT_EQ(linear_index({2, 3, 4}, s), 24u);
}

TEST(LinearIndex, BijectiveOverBox) {
    const Shape s{3, 2, 4};
    std::vector<bool> hit(24, false);
    for (const auto& idx : oracle::all_indices(s)) {
        std::vector<std::size_t> one(idx);
        for (auto& v : one) ++v;
        const std::size_t f = linear_index(one, s);
        ASSERT_GE(f, 1u);
        ASSERT_LE(f, 24u);
        EXPECT_FALSE(hit[f - 1]);
        hit[f - 1] = true;
    }
}

TEST(LinearIndex, OutOfRangeNamesMode) {
    try {
        linear_index({1, 4, 1}, Shape{2, 3, 4});
        FAIL();
    } catch (const domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("mode 2"), std::string::npos);
    }
    EXPECT_THROW(linear_index({0, 1, 1}, Shape{2, 3, 4}), domain_error);
}

TEST(Unfold, ExampleRows) {
    const DenseTensor x = iota_tensor({2, 2, 2});
    const DenseTensor c2 = unfold(x, UnfoldKind::classical(2));
    EXPECT_EQ(row(c2, 0), (std::vector<double>{1, 2, 5, 6}));
    EXPECT_EQ(row(c2, 1), (std::vector<double>{3, 4, 7, 8}));
    const DenseTensor m2 = unfold(x, UnfoldKind::mode_n(2));
    EXPECT_EQ(row(m2, 0), (std::vector<double>{1, 5, 2, 6}));
    EXPECT_EQ(row(m2, 1), (std::vector<double>{3, 7, 4, 8}));
}

TEST(Unfold, PrefixOneOfMatrixIsIdentity) {
    const DenseTensor m = iota_tensor({3, 4});
    EXPECT_EQ(unfold(m, UnfoldKind::prefix(1)), m);
}

TEST(Unfold, MatchesElementwiseOracle) {
    std::mt19937_64 gen(7);
    for (const Shape& s : {Shape{3, 4, 2}, Shape{2, 3, 2, 3}, Shape{4, 1, 3, 2, 2}}) {
        const DenseTensor x = oracle::random_tensor(s, gen);
        for (std::size_t n = 1; n <= s.size(); ++n) {
            EXPECT_EQ(oracle::to_matrix(unfold(x, UnfoldKind::classical(n))), oracle::classical(x, n));
            EXPECT_EQ(oracle::to_matrix(unfold(x, UnfoldKind::mode_n(n))), oracle::mode_n(x, n));
            EXPECT_EQ(oracle::to_matrix(unfold(x, UnfoldKind::prefix(n))), oracle::prefix(x, n));
        }
    }
}

TEST(Unfold, InvalidModeThrows) {
    const DenseTensor x = iota_tensor({2, 2});
    EXPECT_THROW(unfold(x, UnfoldKind::classical(0)), domain_error);
    EXPECT_THROW(unfold(x, UnfoldKind::mode_n(3)), domain_error);
}

TEST(Fold, RoundTripAllKinds) {
    const DenseTensor x = iota_tensor({2, 2, 2});
    for (std::size_t n = 1; n <= 3; ++n)
        for (auto kind : {UnfoldKind::classical(n), UnfoldKind::mode_n(n), UnfoldKind::prefix(n)})
            EXPECT_EQ(fold(unfold(x, kind), kind, x.shape()), x);
}

TEST(Fold, RowVector) {
    const DenseTensor m = iota_tensor({1, 5});
    EXPECT_EQ(fold(m, UnfoldKind::classical(1), Shape{1, 5}), m);
}

TEST(Fold, WrongColumnCountThrows) {
    EXPECT_THROW(fold(iota_tensor({2, 3}), UnfoldKind::classical(1), Shape{2, 2, 2}), domain_error);
}

TEST(Unfold, PermutationConsistency) {
    // Column overline(i_1..i_{n-1} i_{n+1}..i_N) of X_(n) equals column
    // overline(i_{n+1}..i_N i_1..i_{n-1}) of X_[n].
    std::mt19937_64 gen(3);
    const Shape s{2, 3, 4, 2};
    const DenseTensor x = oracle::random_tensor(s, gen);
    for (std::size_t n = 1; n <= 4; ++n) {
        const DenseTensor c = unfold(x, UnfoldKind::classical(n));
        const DenseTensor m = unfold(x, UnfoldKind::mode_n(n));
        const auto ccols = oracle::classical_cols(4, n);
        const auto mcols = oracle::cyclic_cols(4, n);
        for (const auto& idx : oracle::all_indices(s)) {
            if (idx[n - 1] != 0) continue;
            const std::size_t jc = oracle::overline(idx, s, ccols), jm = oracle::overline(idx, s, mcols);
            for (std::size_t i = 0; i < s[n - 1]; ++i) EXPECT_EQ(c(i, jc), m(i, jm));
        }
    }
}

TEST(MultiTtm, IdentityFactorsLeaveInputUnchanged) {
    std::mt19937_64 gen(1);
    const DenseTensor x = oracle::random_tensor({2, 3, 4}, gen);
    std::vector<std::pair<std::size_t, Matrix>> f;
    for (std::size_t n = 1; n <= 3; ++n) f.emplace_back(n, Matrix::Identity(x.shape()[n - 1], x.shape()[n - 1]));
    EXPECT_EQ(multi_ttm(x, f), x);
}

TEST(MultiTtm, ScalarCase) {
    const DenseTensor x(Shape{1, 1, 1}, {2.0});
    std::vector<std::pair<std::size_t, Matrix>> f{{1, Matrix::Constant(1, 1, 3.0)},
                                                  {2, Matrix::Constant(1, 1, -1.5)},
                                                  {3, Matrix::Constant(1, 1, 0.5)}};
    EXPECT_DOUBLE_EQ(multi_ttm(x, f)(0, 0, 0), 2.0 * 3.0 * -1.5 * 0.5);
}

TEST(MultiTtm, KroneckerUnfoldingIdentity) {
    std::mt19937_64 gen(11);
    const DenseTensor x = oracle::random_tensor({2, 2, 2}, gen);
    std::vector<Matrix> u;
    std::vector<std::pair<std::size_t, Matrix>> f;
    for (std::size_t n = 1; n <= 3; ++n) {
        u.push_back(oracle::random_matrix(2, 2, gen));
        f.emplace_back(n, u.back());
    }
    const DenseTensor y = multi_ttm(x, f);
    // Y_[1] = U_1 X_[1] (U_3 (x) U_2)^T
    const Matrix expect = u[0] * oracle::mode_n(x, 1) * oracle::kron(u[2], u[1]).transpose();
    EXPECT_LT(oracle::rel_diff(oracle::mode_n(y, 1), expect), 1e-12);
}

TEST(MultiTtm, OrderIndependence) {
    std::mt19937_64 gen(5);
    const DenseTensor x = oracle::random_tensor({3, 2, 4}, gen);
    const Matrix a = oracle::random_matrix(2, 3, gen), b = oracle::random_matrix(5, 2, gen), c = oracle::random_matrix(3, 4, gen);
    const DenseTensor y1 = multi_ttm(x, {{1, a}, {2, b}, {3, c}});
    const DenseTensor y2 = multi_ttm(x, {{3, c}, {1, a}, {2, b}});
    EXPECT_LT(oracle::rel_diff(y1, y2), 1e-14);
}

TEST(MultiTtm, ShapeMismatchAndDuplicateModeThrow) {
    const DenseTensor x = iota_tensor({2, 3});
    EXPECT_THROW(multi_ttm(x, {{1, Matrix::Identity(3, 3)}}), domain_error);
    EXPECT_THROW(multi_ttm(x, {{1, Matrix::Identity(2, 2)}, {1, Matrix::Identity(2, 2)}}), domain_error);
}

TEST(Norm, Examples) {
    DenseTensor ones(Shape{2, 2, 2});
    for (double& v : ones.values()) v = 1.0;
    EXPECT_DOUBLE_EQ(frobenius_norm(ones), std::sqrt(8.0));
    EXPECT_EQ(frobenius_norm(DenseTensor(Shape{3, 3})), 0.0);
    const DenseTensor x = iota_tensor({2, 3, 2});
    for (std::size_t n = 1; n <= 3; ++n)
        EXPECT_DOUBLE_EQ(frobenius_norm(unfold(x, UnfoldKind::mode_n(n))), frobenius_norm(x));
    ComplexDenseTensor z(Shape{2}, {Complex(3, 4), Complex(0, 0)});
    EXPECT_DOUBLE_EQ(frobenius_norm(z), 5.0);
}

TEST(UnfoldingTimes, MatchesExplicitProductOnEveryMode) {
    std::mt19937_64 gen(9);
    for (const Shape& s : {Shape{3, 4, 5}, Shape{5, 2, 3, 2}, Shape{2, 6, 1, 3}, Shape{4, 3}}) {
        const DenseTensor x = oracle::random_tensor(s, gen);
        for (std::size_t n = 1; n <= s.size(); ++n) {
            const Matrix xn = oracle::mode_n(x, n);
            const Matrix b = oracle::random_matrix(xn.cols(), 3, gen);
            EXPECT_LT(oracle::rel_diff(unfolding_times<double>(x, n, b), xn * b), 1e-13) << shape_string(s) << " n=" << n;
        }
    }
}

TEST(UnfoldingTimes, CacheBlockedPathsMatchExplicitProduct) {
    std::mt19937_64 gen(10);
    struct Case {
        Shape s;
        std::size_t mode;
        Eigen::Index cols;
    };
    for (const Case& k : {Case{{4, 8, 1100}, 2, 3}, Case{{300, 2, 20}, 2, 30}, Case{{200, 20, 300}, 2, 4},
                          Case{{40, 40, 30, 3}, 2, 2}}) {
        const DenseTensor x = oracle::random_tensor(k.s, gen);
        const Matrix xn = oracle::mode_n(x, k.mode);
        const Matrix b = oracle::random_matrix(xn.cols(), k.cols, gen);
        EXPECT_LT(oracle::rel_diff(unfolding_times<double>(x, k.mode, b), xn * b), 1e-13) << shape_string(k.s);
    }
}

TEST(TemporalSlab, ViewsContiguousTail) {
    const DenseTensor x = iota_tensor({2, 2, 5});
    const TensorView v = temporal_slab(TensorView(x), 3, 2);
    EXPECT_EQ(v.shape(), (Shape{2, 2, 2}));
    EXPECT_EQ(v.data()[0], 13.0);
    EXPECT_THROW(temporal_slab(TensorView(x), 4, 2), domain_error);
}
