#include "oracles.hpp"

#include <trstream/tr_algebra.hpp>

#include <gtest/gtest.h>

using namespace trstream;

namespace {

DenseTensor identity_slices(std::size_t r, std::size_t j) {
    DenseTensor g(Shape{r, j, r});
    for (std::size_t s = 0; s < j; ++s)
        for (std::size_t a = 0; a < r; ++a) g(a, s, a) = 1.0;
    return g;
}

} // namespace

TEST(TRCores, ValidatesRing) {
    EXPECT_THROW(TRCores(std::vector<DenseTensor>{DenseTensor(Shape{2, 3, 2})}), domain_error);
    EXPECT_THROW(TRCores({DenseTensor(Shape{2, 3, 3}), DenseTensor(Shape{2, 3, 2})}), domain_error);
    const TRCores ok({DenseTensor(Shape{2, 3, 4}), DenseTensor(Shape{4, 5, 2})});
    EXPECT_EQ(ok.ranks(), (std::vector<std::size_t>{2, 4}));
    EXPECT_EQ(ok.dims(), (Shape{3, 5}));
}

TEST(Reconstruct, RankOneIsProductOfScalars) {
    std::mt19937_64 gen(2);
    const TRCores c = oracle::random_tr({3, 2, 4}, {1, 1, 1}, gen);
    const DenseTensor x = tr_reconstruct(c);
    for (const auto& idx : oracle::all_indices(x.shape()))
        EXPECT_NEAR(x.at(idx), c.core(1)(0, idx[0], 0) * c.core(2)(0, idx[1], 0) * c.core(3)(0, idx[2], 0), 1e-15);
}

TEST(Reconstruct, IdentitySlicesGiveRank) {
    const TRCores c({identity_slices(3, 2), identity_slices(3, 4), identity_slices(3, 2)});
    const DenseTensor x = tr_reconstruct(c);
    for (double v : x.values()) EXPECT_DOUBLE_EQ(v, 3.0);
}

TEST(Reconstruct, MatchesTraceOracle) {
    std::mt19937_64 gen(4);
    const TRCores c = oracle::random_tr({3, 3, 3}, {2, 2, 2}, gen);
    const DenseTensor x = tr_reconstruct(c), y = oracle::reconstruct(c);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x.data()[i], y.data()[i], 1e-13 * (1 + std::abs(y.data()[i])));
}

TEST(Reconstruct, CircularShiftInvariance) {
    std::mt19937_64 gen(6);
    const TRCores c = oracle::random_tr({2, 3, 4, 2}, {2, 3, 1, 2}, gen);
    const DenseTensor x = tr_reconstruct(c);
    const TRCores shifted({c.core(2), c.core(3), c.core(4), c.core(1)});
    const DenseTensor y = tr_reconstruct(shifted);
    // y(i2,i3,i4,i1) = x(i1,i2,i3,i4)
    for (const auto& idx : oracle::all_indices(x.shape()))
        EXPECT_NEAR(y(idx[1], idx[2], idx[3], idx[0]), x.at(idx), 1e-13);
}

TEST(OuterProduct, Examples) {
    const DenseTensor a(Shape{2}, {1, 2}), b(Shape{2}, {3, 4});
    const DenseTensor c = outer_product(a, b);
    EXPECT_EQ(c.shape(), (Shape{2, 2}));
    EXPECT_EQ(c(0, 0), 3.0);
    EXPECT_EQ(c(0, 1), 4.0);
    EXPECT_EQ(c(1, 0), 6.0);
    EXPECT_EQ(c(1, 1), 8.0);
    const DenseTensor zero = outer_product(a, DenseTensor(Shape{3}));
    for (double v : zero.values()) EXPECT_EQ(v, 0.0);
    std::mt19937_64 gen(1);
    const DenseTensor p = oracle::random_tensor({2, 2}, gen), q = oracle::random_tensor({2, 2}, gen);
    const DenseTensor r = outer_product(p, q);
    for (const auto& i : oracle::all_indices(r.shape())) EXPECT_EQ(r.at(i), p(i[0], i[1]) * q(i[2], i[3]));
}

TEST(ContractedProduct, Examples) {
    DenseTensor a(Shape{2, 2, 2, 3}), b(Shape{2, 2, 3, 2});
    for (double& v : a.values()) v = 1.0;
    for (double& v : b.values()) v = 1.0;
    const DenseTensor six = contracted_product(a, b);
    for (double v : six.values()) EXPECT_EQ(v, 6.0);

    std::mt19937_64 gen(8);
    const DenseTensor p = oracle::random_tensor({2, 3, 2, 2}, gen), q = oracle::random_tensor({3, 2, 2, 3}, gen);
    const DenseTensor c = contracted_product(p, q);
    EXPECT_EQ(c.shape(), (Shape{2, 2, 2, 3}));
    for (const auto& i : oracle::all_indices(c.shape())) {
        double s = 0.0;
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 2; ++k) s += p(i[0], j, i[2], k) * q(j, i[1], k, i[3]);
        EXPECT_NEAR(c.at(i), s, 1e-13);
    }
    EXPECT_THROW(contracted_product(p, p), domain_error);
}

TEST(ContractedProduct, UnitContractionIsReindexedOuter) {
    std::mt19937_64 gen(3);
    const DenseTensor a = oracle::random_tensor({2, 1, 3, 1}, gen), b = oracle::random_tensor({1, 2, 1, 2}, gen);
    const DenseTensor c = contracted_product(a, b);
    for (const auto& i : oracle::all_indices(c.shape())) EXPECT_EQ(c.at(i), a(i[0], 0, i[2], 0) * b(0, i[1], 0, i[3]));
}

TEST(SubchainProduct, IdentityLeftFactor) {
    std::mt19937_64 gen(2);
    const DenseTensor a = identity_slices(2, 3);
    const DenseTensor b = oracle::random_tensor({2, 4, 2}, gen);
    const DenseTensor c = subchain_product(a, b);
    for (std::size_t j2 = 0; j2 < 4; ++j2)
        for (std::size_t j1 = 0; j1 < 3; ++j1) EXPECT_EQ(oracle::slice(c, j1 + 3 * j2), oracle::slice(b, j2));
}

TEST(SubchainProduct, ScalarsGivePairwiseProducts) {
    const DenseTensor a(Shape{1, 2, 1}, {2, 3}), b(Shape{1, 3, 1}, {5, 7, 11});
    const DenseTensor c = subchain_product(a, b);
    const std::vector<double> expect{10, 15, 14, 21, 22, 33};
    EXPECT_EQ(std::vector<double>(c.values().begin(), c.values().end()), expect);
}

TEST(SubchainProduct, MatchesSliceOracle) {
    std::mt19937_64 gen(5);
    const DenseTensor a = oracle::random_tensor({2, 3, 3}, gen), b = oracle::random_tensor({3, 2, 4}, gen);
    const DenseTensor c = subchain_product(a, b);
    for (std::size_t j2 = 0; j2 < 2; ++j2)
        for (std::size_t j1 = 0; j1 < 3; ++j1)
            EXPECT_LT(oracle::rel_diff(oracle::slice(c, j1 + 3 * j2), oracle::slice(a, j1) * oracle::slice(b, j2)), 1e-14);
    EXPECT_THROW(subchain_product(a, a), domain_error);
}

TEST(SlicesHadamard, Examples) {
    std::mt19937_64 gen(7);
    const DenseTensor b = oracle::random_tensor({2, 3, 4}, gen);
    EXPECT_EQ(slices_hadamard(identity_slices(2, 3), b), b);
    const DenseTensor p = oracle::random_tensor({2, 1, 3}, gen), q = oracle::random_tensor({3, 1, 2}, gen);
    EXPECT_LT(oracle::rel_diff(oracle::slice(slices_hadamard(p, q), 0), oracle::slice(p, 0) * oracle::slice(q, 0)), 1e-14);
    const DenseTensor a = oracle::random_tensor({3, 3, 2}, gen);
    const DenseTensor c = slices_hadamard(a, b);
    for (std::size_t j = 0; j < 3; ++j)
        EXPECT_LT(oracle::rel_diff(oracle::slice(c, j), oracle::slice(a, j) * oracle::slice(b, j)), 1e-14);
    EXPECT_THROW(slices_hadamard(b, b), domain_error);
}

TEST(Subchain, SliceOracleAndColumnOrder) {
    std::mt19937_64 gen(12);
    for (std::size_t N : {2u, 3u, 4u}) {
        Shape dims;
        std::vector<std::size_t> ranks;
        for (std::size_t k = 0; k < N; ++k) {
            dims.push_back(2 + k % 2);
            ranks.push_back(1 + (k + 1) % 3);
        }
        const TRCores c = oracle::random_tr(dims, ranks, gen);
        for (std::size_t n = 1; n <= N; ++n)
            EXPECT_LT(oracle::rel_diff(subchain_matrix(c, n), oracle::subchain_unfolding(c, n)), 1e-14);
        // X_[n] = G_n(2) (G^{!=n}_[2])^T
        const DenseTensor x = tr_reconstruct(c);
        for (std::size_t n = 1; n <= N; ++n)
            EXPECT_LT(oracle::rel_diff(oracle::core_unfolding(c.core(n)) * subchain_matrix(c, n).transpose(),
                                       oracle::mode_n(x, n)),
                      1e-13);
    }
}

TEST(Subchain, TwoCoresIsTheOtherCore) {
    std::mt19937_64 gen(1);
    const TRCores c = oracle::random_tr({3, 4}, {2, 3}, gen);
    EXPECT_EQ(subchain(c, 1), c.core(2));
    EXPECT_EQ(subchain(c, 2), c.core(1));
}

TEST(GramCore, Examples) {
    const DenseTensor z = gram_core(identity_slices(2, 1));
    for (const auto& i : oracle::all_indices(z.shape()))
        EXPECT_EQ(z.at(i), (i[0] == i[1] ? 1.0 : 0.0) * (i[2] == i[3] ? 1.0 : 0.0));
    const DenseTensor zz = gram_core(DenseTensor(Shape{2, 3, 2}));
    for (double v : zz.values()) EXPECT_EQ(v, 0.0);
    std::mt19937_64 gen(3);
    const DenseTensor g = oracle::random_tensor({2, 4, 3}, gen);
    const Matrix m = oracle::mode_n(g, 2);
    EXPECT_LT(oracle::rel_diff(oracle::prefix(gram_core(g), 2), m.transpose() * m), 1e-13);
}

TEST(GramChain, ScalarChain) {
    std::mt19937_64 gen(4);
    const TRCores c = oracle::random_tr({3, 2, 4}, {1, 1, 1}, gen);
    std::vector<DenseTensor> z;
    for (std::size_t n = 1; n <= 3; ++n) z.push_back(gram_core(c.core(n)));
    const DenseTensor h = gram_chain(z, 2);
    double expect = 1.0;
    for (std::size_t n : {1u, 3u}) {
        double s = 0.0;
        for (double v : c.core(n).values()) s += v * v;
        expect *= s;
    }
    EXPECT_EQ(h.shape(), (Shape{1, 1, 1, 1}));
    EXPECT_NEAR(h.data()[0], expect, 1e-13 * expect);
}

TEST(GramChain, TwoCoresIsSingleGram) {
    std::mt19937_64 gen(5);
    const TRCores c = oracle::random_tr({3, 4}, {2, 3}, gen);
    const std::vector<DenseTensor> z{gram_core(c.core(1)), gram_core(c.core(2))};
    EXPECT_EQ(gram_chain(z, 1), z[1]);
}

TEST(GramChain, EqualsExplicitSubchainGram) {
    std::mt19937_64 gen(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<std::size_t> d(1, 3), r(1, 2);
        const Shape dims{d(gen), d(gen), d(gen)};
        const std::vector<std::size_t> ranks{r(gen), r(gen), r(gen)};
        const TRCores c = oracle::random_tr(dims, ranks, gen);
        std::vector<DenseTensor> z;
        for (std::size_t n = 1; n <= 3; ++n) z.push_back(gram_core(c.core(n)));
        for (std::size_t n = 1; n <= 3; ++n) {
            const Matrix s = oracle::subchain_unfolding(c, n);
            const Matrix h = oracle::prefix(gram_chain(z, n), 2);
            EXPECT_LT(oracle::rel_diff(h, s.transpose() * s), 1e-12);
            Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (h + h.transpose()));
            EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10 * h.trace());
        }
    }
}

TEST(GramChain, RankMismatchThrows) {
    std::vector<DenseTensor> z{DenseTensor(Shape{3, 3, 3, 3}), DenseTensor(Shape{2, 2, 2, 2}), DenseTensor(Shape{2, 2, 2, 2})};
    EXPECT_THROW(gram_chain(z, 3), domain_error);
}

TEST(RelativeError, Examples) {
    std::mt19937_64 gen(9);
    const TRCores c = oracle::random_tr({3, 4, 5}, {2, 2, 2}, gen);
    const DenseTensor x = tr_reconstruct(c);
    EXPECT_LT(relative_error(x, c), 1e-14);

    std::vector<DenseTensor> zero;
    for (std::size_t n = 1; n <= 3; ++n) zero.emplace_back(c.core(n).shape());
    EXPECT_DOUBLE_EQ(relative_error(x, TRCores(zero)), 1.0);

    // Perturb one entry on a unit-norm target.
    DenseTensor unit = x;
    const double nx = frobenius_norm(x);
    for (double& v : unit.values()) v /= nx;
    std::vector<DenseTensor> scaled = c.cores();
    for (double& v : scaled[0].values()) v /= nx;
    scaled[1](1, 2, 0) += 1e-3;
    const TRCores pert(scaled);
    const DenseTensor y = oracle::reconstruct(pert);
    double diff = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) diff += (y.data()[i] - unit.data()[i]) * (y.data()[i] - unit.data()[i]);
    EXPECT_NEAR(relative_error(unit, pert), std::sqrt(diff), 1e-12);

    EXPECT_THROW(relative_error(DenseTensor(x.shape()), c), domain_error);
}

TEST(Prop1, RandomOperandIdentity) {
    // (A x2 B)_[2]^T (C x2 D)_[2] = contracted Grams, with A,C and B,D conformable.
    std::mt19937_64 gen(10);
    std::uniform_int_distribution<std::size_t> d(1, 3), r(1, 2);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t r1 = r(gen), r2 = r(gen), r3 = r(gen), I1 = d(gen), I2 = d(gen);
        const DenseTensor a = oracle::random_tensor({r1, I1, r2}, gen), b = oracle::random_tensor({r2, I2, r3}, gen);
        const DenseTensor c = oracle::random_tensor({r1, I1, r2}, gen), e = oracle::random_tensor({r2, I2, r3}, gen);
        const Matrix lhs = oracle::mode_n(subchain_product(a, b), 2).transpose() * oracle::mode_n(subchain_product(c, e), 2);
        // Cross Gram tensors: sum_i A(i)^T o C(i)^T
        auto cross = [](const DenseTensor& p, const DenseTensor& q) {
            const Matrix mp = oracle::mode_n(p, 2), mq = oracle::mode_n(q, 2);
            DenseTensor z(Shape{p.shape()[2], p.shape()[0], q.shape()[2], q.shape()[0]});
            Eigen::Map<Matrix>(z.data(), mp.cols(), mq.cols()) = mp.transpose() * mq;
            return z;
        };
        const Matrix rhs = oracle::prefix(contracted_product(cross(b, e), cross(a, c)), 2);
        EXPECT_LT(oracle::rel_diff(lhs, rhs), 1e-12);
    }
}
