#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "liftcert/rng.hpp"
#include "liftcert/spectral.hpp"

using namespace liftcert;

namespace
{
MatrixXd unit(int n, int i)
{
    MatrixXd e = MatrixXd::Zero(n, 1);
    e(i, 0) = 1;
    return e;
}

// Distance of column i to the span of the others by least squares.
double column_distance(MatrixXd const& u, Eigen::Index i)
{
    MatrixXd rest(u.rows(), u.cols() - 1);
    for (Eigen::Index j = 0, c = 0; j < u.cols(); ++j)
        if (j != i)
            rest.col(c++) = u.col(j);
    if (rest.cols() == 0)
        return u.col(i).norm();
    VectorXd coef = rest.colPivHouseholderQr().solve(u.col(i));
    return (u.col(i) - rest * coef).norm();
}
}  // namespace

TEST(SingularValues, Examples)
{
    MatrixXd d = MatrixXd::Zero(2, 2);
    d(0, 0) = 1;
    d(1, 1) = 3;
    auto s = singular_values(d);
    EXPECT_NEAR(s(0), 3, 1e-14);
    EXPECT_NEAR(s(1), 1, 1e-14);

    EXPECT_EQ(singular_values(MatrixXd::Zero(3, 2)).norm(), 0.0);
    EXPECT_EQ(singular_values(MatrixXd::Zero(3, 2)).size(), 2);

    // A^T A = [[1,1],[1,2]] has eigenvalues (3 +- sqrt 5)/2, so the
    // singular values are the golden ratio and its inverse.
    MatrixXd g(2, 2);
    g << 1, 1, 0, 1;
    double phi = (1 + std::sqrt(5.0)) / 2;
    s = singular_values(g);
    EXPECT_NEAR(s(0), phi, 1e-14);
    EXPECT_NEAR(s(1), 1 / phi, 1e-14);

    g(0, 1) = std::nan("");
    EXPECT_THROW(singular_values(g), std::invalid_argument);
}

TEST(SingularValues, OrderAndNorm)
{
    Stream rng(3);
    for (int t = 0; t < 20; ++t)
    {
        MatrixXd a = rng.gaussian(5, 7);
        auto s = singular_values(a);
        ASSERT_EQ(s.size(), 5);
        for (Eigen::Index i = 1; i < s.size(); ++i)
            EXPECT_GE(s(i - 1), s(i));
        EXPECT_NEAR(s(0), a.operatorNorm(), 1e-10);
        EXPECT_NEAR(s.norm(), a.norm(), 1e-10);
    }
    MatrixXd tall = rng.gaussian(6, 2);
    EXPECT_EQ(sigma_k(tall, 3), 0.0);
    EXPECT_EQ(sigma_min(tall.transpose()), 0.0);
}

TEST(SpectrumQuery, RankAndTolerance)
{
    MatrixXd a = MatrixXd::Zero(3, 3);
    a(0, 0) = 2;
    a(1, 1) = 1e-12;
    SpectrumQuery q(a);
    EXPECT_NEAR(q.tolerance(), 2e-10, 1e-24);
    EXPECT_EQ(q.rank(), 1);
    EXPECT_EQ(q.largest(), 2);
    SpectrumQuery loose(a, 1e-13);
    EXPECT_EQ(loose.rank(), 2);
}

TEST(LeaveOneOut, Examples)
{
    EXPECT_NEAR(leave_one_out(MatrixXd::Identity(3, 3)), 1, 1e-14);
    MatrixXd dup(2, 2);
    dup << 1, 1, 0, 0;
    EXPECT_NEAR(leave_one_out(dup), 0, 1e-14);
}

TEST(LeaveOneOut, MatchesLeastSquaresDistance)
{
    Stream rng(11);
    for (int t = 0; t < 20; ++t)
    {
        MatrixXd u = rng.gaussian(6, 3);
        double direct = column_distance(u, 0);
        for (Eigen::Index i = 1; i < 3; ++i)
            direct = std::min(direct, column_distance(u, i));
        EXPECT_NEAR(leave_one_out(u), direct, 1e-10);
    }
}

TEST(LeaveOneOut, Sandwich)
{
    Stream rng(12);
    for (int t = 0; t < 200; ++t)
    {
        MatrixXd u = rng.gaussian(8, 4);
        double l = leave_one_out(u);
        double s = sigma_min(u);
        EXPECT_GE(s - l / 2.0, -1e-10);
        EXPECT_GE(l - s, -1e-10);
    }
}

TEST(BlockLeaveOneOut, Examples)
{
    Stream rng(13);
    MatrixXd b = rng.gaussian(5, 2);
    EXPECT_NEAR(block_leave_one_out(BlockFamily::from_blocks({b})),
                sigma_min(b), 1e-12);
    EXPECT_NEAR(block_leave_one_out(
                    BlockFamily::from_blocks({unit(2, 0), unit(2, 1)})),
                1, 1e-14);
    EXPECT_THROW(block_leave_one_out(BlockFamily{}), std::exception);
}

TEST(BlockLeaveOneOut, Sandwich)
{
    Stream rng(14);
    for (int t = 0; t < 200; ++t)
    {
        std::vector<MatrixXd> blocks;
        for (int j = 0; j < 3; ++j)
            blocks.push_back(rng.gaussian(8, 2));
        auto fam = BlockFamily::from_blocks(blocks);
        double lb = block_leave_one_out(fam);
        double s = sigma_min(fam.concat());
        EXPECT_GE(s - lb / std::sqrt(3.0), -1e-10);
        EXPECT_GE(lb - s, -1e-10);
    }
}

TEST(BlockFamily, Split)
{
    MatrixXd a = MatrixXd::Random(4, 6);
    auto fam = BlockFamily::split(a, 2);
    ASSERT_EQ(fam.blocks.size(), 3u);
    EXPECT_EQ(fam.labels, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ((fam.concat() - a).norm(), 0.0);
    EXPECT_THROW(BlockFamily::split(a, 4), std::invalid_argument);
}

TEST(OrthComplementProjector, Examples)
{
    MatrixXd p = orth_complement_projector(unit(2, 0));
    MatrixXd expect = MatrixXd::Zero(2, 2);
    expect(1, 1) = 1;
    EXPECT_LE((p - expect).norm(), 1e-14);

    Stream rng(15);
    EXPECT_LE(orth_complement_projector(rng.gaussian(4, 4)).norm(), 1e-10);

    for (int t = 0; t < 20; ++t)
    {
        MatrixXd c = rng.gaussian(7, 3);
        if (t % 2)
            c.col(2) = c.col(0) + 2 * c.col(1);
        MatrixXd q = orth_complement_projector(c);
        EXPECT_LE((q * q - q).norm(), 1e-10);
        EXPECT_LE((q - q.transpose()).norm(), 1e-12);
        EXPECT_LE((q * c).norm(), 1e-10);
        int expected_rank = 7 - (t % 2 ? 2 : 3);
        EXPECT_NEAR(q.trace(), expected_rank, 1e-10);
    }
}

TEST(WellcondColumnSubset, Examples)
{
    auto s = wellcond_column_subset(MatrixXd::Identity(3, 3), 3);
    EXPECT_EQ(s, (std::vector<Eigen::Index>{0, 1, 2}));

    MatrixXd a(2, 3);
    a << 1, 1, 0, 0, 0, 1;
    s = wellcond_column_subset(a, 2);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[1], 2);
    MatrixXd sub(2, 2);
    sub.col(0) = a.col(s[0]);
    sub.col(1) = a.col(s[1]);
    EXPECT_NEAR(sigma_k(sub, 2), 1, 1e-14);
    EXPECT_GE(sigma_k(sub, 2), sigma_k(a, 2) / std::sqrt(6.0));

    EXPECT_THROW(wellcond_column_subset(a.leftCols(2), 2), std::exception);
}

TEST(WellcondColumnSubset, RandomGuarantee)
{
    Stream rng(16);
    int const k = 4;
    for (int t = 0; t < 100; ++t)
    {
        MatrixXd a = rng.gaussian(6, 12);
        auto s = wellcond_column_subset(a, k);
        ASSERT_EQ(s.size(), std::size_t(k));
        EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
        MatrixXd sub(6, k);
        for (int i = 0; i < k; ++i)
            sub.col(i) = a.col(s[std::size_t(i)]);
        EXPECT_GE(sigma_k(sub, k), sigma_k(a, k) / (2 * std::sqrt(12.0 * k)));
    }
}

TEST(SpreadVector, Examples)
{
    VectorXd v = spread_vector(unit(4, 0));
    EXPECT_NEAR(std::abs(v(0)), 1, 1e-14);
    EXPECT_GE(spread_count(v, 1), 1);

    v = spread_vector(MatrixXd::Identity(2, 2));
    EXPECT_NEAR(v.norm(), 1, 1e-14);
    EXPECT_EQ(spread_count(v, 2), 2);

    MatrixXd bad = MatrixXd::Identity(3, 2) * 2;
    EXPECT_THROW(spread_vector(bad), std::invalid_argument);
}

TEST(SpreadVector, RandomBases)
{
    Stream rng(17);
    for (int t = 0; t < 50; ++t)
    {
        MatrixXd q = orthonormalize(rng.gaussian(8, 3));
        VectorXd v = spread_vector(q);
        EXPECT_NEAR(v.norm(), 1, 1e-12);
        // In the span: the projection leaves it unchanged.
        EXPECT_LE((q * (q.transpose() * v) - v).norm(), 1e-12);
        EXPECT_GE(spread_count(v, 3), 3);
    }
}

TEST(GoodBlocks, OrthogonalPair)
{
    MatrixXd i8 = MatrixXd::Identity(8, 8);
    auto fam = BlockFamily::from_blocks({i8.leftCols(4), i8.rightCols(4)});
    bool seen_both = false;
    for (std::uint64_t s = 0; s < 40; ++s)
    {
        auto r = good_blocks(fam, 1.0, Stream(s, 0, "blocks"));
        for (auto const& [label, sigma] : r.relative_sigmas)
            EXPECT_NEAR(sigma, 1, 1e-12) << "label " << label;
        seen_both |= r.selected.size() == 2;
        EXPECT_EQ(r.relative_sigmas.size(), r.selected.size());
        EXPECT_FALSE(r.to_json().empty());
    }
    EXPECT_TRUE(seen_both);
}

TEST(GoodBlocks, AdversarialPairKeepsAtMostOne)
{
    int const t = 4;
    double const eps = 1e-6;
    MatrixXd b1 = MatrixXd::Zero(2 * t, t + t);
    MatrixXd b2 = MatrixXd::Zero(2 * t, t + t);
    for (int i = 0; i < t; ++i)
    {
        b1(i, i) = 1;
        b1(t + i, t + i) = eps;
        b2(i, i) = eps;
        b2(t + i, t + i) = 1;
    }
    auto fam = BlockFamily::from_blocks({b1, b2});
    GoodBlocksParams p;
    p.restarts = 8;
    for (std::uint64_t s = 0; s < 100; ++s)
    {
        // the pair spans only R^{2t}, so delta = 1/2 is the largest density
        auto r = good_blocks(fam, 0.5, Stream(s, 0, "blocks"), p);
        EXPECT_LE(r.selected.size(), 1u);
    }
}

TEST(GoodBlocks, RandomFamilySurvivors)
{
    GoodBlocksParams p;
    p.restarts = 8;
    int hits = 0;
    for (std::uint64_t s = 0; s < 100; ++s)
    {
        Stream rng(s, 0, "family");
        std::vector<MatrixXd> blocks;
        for (int j = 0; j < 16; ++j)
            blocks.push_back(rng.gaussian(64, 8));
        auto r = good_blocks(BlockFamily::from_blocks(blocks), 0.5,
                             rng.child("select"), p);
        if (!r.empty())
            ++hits;
        for (auto label : r.selected)
            EXPECT_TRUE(label >= 0 && label < 16);
    }
    EXPECT_GE(hits, 90);
}

TEST(Jacobian, MatchesFiniteDifferences)
{
    Stream rng(18);
    for (int t = 0; t < 10; ++t)
    {
        VectorXd alpha = rng.gaussian(2, 1);
        MatrixXd u = rng.gaussian(3, 2), v = rng.gaussian(3, 2);
        MatrixXd j = jacobian_khatri_rao(alpha, u, v);
        MatrixXd fd = jacobian_khatri_rao_fd(alpha, u, v);
        ASSERT_EQ(j.rows(), 9);
        ASSERT_EQ(j.cols(), 12);
        EXPECT_LE((j - fd).norm(), 1e-6 * std::max(1.0, j.norm()));
    }
}

TEST(Jacobian, SingleTermAndZero)
{
    Stream rng(19);
    int const n = 4;
    MatrixXd u = rng.gaussian(n, 1), v = rng.gaussian(n, 1);
    VectorXd one = VectorXd::Ones(1);
    MatrixXd j = jacobian_khatri_rao(one, u, v);
    auto s = singular_values(j.leftCols(n));
    for (int i = 0; i < n; ++i)
        EXPECT_NEAR(s(i), v.norm(), 1e-12);

    EXPECT_EQ(jacobian_khatri_rao(VectorXd::Zero(1), u, v).norm(), 0.0);
    EXPECT_THROW(jacobian_khatri_rao(one, u, rng.gaussian(n, 2)),
                 std::invalid_argument);
}

TEST(CountLargeSingulars, Examples)
{
    MatrixXd d = MatrixXd::Zero(3, 3);
    d.diagonal() << 3, 1, 0.1;
    EXPECT_EQ(count_large_singulars(d, 0.5), 2);
    EXPECT_EQ(count_large_singulars(MatrixXd::Zero(4, 4), 0.5), 0);
}

TEST(Orthonormalize, KeepsOrderDropsDependent)
{
    Stream rng(20);
    MatrixXd a = rng.gaussian(5, 3);
    a.col(2) = a.col(0) - a.col(1);
    MatrixXd q = orthonormalize(a);
    ASSERT_EQ(q.cols(), 2);
    EXPECT_LE((q.transpose() * q - MatrixXd::Identity(2, 2)).norm(), 1e-12);
    EXPECT_NEAR(std::abs(q.col(0).dot(a.col(0))), a.col(0).norm(), 1e-12);
}
