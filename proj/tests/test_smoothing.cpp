#include <cmath>

#include <gtest/gtest.h>

#include "liftcert/harness.hpp"
#include "liftcert/multi_index.hpp"
#include "liftcert/smoothing.hpp"
#include "liftcert/tensor_lift.hpp"

using namespace liftcert;

TEST(Perturb, Deterministic)
{
    MatrixXd base = MatrixXd::Ones(3, 2);
    auto a = perturb(base, 0.2, 99);
    auto b = perturb(base, 0.2, 99);
    auto c = perturb(base, 0.2, 100);
    EXPECT_EQ(a.realized, b.realized);
    EXPECT_NE(a.realized, c.realized);
    EXPECT_EQ(a.base, base);
    EXPECT_LE((a.noise() - (a.realized - base)).norm(), 0.0);
    EXPECT_NE(a.to_json("ones").find("\"rho\":0.2"), std::string::npos);
}

TEST(Perturb, Variance)
{
    auto s = perturb(MatrixXd::Zero(100, 100), 0.5, 5);
    double var = s.realized.squaredNorm() / 1e4;
    EXPECT_GE(var, 0.2);
    EXPECT_LE(var, 0.3);
    EXPECT_NEAR(s.realized.mean(), 0, 0.02);
}

TEST(Perturb, RejectsBadRho)
{
    MatrixXd base = MatrixXd::Zero(2, 2);
    EXPECT_THROW(perturb(base, 0, 1), std::invalid_argument);
    EXPECT_THROW(perturb(base, -1, 1), std::invalid_argument);
    EXPECT_THROW(perturb(base, INFINITY, 1), std::invalid_argument);
}

TEST(Perturb, TinyRhoKeepsBase)
{
    Stream rng(2);
    MatrixXd base = rng.gaussian(4, 3);
    auto s = perturb(base, 1e-300, 1);
    EXPECT_LE((s.realized - base).lpNorm<Eigen::Infinity>(), 1e-290);
}

TEST(Split, EqualAndGeometric)
{
    auto e = equal_split(0.3, 3);
    ASSERT_EQ(e.size(), 3u);
    double sum = 0;
    for (double r : e)
        sum += r * r;
    EXPECT_NEAR(sum, 0.09, 1e-15);

    auto g = geometric_split(0.3, 3, 4, 2, 1.0);
    EXPECT_NEAR(g[0], 0.3 / std::pow(6.0, 3), 1e-15);
    sum = 0;
    for (double r : g)
        sum += r * r;
    EXPECT_NEAR(sum, 0.09, 1e-15);
}

namespace
{
// Sym_d applied to the rows of the difference, via the dense projector.
double symmetric_residual(MatrixXd const& lhs, MatrixXd const& rhs, int n, int d)
{
    return (sym_projector(n, d) * (lhs - rhs)).norm();
}

// U^{(x)d} Sel_avg computed from kron powers, independent of sym_lift.
MatrixXd direct_lift(MatrixXd const& u, int d)
{
    return kron_power(u, d) * sel_avg(static_cast<int>(u.cols()), d);
}
}  // namespace

TEST(Decouple, IdentityHolds)
{
    int const n = 4, m = 2;
    for (int d = 2; d <= 3; ++d)
    {
        for (std::uint64_t seed = 0; seed < 10; ++seed)
        {
            Stream rng(seed, 0, "base");
            MatrixXd base = random_unit_columns(n, m, rng);
            auto s = perturb(base, 0.1, seed);
            auto f = decouple(s, d, equal_split(0.1, d));
            ASSERT_EQ(f.factors.size(), std::size_t(d));
            ASSERT_EQ(f.v.size(), std::size_t(d + 1));

            MatrixXd zsum = MatrixXd::Zero(n, m);
            for (auto const& z : f.z)
                zsum += z;
            EXPECT_LE((zsum - s.noise()).norm(), 1e-13);
            EXPECT_EQ(f.v.back(), base);

            // explicit assembly: product of factors then Sel_avg, plus E
            MatrixXd prod = f.factors[0];
            for (int j = 1; j < d; ++j)
                prod = kron(prod, f.factors[std::size_t(j)]);
            MatrixXd rhs = prod * sel_avg(m, d) + f.error;
            EXPECT_LE(symmetric_residual(direct_lift(s.realized, d), rhs, n, d),
                      1e-9);
            EXPECT_LE((decoupled_lift(f) - rhs).norm(), 1e-12);

            // a random Psi with Sym_d-fixed rows sees the same identity
            Stream prng(seed, 0, "psi");
            MatrixXd psi = random_sym_operator(n, d, 5, prng);
            EXPECT_LE((psi * direct_lift(s.realized, d) - psi * rhs).norm(),
                      1e-9);
        }
    }
}

TEST(Decouple, ZeroFirstLayer)
{
    Stream rng(4);
    MatrixXd base = rng.gaussian(3, 2);
    auto s = perturb(base, 0.2, 4);
    auto f = decouple(s, 2, {0.0, 0.2});
    EXPECT_LE(f.z[0].norm(), 1e-15);
    EXPECT_LE((f.z[1] - s.noise()).norm(), 1e-15);
    EXPECT_LE(symmetric_residual(direct_lift(s.realized, 2), decoupled_lift(f),
                                 3, 2),
              1e-10);
}

TEST(Decouple, RejectsBadSplits)
{
    auto s = perturb(MatrixXd::Zero(2, 2), 0.1, 1);
    EXPECT_THROW(decouple(s, 2, {0.1}), std::invalid_argument);
    EXPECT_THROW(decouple(s, 2, {0.1, 0.1}), std::invalid_argument);
    EXPECT_THROW(decouple(s, 1, {0.1}), std::invalid_argument);
}

TEST(Decouple, ErrorBoundWithFrozenConstant)
{
    int const n = 4, m = 2;
    double const rhos[] = {0.01, 0.1, 0.5};
    for (int d = 2; d <= 3; ++d)
    {
        double c = frozen_decoupling_constant(d);
        ASSERT_GT(c, 0);
        for (double rho : rhos)
        {
            for (std::uint64_t t = 0; t < 20; ++t)
            {
                auto seed = trial_seed(0xabcdef, t);
                Stream rng(seed, 0, "base");
                MatrixXd base = random_unit_columns(n, m, rng);
                auto f = decouple(perturb(base, rho, seed), d,
                                  equal_split(rho, d));
                EXPECT_LE(f.error.norm(),
                          2 * c * decoupling_error_scale(base, rho, d));
            }
        }
    }
    EXPECT_EQ(frozen_decoupling_constant(4), 0.0);
}

TEST(GaussianBall, ClosedForm)
{
    // n = 2: (delta / (rho sqrt 2))^2 / Gamma(2)
    EXPECT_NEAR(gaussian_ball_log_prob_bound(2, 1, 1), std::log(0.5), 1e-14);
    EXPECT_THROW(gaussian_ball_log_prob_bound(2, 0, 1), std::invalid_argument);
}

TEST(GaussianBall, BoundsMonteCarlo)
{
    int const n = 3;
    double const rho = 1.0, delta = 0.8;
    Stream rng(21);
    int hits = 0, trials = 20000;
    for (int t = 0; t < trials; ++t)
        if (rng.gaussian(n, 1, rho).norm() < delta)
            ++hits;
    double bound = std::exp(gaussian_ball_log_prob_bound(n, delta, rho));
    double freq = double(hits) / trials;
    EXPECT_LE(freq, bound);
    // the density bound is within a small factor here
    EXPECT_GE(freq, bound / 3);
}
