#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"
#include "stats.hpp"
#include "tensor_lift.hpp"

namespace liftcert
{
using Eigen::MatrixXd;
using Eigen::VectorXd;

//---------------------------------------------------------------------------//
/*!
 * \brief m smoothed quadratic forms in n variables.
 *
 * Column t of A is the monomial coefficient vector of a_t(x), indexed by
 * the order-2 MultiIndex enumeration, so N2 = C(n+1, 2) rows. F is an
 * orthonormal basis of the complement of colspan(A), from the full SVD,
 * each column sign-normalized so its first nonzero entry is positive.
 */
struct PowerSumInstance
{
    int n = 0;
    int m = 0;
    double rho = 0;
    std::uint64_t seed = 0;
    MatrixXd base;   // N2 x m
    MatrixXd A;      // base + noise
    MatrixXd F;      // N2 x (N2 - m)

    Eigen::Index n2() const { return A.rows(); }
    MatrixXd noise() const { return A - base; }
    //! Throws std::logic_error when F is not orthonormal or not
    //! orthogonal to A.
    void check() const;
};

//! Orthonormal complement of colspan(a), sign-normalized.
MatrixXd orthonormal_complement(MatrixXd const& a);

/*!
 * \brief Seeded instance.
 *
 * The base has unit-norm Gaussian columns drawn from Stream(seed, 0,
 * "base"); noise comes from perturb(base, rho, seed).
 */
PowerSumInstance make_power_sum_instance(int n, int m, double rho,
                                         std::uint64_t seed);
//! Instance around a caller-supplied base (N2 x m).
PowerSumInstance make_power_sum_instance(MatrixXd const& base, int n,
                                         double rho, std::uint64_t seed);

//! Merge operator (order 2 + 2) applied to I_{N2} (x) A; C(n+3,4) x m N2.
MatrixXd build_sym4_IkronA(PowerSumInstance const& inst,
                           MergeVariant variant = MergeVariant::unit_merge);

//! Coefficient vector q (length m N2) of the witness q_i = a_j,
//! q_j = -a_i; entry k * m + t holds the k-th coefficient of q_t.
VectorXd antisymmetric_witness(PowerSumInstance const& inst, int i, int j);

//! The C(m, 2) witnesses in lexicographic (i, j) order as columns.
MatrixXd antisymmetric_witnesses(PowerSumInstance const& inst);

//! Numerical rank at an absolute tolerance.
Eigen::Index numerical_rank(MatrixXd const& a, double abs_tol);

/*!
 * \brief Columns merge(A_i (x) A_j + A_j (x) A_i) for i <= j, then
 * merge(A_i (x) F_j + F_j (x) A_i) for each i and j.
 *
 * mN2 - C(m, 2) columns in C(n+3, 4) rows.
 */
MatrixXd build_solution_space_M(PowerSumInstance const& inst,
                                MergeVariant variant = MergeVariant::unit_merge);

/*!
 * \brief Q = (B + Z1 + 2 Z2, F) with B = A - Z1 - Z2.
 *
 * The realized noise Z of A is split into independent layers with
 * variances rho1^2 and rho2^2 (extra randomness from Stream(seed, 0,
 * "split")). Only Z2 enters the result, Q = (A + Z2, F). Throws when
 * rho1^2 + rho2^2 differs from rho^2 by more than 1e-12 relative.
 */
MatrixXd build_claim_Q(PowerSumInstance const& inst, double rho1, double rho2);

/*!
 * \brief V = [S_1 (*) S_1 ... S_m (*) S_m vec(U_1) ... vec(U_m)].
 *
 * S_t holds the first ell columns of U_t and vec is row-major.
 * Throws std::invalid_argument when the budget
 * r = n^2 - n ell - m C(ell+1, 2) - m + 1 is not positive.
 */
MatrixXd build_projected_V(std::vector<MatrixXd> const& mats, int ell);

//! The budget r above.
long projected_V_budget(int n, int m, int ell);

//! m seeded rho-smoothed n x n matrices with Gaussian bases of unit
//! Frobenius norm.
std::vector<MatrixXd> smoothed_square_matrices(int n, int m, double rho,
                                               std::uint64_t seed);

/*!
 * \brief Sym_6 applied columnwise to C^{(*)3}.
 *
 * C is n^2 x m whose columns are row-major vectorized symmetric n x n
 * matrices; the result is n^6 x C(m+2, 3).
 */
MatrixXd build_sym6_lift(MatrixXd const& c, int n);

//! n^2 x m matrix of seeded smoothed symmetric matrices, vectorized.
MatrixXd smoothed_symmetric_columns(int n, int m, double rho,
                                    std::uint64_t seed);

//---------------------------------------------------------------------------//
/*!
 * \brief Bases for the block-lift construction.
 *
 * Each V_i is an orthonormal basis of colspan(P_i + G_i) with P_i a random
 * orthonormal n x m matrix and G_i ~ N(0, rho^2 / n).
 */
struct ClusteringInstance
{
    std::vector<MatrixXd> bases;
    int d = 0;
};

ClusteringInstance make_clustering_instance(int n, int m, int s, int d,
                                            double rho, std::uint64_t seed);

//! Two blocks spanning the same unperturbed subspace.
ClusteringInstance duplicated_clustering_instance(int n, int m, int d,
                                                  std::uint64_t seed);

//! [V_1^{(*)d} ... V_s^{(*)d}]; throws when s C(m+d-1,d) > C(n+d-1,d).
MatrixXd build_block_lift(ClusteringInstance const& inst);

//! Row i holds the monomial coefficients of <u_i, x>^r; points are the
//! columns of the argument.
MatrixXd build_power_matrix(MatrixXd const& points, int r);

//! Evaluate monomials x^I over the order-r enumeration.
VectorXd monomial_vector(VectorXd const& x, int r);

struct SmallBallEstimate
{
    std::size_t hits = 0;
    std::size_t trials = 0;
    double frequency = 0;
    WilsonInterval interval;
};

/*!
 * \brief Monte Carlo frequency of |<row(u~), a>| < eps.
 *
 * row_sampler draws one random row per call from the stream it is given;
 * trial t uses rng.child(t). Throws when trials == 0 or |a| != 1.
 */
SmallBallEstimate
small_ball_estimate(std::function<VectorXd(Stream&)> const& row_sampler,
                    VectorXd const& a,
                    double eps,
                    std::size_t trials,
                    Stream const& rng);

}  // namespace liftcert
