#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace liftcert
{
using Eigen::MatrixXd;
using Eigen::VectorXd;

//! Descending singular values, length min(rows, cols). Throws
//! std::invalid_argument on non-finite entries.
VectorXd singular_values(MatrixXd const& a);

//! k-th largest singular value (1-based); zero when k exceeds min(rows, cols).
double sigma_k(MatrixXd const& a, Eigen::Index k);

//! sigma_{cols}(A): zero for wide matrices.
double sigma_min(MatrixXd const& a);

//---------------------------------------------------------------------------//
/*!
 * \brief Singular-value queries with an explicit numerical-zero threshold.
 *
 * The default tolerance is 1e-10 times the largest singular value.
 */
class SpectrumQuery
{
  public:
    explicit SpectrumQuery(MatrixXd matrix,
                           std::optional<double> tolerance = std::nullopt);

    VectorXd const& values() const { return sigma_; }
    double tolerance() const { return tol_; }
    double largest() const { return sigma_.size() ? sigma_(0) : 0.0; }
    double sigma(Eigen::Index k) const;
    double least() const;
    Eigen::Index rank() const;

  private:
    MatrixXd matrix_;
    VectorXd sigma_;
    double tol_;
};

//! Minimum distance of a column to the span of the others.
double leave_one_out(MatrixXd const& u);

struct BlockFamily
{
    std::vector<MatrixXd> blocks;
    std::vector<int> labels;

    //! Labels 0..s-1.
    static BlockFamily from_blocks(std::vector<MatrixXd> blocks);
    //! Split a matrix into equal column blocks.
    static BlockFamily split(MatrixXd const& a, Eigen::Index block_cols);

    MatrixXd concat() const;
    void check() const;
};

//! min_j sigma_min(P_{-j} U_j).
double block_leave_one_out(BlockFamily const& family);

//! Projector onto the orthogonal complement of the column span. The
//! tolerance defaults to 1e-10 times the largest singular value.
MatrixXd orth_complement_projector(MatrixXd const& columns,
                                   std::optional<double> tolerance = std::nullopt);

/*!
 * \brief Column subset with a large k-th singular value.
 *
 * Greedy determinant maximization in the top-k singular space: a swap is
 * taken whenever it multiplies |det| by more than swap_factor. With the
 * default of 2 the result is a 2-approximate barycentric spanner, which
 * gives sigma_k(A_S) >= sigma_k(A) / (2 sqrt(N k)) for N columns. Returned
 * indices are sorted.
 */
std::vector<Eigen::Index>
wellcond_column_subset(MatrixXd const& a,
                       Eigen::Index k,
                       double swap_factor = 2.0,
                       std::optional<double> tolerance = std::nullopt);

//! Unit vector in the span of an orthonormal basis with at least k entries
//! of magnitude >= 1/(k sqrt(n)).
VectorXd spread_vector(MatrixXd const& basis);

//! Number of entries with magnitude >= 1/(k sqrt(n)).
Eigen::Index spread_count(VectorXd const& v, Eigen::Index k);

struct GoodBlocksParams
{
    double inclusion_factor = 1.0 / 6;  // Pr[j in T] = factor * alpha_j
    double survival_factor = 1.0 / 6;   // survivors need factor*delta*n2 columns
    double c2 = 1.0 / 6;                // reported sigma index ceil(c2 delta n2)
    std::optional<double> orth_threshold;  // default 1/(R n1 n2 sqrt(delta))
    int restarts = 1;                   // rounds of T sampling
};

struct GoodBlocksResult
{
    std::vector<int> selected;
    std::map<int, double> relative_sigmas;
    double delta = 0;
    GoodBlocksParams params;
    double orth_threshold = 0;
    Eigen::Index sigma_index = 0;
    int rounds = 0;
    std::uint64_t seed = 0;
    std::vector<Eigen::Index> subset;  // columns M of step 1

    bool empty() const { return selected.empty(); }
    std::string to_json() const;
};

//! Random-restriction selection of blocks with large relative rank.
GoodBlocksResult good_blocks(BlockFamily const& family,
                             double delta,
                             Stream rng,
                             GoodBlocksParams const& params = {});

//! Jacobian of P(U, V) = sum_i alpha_i u_i (x) v_i with respect to
//! (vec U, vec V); U entries first, column by column.
MatrixXd jacobian_khatri_rao(VectorXd const& alpha,
                             MatrixXd const& u,
                             MatrixXd const& v);

//! Evaluate P(U, V) = sum_i alpha_i u_i (x) v_i.
VectorXd khatri_rao_combination(VectorXd const& alpha,
                                MatrixXd const& u,
                                MatrixXd const& v);

//! Central-difference Jacobian of khatri_rao_combination.
MatrixXd jacobian_khatri_rao_fd(VectorXd const& alpha,
                                MatrixXd const& u,
                                MatrixXd const& v,
                                double step = 1e-5);

//! Number of singular values >= tau.
Eigen::Index count_large_singulars(MatrixXd const& a, double tau);

//! Gram-Schmidt orthonormalization (two passes) keeping input order.
//! Columns whose residual falls below rel_tol times their norm are dropped.
MatrixXd orthonormalize(MatrixXd const& a, double rel_tol = 1e-8);

}  // namespace liftcert
