#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "multi_index.hpp"

namespace liftcert
{
using Eigen::MatrixXd;
using Eigen::VectorXd;

//! Block (i, j) of the result is a(i, j) * B.
MatrixXd kron(MatrixXd const& a, MatrixXd const& b);

//! Kronecker product of vectors, first factor slowest.
VectorXd kron_vec(VectorXd const& a, VectorXd const& b);

//! U tensored with itself d times.
MatrixXd kron_power(MatrixXd const& u, int d);

//! Columnwise Kronecker product; column i is a_i (x) b_i.
MatrixXd khatri_rao(MatrixXd const& a, MatrixXd const& b);

enum class LiftKind
{
    full_kron,
    symmetrized
};

std::string to_string(LiftKind kind);

//---------------------------------------------------------------------------//
/*!
 * \brief Lifted matrix with its sizes and column order.
 *
 * For the symmetrized kind, column j corresponds to column_order[j]; for the
 * full Kronecker kind the columns are all m^d ordered tuples in row-major
 * order and column_order is left empty.
 */
struct LiftMatrix
{
    MatrixXd data;
    int n = 0;
    int m = 0;
    int d = 0;
    LiftKind kind = LiftKind::symmetrized;
    std::vector<MultiIndex> column_order;
};

//! Permutation-averaged lift of d factor matrices sharing one shape.
LiftMatrix sym_kron(std::vector<MatrixXd> const& factors);

//! Symmetric lift U^{(*)d}.
LiftMatrix sym_lift(MatrixXd const& u, int d);

//! Full Kronecker power wrapped as a LiftMatrix.
LiftMatrix kron_lift(MatrixXd const& u, int d);

//! Average of v over all mode permutations of its n^d reshaping.
VectorXd sym_project(VectorXd const& v, int n, int d);

//! Columnwise sym_project.
MatrixXd sym_project_columns(MatrixXd const& a, int n, int d);

//! The n^d x n^d projector Sym_d.
MatrixXd sym_projector(int n, int d);

//! The m^d x C(m+d-1, d) matrix with (U^{(x)d}) Sel_avg = U^{(*)d}.
MatrixXd sel_avg(int m, int d);

//! Orthonormal basis of Sym^d(R^n) inside R^{n^d}, column I is
//! Sym_d(e_I) / |Sym_d(e_I)|.
MatrixXd sym_basis(int n, int d);

enum class MergeVariant
{
    unit_merge,
    weighted_merge
};

std::string to_string(MergeVariant v);

//---------------------------------------------------------------------------//
/*!
 * \brief Merge of symmetric coordinate spaces of orders k1 and k2.
 *
 * Column (I, J) sits at I * D_{k2} + J. The unit variant has a single 1 at
 * the row of I (+) J, i.e. it multiplies monomial coefficient vectors. The
 * weighted variant rescales that entry by sqrt(o(I) o(J) / o(K)) where o
 * counts distinct orderings, which is Sym_{k1+k2} written in orthonormal
 * symmetric coordinates.
 */
struct SymMergeOperator
{
    int n = 0;
    int k1 = 0;
    int k2 = 0;
    MergeVariant variant = MergeVariant::unit_merge;
    Eigen::SparseMatrix<double> data;
};

SymMergeOperator sym_merge(int n, int k1, int k2,
                           MergeVariant variant = MergeVariant::unit_merge);

//! Lift matrix as a JSON descriptor string {n, m, d, kind, column_order}.
std::string lift_descriptor_json(LiftMatrix const& lift);

}  // namespace liftcert
