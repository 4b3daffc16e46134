#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace liftcert
{
using Eigen::MatrixXd;
using Eigen::VectorXd;

//! Which variety a VarietyOperator cuts out.
struct VarietySpec
{
    enum class Kind
    {
        determinantal,
        separable,
        custom
    };
    Kind kind = Kind::custom;
    std::vector<int> dims;  // (n1, n2) or (n1, ..., nk)
    int r = 0;              // determinantal rank bound

    //! Ambient dimension N.
    int ambient() const;
    //! Generator degree.
    int degree() const;
    //! Expected generator count from the closed form.
    std::size_t expected_count() const;
    std::string str() const;

    //! Parse "determinantal:n1,n2,r" or "separable:n1,n2,...".
    static VarietySpec parse(std::string const& text);
};

//---------------------------------------------------------------------------//
/*!
 * \brief Orthonormal degree-d dual generators of a conic variety.
 *
 * phi is p x n^d with orthonormal Sym_d-fixed rows, so phi * v equals the
 * generator evaluations at Sym_d v. generators holds the same rows in the
 * orthonormal symmetric coordinates of sym_basis(n, d).
 */
struct VarietyOperator
{
    int n = 0;
    int d = 0;
    Eigen::Index p = 0;
    MatrixXd generators;  // C(n+d-1, d) x p
    MatrixXd phi;         // p x n^d
    VarietySpec spec;

    //! p / C(n+d-1, d).
    double density() const;
};

/*!
 * \brief Minors of size r+1 as symmetric dual tensors.
 *
 * Variables are the matrix entries x_{ab} at a * n2 + b. Column k of the
 * result is the N^{r+1} dual tensor T_k with <T_k, x^{(x)(r+1)}> equal to
 * the k-th minor; row sets are the slow index, column sets the fast one.
 * These tensors are already orthonormal.
 */
MatrixXd determinantal_generators(int n1, int n2, int r);

/*!
 * \brief Quadratic dual tensors vanishing on separable points.
 *
 * Orthonormal basis of the kernel of Sym^2(R^N) -> (x)_i Sym^2(R^{n_i}),
 * N = prod n_i, one N^2 column per generator.
 */
MatrixXd separable_generators(std::vector<int> const& dims);

//! <g, x^{(x)d}> for an n^d dual tensor g.
double evaluate_dual(VectorXd const& g, VectorXd const& x, int d);

//! Orthonormalize generator columns (n^d each) and materialize phi.
//! Throws std::invalid_argument when nothing survives.
VarietyOperator build_phi(MatrixXd const& generators,
                          int n,
                          int d,
                          VarietySpec spec = {},
                          double rel_tol = 1e-8);

//! Generators and phi for a parsed spec.
VarietyOperator make_variety_operator(VarietySpec const& spec);

//! Random unit-norm point of the variety (rank-r matrix or product vector).
VectorXd sample_variety_point(VarietySpec const& spec, Stream& rng);

struct CertificateReport
{
    double eta = 0;
    int m = 0;
    int n = 0;
    int d = 0;
    double tolerance = 0;
    bool certified = false;
    double wall_time_ms = 0;
    std::string basis_sha256;

    std::string verdict() const;
};

//! sigma_{C(m+d-1,d)}(phi * basis^{(*)d}).
CertificateReport certify(VarietyOperator const& op,
                          MatrixXd const& basis,
                          double tolerance = 1e-9);

}  // namespace liftcert
