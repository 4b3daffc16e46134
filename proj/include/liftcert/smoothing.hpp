#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace liftcert
{
using Eigen::MatrixXd;

//---------------------------------------------------------------------------//
/*!
 * \brief Base matrix plus seeded Gaussian noise.
 *
 * The noise is drawn from Stream(seed, 0, "noise"), so the realized matrix
 * can always be regenerated from (base, rho, seed).
 */
struct SmoothedMatrix
{
    MatrixXd base;
    double rho = 0;
    std::uint64_t seed = 0;
    MatrixXd realized;

    //! realized - base, the noise as it was actually applied.
    MatrixXd noise() const { return realized - base; }

    //! {"base": <ref>, "rho": .., "seed": ..}
    std::string to_json(std::string const& base_ref) const;
};

//! Throws std::invalid_argument unless rho > 0 and finite.
SmoothedMatrix perturb(MatrixXd const& base, double rho, std::uint64_t seed);

//---------------------------------------------------------------------------//
/*!
 * \brief Independent noise layers and the factors of the decoupling identity.
 *
 * V[l] = U~ - Z_1 - ... - Z_l for l = 0..d, with V[d] set to the base.
 * factors[j-1] = V[j] + (d-j+1) Z_j. error holds the n^d x C(m+d-1, d)
 * remainder, so that for any Psi with Sym_d-fixed rows
 *   Psi U~^{(x)d} Sel_avg = Psi (factors[0] (x) ... ) Sel_avg + Psi error.
 */
struct DecoupledFactors
{
    int d = 0;
    std::vector<double> rhos;
    std::vector<MatrixXd> z;
    std::vector<MatrixXd> v;
    std::vector<MatrixXd> factors;
    MatrixXd error;
};

//! Equal split, rho_j^2 = rho^2 / d.
std::vector<double> equal_split(double rho, int d);

//! rho_1 = rho / (n + m)^(c + 2), the remaining variance shared equally.
std::vector<double> geometric_split(double rho, int d, int n, int m, double c);

/*!
 * \brief Split the realized noise into d independent layers.
 *
 * Conditional on Z = Z_1 + rest, the layer Z_1 is Gaussian with mean w Z and
 * variance w (1 - w) rho^2, w = rho_1^2 / rho^2. Sampling the layers this
 * way keeps the realized matrix fixed while giving layers with the stated
 * joint law. Extra randomness comes from Stream(seed, 0, "split").
 */
DecoupledFactors decouple(SmoothedMatrix const& smoothed,
                          int d,
                          std::vector<double> const& rhos);

//! Factors (x) Sel_avg + E, i.e. the right side of the identity without Psi.
MatrixXd decoupled_lift(DecoupledFactors const& f);

//! The scale (1 + |U|^{d-2}) rho^2 (nm)^{d/2} of the error bound.
double decoupling_error_scale(MatrixXd const& base, double rho, int d);

//! Fitted constants c_d for the error bound, frozen; zero if not fitted.
double frozen_decoupling_constant(int d);

//! log of (delta / (rho sqrt 2))^n / Gamma(n/2 + 1).
double gaussian_ball_log_prob_bound(int n, double delta, double rho);

}  // namespace liftcert
