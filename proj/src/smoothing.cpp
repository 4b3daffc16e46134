#include "liftcert/smoothing.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "liftcert/multi_index.hpp"
#include "liftcert/spectral.hpp"
#include "liftcert/tensor_lift.hpp"

namespace liftcert
{
std::string SmoothedMatrix::to_json(std::string const& base_ref) const
{
    nlohmann::ordered_json j;
    j["base"] = base_ref;
    j["rho"] = rho;
    j["seed"] = seed;
    return j.dump();
}

SmoothedMatrix perturb(MatrixXd const& base, double rho, std::uint64_t seed)
{
    if (!(rho > 0) || !std::isfinite(rho))
        throw std::invalid_argument("perturb: rho must be positive and finite");
    SmoothedMatrix s;
    s.base = base;
    s.rho = rho;
    s.seed = seed;
    Stream noise(seed, 0, "noise");
    s.realized = base + noise.gaussian(base.rows(), base.cols(), rho);
    return s;
}

std::vector<double> equal_split(double rho, int d)
{
    if (d < 1)
        throw std::invalid_argument("equal_split needs d >= 1");
    return std::vector<double>(static_cast<std::size_t>(d),
                               rho / std::sqrt(double(d)));
}

std::vector<double> geometric_split(double rho, int d, int n, int m, double c)
{
    if (d < 2)
        throw std::invalid_argument("geometric_split needs d >= 2");
    std::vector<double> r(static_cast<std::size_t>(d));
    r[0] = rho / std::pow(double(n + m), c + 2);
    double rest = (rho * rho - r[0] * r[0]) / double(d - 1);
    for (int j = 1; j < d; ++j)
        r[static_cast<std::size_t>(j)] = std::sqrt(rest);
    return r;
}

namespace
{
MatrixXd power_or_one(MatrixXd const& x, int p)
{
    if (p == 0)
        return MatrixXd::Ones(1, 1);
    return kron_power(x, p);
}
}  // namespace

DecoupledFactors decouple(SmoothedMatrix const& smoothed,
                          int d,
                          std::vector<double> const& rhos)
{
    if (d < 2)
        throw std::invalid_argument("decouple needs d >= 2");
    if (rhos.size() != static_cast<std::size_t>(d))
        throw std::invalid_argument("decouple: split has "
                                    + std::to_string(rhos.size())
                                    + " entries, expected d = "
                                    + std::to_string(d));
    double rho = smoothed.rho;
    // compare in relative terms so tiny rho does not underflow
    std::vector<double> frac(rhos.size());
    double total = 0;
    for (std::size_t j = 0; j < rhos.size(); ++j)
    {
        if (!(rhos[j] >= 0))
            throw std::invalid_argument("decouple: negative split entry");
        frac[j] = (rhos[j] / rho) * (rhos[j] / rho);
        total += frac[j];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("decouple: split mismatch, sum of "
                                    "rho_j^2 / rho^2 = "
                                    + std::to_string(total));

    DecoupledFactors f;
    f.d = d;
    f.rhos = rhos;
    Stream split(smoothed.seed, 0, "split");
    MatrixXd rest = smoothed.noise();
    double remaining = 1.0;
    auto n = rest.rows(), m = rest.cols();
    for (int j = 0; j + 1 < d; ++j)
    {
        double w = std::min(1.0, frac[static_cast<std::size_t>(j)] / remaining);
        double sd = std::sqrt(w * (1 - w) * remaining) * rho;
        MatrixXd zj = w * rest + split.gaussian(n, m, sd);
        rest -= zj;
        remaining -= frac[static_cast<std::size_t>(j)];
        f.z.push_back(std::move(zj));
    }
    f.z.push_back(rest);

    f.v.push_back(smoothed.realized);
    for (int j = 0; j < d; ++j)
        f.v.push_back(f.v.back() - f.z[static_cast<std::size_t>(j)]);
    f.v.back() = smoothed.base;

    for (int j = 1; j <= d; ++j)
        f.factors.push_back(f.v[static_cast<std::size_t>(j)]
                            + double(d - j + 1)
                                  * f.z[static_cast<std::size_t>(j - 1)]);

    MatrixXd sel = sel_avg(static_cast<int>(m), d);
    auto rows = static_cast<Eigen::Index>(
        int_pow(static_cast<std::size_t>(n), static_cast<std::size_t>(d)));
    f.error = MatrixXd::Zero(rows, sel.cols());
    MatrixXd w_l = MatrixXd::Ones(1, 1);
    for (int l = 0; l + 2 <= d; ++l)
    {
        int rem = d - l;
        auto const& z = f.z[static_cast<std::size_t>(l)];
        auto const& v = f.v[static_cast<std::size_t>(l + 1)];
        MatrixXd ep = MatrixXd::Zero(
            static_cast<Eigen::Index>(int_pow(static_cast<std::size_t>(n),
                                              static_cast<std::size_t>(rem))),
            static_cast<Eigen::Index>(int_pow(static_cast<std::size_t>(m),
                                              static_cast<std::size_t>(rem))));
        for (int j = 2; j <= rem; ++j)
        {
            double c = double(binomial(static_cast<std::size_t>(rem),
                                       static_cast<std::size_t>(j)));
            ep += c * kron(power_or_one(z, j), power_or_one(v, rem - j));
        }
        f.error += kron(w_l, ep) * sel;
        w_l = kron(w_l, f.factors[static_cast<std::size_t>(l)]);
    }
    return f;
}

MatrixXd decoupled_lift(DecoupledFactors const& f)
{
    MatrixXd prod = f.factors.front();
    for (std::size_t j = 1; j < f.factors.size(); ++j)
        prod = kron(prod, f.factors[j]);
    return prod * sel_avg(static_cast<int>(f.factors.front().cols()), f.d)
           + f.error;
}

double decoupling_error_scale(MatrixXd const& base, double rho, int d)
{
    double op = base.size() ? sigma_k(base, 1) : 0.0;
    double nm = double(base.rows() * base.cols());
    return (1 + std::pow(op, d - 2)) * rho * rho * std::pow(nm, d / 2.0);
}

double frozen_decoupling_constant(int d)
{
    // max of |E|_F / scale over tools/fit_decoupling.cpp (n=4, m=2, 1000
    // draws per d), rounded up
    switch (d)
    {
        case 2:
            return 0.572;
        case 3:
            return 1.393;
        default:
            return 0.0;
    }
}

double gaussian_ball_log_prob_bound(int n, double delta, double rho)
{
    if (!(delta > 0) || !(rho > 0))
        throw std::invalid_argument("gaussian_ball_log_prob_bound needs "
                                    "delta, rho > 0");
    return double(n) * std::log(delta / (rho * std::sqrt(2.0)))
           - std::lgamma(double(n) / 2 + 1);
}

}  // namespace liftcert
