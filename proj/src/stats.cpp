#include "liftcert/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace liftcert
{
WilsonInterval wilson_interval(std::size_t k, std::size_t n, double z)
{
    if (n == 0)
        throw std::invalid_argument("wilson_interval needs n >= 1");
    double nn = static_cast<double>(n);
    double p = static_cast<double>(k) / nn;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double centre = (p + z2 / (2 * nn)) / denom;
    double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    double pos = q * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

Summary summarize(std::vector<double> const& values)
{
    Summary s;
    s.min = quantile(values, 0.0);
    s.q1 = quantile(values, 0.25);
    s.median = quantile(values, 0.5);
    s.q3 = quantile(values, 0.75);
    s.max = quantile(values, 1.0);
    return s;
}

double ols_slope(std::vector<double> const& x, std::vector<double> const& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ols_slope needs two or more paired points");
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0)
        throw std::invalid_argument("ols_slope: x values are all equal");
    return sxy / sxx;
}

}  // namespace liftcert
