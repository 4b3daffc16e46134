#pragma once

#include <cstddef>
#include <vector>

namespace liftcert
{
struct WilsonInterval
{
    double lower = 0;
    double upper = 1;
};

//! Wilson score interval for k successes in n trials; z = 1.96 gives 95%.
WilsonInterval wilson_interval(std::size_t k, std::size_t n, double z = 1.96);

//! Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double q);

struct Summary
{
    double min = 0;
    double q1 = 0;
    double median = 0;
    double q3 = 0;
    double max = 0;
};

Summary summarize(std::vector<double> const& values);

//! Least-squares slope of y on x.
double ols_slope(std::vector<double> const& x, std::vector<double> const& y);

}  // namespace liftcert
