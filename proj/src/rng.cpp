#include "liftcert/rng.hpp"

#include <cmath>
#include <numbers>

namespace liftcert
{
std::uint64_t Stream::next_u64()
{
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ull);
}

double Stream::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::normal()
{
    if (has_spare_)
    {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] keeps the log finite
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Stream::below(std::uint64_t n)
{
    // rejection keeps the result exactly uniform
    std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do
    {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

Eigen::MatrixXd
Stream::gaussian(Eigen::Index rows, Eigen::Index cols, double stddev)
{
    Eigen::MatrixXd g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            g(i, j) = stddev * normal();
    return g;
}

}  // namespace liftcert
