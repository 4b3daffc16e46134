// Fits the constant c_d in |E|_F <= c_d (1 + |U|^{d-2}) rho^2 (nm)^{d/2}.
//
// Prints the largest observed ratio |E|_F / scale for each d over a seeded
// sweep. The values frozen in frozen_decoupling_constant() come from this
// run with the default arguments.

#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include "liftcert/harness.hpp"
#include "liftcert/smoothing.hpp"

using namespace liftcert;

int main(int argc, char** argv)
{
    int trials = argc > 1 ? std::atoi(argv[1]) : 200;
    std::uint64_t master = 0xfeedULL;
    int const n = 4, m = 2;
    double const rhos[] = {0.01, 0.05, 0.1, 0.3, 1.0};
    for (int d = 2; d <= 3; ++d)
    {
        double worst = 0;
        for (double rho : rhos)
        {
            for (int t = 0; t < trials; ++t)
            {
                auto seed = trial_seed(master, std::uint64_t(t));
                Stream rng(seed, 0, "base");
                MatrixXd base = random_unit_columns(n, m, rng);
                auto s = perturb(base, rho, seed);
                auto f = decouple(s, d, equal_split(rho, d));
                double ratio = f.error.norm()
                               / decoupling_error_scale(base, rho, d);
                worst = std::max(worst, ratio);
            }
        }
        std::printf("d=%d  max |E|/scale = %.6g\n", d, worst);
    }
    return 0;
}
