// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "liftcert/harness.hpp"
#include "liftcert/multi_index.hpp"
#include "liftcert/smoothing.hpp"
#include "liftcert/spectral.hpp"
#include "liftcert/tensor_lift.hpp"
#include "liftcert/varieties.hpp"

using namespace liftcert;

namespace
{
struct Verdict
{
    bool pass = true;
    std::string detail;

    void require(bool ok, std::string const& what)
    {
        if (!detail.empty())
            detail += "; ";
        detail += what;
        if (!ok)
        {
            pass = false;
            detail += " [FAILED]";
        }
    }
};

std::string fmt(char const* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, x);
    return buf;
}

// Every experiment that runs is kept so criterion 14 can replay it.
std::vector<ExperimentConfig> replay_list;

ExperimentReport run(json j)
{
    auto c = ExperimentConfig::from_json(j);
    replay_list.push_back(c);
    return run_experiment(c);
}

std::string count_str(GridSummary const& g)
{
    return std::to_string(g.passes) + "/" + std::to_string(g.trials)
           + " (wilson95 lower " + fmt("%.3f", g.interval.lower) + ")";
}

Verdict sel_avg_spectrum()
{
    Verdict v;
    double worst_lo = 1, worst_hi = 0;
    bool ok = true;
    for (int m = 1; m <= 4; ++m)
    {
        for (int d = 1; d <= 3; ++d)
        {
            auto s = singular_values(sel_avg(m, d));
            double lo = 1 / std::sqrt(double(factorial(std::size_t(d))));
            for (Eigen::Index i = 0; i < s.size(); ++i)
            {
                ok = ok && s(i) >= lo - 1e-9 && s(i) <= 1 + 1e-9;
                worst_lo = std::min(worst_lo, s(i) - lo);
                worst_hi = std::max(worst_hi, s(i));
            }
        }
    }
    v.require(ok, "min sigma - 1/sqrt(d!) = " + fmt("%.3g", worst_lo)
                      + ", max sigma = " + fmt("%.17g", worst_hi));
    return v;
}

Verdict lift_identity()
{
    Verdict v;
    Stream rng(0x11f7, 0, "acceptance");
    double worst = 0;
    for (int t = 0; t < 50; ++t)
    {
        int n = 1 + int(rng.below(4));
        int m = 1 + int(rng.below(3));
        int d = 1 + int(rng.below(3));
        MatrixXd u = rng.gaussian(n, m);
        double r = (kron_power(u, d) * sel_avg(m, d) - sym_lift(u, d).data).norm();
        worst = std::max(worst, r);
    }
    v.require(worst <= 1e-10, "max residual " + fmt("%.3g", worst) + " over 50");
    return v;
}

Verdict leave_one_out_sandwiches()
{
    Verdict v;
    Stream rng(0x1002, 0, "acceptance");
    double margin = INFINITY;
    for (int t = 0; t < 200; ++t)
    {
        MatrixXd u = rng.gaussian(8, 4);
        double l = leave_one_out(u), s = sigma_min(u);
        margin = std::min({margin, s - l / 2.0, l - s});
    }
    v.require(margin >= -1e-10, "column sandwich min margin " + fmt("%.3g", margin));
    double bmargin = INFINITY;
    for (int t = 0; t < 200; ++t)
    {
        std::vector<MatrixXd> blocks;
        for (int j = 0; j < 3; ++j)
            blocks.push_back(rng.gaussian(8, 2));
        auto fam = BlockFamily::from_blocks(blocks);
        double lb = block_leave_one_out(fam), s = sigma_min(fam.concat());
        bmargin = std::min({bmargin, s - lb / std::sqrt(3.0), lb - s});
    }
    v.require(bmargin >= -1e-10, "block sandwich min margin " + fmt("%.3g", bmargin));
    return v;
}

Verdict column_subset()
{
    Verdict v;
    Stream rng(0x1003, 0, "acceptance");
    int violations = 0;
    double worst = INFINITY;
    for (int t = 0; t < 100; ++t)
    {
        MatrixXd a = rng.gaussian(6, 12);
        auto s = wellcond_column_subset(a, 4);
        MatrixXd sub(6, 4);
        for (int i = 0; i < 4; ++i)
            sub.col(i) = a.col(s[std::size_t(i)]);
        double ratio = sigma_k(sub, 4) / (sigma_k(a, 4) / (2 * std::sqrt(48.0)));
        worst = std::min(worst, ratio);
        if (s.size() != 4 || ratio < 1)
            ++violations;
    }
    v.require(violations == 0, std::to_string(violations)
                                   + " violations, min ratio to bound "
                                   + fmt("%.3g", worst));
    return v;
}

Verdict decoupling()
{
    Verdict v;
    int const n = 4, m = 2;
    double residual = 0;
    double worst_ratio = 0;
    double const rhos[] = {0.01, 0.05, 0.1, 0.3, 1.0};
    for (int d = 2; d <= 3; ++d)
    {
        MatrixXd sym = sym_projector(n, d);
        MatrixXd sel = sel_avg(m, d);
        double c = frozen_decoupling_constant(d);
        for (std::uint64_t t = 0; t < 50; ++t)
        {
            auto seed = trial_seed(0xacce55, t);
            double rho = rhos[t % 5];
            Stream rng(seed, 0, "base");
            MatrixXd base = random_unit_columns(n, m, rng);
            auto s = perturb(base, rho, seed);
            auto f = decouple(s, d, equal_split(rho, d));
            // explicit assembly of the right-hand side
            MatrixXd prod = f.factors[0];
            for (int j = 1; j < d; ++j)
                prod = kron(prod, f.factors[std::size_t(j)]);
            MatrixXd rhs = prod * sel + f.error;
            MatrixXd lhs = kron_power(s.realized, d) * sel;
            residual = std::max(residual, (sym * (lhs - rhs)).norm());
            double ratio = f.error.norm()
                           / (2 * c * decoupling_error_scale(base, rho, d));
            worst_ratio = std::max(worst_ratio, ratio);
        }
    }
    v.require(residual <= 1e-9, "identity residual " + fmt("%.3g", residual));
    v.require(worst_ratio <= 1, "max |E| / (2 c_d scale) = " + fmt("%.3f", worst_ratio)
                                    + " over 50 trials per d");
    return v;
}

Verdict theorem_desk_scale()
{
    Verdict v;
    auto r = run({{"target", "thm51"},
                  {"params", {{"n", 10}, {"d", 2}, {"m", 2}, {"delta", 0.5}}},
                  {"rho_grid", {0.1}},
                  {"trials", 100},
                  {"master_seed", 5101},
                  {"threshold", 1e-6},
                  {"min_passes", 99}});
    v.require(r.grid[0].passes >= 99, "random base " + count_str(r.grid[0])
                                          + ", median " + fmt("%.3g", r.grid[0].stats.median));
    auto k = run({{"target", "thm51"},
                  {"params", {{"base", "kernel_aligned"}}},
                  {"rho_grid", {1e-300}},
                  {"trials", 100},
                  {"master_seed", 5102},
                  {"threshold", 1e-10},
                  {"direction", "at_most"},
                  {"min_passes", 100}});
    v.require(k.grid[0].passes == 100, "kernel-aligned rho=1e-300 "
                                           + count_str(k.grid[0]) + " <= 1e-10, max "
                                           + fmt("%.3g", k.grid[0].stats.max));
    return v;
}

Verdict rho_scaling()
{
    Verdict v;
    json grid = {0.02, 0.05, 0.1, 0.2, 0.5};
    auto r = run({{"target", "thm51"},
                  {"params", {{"base", "kernel_aligned"}}},
                  {"rho_grid", grid},
                  {"trials", 100},
                  {"master_seed", 5103},
                  {"threshold", 0.0},
                  {"require_scaling", true}});
    std::string meds;
    for (auto const& g : r.grid)
        meds += (meds.empty() ? "" : ",") + fmt("%.3g", g.stats.median);
    v.require(r.scaling && r.scaling->monotone, "medians [" + meds + "] nondecreasing");
    v.require(r.scaling && r.scaling->envelope, "median >= rho^2/n^6 everywhere");
    return v;
}

std::size_t separable_count(std::vector<int> const& dims)
{
    std::size_t big = 1, prod = 1;
    for (int n : dims)
    {
        big *= std::size_t(n);
        prod *= binomial(std::size_t(n + 1), 2);
    }
    return binomial(big + 1, 2) - prod;
}

Verdict certification()
{
    Verdict v;
    auto r = run({{"target", "certify"},
                  {"params", {{"variety", "determinantal:4,4,1"}, {"m", 3}}},
                  {"rho_grid", {0.1}},
                  {"trials", 100},
                  {"master_seed", 6001},
                  {"threshold", 1e-7},
                  {"min_passes", 95}});
    v.require(r.grid[0].passes >= 95, "eta >= 1e-7 in " + count_str(r.grid[0]));
    auto p = run({{"target", "certify"},
                  {"params", {{"variety", "determinantal:4,4,1"}, {"m", 3},
                              {"basis", "planted"}}},
                  {"rho_grid", {0.1}},
                  {"trials", 100},
                  {"master_seed", 6002},
                  {"threshold", 1e-10},
                  {"direction", "at_most"},
                  {"min_passes", 100}});
    v.require(p.grid[0].passes == 100, "planted eta <= 1e-10 in "
                                           + count_str(p.grid[0]) + ", max "
                                           + fmt("%.3g", p.grid[0].stats.max));
    int mismatches = 0, cases = 0;
    for (int n1 = 2; n1 <= 5; ++n1)
        for (int n2 = 2; n2 <= 5; ++n2)
            for (int rr = 1; rr <= 2 && rr < std::min(n1, n2); ++rr)
            {
                ++cases;
                auto g = determinantal_generators(n1, n2, rr);
                if (std::size_t(g.cols())
                    != binomial(std::size_t(n1), std::size_t(rr + 1))
                           * binomial(std::size_t(n2), std::size_t(rr + 1)))
                    ++mismatches;
            }
    std::vector<std::vector<int>> sep = {{2, 2}, {2, 3}, {3, 2}, {3, 3},
                                         {2, 2, 2}, {2, 3, 2}, {3, 2, 2},
                                         {3, 3, 2}};
    for (auto const& dims : sep)
    {
        ++cases;
        if (std::size_t(separable_generators(dims).cols()) != separable_count(dims))
            ++mismatches;
    }
    v.require(mismatches == 0, "generator counts " + std::to_string(cases - mismatches)
                                   + "/" + std::to_string(cases) + " exact");
    return v;
}

Verdict prop73_oracle()
{
    Verdict v;
    auto r = run({{"target", "prop73"},
                  {"params", {{"n", 4}, {"m", 3}, {"tol", 1e-8}}},
                  {"rho_grid", {0.1}},
                  {"trials", 50},
                  {"master_seed", 7301},
                  {"min_passes", 50}});
    v.require(r.grid[0].passes == 50, "rank 27 and 3 witnesses in the kernel in "
                                          + count_str(r.grid[0]));
    return v;
}

Verdict power_sum_constructions()
{
    Verdict v;
    struct Item
    {
        char const* target;
        json params;
        std::uint64_t seed;
    };
    std::vector<Item> items = {
        {"lemma74", {{"n", 4}, {"m", 3}}, 7401},
        {"prop72", {{"n", 6}, {"m", 2}, {"ell", 2}}, 7201},
        {"claim77", {{"n", 4}, {"m", 3}}, 7701},
    };
    for (auto const& it : items)
    {
        auto r = run({{"target", it.target},
                      {"params", it.params},
                      {"rho_grid", {0.1}},
                      {"trials", 50},
                      {"master_seed", it.seed},
                      {"threshold", 1e-8},
                      {"min_passes", 48}});
        v.require(r.grid[0].passes >= 48, std::string(it.target) + " "
                                              + count_str(r.grid[0]) + ", min "
                                              + fmt("%.3g", r.grid[0].stats.min));
    }
    return v;
}

Verdict block_lift_conjecture()
{
    Verdict v;
    auto r = run({{"target", "conj81"},
                  {"params", {{"n", 8}, {"m", 2}, {"s", 2}, {"d", 2}}},
                  {"rho_grid", {0.2}},
                  {"trials", 100},
                  {"master_seed", 8101},
                  {"threshold", 1e-6},
                  {"min_passes", 95}});
    v.require(r.grid[0].passes >= 95, "sigma_min >= 1e-6 in " + count_str(r.grid[0]));
    auto d = run({{"target", "conj81"},
                  {"params", {{"n", 8}, {"m", 2}, {"s", 2}, {"d", 2},
                              {"base", "duplicate"}}},
                  {"rho_grid", {0.2}},
                  {"trials", 100},
                  {"master_seed", 8102},
                  {"threshold", 1e-10},
                  {"direction", "at_most"},
                  {"min_passes", 100}});
    v.require(d.grid[0].passes == 100, "duplicated control <= 1e-10 in "
                                           + count_str(d.grid[0]));
    return v;
}

Verdict power_matrix_conjecture()
{
    Verdict v;
    auto r = run({{"target", "conj82"},
                  {"params", {{"dim", 3}, {"r", 2}, {"N", 24}}},
                  {"rho_grid", {0.1}},
                  {"trials", 100},
                  {"master_seed", 8201},
                  {"threshold", 1e-6},
                  {"min_passes", 99}});
    v.require(r.grid[0].passes >= 99, "sigma_min >= 1e-6 in " + count_str(r.grid[0])
                                          + ", min " + fmt("%.3g", r.grid[0].stats.min));
    return v;
}

Verdict jacobian()
{
    Verdict v;
    auto r = run({{"target", "jacobian_probe"},
                  {"params", {{"n", 10}, {"m", 20}, {"k", 5}, {"tau_factor", 0.1}}},
                  {"rho_grid", {0.1}},
                  {"trials", 100},
                  {"master_seed", 1301},
                  {"min_passes", 95}});
    v.require(r.grid[0].passes >= 95, ">= 25 values >= 0.01 in " + count_str(r.grid[0])
                                          + ", min count " + fmt("%.0f", r.grid[0].stats.min));
    Stream rng(0x1302, 0, "acceptance");
    double worst = 0;
    for (int t = 0; t < 20; ++t)
    {
        VectorXd alpha = rng.gaussian(2, 1);
        MatrixXd u = perturb(rng.gaussian(3, 2), 0.1, rng.next_u64()).realized;
        MatrixXd w = perturb(rng.gaussian(3, 2), 0.1, rng.next_u64()).realized;
        MatrixXd j = jacobian_khatri_rao(alpha, u, w);
        MatrixXd fd = jacobian_khatri_rao_fd(alpha, u, w);
        worst = std::max(worst, (j - fd).norm() / std::max(1.0, j.norm()));
    }
    v.require(worst <= 1e-6, "finite-difference relative error " + fmt("%.3g", worst));
    return v;
}

Verdict reproducibility()
{
    Verdict v;
    int same = 0;
    std::string bad;
    for (auto const& c : replay_list)
    {
        auto a = run_experiment(c, 1).csv();
        auto b = run_experiment(c, 4).csv();
        if (a == b)
            ++same;
        else
            bad += " " + c.target;
    }
    v.require(same == int(replay_list.size()) && !replay_list.empty(),
              std::to_string(same) + "/" + std::to_string(replay_list.size())
                  + " experiments byte-identical (1 thread vs 4)" + bad);
    return v;
}
}  // namespace

int main()
{
    std::vector<std::pair<char const*, std::function<Verdict()>>> criteria = {
        {"sel_avg spectrum in [1/sqrt(d!), 1]", sel_avg_spectrum},
        {"lift identity U^(x)d Sel_avg = U^(*)d", lift_identity},
        {"leave-one-out sandwiches", leave_one_out_sandwiches},
        {"well-conditioned column subset", column_subset},
        {"decoupling identity and error bound", decoupling},
        {"symmetric lift under projection, desk scale", theorem_desk_scale},
        {"rho-scaling of the median", rho_scaling},
        {"certification and generator counts", certification},
        {"merge rank and antisymmetric witnesses", prop73_oracle},
        {"power-sum constructions", power_sum_constructions},
        {"block lift of perturbed subspaces", block_lift_conjecture},
        {"power matrix at 2r C(dim+r-1,r) rows", power_matrix_conjecture},
        {"Jacobian rank probe", jacobian},
        {"byte-identical reruns", reproducibility},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        auto start = std::chrono::steady_clock::now();
        Verdict v;
        try
        {
            v = criteria[i].second();
        }
        catch (std::exception const& e)
        {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
        std::printf("%s %2zu %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first, v.detail.c_str(), secs);
        std::fflush(stdout);
        if (!v.pass)
            ++failed;
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed,
                criteria.size());
    return failed ? 1 : 0;
}
