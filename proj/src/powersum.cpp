#include "liftcert/powersum.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "liftcert/multi_index.hpp"
#include "liftcert/smoothing.hpp"
#include "liftcert/spectral.hpp"

namespace liftcert
{
namespace
{
Eigen::Index sz(std::size_t v)
{
    return static_cast<Eigen::Index>(v);
}

MatrixXd vec_row_major(MatrixXd const& u)
{
    MatrixXd out(u.size(), 1);
    for (Eigen::Index i = 0; i < u.rows(); ++i)
        for (Eigen::Index j = 0; j < u.cols(); ++j)
            out(i * u.cols() + j, 0) = u(i, j);
    return out;
}
}  // namespace

void PowerSumInstance::check() const
{
    auto k = F.cols();
    double orth = (F.transpose() * F - MatrixXd::Identity(k, k)).norm();
    if (!(orth <= 1e-10))
        throw std::logic_error("PowerSumInstance: F is not orthonormal");
    double cross = (F.transpose() * A).norm();
    if (!(cross <= 1e-8 * std::max(A.norm(), 1.0)))
        throw std::logic_error("PowerSumInstance: F is not orthogonal to A");
}

MatrixXd orthonormal_complement(MatrixXd const& a)
{
    Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullU);
    VectorXd s = svd.singularValues();
    double tol = 1e-10 * (s.size() ? s(0) : 1.0);
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > tol)
        ++rank;
    MatrixXd f = svd.matrixU().rightCols(a.rows() - rank);
    for (Eigen::Index j = 0; j < f.cols(); ++j)
    {
        for (Eigen::Index i = 0; i < f.rows(); ++i)
        {
            if (std::abs(f(i, j)) > 1e-14)
            {
                if (f(i, j) < 0)
                    f.col(j) *= -1;
                break;
            }
        }
    }
    return f;
}

PowerSumInstance make_power_sum_instance(MatrixXd const& base, int n,
                                         double rho, std::uint64_t seed)
{
    auto n2 = sz(sym_dim(static_cast<std::size_t>(n), 2));
    if (base.rows() != n2)
        throw std::invalid_argument("power sum base must have C(n+1,2) = "
                                    + std::to_string(n2) + " rows");
    if (base.cols() >= n2)
        throw std::invalid_argument("power sum instance needs m < C(n+1,2)");
    PowerSumInstance inst;
    inst.n = n;
    inst.m = static_cast<int>(base.cols());
    inst.rho = rho;
    inst.seed = seed;
    inst.base = base;
    inst.A = perturb(base, rho, seed).realized;
    inst.F = orthonormal_complement(inst.A);
    return inst;
}

PowerSumInstance make_power_sum_instance(int n, int m, double rho,
                                         std::uint64_t seed)
{
    auto n2 = sz(sym_dim(static_cast<std::size_t>(n), 2));
    Stream s(seed, 0, "base");
    MatrixXd base = s.gaussian(n2, m);
    for (Eigen::Index j = 0; j < base.cols(); ++j)
        base.col(j).normalize();
    return make_power_sum_instance(base, n, rho, seed);
}

MatrixXd build_sym4_IkronA(PowerSumInstance const& inst, MergeVariant variant)
{
    auto merge = sym_merge(inst.n, 2, 2, variant);
    MatrixXd ik = kron(MatrixXd::Identity(inst.n2(), inst.n2()), inst.A);
    return merge.data * ik;
}

VectorXd antisymmetric_witness(PowerSumInstance const& inst, int i, int j)
{
    if (i < 0 || j < 0 || i >= inst.m || j >= inst.m || i == j)
        throw std::invalid_argument("antisymmetric_witness: bad pair");
    auto n2 = inst.n2();
    VectorXd q = VectorXd::Zero(n2 * inst.m);
    for (Eigen::Index k = 0; k < n2; ++k)
    {
        q(k * inst.m + i) = inst.A(k, j);
        q(k * inst.m + j) = -inst.A(k, i);
    }
    return q;
}

MatrixXd antisymmetric_witnesses(PowerSumInstance const& inst)
{
    auto pairs = sz(binomial(static_cast<std::size_t>(inst.m), 2));
    MatrixXd w(inst.n2() * inst.m, pairs);
    Eigen::Index c = 0;
    for (int i = 0; i < inst.m; ++i)
        for (int j = i + 1; j < inst.m; ++j)
            w.col(c++) = antisymmetric_witness(inst, i, j);
    return w;
}

Eigen::Index numerical_rank(MatrixXd const& a, double abs_tol)
{
    VectorXd s = singular_values(a);
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > abs_tol)
        ++r;
    return r;
}

MatrixXd build_solution_space_M(PowerSumInstance const& inst,
                                MergeVariant variant)
{
    inst.check();
    auto merge = sym_merge(inst.n, 2, 2, variant);
    auto m = inst.m;
    auto nf = inst.F.cols();
    auto cols = sz(binomial(static_cast<std::size_t>(m) + 1, 2))
                + Eigen::Index(m) * nf;
    MatrixXd pre(inst.n2() * inst.n2(), cols);
    Eigen::Index c = 0;
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j)
            pre.col(c++) = kron_vec(inst.A.col(i), inst.A.col(j))
                           + kron_vec(inst.A.col(j), inst.A.col(i));
    for (int i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < nf; ++j)
            pre.col(c++) = kron_vec(inst.A.col(i), inst.F.col(j))
                           + kron_vec(inst.F.col(j), inst.A.col(i));
    return merge.data * pre;
}

MatrixXd build_claim_Q(PowerSumInstance const& inst, double rho1, double rho2)
{
    double rho = inst.rho;
    double f1 = (rho1 / rho) * (rho1 / rho);
    double f2 = (rho2 / rho) * (rho2 / rho);
    if (!(rho1 >= 0) || !(rho2 >= 0) || std::abs(f1 + f2 - 1) > 1e-12)
        throw std::invalid_argument("build_claim_Q: split mismatch, "
                                    "rho1^2 + rho2^2 must equal rho^2");
    // Z2 | Z is Gaussian with mean w Z and variance w (1 - w) rho^2
    double w = f2;
    Stream split(inst.seed, 0, "split");
    MatrixXd z = inst.noise();
    MatrixXd z2 = w * z
                  + split.gaussian(z.rows(), z.cols(),
                                   std::sqrt(w * (1 - w)) * rho);
    MatrixXd q(inst.n2(), inst.n2());
    q << inst.A + z2, inst.F;
    return q;
}

long projected_V_budget(int n, int m, int ell)
{
    return long(n) * n - long(n) * ell
           - long(m) * long(binomial(static_cast<std::size_t>(ell) + 1, 2)) - m
           + 1;
}

MatrixXd build_projected_V(std::vector<MatrixXd> const& mats, int ell)
{
    if (mats.empty())
        throw std::invalid_argument("build_projected_V: no matrices");
    int n = static_cast<int>(mats.front().rows());
    int m = static_cast<int>(mats.size());
    for (auto const& u : mats)
        if (u.rows() != n || u.cols() != n)
            throw std::invalid_argument("build_projected_V: matrices must be "
                                        "square and share a size");
    if (ell < 1 || ell > n)
        throw std::invalid_argument("build_projected_V: need 1 <= ell <= n");
    long r = projected_V_budget(n, m, ell);
    if (r <= 0)
        throw std::invalid_argument("build_projected_V: dimension budget r = "
                                    + std::to_string(r) + " is not positive");
    auto per = sz(sym_dim(static_cast<std::size_t>(ell), 2));
    MatrixXd v(Eigen::Index(n) * n, per * m + m);
    for (int t = 0; t < m; ++t)
        v.middleCols(t * per, per)
            = sym_lift(mats[static_cast<std::size_t>(t)].leftCols(ell), 2).data;
    for (int t = 0; t < m; ++t)
        v.col(per * m + t) = vec_row_major(mats[static_cast<std::size_t>(t)]);
    return v;
}

std::vector<MatrixXd> smoothed_square_matrices(int n, int m, double rho,
                                               std::uint64_t seed)
{
    Stream base(seed, 0, "base");
    std::vector<MatrixXd> out;
    for (int t = 0; t < m; ++t)
    {
        MatrixXd u = base.gaussian(n, n);
        u /= u.norm();
        out.push_back(perturb(u, rho, combine_keys(seed, std::uint64_t(t)))
                          .realized);
    }
    return out;
}

MatrixXd build_sym6_lift(MatrixXd const& c, int n)
{
    if (c.rows() != Eigen::Index(n) * n)
        throw std::invalid_argument("build_sym6_lift: C must have n^2 rows");
    return sym_project_columns(sym_lift(c, 3).data, n, 6);
}

MatrixXd smoothed_symmetric_columns(int n, int m, double rho,
                                    std::uint64_t seed)
{
    Stream base(seed, 0, "base");
    Stream noise(seed, 0, "noise");
    MatrixXd c(Eigen::Index(n) * n, m);
    for (int t = 0; t < m; ++t)
    {
        MatrixXd b = base.gaussian(n, n);
        b /= b.norm();
        MatrixXd u = b + noise.gaussian(n, n, rho);
        MatrixXd s = 0.5 * (u + u.transpose());
        c.col(t) = vec_row_major(s).col(0);
    }
    return c;
}

ClusteringInstance make_clustering_instance(int n, int m, int s, int d,
                                            double rho, std::uint64_t seed)
{
    if (m >= n)
        throw std::invalid_argument("clustering instance needs m < n");
    ClusteringInstance inst;
    inst.d = d;
    Stream base(seed, 0, "base");
    Stream noise(seed, 0, "noise");
    double sd = rho / std::sqrt(double(n));
    for (int i = 0; i < s; ++i)
    {
        MatrixXd p = orthonormalize(base.gaussian(n, m));
        MatrixXd g = noise.gaussian(n, m, sd);
        inst.bases.push_back(orthonormalize(p + g));
    }
    return inst;
}

ClusteringInstance duplicated_clustering_instance(int n, int m, int d,
                                                  std::uint64_t seed)
{
    ClusteringInstance inst;
    inst.d = d;
    Stream base(seed, 0, "base");
    MatrixXd p = orthonormalize(base.gaussian(n, m));
    inst.bases = {p, p};
    return inst;
}

MatrixXd build_block_lift(ClusteringInstance const& inst)
{
    if (inst.bases.empty())
        throw std::invalid_argument("build_block_lift: no bases");
    auto n = static_cast<std::size_t>(inst.bases.front().rows());
    auto m = static_cast<std::size_t>(inst.bases.front().cols());
    auto d = static_cast<std::size_t>(inst.d);
    auto per = sym_dim(m, d);
    if (per * inst.bases.size() > sym_dim(n, d))
        throw std::invalid_argument("build_block_lift: s C(m+d-1,d) exceeds "
                                    "C(n+d-1,d)");
    MatrixXd out(sz(int_pow(n, d)), sz(per * inst.bases.size()));
    for (std::size_t i = 0; i < inst.bases.size(); ++i)
    {
        if (static_cast<std::size_t>(inst.bases[i].rows()) != n
            || static_cast<std::size_t>(inst.bases[i].cols()) != m)
            throw std::invalid_argument("build_block_lift: bases differ in "
                                        "shape");
        out.middleCols(sz(i * per), sz(per))
            = sym_lift(inst.bases[i], inst.d).data;
    }
    return out;
}

VectorXd monomial_vector(VectorXd const& x, int r)
{
    auto idx = enumerate_multi_indices(static_cast<int>(x.size()), r);
    VectorXd out(sz(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
    {
        double p = 1;
        for (int e : idx[k].entries)
            p *= x(e);
        out(sz(k)) = p;
    }
    return out;
}

MatrixXd build_power_matrix(MatrixXd const& points, int r)
{
    if (r < 1)
        throw std::invalid_argument("build_power_matrix needs r >= 1");
    auto idx = enumerate_multi_indices(static_cast<int>(points.rows()), r);
    MatrixXd out(points.cols(), sz(idx.size()));
    for (Eigen::Index i = 0; i < points.cols(); ++i)
    {
        for (std::size_t k = 0; k < idx.size(); ++k)
        {
            double p = double(idx[k].orderings());
            for (int e : idx[k].entries)
                p *= points(e, i);
            out(i, sz(k)) = p;
        }
    }
    return out;
}

SmallBallEstimate
small_ball_estimate(std::function<VectorXd(Stream&)> const& row_sampler,
                    VectorXd const& a,
                    double eps,
                    std::size_t trials,
                    Stream const& rng)
{
    if (trials == 0)
        throw std::invalid_argument("small_ball_estimate: trials must be > 0");
    if (std::abs(a.norm() - 1) > 1e-10)
        throw std::invalid_argument("small_ball_estimate: a must be a unit "
                                    "vector");
    SmallBallEstimate est;
    est.trials = trials;
    for (std::size_t t = 0; t < trials; ++t)
    {
        Stream s = rng.child(std::uint64_t(t));
        VectorXd row = row_sampler(s);
        if (std::abs(row.dot(a)) < eps)
            ++est.hits;
    }
    est.frequency = double(est.hits) / double(trials);
    est.interval = wilson_interval(est.hits, trials);
    return est;
}

}  // namespace liftcert
