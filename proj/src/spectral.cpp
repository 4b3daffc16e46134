#include "liftcert/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace liftcert
{
VectorXd singular_values(MatrixXd const& a)
{
    if (!a.allFinite())
        throw std::invalid_argument("singular_values: matrix has non-finite "
                                    "entries");
    if (a.rows() == 0 || a.cols() == 0)
        return VectorXd();
    Eigen::BDCSVD<MatrixXd> svd(a);
    return svd.singularValues();
}

double sigma_k(MatrixXd const& a, Eigen::Index k)
{
    if (k < 1)
        throw std::invalid_argument("sigma_k: k is 1-based");
    VectorXd s = singular_values(a);
    return k <= s.size() ? s(k - 1) : 0.0;
}

double sigma_min(MatrixXd const& a)
{
    if (a.cols() == 0)
        throw std::invalid_argument("sigma_min of a matrix with no columns");
    return sigma_k(a, a.cols());
}

SpectrumQuery::SpectrumQuery(MatrixXd matrix, std::optional<double> tolerance)
    : matrix_(std::move(matrix)), sigma_(singular_values(matrix_))
{
    tol_ = tolerance ? *tolerance : 1e-10 * largest();
    if (tol_ < 0)
        throw std::invalid_argument("SpectrumQuery tolerance must be >= 0");
}

double SpectrumQuery::sigma(Eigen::Index k) const
{
    if (k < 1)
        throw std::invalid_argument("SpectrumQuery::sigma: k is 1-based");
    return k <= sigma_.size() ? sigma_(k - 1) : 0.0;
}

double SpectrumQuery::least() const
{
    return sigma(matrix_.cols());
}

Eigen::Index SpectrumQuery::rank() const
{
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sigma_.size(); ++i)
        if (sigma_(i) > tol_)
            ++r;
    return r;
}

namespace
{
MatrixXd drop_column(MatrixXd const& u, Eigen::Index i)
{
    MatrixXd o(u.rows(), u.cols() - 1);
    for (Eigen::Index j = 0, c = 0; j < u.cols(); ++j)
        if (j != i)
            o.col(c++) = u.col(j);
    return o;
}

//! Residual of x after least-squares projection onto span(o).
VectorXd residual(MatrixXd const& o, VectorXd const& x)
{
    if (o.cols() == 0)
        return x;
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(o);
    return x - o * cod.solve(x);
}
}  // namespace

double leave_one_out(MatrixXd const& u)
{
    if (u.cols() < 1)
        throw std::invalid_argument("leave_one_out needs at least one column");
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < u.cols(); ++i)
        best = std::min(best, residual(drop_column(u, i), u.col(i)).norm());
    return best;
}

BlockFamily BlockFamily::from_blocks(std::vector<MatrixXd> blocks)
{
    BlockFamily f;
    f.labels.resize(blocks.size());
    std::iota(f.labels.begin(), f.labels.end(), 0);
    f.blocks = std::move(blocks);
    return f;
}

BlockFamily BlockFamily::split(MatrixXd const& a, Eigen::Index block_cols)
{
    if (block_cols < 1 || a.cols() % block_cols != 0)
        throw std::invalid_argument("BlockFamily::split: column count is not "
                                    "a multiple of the block width");
    std::vector<MatrixXd> blocks;
    for (Eigen::Index j = 0; j < a.cols(); j += block_cols)
        blocks.push_back(a.middleCols(j, block_cols));
    return from_blocks(std::move(blocks));
}

void BlockFamily::check() const
{
    if (blocks.empty())
        throw std::invalid_argument("BlockFamily is empty");
    if (labels.size() != blocks.size())
        throw std::invalid_argument("BlockFamily labels and blocks differ in "
                                    "length");
    for (auto const& b : blocks)
        if (b.rows() != blocks.front().rows())
            throw std::invalid_argument("BlockFamily blocks differ in row "
                                        "count");
}

MatrixXd BlockFamily::concat() const
{
    Eigen::Index cols = 0;
    for (auto const& b : blocks)
        cols += b.cols();
    MatrixXd out(blocks.empty() ? 0 : blocks.front().rows(), cols);
    Eigen::Index c = 0;
    for (auto const& b : blocks)
    {
        out.middleCols(c, b.cols()) = b;
        c += b.cols();
    }
    return out;
}

namespace
{
MatrixXd concat_except(std::vector<MatrixXd const*> const& blocks,
                       std::size_t skip,
                       Eigen::Index rows)
{
    Eigen::Index cols = 0;
    for (std::size_t j = 0; j < blocks.size(); ++j)
        if (j != skip)
            cols += blocks[j]->cols();
    MatrixXd out(rows, cols);
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < blocks.size(); ++j)
    {
        if (j == skip)
            continue;
        out.middleCols(c, blocks[j]->cols()) = *blocks[j];
        c += blocks[j]->cols();
    }
    return out;
}
}  // namespace

double block_leave_one_out(BlockFamily const& family)
{
    family.check();
    std::vector<MatrixXd const*> ptrs;
    for (auto const& b : family.blocks)
        ptrs.push_back(&b);
    Eigen::Index rows = family.blocks.front().rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ptrs.size(); ++j)
    {
        MatrixXd others = concat_except(ptrs, j, rows);
        MatrixXd p = orth_complement_projector(others);
        best = std::min(best, sigma_min(p * family.blocks[j]));
    }
    return best;
}

MatrixXd orth_complement_projector(MatrixXd const& columns,
                                   std::optional<double> tolerance)
{
    Eigen::Index n = columns.rows();
    MatrixXd id = MatrixXd::Identity(n, n);
    if (columns.cols() == 0)
        return id;
    if (!columns.allFinite())
        throw std::invalid_argument("orth_complement_projector: non-finite "
                                    "input");
    Eigen::BDCSVD<MatrixXd> svd(columns, Eigen::ComputeThinU);
    VectorXd s = svd.singularValues();
    double tol = tolerance ? *tolerance : 1e-10 * (s.size() ? s(0) : 0.0);
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > tol)
        ++r;
    MatrixXd q = svd.matrixU().leftCols(r);
    MatrixXd p = id - q * q.transpose();
    // symmetrize away rounding so the projector is exactly symmetric
    return 0.5 * (p + p.transpose());
}

std::vector<Eigen::Index> wellcond_column_subset(MatrixXd const& a,
                                                 Eigen::Index k,
                                                 double swap_factor,
                                                 std::optional<double> tolerance)
{
    if (k < 1 || k > std::min(a.rows(), a.cols()))
        throw std::invalid_argument("wellcond_column_subset: k out of range");
    if (swap_factor < 1.0)
        throw std::invalid_argument("wellcond_column_subset: swap_factor < 1");
    Eigen::BDCSVD<MatrixXd> svd(a, Eigen::ComputeThinU);
    VectorXd s = svd.singularValues();
    double tol = tolerance ? *tolerance : 1e-10 * s(0);
    if (!(s(k - 1) > tol))
        throw std::domain_error("wellcond_column_subset: rank below k");

    // project onto the top-k left singular space
    MatrixXd b = svd.matrixU().leftCols(k).transpose() * a;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(b);
    auto const& perm = qr.colsPermutation().indices();
    std::vector<Eigen::Index> sel(perm.data(), perm.data() + k);

    Eigen::Index n = a.cols();
    std::size_t max_iter = 1000 + 20 * static_cast<std::size_t>(n * k);
    for (std::size_t it = 0; it < max_iter; ++it)
    {
        MatrixXd bs(k, k);
        for (Eigen::Index i = 0; i < k; ++i)
            bs.col(i) = b.col(sel[static_cast<std::size_t>(i)]);
        // entry (i, j) is det(B_S with i replaced by j) / det(B_S)
        MatrixXd c = bs.partialPivLu().solve(b);
        Eigen::Index bi = -1, bj = -1;
        double best = swap_factor;
        for (Eigen::Index j = 0; j < n; ++j)
        {
            if (std::find(sel.begin(), sel.end(), j) != sel.end())
                continue;
            for (Eigen::Index i = 0; i < k; ++i)
            {
                if (std::abs(c(i, j)) > best)
                {
                    best = std::abs(c(i, j));
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi < 0)
            break;
        sel[static_cast<std::size_t>(bi)] = bj;
    }
    std::sort(sel.begin(), sel.end());
    return sel;
}

VectorXd spread_vector(MatrixXd const& basis)
{
    Eigen::Index k = basis.cols();
    if (k < 1 || k > basis.rows())
        throw std::invalid_argument("spread_vector: basis shape");
    double gram = (basis.transpose() * basis
                   - MatrixXd::Identity(k, k)).norm();
    if (gram > 1e-8)
        throw std::invalid_argument("spread_vector: basis is not orthonormal "
                                    "(Gram residual "
                                    + std::to_string(gram) + ")");
    // a local volume maximizer makes every row a combination of the chosen
    // rows with coefficients at most 1 in magnitude
    auto rows = wellcond_column_subset(basis.transpose(), k, 1.0 + 1e-9);
    MatrixXd uj(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        uj.row(i) = basis.row(rows[static_cast<std::size_t>(i)]);
    VectorXd target = VectorXd::Constant(k, 1.0 / std::sqrt(double(k)));
    VectorXd alpha = uj.partialPivLu().solve(target);
    VectorXd u = basis * alpha;
    return u / u.norm();
}

Eigen::Index spread_count(VectorXd const& v, Eigen::Index k)
{
    double level = 1.0 / (double(k) * std::sqrt(double(v.size())));
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) >= level * (1 - 1e-12))
            ++c;
    return c;
}

std::string GoodBlocksResult::to_json() const
{
    nlohmann::ordered_json j;
    j["selected"] = selected;
    nlohmann::ordered_json rs = nlohmann::ordered_json::object();
    for (auto const& [label, s] : relative_sigmas)
        rs[std::to_string(label)] = s;
    j["relative_sigmas"] = rs;
    j["params"] = {{"delta", delta},
                   {"c1_inclusion", params.inclusion_factor},
                   {"survival_factor", params.survival_factor},
                   {"c2", params.c2},
                   {"orth_threshold", orth_threshold},
                   {"sigma_index", sigma_index},
                   {"restarts", params.restarts},
                   {"rounds", rounds}};
    j["seed"] = seed;
    return j.dump();
}

GoodBlocksResult good_blocks(BlockFamily const& family,
                             double delta,
                             Stream rng,
                             GoodBlocksParams const& params)
{
    family.check();
    if (!(delta > 0 && delta <= 1))
        throw std::invalid_argument("good_blocks: delta must be in (0, 1]");
    auto n1 = static_cast<Eigen::Index>(family.blocks.size());
    Eigen::Index n2 = family.blocks.front().cols();
    for (auto const& b : family.blocks)
        if (b.cols() != n2)
            throw std::invalid_argument("good_blocks: blocks differ in width");
    Eigen::Index rows = family.blocks.front().rows();

    GoodBlocksResult res;
    res.delta = delta;
    res.params = params;
    res.seed = rng.key();

    auto k = static_cast<Eigen::Index>(
        std::ceil(delta * double(n1 * n2) - 1e-9));
    MatrixXd all = family.concat();
    res.subset = wellcond_column_subset(all, k);

    std::vector<std::vector<Eigen::Index>> in_block(
        static_cast<std::size_t>(n1));
    for (auto c : res.subset)
        in_block[static_cast<std::size_t>(c / n2)].push_back(c);

    res.orth_threshold = params.orth_threshold
                             ? *params.orth_threshold
                             : 1.0 / (double(k) * double(n1 * n2)
                                      * std::sqrt(delta));
    double need = params.survival_factor * delta * double(n2);
    res.sigma_index = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::ceil(params.c2 * delta * double(n2)
                                               - 1e-9)));

    std::vector<std::size_t> survivors;
    for (int round = 0; round < std::max(1, params.restarts); ++round)
    {
        res.rounds = round + 1;
        std::vector<std::size_t> t;
        for (std::size_t j = 0; j < static_cast<std::size_t>(n1); ++j)
        {
            double alpha = double(in_block[j].size()) / double(n2);
            if (rng.uniform() < params.inclusion_factor * alpha)
                t.push_back(j);
        }
        std::vector<MatrixXd const*> ptrs;
        for (auto j : t)
            ptrs.push_back(&family.blocks[j]);
        survivors.clear();
        for (std::size_t a = 0; a < t.size(); ++a)
        {
            MatrixXd p = orth_complement_projector(concat_except(ptrs, a, rows));
            int count = 0;
            for (auto c : in_block[t[a]])
                if ((p * all.col(c)).norm() >= res.orth_threshold)
                    ++count;
            if (double(count) >= need)
                survivors.push_back(t[a]);
        }
        if (!survivors.empty())
            break;
    }

    std::vector<MatrixXd const*> sp;
    for (auto j : survivors)
        sp.push_back(&family.blocks[j]);
    for (std::size_t a = 0; a < survivors.size(); ++a)
    {
        MatrixXd p = orth_complement_projector(concat_except(sp, a, rows));
        int label = family.labels[survivors[a]];
        res.selected.push_back(label);
        res.relative_sigmas[label]
            = sigma_k(p * family.blocks[survivors[a]], res.sigma_index);
    }
    return res;
}

VectorXd khatri_rao_combination(VectorXd const& alpha,
                                MatrixXd const& u,
                                MatrixXd const& v)
{
    if (u.cols() != v.cols() || alpha.size() != u.cols())
        throw std::invalid_argument("khatri_rao_combination: shapes differ");
    VectorXd p = VectorXd::Zero(u.rows() * v.rows());
    for (Eigen::Index i = 0; i < u.cols(); ++i)
        for (Eigen::Index a = 0; a < u.rows(); ++a)
            p.segment(a * v.rows(), v.rows()) += alpha(i) * u(a, i) * v.col(i);
    return p;
}

MatrixXd jacobian_khatri_rao(VectorXd const& alpha,
                             MatrixXd const& u,
                             MatrixXd const& v)
{
    if (u.cols() != v.cols() || alpha.size() != u.cols())
        throw std::invalid_argument("jacobian_khatri_rao: shapes differ");
    Eigen::Index nu = u.rows(), nv = v.rows(), m = u.cols();
    MatrixXd j = MatrixXd::Zero(nu * nv, (nu + nv) * m);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        // d/du_i[a]: block a of the output is alpha_i v_i
        for (Eigen::Index a = 0; a < nu; ++a)
            j.col(i * nu + a).segment(a * nv, nv) = alpha(i) * v.col(i);
        // d/dv_i[b]: entry (a, b) is alpha_i u_i[a]
        for (Eigen::Index b = 0; b < nv; ++b)
            for (Eigen::Index a = 0; a < nu; ++a)
                j(a * nv + b, nu * m + i * nv + b) = alpha(i) * u(a, i);
    }
    return j;
}

MatrixXd jacobian_khatri_rao_fd(VectorXd const& alpha,
                                MatrixXd const& u,
                                MatrixXd const& v,
                                double step)
{
    Eigen::Index nu = u.rows(), nv = v.rows(), m = u.cols();
    MatrixXd j(nu * nv, (nu + nv) * m);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        for (Eigen::Index a = 0; a < nu; ++a)
        {
            MatrixXd up = u, um = u;
            up(a, i) += step;
            um(a, i) -= step;
            j.col(i * nu + a) = (khatri_rao_combination(alpha, up, v)
                                 - khatri_rao_combination(alpha, um, v))
                                / (2 * step);
        }
        for (Eigen::Index b = 0; b < nv; ++b)
        {
            MatrixXd vp = v, vm = v;
            vp(b, i) += step;
            vm(b, i) -= step;
            j.col(nu * m + i * nv + b) = (khatri_rao_combination(alpha, u, vp)
                                          - khatri_rao_combination(alpha, u, vm))
                                         / (2 * step);
        }
    }
    return j;
}

Eigen::Index count_large_singulars(MatrixXd const& a, double tau)
{
    if (tau < 0)
        throw std::invalid_argument("count_large_singulars: tau < 0");
    VectorXd s = singular_values(a);
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) >= tau)
            ++c;
    return c;
}

MatrixXd orthonormalize(MatrixXd const& a, double rel_tol)
{
    std::vector<VectorXd> kept;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
    {
        VectorXd x = a.col(j);
        double norm0 = x.norm();
        if (norm0 == 0)
            continue;
        for (int pass = 0; pass < 2; ++pass)
            for (auto const& q : kept)
                x -= q.dot(x) * q;
        double r = x.norm();
        if (r <= rel_tol * norm0)
            continue;
        kept.push_back(x / r);
    }
    MatrixXd q(a.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j)
        q.col(static_cast<Eigen::Index>(j)) = kept[j];
    return q;
}

}  // namespace liftcert
