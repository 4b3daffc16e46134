#include "liftcert/tensor_lift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace liftcert
{
namespace
{
std::vector<std::vector<int>> all_permutations(int d)
{
    std::vector<int> p(static_cast<std::size_t>(d));
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do
    {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

Eigen::Index as_index(std::size_t v)
{
    return static_cast<Eigen::Index>(v);
}
}  // namespace

MatrixXd kron(MatrixXd const& a, MatrixXd const& b)
{
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols())
                = a(i, j) * b;
    return out;
}

VectorXd kron_vec(VectorXd const& a, VectorXd const& b)
{
    VectorXd out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

MatrixXd kron_power(MatrixXd const& u, int d)
{
    if (d < 1)
        throw std::invalid_argument("kron_power needs d >= 1");
    MatrixXd out = u;
    for (int j = 1; j < d; ++j)
        out = kron(out, u);
    return out;
}

MatrixXd khatri_rao(MatrixXd const& a, MatrixXd const& b)
{
    if (a.cols() != b.cols())
        throw std::invalid_argument("khatri_rao: column counts differ ("
                                    + std::to_string(a.cols()) + " vs "
                                    + std::to_string(b.cols()) + ")");
    MatrixXd out(a.rows() * b.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.cols(); ++i)
        out.col(i) = kron_vec(a.col(i), b.col(i));
    return out;
}

std::string to_string(LiftKind kind)
{
    return kind == LiftKind::full_kron ? "full_kron" : "symmetrized";
}

LiftMatrix sym_kron(std::vector<MatrixXd> const& factors)
{
    if (factors.empty())
        throw std::invalid_argument("sym_kron needs at least one factor");
    auto n = factors.front().rows();
    auto m = factors.front().cols();
    for (auto const& f : factors)
        if (f.rows() != n || f.cols() != m)
            throw std::invalid_argument("sym_kron: factor shapes differ");
    int d = static_cast<int>(factors.size());

    LiftMatrix lift;
    lift.n = static_cast<int>(n);
    lift.m = static_cast<int>(m);
    lift.d = d;
    lift.kind = LiftKind::symmetrized;
    lift.column_order = enumerate_multi_indices(lift.m, d);

    auto perms = all_permutations(d);
    double weight = 1.0 / static_cast<double>(perms.size());
    lift.data = MatrixXd::Zero(as_index(int_pow(static_cast<std::size_t>(n),
                                                static_cast<std::size_t>(d))),
                               as_index(lift.column_order.size()));
    for (std::size_t c = 0; c < lift.column_order.size(); ++c)
    {
        auto const& idx = lift.column_order[c].entries;
        VectorXd acc = VectorXd::Zero(lift.data.rows());
        for (auto const& p : perms)
        {
            VectorXd t = factors[0].col(idx[static_cast<std::size_t>(p[0])]);
            for (int j = 1; j < d; ++j)
                t = kron_vec(t,
                             factors[static_cast<std::size_t>(j)].col(
                                 idx[static_cast<std::size_t>(p[j])]));
            acc += t;
        }
        lift.data.col(as_index(c)) = weight * acc;
    }
    return lift;
}

LiftMatrix sym_lift(MatrixXd const& u, int d)
{
    if (d < 1)
        throw std::invalid_argument("sym_lift needs d >= 1");
    return sym_kron(std::vector<MatrixXd>(static_cast<std::size_t>(d), u));
}

LiftMatrix kron_lift(MatrixXd const& u, int d)
{
    LiftMatrix lift;
    lift.data = kron_power(u, d);
    lift.n = static_cast<int>(u.rows());
    lift.m = static_cast<int>(u.cols());
    lift.d = d;
    lift.kind = LiftKind::full_kron;
    return lift;
}

VectorXd sym_project(VectorXd const& v, int n, int d)
{
    if (n < 1 || d < 1)
        throw std::invalid_argument("sym_project needs n, d >= 1");
    auto len = int_pow(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
    if (static_cast<std::size_t>(v.size()) != len)
        throw std::invalid_argument("sym_project: vector length "
                                    + std::to_string(v.size()) + " != n^d = "
                                    + std::to_string(len));
    auto perms = all_permutations(d);
    VectorXd out = VectorXd::Zero(v.size());
    std::vector<int> moved(static_cast<std::size_t>(d));
    for (std::size_t f = 0; f < len; ++f)
    {
        auto digits = unflatten(f, n, d);
        double s = 0;
        for (auto const& p : perms)
        {
            for (int j = 0; j < d; ++j)
                moved[static_cast<std::size_t>(j)]
                    = digits[static_cast<std::size_t>(p[j])];
            s += v(as_index(flatten(moved, n)));
        }
        out(as_index(f)) = s / static_cast<double>(perms.size());
    }
    return out;
}

MatrixXd sym_project_columns(MatrixXd const& a, int n, int d)
{
    MatrixXd out(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        out.col(j) = sym_project(a.col(j), n, d);
    return out;
}

MatrixXd sym_projector(int n, int d)
{
    auto len = as_index(int_pow(static_cast<std::size_t>(n),
                                static_cast<std::size_t>(d)));
    return sym_project_columns(MatrixXd::Identity(len, len), n, d);
}

MatrixXd sel_avg(int m, int d)
{
    if (m < 1 || d < 1)
        throw std::invalid_argument("sel_avg needs m, d >= 1");
    auto rows = int_pow(static_cast<std::size_t>(m), static_cast<std::size_t>(d));
    auto cols_idx = enumerate_multi_indices(m, d);
    auto perms = all_permutations(d);
    double weight = 1.0 / static_cast<double>(perms.size());
    MatrixXd s = MatrixXd::Zero(as_index(rows), as_index(cols_idx.size()));
    std::vector<int> t(static_cast<std::size_t>(d));
    for (std::size_t c = 0; c < cols_idx.size(); ++c)
    {
        auto const& idx = cols_idx[c].entries;
        for (auto const& p : perms)
        {
            for (int j = 0; j < d; ++j)
                t[static_cast<std::size_t>(j)]
                    = idx[static_cast<std::size_t>(p[j])];
            s(as_index(flatten(t, m)), as_index(c)) += weight;
        }
    }
    return s;
}

MatrixXd sym_basis(int n, int d)
{
    auto idx = enumerate_multi_indices(n, d);
    auto rows = as_index(int_pow(static_cast<std::size_t>(n),
                                 static_cast<std::size_t>(d)));
    MatrixXd b = MatrixXd::Zero(rows, as_index(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c)
    {
        // orbit of e_I has o(I) distinct tensors, each weighted 1/sqrt(o(I))
        auto orbit = static_cast<double>(idx[c].orderings());
        std::vector<int> t = idx[c].entries;
        do
        {
            b(as_index(flatten(t, n)), as_index(c)) = 1.0 / std::sqrt(orbit);
        } while (std::next_permutation(t.begin(), t.end()));
    }
    return b;
}

std::string to_string(MergeVariant v)
{
    return v == MergeVariant::unit_merge ? "unit_merge" : "weighted_merge";
}

SymMergeOperator sym_merge(int n, int k1, int k2, MergeVariant variant)
{
    if (n < 1 || k1 < 1 || k2 < 1)
        throw std::invalid_argument("sym_merge needs n, k1, k2 >= 1");
    auto left = enumerate_multi_indices(n, k1);
    auto right = enumerate_multi_indices(n, k2);
    auto rows = sym_dim(static_cast<std::size_t>(n),
                        static_cast<std::size_t>(k1 + k2));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(left.size() * right.size());
    for (std::size_t i = 0; i < left.size(); ++i)
    {
        for (std::size_t j = 0; j < right.size(); ++j)
        {
            MultiIndex k = left[i].merged(right[j]);
            double w = 1.0;
            if (variant == MergeVariant::weighted_merge)
                w = std::sqrt(static_cast<double>(left[i].orderings())
                              * static_cast<double>(right[j].orderings())
                              / static_cast<double>(k.orderings()));
            trips.emplace_back(as_index(k.rank()),
                               as_index(i * right.size() + j), w);
        }
    }
    SymMergeOperator op;
    op.n = n;
    op.k1 = k1;
    op.k2 = k2;
    op.variant = variant;
    op.data.resize(as_index(rows), as_index(left.size() * right.size()));
    op.data.setFromTriplets(trips.begin(), trips.end());
    return op;
}

std::string lift_descriptor_json(LiftMatrix const& lift)
{
    nlohmann::ordered_json j;
    j["n"] = lift.n;
    j["m"] = lift.m;
    j["d"] = lift.d;
    j["kind"] = to_string(lift.kind);
    auto order = nlohmann::ordered_json::array();
    if (lift.kind == LiftKind::symmetrized)
    {
        for (auto const& mi : lift.column_order)
        {
            auto e = nlohmann::ordered_json::array();
            for (int v : mi.entries)
                e.push_back(v + 1);
            order.push_back(e);
        }
    }
    else
    {
        std::size_t cols = int_pow(static_cast<std::size_t>(lift.m),
                                   static_cast<std::size_t>(lift.d));
        for (std::size_t c = 0; c < cols; ++c)
        {
            auto e = nlohmann::ordered_json::array();
            for (int v : unflatten(c, lift.m, lift.d))
                e.push_back(v + 1);
            order.push_back(e);
        }
    }
    j["column_order"] = order;
    return j.dump();
}

}  // namespace liftcert
