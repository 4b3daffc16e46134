#include "liftcert/varieties.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "liftcert/io.hpp"
#include "liftcert/multi_index.hpp"
#include "liftcert/spectral.hpp"
#include "liftcert/tensor_lift.hpp"

namespace liftcert
{
namespace
{
Eigen::Index as_index(std::size_t v)
{
    return static_cast<Eigen::Index>(v);
}

//! All size-k subsets of [n] in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k)
{
    std::vector<std::vector<int>> out;
    std::vector<int> c(static_cast<std::size_t>(k));
    std::iota(c.begin(), c.end(), 0);
    if (k > n)
        return out;
    while (true)
    {
        out.push_back(c);
        int j = k - 1;
        while (j >= 0 && c[static_cast<std::size_t>(j)] == n - k + j)
            --j;
        if (j < 0)
            break;
        ++c[static_cast<std::size_t>(j)];
        for (int t = j + 1; t < k; ++t)
            c[static_cast<std::size_t>(t)] = c[static_cast<std::size_t>(t - 1)]
                                             + 1;
    }
    return out;
}

int permutation_sign(std::vector<int> const& p)
{
    int sign = 1;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j)
            if (p[i] > p[j])
                sign = -sign;
    return sign;
}
}  // namespace

int VarietySpec::ambient() const
{
    int n = 1;
    for (int v : dims)
        n *= v;
    return n;
}

int VarietySpec::degree() const
{
    switch (kind)
    {
        case Kind::determinantal:
            return r + 1;
        case Kind::separable:
            return 2;
        default:
            return 0;
    }
}

std::size_t VarietySpec::expected_count() const
{
    switch (kind)
    {
        case Kind::determinantal:
            return binomial(static_cast<std::size_t>(dims[0]),
                            static_cast<std::size_t>(r + 1))
                   * binomial(static_cast<std::size_t>(dims[1]),
                              static_cast<std::size_t>(r + 1));
        case Kind::separable:
        {
            std::size_t prod = 1;
            for (int v : dims)
                prod *= binomial(static_cast<std::size_t>(v + 1), 2);
            return binomial(static_cast<std::size_t>(ambient() + 1), 2) - prod;
        }
        default:
            return 0;
    }
}

std::string VarietySpec::str() const
{
    std::ostringstream os;
    switch (kind)
    {
        case Kind::determinantal:
            os << "determinantal:" << dims[0] << ',' << dims[1] << ',' << r;
            break;
        case Kind::separable:
            os << "separable:";
            for (std::size_t i = 0; i < dims.size(); ++i)
                os << (i ? "," : "") << dims[i];
            break;
        default:
            os << "custom";
    }
    return os.str();
}

VarietySpec VarietySpec::parse(std::string const& text)
{
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("variety: expected kind:sizes, got '"
                                    + text + "'");
    std::string kind = text.substr(0, colon);
    std::vector<int> nums;
    std::istringstream in(text.substr(colon + 1));
    std::string tok;
    while (std::getline(in, tok, ','))
    {
        std::size_t used = 0;
        int v = 0;
        try
        {
            v = std::stoi(tok, &used);
        }
        catch (std::exception const&)
        {
            used = 0;
        }
        if (used == 0 || used != tok.size())
            throw std::invalid_argument("variety: size '" + tok
                                        + "' is not an integer");
        nums.push_back(v);
    }
    VarietySpec s;
    if (kind == "determinantal")
    {
        if (nums.size() != 3)
            throw std::invalid_argument("variety: determinantal needs n1,n2,r");
        s.kind = Kind::determinantal;
        s.dims = {nums[0], nums[1]};
        s.r = nums[2];
        if (s.r < 1 || s.r >= std::min(nums[0], nums[1]))
            throw std::invalid_argument("variety: r must satisfy "
                                        "1 <= r < min(n1, n2)");
    }
    else if (kind == "separable")
    {
        if (nums.size() < 2)
            throw std::invalid_argument("variety: separable needs two or more "
                                        "dimensions");
        for (int v : nums)
            if (v < 2)
                throw std::invalid_argument("variety: separable dimensions "
                                            "must be >= 2");
        s.kind = Kind::separable;
        s.dims = nums;
    }
    else
    {
        throw std::invalid_argument("variety: unknown kind '" + kind + "'");
    }
    return s;
}

double VarietyOperator::density() const
{
    return double(p)
           / double(sym_dim(static_cast<std::size_t>(n),
                            static_cast<std::size_t>(d)));
}

MatrixXd determinantal_generators(int n1, int n2, int r)
{
    if (r < 1 || r >= std::min(n1, n2))
        throw std::invalid_argument("determinantal_generators: r out of range");
    int d = r + 1;
    int nvar = n1 * n2;
    auto rows = combinations(n1, d);
    auto cols = combinations(n2, d);
    auto len = int_pow(static_cast<std::size_t>(nvar),
                       static_cast<std::size_t>(d));
    MatrixXd g = MatrixXd::Zero(as_index(len),
                                as_index(rows.size() * cols.size()));
    double inv_fact = 1.0 / double(factorial(static_cast<std::size_t>(d)));
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::size_t k = 0;
    for (auto const& rs : rows)
    {
        for (auto const& cs : cols)
        {
            std::iota(perm.begin(), perm.end(), 0);
            do
            {
                int sign = permutation_sign(perm);
                std::vector<int> vars(static_cast<std::size_t>(d));
                for (int t = 0; t < d; ++t)
                    vars[static_cast<std::size_t>(t)]
                        = rs[static_cast<std::size_t>(t)] * n2
                          + cs[static_cast<std::size_t>(
                              perm[static_cast<std::size_t>(t)])];
                // distinct variables: spread the monomial over its d! orderings
                std::sort(vars.begin(), vars.end());
                do
                {
                    g(as_index(flatten(vars, nvar)), as_index(k))
                        += sign * inv_fact;
                } while (std::next_permutation(vars.begin(), vars.end()));
            } while (std::next_permutation(perm.begin(), perm.end()));
            ++k;
        }
    }
    return g;
}

MatrixXd separable_generators(std::vector<int> const& dims)
{
    if (dims.size() < 2)
        throw std::invalid_argument("separable_generators: need two or more "
                                    "factors");
    for (int v : dims)
        if (v < 2)
            throw std::invalid_argument("separable_generators: dimensions "
                                        "must be >= 2");
    int nvar = 1;
    for (int v : dims)
        nvar *= v;
    auto k = dims.size();
    Eigen::Index len = Eigen::Index(nvar) * nvar;

    // reshuffle e_a (x) e_b to (x)_i (e_{a_i} (x) e_{b_i})
    Eigen::VectorXi target(len);
    std::vector<int> da(k), db(k);
    for (int a = 0; a < nvar; ++a)
    {
        int t = a;
        for (std::size_t i = k; i-- > 0;)
        {
            da[i] = t % dims[i];
            t /= dims[i];
        }
        for (int b = 0; b < nvar; ++b)
        {
            int s = b;
            for (std::size_t i = k; i-- > 0;)
            {
                db[i] = s % dims[i];
                s /= dims[i];
            }
            Eigen::Index idx = 0;
            for (std::size_t i = 0; i < k; ++i)
                idx = idx * dims[i] * dims[i] + da[i] * dims[i] + db[i];
            target(Eigen::Index(a) * nvar + b) = static_cast<int>(idx);
        }
    }
    MatrixXd proj = sym_projector(dims[0], 2);
    for (std::size_t i = 1; i < k; ++i)
        proj = kron(proj, sym_projector(dims[i], 2));

    MatrixXd basis = sym_basis(nvar, 2);
    MatrixXd shuffled = MatrixXd::Zero(len, basis.cols());
    for (Eigen::Index row = 0; row < len; ++row)
        shuffled.row(target(row)) = basis.row(row);
    MatrixXd map = proj * shuffled;

    Eigen::JacobiSVD<MatrixXd> svd(map, Eigen::ComputeFullV);
    VectorXd s = svd.singularValues();
    double tol = 1e-9 * (s.size() ? s(0) : 1.0);
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > tol)
        ++rank;
    MatrixXd kernel = svd.matrixV().rightCols(basis.cols() - rank);
    return basis * kernel;
}

double evaluate_dual(VectorXd const& g, VectorXd const& x, int d)
{
    VectorXd t = x;
    for (int j = 1; j < d; ++j)
        t = kron_vec(t, x);
    if (t.size() != g.size())
        throw std::invalid_argument("evaluate_dual: size mismatch");
    return g.dot(t);
}

VarietyOperator build_phi(MatrixXd const& generators,
                          int n,
                          int d,
                          VarietySpec spec,
                          double rel_tol)
{
    auto len = int_pow(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
    if (static_cast<std::size_t>(generators.rows()) != len)
        throw std::invalid_argument("build_phi: generators must have n^d rows");
    MatrixXd sym = sym_project_columns(generators, n, d);
    MatrixXd q = orthonormalize(sym, rel_tol);
    if (q.cols() == 0)
        throw std::invalid_argument("build_phi: no generators survive "
                                    "orthonormalization");
    VarietyOperator op;
    op.n = n;
    op.d = d;
    op.p = q.cols();
    op.phi = q.transpose();
    op.generators = sym_basis(n, d).transpose() * q;
    op.spec = std::move(spec);
    return op;
}

VarietyOperator make_variety_operator(VarietySpec const& spec)
{
    switch (spec.kind)
    {
        case VarietySpec::Kind::determinantal:
            return build_phi(determinantal_generators(spec.dims[0], spec.dims[1],
                                                      spec.r),
                             spec.ambient(), spec.r + 1, spec);
        case VarietySpec::Kind::separable:
            return build_phi(separable_generators(spec.dims), spec.ambient(), 2,
                             spec);
        default:
            throw std::invalid_argument("make_variety_operator: custom "
                                        "varieties need explicit generators");
    }
}

VectorXd sample_variety_point(VarietySpec const& spec, Stream& rng)
{
    VectorXd x;
    switch (spec.kind)
    {
        case VarietySpec::Kind::determinantal:
        {
            MatrixXd a = rng.gaussian(spec.dims[0], spec.r);
            MatrixXd b = rng.gaussian(spec.r, spec.dims[1]);
            MatrixXd m = a * b;
            x.resize(m.size());
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                    x(i * m.cols() + j) = m(i, j);
            break;
        }
        case VarietySpec::Kind::separable:
        {
            x = rng.gaussian(spec.dims[0], 1).col(0);
            for (std::size_t i = 1; i < spec.dims.size(); ++i)
                x = kron_vec(x, rng.gaussian(spec.dims[i], 1).col(0));
            break;
        }
        default:
            throw std::invalid_argument("sample_variety_point: custom variety");
    }
    return x / x.norm();
}

std::string CertificateReport::verdict() const
{
    return certified ? "certified_far" : "dont_know";
}

CertificateReport certify(VarietyOperator const& op,
                          MatrixXd const& basis,
                          double tolerance)
{
    auto start = std::chrono::steady_clock::now();
    if (basis.rows() != op.n)
        throw std::invalid_argument("certify: basis has "
                                    + std::to_string(basis.rows())
                                    + " rows, variety ambient dimension is "
                                    + std::to_string(op.n));
    Eigen::Index m = basis.cols();
    double gram = (basis.transpose() * basis - MatrixXd::Identity(m, m)).norm();
    if (!(gram <= 1e-8))
        throw std::invalid_argument("certify: basis is not orthonormal (Gram "
                                    "residual "
                                    + format_double(gram) + ")");
    auto cols = sym_dim(static_cast<std::size_t>(m),
                        static_cast<std::size_t>(op.d));
    if (cols > static_cast<std::size_t>(op.p))
        throw std::invalid_argument("certify: C(m+d-1,d) = "
                                    + std::to_string(cols)
                                    + " exceeds the rank budget p = "
                                    + std::to_string(op.p));
    MatrixXd lifted = op.phi * sym_lift(basis, op.d).data;

    CertificateReport rep;
    rep.eta = sigma_k(lifted, as_index(cols));
    rep.m = static_cast<int>(m);
    rep.n = op.n;
    rep.d = op.d;
    rep.tolerance = tolerance;
    rep.certified = rep.eta > tolerance;
    rep.basis_sha256 = sha256_hex(matrix_to_csv(basis));
    rep.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    return rep;
}

}  // namespace liftcert
