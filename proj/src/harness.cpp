#include "liftcert/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "liftcert/multi_index.hpp"
#include "liftcert/powersum.hpp"
#include "liftcert/smoothing.hpp"
#include "liftcert/spectral.hpp"
#include "liftcert/tensor_lift.hpp"
#include "liftcert/varieties.hpp"

namespace liftcert
{
namespace
{
struct TargetInfo
{
    std::string name;
    std::string description;
    json defaults;
};

std::vector<TargetInfo> const& target_table()
{
    static std::vector<TargetInfo> const table = {
        {"thm51",
         "sigma_min(Phi U~^(*)d) for a random rank ceil(delta C(n+d-1,d)) "
         "symmetric projector; base random|zero|kernel_aligned|duplicate",
         {{"n", 10}, {"d", 2}, {"m", 2}, {"delta", 0.5}, {"base", "random"}}},
        {"thm52",
         "sigma_{m^d}(Psi (U~1 (x) ... (x) U~d)) for a random row-orthonormal "
         "Psi of rank ceil(delta C(n+d-1,d))",
         {{"n", 10}, {"d", 2}, {"m", 2}, {"delta", 0.5}}},
        {"cor53",
         "sigma_min(Phi [U~1^(*)d ... U~t^(*)d]) for t independently "
         "smoothed blocks",
         {{"n", 10}, {"d", 2}, {"m", 2}, {"t", 3}, {"delta", 0.5}}},
        {"certify",
         "eta of the variety certificate on a smoothed basis near the "
         "variety; basis random|planted",
         {{"variety", "determinantal:4,4,1"},
          {"m", 3},
          {"basis", "random"}}},
        {"prop71",
         "sigma_min(Sym_6 C^(*)3) for smoothed symmetric n x n columns",
         {{"n", 3}, {"m", 3}}},
        {"prop72",
         "sigma_min of [S1 (*) S1 ... vec(U1) ...] for m smoothed n x n "
         "matrices restricted to ell columns",
         {{"n", 6}, {"m", 2}, {"ell", 2}}},
        {"prop73",
         "rank of merge(I (x) A) at tol equals m N2 - C(m,2) and the "
         "antisymmetric witnesses vanish",
         {{"n", 4}, {"m", 3}, {"tol", 1e-8}, {"variant", "unit"}}},
        {"lemma74",
         "sigma_min of the solution-space matrix M",
         {{"n", 4}, {"m", 3}, {"variant", "unit"}}},
        {"claim77",
         "sigma_min of Q = (A + Z2, F) with an equal or custom noise split",
         {{"n", 4}, {"m", 3}, {"rho2_fraction", 0.5}}},
        {"conj81",
         "sigma_min([V1^(*)d ... Vs^(*)d]) for orthonormalized smoothed "
         "subspace bases; base random|duplicate",
         {{"n", 8}, {"m", 2}, {"s", 2}, {"d", 2}, {"base", "random"}}},
        {"conj82",
         "sigma_min of the power-coefficient matrix of N smoothed points "
         "(N = 0 selects 2 r C(dim+r-1, r))",
         {{"dim", 3}, {"r", 2}, {"N", 0}}},
        {"caa_probe",
         "|M alpha| against h times the pilot median for M = U~ (.) V~ and "
         "k-sparse alpha; sweeps h_grid",
         {{"n", 10},
          {"m", 20},
          {"k", 4},
          {"delta", 1.0},
          {"rho", 0.1},
          {"pilot_trials", 200},
          {"base", "random"}}},
        {"jacobian_probe",
         "count of Khatri-Rao Jacobian singular values >= tau_factor rho "
         "against n k / 2",
         {{"n", 10},
          {"m", 20},
          {"k", 5},
          {"tau_factor", 0.1},
          {"base", "zero"}}},
        {"sigma_basic",
         "sigma_{k/2}(V~ diag(alpha)) against h rho delta; failure rate "
         "against 10 x exp(-kn log(1/h) / 8)",
         {{"n", 12},
          {"k", 4},
          {"delta", 1.0},
          {"h", 0.3},
          {"base", "random"}}},
        {"constant",
         "control: sigma_min of a fixed seeded matrix, independent of rho",
         {{"n", 4}}},
    };
    return table;
}

TargetInfo const& find_target(std::string const& name)
{
    for (auto const& t : target_table())
        if (t.name == name)
            return t;
    throw ConfigError("config: field 'target': unknown target '" + name + "'");
}

//---------------------------------------------------------------------------//
// Typed parameter access; errors name the field.

int get_int(json const& p, char const* key)
{
    auto const& v = p.at(key);
    if (!v.is_number_integer())
        throw ConfigError(std::string("config: field 'params.") + key
                          + "' must be an integer");
    return v.get<int>();
}

int get_positive(json const& p, char const* key)
{
    int v = get_int(p, key);
    if (v < 1)
        throw ConfigError(std::string("config: field 'params.") + key
                          + "' must be >= 1");
    return v;
}

double get_real(json const& p, char const* key)
{
    auto const& v = p.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>()))
        throw ConfigError(std::string("config: field 'params.") + key
                          + "' must be a finite number");
    return v.get<double>();
}

std::string get_string(json const& p, char const* key)
{
    auto const& v = p.at(key);
    if (!v.is_string())
        throw ConfigError(std::string("config: field 'params.") + key
                          + "' must be a string");
    return v.get<std::string>();
}

std::string get_choice(json const& p,
                       char const* key,
                       std::vector<std::string> const& allowed)
{
    auto v = get_string(p, key);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
    {
        std::string list;
        for (auto const& a : allowed)
            list += (list.empty() ? "" : "|") + a;
        throw ConfigError(std::string("config: field 'params.") + key
                          + "' must be one of " + list);
    }
    return v;
}

MergeVariant get_variant(json const& p)
{
    return get_choice(p, "variant", {"unit", "weighted"}) == "unit"
               ? MergeVariant::unit_merge
               : MergeVariant::weighted_merge;
}

Eigen::Index projector_rank(int n, int d, double delta)
{
    auto dim = sym_dim(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
    if (!(delta > 0) || delta > 1)
        throw ConfigError("config: field 'params.delta' must be in (0, 1]");
    return static_cast<Eigen::Index>(std::ceil(delta * double(dim) - 1e-12));
}

Eigen::Index sz(std::size_t v)
{
    return static_cast<Eigen::Index>(v);
}

bool compare(double value, double threshold, Direction dir)
{
    return dir == Direction::at_least ? value >= threshold : value <= threshold;
}

//---------------------------------------------------------------------------//
// Trial bodies. Each takes the resolved params, the grid value and the
// trial seed; streams are keyed by role so arms of a sweep share noise.

double trial_thm51(json const& p, double rho, std::uint64_t seed)
{
    int n = get_positive(p, "n");
    int d = get_positive(p, "d");
    int m = get_positive(p, "m");
    auto rank = projector_rank(n, d, get_real(p, "delta"));
    auto base_kind = get_choice(p, "base",
                                {"random", "zero", "kernel_aligned",
                                 "duplicate"});
    Stream base_rng(seed, 0, "base");
    Stream phi_rng(seed, 0, "phi");
    MatrixXd base;
    std::optional<VectorXd> avoid;
    if (base_kind == "zero")
    {
        base = MatrixXd::Zero(n, m);
    }
    else
    {
        base = random_unit_columns(n, m, base_rng);
        if (base_kind == "duplicate" && m >= 2)
            base.col(1) = base.col(0);
        if (base_kind == "kernel_aligned")
            avoid = VectorXd(base.col(0));
    }
    MatrixXd phi = random_sym_operator(n, d, rank, phi_rng, avoid);
    MatrixXd u = perturb(base, rho, seed).realized;
    return sigma_min(phi * sym_lift(u, d).data);
}

double trial_thm52(json const& p, double rho, std::uint64_t seed)
{
    int n = get_positive(p, "n");
    int d = get_positive(p, "d");
    int m = get_positive(p, "m");
    auto rank = projector_rank(n, d, get_real(p, "delta"));
    Stream base_rng(seed, 0, "base");
    Stream psi_rng(seed, 0, "phi");
    auto cols = sz(int_pow(static_cast<std::size_t>(n),
                           static_cast<std::size_t>(d)));
    MatrixXd psi = random_row_orthonormal(rank, cols, psi_rng);
    MatrixXd prod;
    for (int j = 0; j < d; ++j)
    {
        MatrixXd b = random_unit_columns(n, m, base_rng);
        MatrixXd u = perturb(b, rho, combine_keys(seed, std::uint64_t(j)))
                         .realized;
        prod = j == 0 ? u : kron(prod, u);
    }
    return sigma_min(psi * prod);
}

double trial_cor53(json const& p, double rho, std::uint64_t seed)
{
    int n = get_positive(p, "n");
    int d = get_positive(p, "d");
    int m = get_positive(p, "m");
    int t = get_positive(p, "t");
    auto rank = projector_rank(n, d, get_real(p, "delta"));
    auto per = sz(sym_dim(static_cast<std::size_t>(m),
                          static_cast<std::size_t>(d)));
    if (per * t > rank)
        throw std::invalid_argument("cor53: t C(m+d-1,d) exceeds the "
                                    "projector rank");
    Stream base_rng(seed, 0, "base");
    Stream phi_rng(seed, 0, "phi");
    MatrixXd phi = random_sym_operator(n, d, rank, phi_rng);
    MatrixXd all(phi.cols(), per * t);
    for (int j = 0; j < t; ++j)
    {
        MatrixXd b = random_unit_columns(n, m, base_rng);
        MatrixXd u = perturb(b, rho, combine_keys(seed, std::uint64_t(j)))
                         .realized;
        all.middleCols(j * per, per) = sym_lift(u, d).data;
    }
    return sigma_min(phi * all);
}

double trial_certify(json const& p,
                     VarietyOperator const& op,
                     double rho,
                     std::uint64_t seed)
{
    int m = get_positive(p, "m");
    auto kind = get_choice(p, "basis", {"random", "planted"});
    Stream base_rng(seed, 0, "base");
    MatrixXd base(op.n, m);
    for (int j = 0; j < m; ++j)
        base.col(j) = sample_variety_point(op.spec, base_rng);
    MatrixXd u = perturb(base, rho, seed).realized;
    if (kind == "planted")
    {
        u.col(0).setZero();
        u(0, 0) = 1;
    }
    MatrixXd basis = orthonormalize(u);
    if (basis.cols() < m)
        return 0.0;
    return certify(op, basis).eta;
}

double trial_prop71(json const& p, double rho, std::uint64_t seed)
{
    int n = get_positive(p, "n");
    int m = get_positive(p, "m");
    MatrixXd c = smoothed_symmetric_columns(n, m, rho, seed);
    return sigma_min(build_sym6_lift(c, n));
}

double trial_prop72(json const& p, double rho, std::uint64_t seed)
{
    int n = get_positive(p, "n");
    int m = get_positive(p, "m");
    int ell = get_positive(p, "ell");
    return sigma_min(
        build_projected_V(smoothed_square_matrices(n, m, rho, seed), ell));
}

TrialOutcome trial_prop73(json const& p, double rho, std::uint64_t seed)
{
    int n = get_positive(p, "n");
    int m = get_positive(p, "m");
    double tol = get_real(p, "tol");
    auto inst = make_power_sum_instance(n, m, rho, seed);
    MatrixXd op = build_sym4_IkronA(inst, get_variant(p));
    VectorXd s = singular_values(op);
    auto target = inst.n2() * m
                  - sz(binomial(static_cast<std::size_t>(m), 2));
    double at = target <= s.size() ? s(target - 1) : 0.0;
    double next = target < s.size() ? s(target) : 0.0;
    double witness = 0;
    if (m >= 2)
    {
        // witnesses are exact zeros of the unit merge only
        MatrixXd w = antisymmetric_witnesses(inst);
        MatrixXd unit = build_sym4_IkronA(inst, MergeVariant::unit_merge);
        witness = (unit * w).colwise().norm().maxCoeff();
    }
    TrialOutcome out;
    out.value = at;
    out.threshold = tol;
    out.pass = at > tol && next <= tol && witness <= tol;
    return out;
}

double trial_lemma74(json const& p, double rho, std::uint64_t seed)
{
    auto inst = make_power_sum_instance(get_positive(p, "n"),
                                        get_positive(p, "m"), rho, seed);
    return sigma_min(build_solution_space_M(inst, get_variant(p)));
}

double trial_claim77(json const& p, double rho, std::uint64_t seed)
{
    double f = get_real(p, "rho2_fraction");
    if (!(f >= 0) || f > 1)
        throw ConfigError("config: field 'params.rho2_fraction' must be in "
                          "[0, 1]");
    auto inst = make_power_sum_instance(get_positive(p, "n"),
                                        get_positive(p, "m"), rho, seed);
    double rho2 = rho * std::sqrt(f);
    double rho1 = rho * std::sqrt(1 - f);
    return sigma_min(build_claim_Q(inst, rho1, rho2));
}

double trial_conj81(json const& p, double rho, std::uint64_t seed)
{
    int n = get_positive(p, "n");
    int m = get_positive(p, "m");
    int s = get_positive(p, "s");
    int d = get_positive(p, "d");
    auto kind = get_choice(p, "base", {"random", "duplicate"});
    auto inst = kind == "random"
                    ? make_clustering_instance(n, m, s, d, rho, seed)
                    : duplicated_clustering_instance(n, m, d, seed);
    return sigma_min(build_block_lift(inst));
}

int conj82_rows(json const& p)
{
    int dim = get_positive(p, "dim");
    int r = get_positive(p, "r");
    int rows = get_int(p, "N");
    if (rows == 0)
        rows = 2 * r
               * static_cast<int>(sym_dim(static_cast<std::size_t>(dim),
                                          static_cast<std::size_t>(r)));
    return rows;
}

double trial_conj82(json const& p, double sigma, std::uint64_t seed)
{
    int dim = get_positive(p, "dim");
    int r = get_positive(p, "r");
    int rows = conj82_rows(p);
    Stream base_rng(seed, 0, "base");
    MatrixXd base = random_unit_columns(dim, rows, base_rng);
    MatrixXd pts = perturb(base, sigma, seed).realized;
    return sigma_min(build_power_matrix(pts, r));
}

MatrixXd caa_matrix(json const& p, double rho, Stream& base_rng,
                    std::uint64_t noise_seed)
{
    int n = get_positive(p, "n");
    int m = get_positive(p, "m");
    auto kind = get_choice(p, "base", {"random", "zero"});
    MatrixXd bu = MatrixXd::Zero(n, m), bv = MatrixXd::Zero(n, m);
    if (kind == "random")
    {
        bu = random_unit_columns(n, m, base_rng);
        bv = random_unit_columns(n, m, base_rng);
    }
    MatrixXd u = perturb(bu, rho, combine_keys(noise_seed, 1)).realized;
    MatrixXd v = perturb(bv, rho, combine_keys(noise_seed, 2)).realized;
    return khatri_rao(u, v);
}

//! k-sparse test vector with entries delta on a random support, normalized.
VectorXd sparse_test_vector(int m, int k, double delta, Stream& rng)
{
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    // partial Fisher-Yates
    for (int i = 0; i < k; ++i)
    {
        auto j = i + static_cast<int>(rng.below(std::uint64_t(m - i)));
        std::swap(idx[static_cast<std::size_t>(i)],
                  idx[static_cast<std::size_t>(j)]);
    }
    VectorXd a = VectorXd::Zero(m);
    for (int i = 0; i < k; ++i)
        a(idx[static_cast<std::size_t>(i)]) = delta;
    if (k > 0)
        a.normalize();
    return a;
}

double caa_norm(json const& p, std::uint64_t seed)
{
    int m = get_positive(p, "m");
    int k = get_int(p, "k");
    if (k < 1 || k > m)
        throw ConfigError("config: field 'params.k' must be in [1, m]");
    double rho = get_real(p, "rho");
    Stream base_rng(seed, 0, "base");
    Stream alpha_rng(seed, 0, "alpha");
    MatrixXd mm = caa_matrix(p, rho, base_rng, seed);
    VectorXd a = sparse_test_vector(m, k, get_real(p, "delta"), alpha_rng);
    return (mm * a).norm();
}

TrialOutcome trial_jacobian(json const& p, double rho, std::uint64_t seed)
{
    int n = get_positive(p, "n");
    int m = get_positive(p, "m");
    int k = get_int(p, "k");
    if (k < 0 || k > m)
        throw ConfigError("config: field 'params.k' must be in [0, m]");
    double tau = get_real(p, "tau_factor") * rho;
    auto kind = get_choice(p, "base", {"random", "zero"});
    Stream base_rng(seed, 0, "base");
    Stream alpha_rng(seed, 0, "alpha");
    MatrixXd bu = MatrixXd::Zero(n, m), bv = MatrixXd::Zero(n, m);
    if (kind == "random")
    {
        bu = random_unit_columns(n, m, base_rng);
        bv = random_unit_columns(n, m, base_rng);
    }
    MatrixXd u = perturb(bu, rho, combine_keys(seed, 1)).realized;
    MatrixXd v = perturb(bv, rho, combine_keys(seed, 2)).realized;
    VectorXd alpha = sparse_test_vector(m, k, 1.0, alpha_rng);
    if (k > 0)
        alpha *= std::sqrt(double(k));  // unit-magnitude coordinates
    TrialOutcome out;
    out.value = double(count_large_singulars(jacobian_khatri_rao(alpha, u, v),
                                             tau));
    out.threshold = std::ceil(double(n) * k / 2.0);
    out.pass = out.value >= out.threshold;
    return out;
}

TrialOutcome trial_sigma_basic(json const& p, double rho, std::uint64_t seed)
{
    int n = get_positive(p, "n");
    int k = get_positive(p, "k");
    if (k > n)
        throw ConfigError("config: field 'params.k' must be <= n");
    double delta = get_real(p, "delta");
    double h = get_real(p, "h");
    auto kind = get_choice(p, "base", {"random", "zero"});
    Stream base_rng(seed, 0, "base");
    MatrixXd base = kind == "random" ? random_unit_columns(n, k, base_rng)
                                     : MatrixXd::Zero(n, k);
    MatrixXd w = perturb(base, rho, seed).realized * delta;
    TrialOutcome out;
    out.value = sigma_k(w, std::max(1, k / 2));
    out.threshold = h * rho * delta;
    out.pass = out.value >= out.threshold;
    return out;
}

double trial_constant(json const& p, std::uint64_t master)
{
    int n = get_positive(p, "n");
    Stream rng(master, 0, "constant");
    return sigma_min(rng.gaussian(n, n));
}

}  // namespace

//---------------------------------------------------------------------------//

std::vector<std::string> const& experiment_targets()
{
    static std::vector<std::string> const names = [] {
        std::vector<std::string> out;
        for (auto const& t : target_table())
            out.push_back(t.name);
        return out;
    }();
    return names;
}

std::string describe_target(std::string const& target)
{
    return find_target(target).description;
}

json default_params(std::string const& target)
{
    return find_target(target).defaults;
}

std::string ExperimentConfig::grid_name() const
{
    return target == "caa_probe" ? "h" : "rho";
}

namespace
{
//! Non-negative JSON integer, signed or unsigned.
bool is_count(json const& v)
{
    return v.is_number_unsigned()
           || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}
}  // namespace

ExperimentConfig ExperimentConfig::from_json(json const& j)
{
    if (!j.is_object())
        throw ConfigError("config: top level must be a JSON object");
    static std::vector<std::string> const known
        = {"target",    "params",        "rho_grid",   "h_grid",
           "trials",    "master_seed",   "threshold",  "direction",
           "min_pass_rate", "min_passes", "require_scaling"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("config: field '" + it.key() + "' is not "
                              "recognized");

    ExperimentConfig c;
    if (!j.contains("target") || !j["target"].is_string())
        throw ConfigError("config: field 'target' must be a string");
    c.target = j["target"].get<std::string>();
    auto const& info = find_target(c.target);

    c.params = info.defaults;
    if (j.contains("params"))
    {
        if (!j["params"].is_object())
            throw ConfigError("config: field 'params' must be an object");
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
        {
            if (!info.defaults.contains(it.key()))
                throw ConfigError("config: field 'params." + it.key()
                                  + "' is not a parameter of target '"
                                  + c.target + "'");
            auto const& def = info.defaults[it.key()];
            auto const& val = it.value();
            bool ok = (def.is_string() && val.is_string())
                      || (def.is_number_integer() && val.is_number_integer())
                      || (def.is_number_float() && val.is_number());
            if (!ok)
                throw ConfigError("config: field 'params." + it.key()
                                  + "' has the wrong type");
            c.params[it.key()] = val;
        }
    }

    std::string grid_key = c.grid_name() + "_grid";
    if (!j.contains(grid_key) || !j[grid_key].is_array()
        || j[grid_key].empty())
        throw ConfigError("config: field '" + grid_key
                          + "' must be a nonempty array");
    for (auto const& v : j[grid_key])
    {
        if (!v.is_number() || !(v.get<double>() > 0)
            || !std::isfinite(v.get<double>()))
            throw ConfigError("config: field '" + grid_key
                              + "' entries must be positive finite numbers");
        c.grid.push_back(v.get<double>());
    }
    std::string other = c.grid_name() == "h" ? "rho_grid" : "h_grid";
    if (j.contains(other))
        throw ConfigError("config: field '" + other + "' does not apply to "
                          "target '" + c.target + "'");

    if (!j.contains("trials") || !is_count(j["trials"])
        || j["trials"].get<std::int64_t>() < 1)
        throw ConfigError("config: field 'trials' must be a positive integer");
    c.trials = j["trials"].get<std::size_t>();

    if (!j.contains("master_seed") || !is_count(j["master_seed"]))
        throw ConfigError("config: field 'master_seed' must be a "
                          "non-negative integer");
    c.master_seed = j["master_seed"].get<std::uint64_t>();

    if (j.contains("threshold"))
    {
        if (!j["threshold"].is_number())
            throw ConfigError("config: field 'threshold' must be a number");
        c.threshold = j["threshold"].get<double>();
    }
    if (j.contains("direction"))
    {
        auto d = j["direction"].is_string() ? j["direction"].get<std::string>()
                                            : "";
        if (d == "at_least")
            c.direction = Direction::at_least;
        else if (d == "at_most")
            c.direction = Direction::at_most;
        else
            throw ConfigError("config: field 'direction' must be at_least or "
                              "at_most");
    }
    if (j.contains("min_pass_rate"))
    {
        auto const& v = j["min_pass_rate"];
        if (!v.is_number() || v.get<double>() < 0 || v.get<double>() > 1)
            throw ConfigError("config: field 'min_pass_rate' must be in "
                              "[0, 1]");
        c.min_pass_rate = v.get<double>();
    }
    if (j.contains("min_passes"))
    {
        auto const& v = j["min_passes"];
        if (!is_count(v))
            throw ConfigError("config: field 'min_passes' must be a "
                              "non-negative integer");
        c.min_passes = v.get<std::size_t>();
    }
    if (j.contains("require_scaling"))
    {
        if (!j["require_scaling"].is_boolean())
            throw ConfigError("config: field 'require_scaling' must be a "
                              "boolean");
        c.require_scaling = j["require_scaling"].get<bool>();
    }
    return c;
}

ExperimentConfig ExperimentConfig::parse(std::string const& text,
                                         std::string const& source)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError(source + ": malformed JSON: " + e.what());
    }
    try
    {
        return from_json(j);
    }
    catch (ConfigError const& e)
    {
        std::string msg = e.what();
        if (msg.rfind("config:", 0) == 0)
            msg = msg.substr(7);
        throw ConfigError(source + ":" + msg);
    }
}

json ExperimentConfig::to_json() const
{
    json j;
    j["target"] = target;
    j["params"] = params;
    j[grid_name() + "_grid"] = grid;
    j["trials"] = trials;
    j["master_seed"] = master_seed;
    j["threshold"] = threshold;
    j["direction"] = direction == Direction::at_least ? "at_least" : "at_most";
    if (min_pass_rate)
        j["min_pass_rate"] = *min_pass_rate;
    if (min_passes)
        j["min_passes"] = *min_passes;
    j["require_scaling"] = require_scaling;
    return j;
}

//---------------------------------------------------------------------------//

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config))
{
    auto const& p = config_.params;
    find_target(config_.target);
    if (config_.target == "caa_probe")
    {
        // pilot on a stream disjoint from the trial seeds
        int pilot = get_positive(p, "pilot_trials");
        std::uint64_t key = combine_keys(config_.master_seed,
                                         role_tag("caa_pilot"));
        std::vector<double> norms;
        for (int t = 0; t < pilot; ++t)
            norms.push_back(caa_norm(p, trial_seed(key, std::uint64_t(t))));
        caa_median_ = quantile(norms, 0.5);
        if (!(caa_median_ > 0))
            throw std::runtime_error("caa_probe: degenerate pilot, median "
                                     "|M alpha| is zero");
        double delta = get_real(p, "delta");
        calibration_["pilot_median"] = caa_median_;
        calibration_["lambda_hat"] = delta / caa_median_;
    }
    else if (config_.target == "sigma_basic")
    {
        double h = get_real(p, "h");
        int n = get_positive(p, "n");
        int k = get_positive(p, "k");
        if (!(h > 0) || !(h < 0.5))
        {
            applicable_ = false;
            calibration_["not_applicable"]
                = "h must lie in (0, 1/2) for the bound to apply";
        }
        else
        {
            calibration_["bound"] = std::exp(-double(k) * n * std::log(1 / h)
                                             / 8);
        }
    }
    else if (config_.target == "certify")
    {
        auto spec = VarietySpec::parse(get_string(p, "variety"));
        calibration_["p"] = spec.expected_count();
    }
}

TrialOutcome Experiment::trial(double g, std::size_t t) const
{
    auto const& p = config_.params;
    auto const& target = config_.target;
    std::uint64_t seed = trial_seed(config_.master_seed, t);

    TrialOutcome out;
    out.threshold = config_.threshold;
    bool own_pass = false;
    if (target == "thm51")
        out.value = trial_thm51(p, g, seed);
    else if (target == "thm52")
        out.value = trial_thm52(p, g, seed);
    else if (target == "cor53")
        out.value = trial_cor53(p, g, seed);
    else if (target == "certify")
    {
        // the operator is cheap next to the SVD, rebuild per trial
        static thread_local std::string cached_spec;
        static thread_local VarietyOperator cached_op;
        auto spec = get_string(p, "variety");
        if (spec != cached_spec)
        {
            cached_op = make_variety_operator(VarietySpec::parse(spec));
            cached_spec = spec;
        }
        out.value = trial_certify(p, cached_op, g, seed);
    }
    else if (target == "prop71")
        out.value = trial_prop71(p, g, seed);
    else if (target == "prop72")
        out.value = trial_prop72(p, g, seed);
    else if (target == "prop73")
    {
        out = trial_prop73(p, g, seed);
        own_pass = true;
    }
    else if (target == "lemma74")
        out.value = trial_lemma74(p, g, seed);
    else if (target == "claim77")
        out.value = trial_claim77(p, g, seed);
    else if (target == "conj81")
        out.value = trial_conj81(p, g, seed);
    else if (target == "conj82")
        out.value = trial_conj82(p, g, seed);
    else if (target == "caa_probe")
    {
        out.value = caa_norm(p, seed);
        out.threshold = g * caa_median_;
        out.pass = out.value >= out.threshold;
        own_pass = true;
    }
    else if (target == "jacobian_probe")
    {
        out = trial_jacobian(p, g, seed);
        own_pass = true;
    }
    else if (target == "sigma_basic")
    {
        out = trial_sigma_basic(p, g, seed);
        own_pass = true;
    }
    else if (target == "constant")
        out.value = trial_constant(p, config_.master_seed);
    if (!own_pass)
        out.pass = compare(out.value, out.threshold, config_.direction);
    return out;
}

unsigned default_thread_count()
{
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (char const* env = std::getenv("LIFTCERT_THREADS"))
    {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1)
            return static_cast<unsigned>(std::min<long>(v, hw));
    }
    return hw;
}

ScalingReport scaling_study(std::vector<double> const& grid,
                            std::vector<double> const& medians,
                            int d,
                            int n)
{
    if (grid.size() < 3 || grid.size() != medians.size())
        throw std::invalid_argument("scaling_study needs >= 3 grid points");
    ScalingReport rep;
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return grid[a] < grid[b]; });
    rep.monotone = true;
    rep.envelope = true;
    double lo = medians[order[0]], hi = lo;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < order.size(); ++i)
    {
        double g = grid[order[i]], med = medians[order[i]];
        if (i > 0 && med < medians[order[i - 1]])
            rep.monotone = false;
        if (med < std::pow(g, d) / std::pow(double(n), 6))
            rep.envelope = false;
        lo = std::min(lo, med);
        hi = std::max(hi, med);
        if (med > 0)
        {
            lx.push_back(std::log(g));
            ly.push_back(std::log(med));
        }
    }
    rep.flat = hi - lo <= 1e-12 * std::max(std::abs(hi), 1e-300);
    rep.slope = lx.size() >= 2 ? ols_slope(lx, ly) : 0.0;
    return rep;
}

ExperimentReport run_experiment(ExperimentConfig const& config,
                                unsigned threads)
{
    Experiment exp(config);
    ExperimentReport rep;
    rep.config = config;
    rep.applicable = exp.applicable();
    rep.extras = exp.calibration();
    if (!rep.applicable)
    {
        rep.accepted = true;
        return rep;
    }
    std::size_t ng = config.grid.size();
    std::size_t jobs = ng * config.trials;
    rep.trials.resize(jobs);
    if (threads == 0)
        threads = default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (true)
        {
            std::size_t job = next.fetch_add(1);
            if (job >= jobs)
                return;
            std::size_t gi = job / config.trials;
            std::size_t t = job % config.trials;
            try
            {
                auto start = std::chrono::steady_clock::now();
                TrialReport& r = rep.trials[job];
                r.trial = t;
                r.seed = trial_seed(config.master_seed, t);
                r.grid_value = config.grid[gi];
                r.outcome = exp.trial(config.grid[gi], t);
                r.wall_time_ms = std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - start)
                                     .count();
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = jobs;
            }
        }
    };
    if (threads <= 1)
    {
        work();
    }
    else
    {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(work);
        for (auto& th : pool)
            th.join();
    }
    if (error)
        std::rethrow_exception(error);

    std::vector<double> medians;
    json small_ball = json::array();
    for (std::size_t gi = 0; gi < ng; ++gi)
    {
        GridSummary s;
        s.grid_value = config.grid[gi];
        s.trials = config.trials;
        std::vector<double> values;
        for (std::size_t t = 0; t < config.trials; ++t)
        {
            auto const& r = rep.trials[gi * config.trials + t];
            values.push_back(r.outcome.value);
            if (r.outcome.pass)
                ++s.passes;
        }
        s.rate = double(s.passes) / double(s.trials);
        s.interval = wilson_interval(s.passes, s.trials);
        s.stats = summarize(values);
        if (config.min_passes && s.passes < *config.min_passes)
            s.accepted = false;
        if (config.min_pass_rate && s.interval.lower < *config.min_pass_rate)
            s.accepted = false;
        rep.accepted = rep.accepted && s.accepted;
        medians.push_back(s.stats.median);
        rep.grid.push_back(s);
        if (config.target == "caa_probe" || config.target == "sigma_basic")
            small_ball.push_back(1.0 - s.rate);
    }

    auto const& p = config.params;
    if (config.target == "caa_probe")
    {
        rep.extras["small_ball_frequency"] = small_ball;
        // regress log frequency on k log(1/h) over grid points with hits
        std::vector<double> x, y;
        int k = get_int(p, "k");
        for (std::size_t gi = 0; gi < ng; ++gi)
        {
            double f = small_ball[gi].get<double>();
            if (f > 0 && config.grid[gi] < 1)
            {
                x.push_back(k * std::log(1 / config.grid[gi]));
                y.push_back(std::log(f));
            }
        }
        if (x.size() >= 2)
            rep.extras["log_frequency_slope"] = ols_slope(x, y);
    }
    if (config.target == "sigma_basic")
    {
        double bound = rep.extras["bound"].get<double>();
        bool ok = true;
        for (auto const& f : small_ball)
            ok = ok && f.get<double>() <= 10 * bound;
        rep.extras["failure_frequency"] = small_ball;
        rep.extras["bound_ok"] = ok;
        rep.accepted = rep.accepted && ok;
    }
    if (ng >= 3 && config.grid_name() == "rho")
    {
        int d = p.contains("d") ? get_int(p, "d")
                : p.contains("r") ? get_int(p, "r")
                                  : 1;
        int n = p.contains("n") ? get_int(p, "n")
                : p.contains("dim") ? get_int(p, "dim")
                                    : 1;
        rep.scaling = scaling_study(config.grid, medians, d, n);
        if (config.require_scaling)
            rep.accepted = rep.accepted && rep.scaling->monotone
                           && rep.scaling->envelope;
    }
    else if (config.require_scaling)
    {
        throw ConfigError("config: field 'require_scaling' needs a rho_grid "
                          "with at least 3 points");
    }
    return rep;
}

std::string ExperimentReport::csv() const
{
    std::string out = "# config: " + config.to_json().dump() + "\n";
    out += "trial,seed," + config.grid_name() + ",value,threshold,pass\n";
    for (auto const& r : trials)
    {
        out += std::to_string(r.trial) + "," + std::to_string(r.seed) + ","
               + format_double(r.grid_value) + ","
               + format_double(r.outcome.value) + ","
               + format_double(r.outcome.threshold) + ","
               + (r.outcome.pass ? "1" : "0") + "\n";
    }
    return out;
}

std::string ExperimentReport::summary_json() const
{
    json j;
    j["target"] = config.target;
    j["config"] = config.to_json();
    j["applicable"] = applicable;
    json grid_json = json::array();
    for (auto const& s : grid)
    {
        json g;
        g[config.grid_name()] = s.grid_value;
        g["trials"] = s.trials;
        g["passes"] = s.passes;
        g["rate"] = s.rate;
        g["wilson95"] = {s.interval.lower, s.interval.upper};
        g["min"] = s.stats.min;
        g["q1"] = s.stats.q1;
        g["median"] = s.stats.median;
        g["q3"] = s.stats.q3;
        g["max"] = s.stats.max;
        g["accepted"] = s.accepted;
        grid_json.push_back(g);
    }
    j["grid"] = grid_json;
    if (scaling)
    {
        j["scaling"] = {{"monotone", scaling->monotone},
                        {"flat", scaling->flat},
                        {"envelope_rho^d/n^6", scaling->envelope},
                        {"loglog_slope", scaling->slope}};
    }
    j["extras"] = extras;
    j["accepted"] = accepted;
    return j.dump(2) + "\n";
}

//---------------------------------------------------------------------------//

MatrixXd random_row_orthonormal(Eigen::Index p, Eigen::Index cols, Stream& rng)
{
    if (p > cols)
        throw std::invalid_argument("random_row_orthonormal: p > cols");
    MatrixXd q = orthonormalize(rng.gaussian(cols, p));
    if (q.cols() != p)
        throw std::runtime_error("random_row_orthonormal: rank deficient draw");
    return q.transpose();
}

MatrixXd random_sym_operator(int n, int d, Eigen::Index p, Stream& rng,
                             std::optional<VectorXd> const& avoid)
{
    MatrixXd basis = sym_basis(n, d);
    if (p > basis.cols())
        throw std::invalid_argument("random_sym_operator: rank exceeds "
                                    "C(n+d-1,d)");
    MatrixXd g = rng.gaussian(basis.cols(), p);
    if (avoid)
    {
        VectorXd t = *avoid;
        for (int j = 1; j < d; ++j)
            t = kron_vec(t, *avoid);
        VectorXd c = basis.transpose() * t;
        if (c.norm() > 0)
        {
            c.normalize();
            g -= c * (c.transpose() * g);
            if (p == basis.cols())
                throw std::invalid_argument("random_sym_operator: cannot "
                                            "avoid a tensor at full rank");
        }
    }
    MatrixXd q = orthonormalize(g);
    if (q.cols() != p)
        throw std::runtime_error("random_sym_operator: rank deficient draw");
    return (basis * q).transpose();
}

MatrixXd random_unit_columns(Eigen::Index n, Eigen::Index m, Stream& rng)
{
    MatrixXd a = rng.gaussian(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
        a.col(j).normalize();
    return a;
}

}  // namespace liftcert
