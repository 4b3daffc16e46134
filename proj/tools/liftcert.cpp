// Command-line frontend: certify, lift, spectrum, experiment, powersum.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "liftcert/harness.hpp"
#include "liftcert/io.hpp"
#include "liftcert/spectral.hpp"
#include "liftcert/smoothing.hpp"
#include "liftcert/tensor_lift.hpp"
#include "liftcert/varieties.hpp"

using namespace liftcert;

namespace
{
constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_usage = 2;

void emit(std::string const& path, std::string const& text)
{
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

std::string strip_prefix(std::string const& s, std::string const& prefix)
{
    return s.rfind(prefix, 0) == 0 ? s.substr(prefix.size()) : std::string{};
}

std::size_t parse_count(std::string const& text, std::string const& field)
{
    std::size_t used = 0;
    unsigned long v = 0;
    try
    {
        v = std::stoul(text, &used);
    }
    catch (std::exception const&)
    {
        used = 0;
    }
    if (used == 0 || used != text.size() || v == 0)
        throw InputError(field + ": '" + text + "' is not a positive integer");
    return v;
}

//---------------------------------------------------------------------------//

struct CertifyArgs
{
    std::string variety;
    std::string basis;
    double tol = 1e-9;
    double rho = 0.1;
    std::uint64_t seed = 0;
    std::string out;
};

int run_certify(CertifyArgs const& a)
{
    auto spec = VarietySpec::parse(a.variety);
    auto op = make_variety_operator(spec);
    MatrixXd basis;
    json basis_desc;
    if (auto m_text = strip_prefix(a.basis, "random:"); !m_text.empty())
    {
        auto m = static_cast<Eigen::Index>(parse_count(m_text, "--basis"));
        Stream rng(a.seed, 0, "base");
        MatrixXd base(op.n, m);
        for (Eigen::Index j = 0; j < m; ++j)
            base.col(j) = sample_variety_point(spec, rng);
        basis = orthonormalize(perturb(base, a.rho, a.seed).realized);
        if (basis.cols() != m)
            throw std::runtime_error("random basis is rank deficient");
        basis_desc = {{"mode", "random"}, {"m", m}, {"rho", a.rho},
                      {"seed", a.seed}};
    }
    else if (auto path = strip_prefix(a.basis, "file:"); !path.empty())
    {
        basis = read_csv_matrix(path);
        basis_desc = {{"mode", "file"}, {"path", path}};
    }
    else if (auto rest = strip_prefix(a.basis, "planted:"); !rest.empty())
    {
        auto plus = rest.rfind('+');
        if (plus == std::string::npos)
            throw InputError("--basis: planted mode needs path+index");
        auto path = rest.substr(0, plus);
        auto index = parse_count(rest.substr(plus + 1), "--basis index");
        MatrixXd raw = read_csv_matrix(path);
        if (index < 1 || index > static_cast<std::size_t>(raw.cols()))
            throw InputError("--basis: planted index "
                             + std::to_string(index) + " is outside 1.."
                             + std::to_string(raw.cols()));
        // the planted column goes first so orthonormalization keeps it
        MatrixXd ordered(raw.rows(), raw.cols());
        ordered.col(0) = raw.col(static_cast<Eigen::Index>(index - 1));
        Eigen::Index c = 1;
        for (Eigen::Index j = 0; j < raw.cols(); ++j)
            if (j != static_cast<Eigen::Index>(index - 1))
                ordered.col(c++) = raw.col(j);
        basis = orthonormalize(ordered);
        if (basis.cols() != raw.cols())
            throw InputError(path + ": planted basis columns are dependent");
        basis_desc = {{"mode", "planted"}, {"path", path}, {"index", index}};
    }
    else
    {
        throw InputError("--basis: expected random:m, file:path or "
                         "planted:path+index, got '" + a.basis + "'");
    }

    auto rep = certify(op, basis, a.tol);
    json j;
    j["eta"] = rep.eta;
    j["m"] = rep.m;
    j["n"] = rep.n;
    j["d"] = rep.d;
    j["verdict"] = rep.verdict();
    j["wall_time_ms"] = rep.wall_time_ms;
    j["basis_sha256"] = rep.basis_sha256;
    j["config"] = {{"variety", spec.str()},
                   {"p", op.p},
                   {"tol", a.tol},
                   {"basis", basis_desc}};
    emit(a.out, j.dump(2) + "\n");
    return exit_ok;
}

//---------------------------------------------------------------------------//

struct LiftArgs
{
    int n = 0;
    int m = 0;
    int d = 1;
    std::string matrix = "id";
    std::string kind = "symmetrized";
    std::uint64_t seed = 0;
    std::string out;
};

MatrixXd load_matrix(std::string const& spec, Eigen::Index n, Eigen::Index m,
                     std::uint64_t seed)
{
    if (spec == "id")
        return MatrixXd::Identity(n, m);
    if (spec == "random")
        return Stream(seed, 0, "matrix").gaussian(n, m);
    if (auto path = strip_prefix(spec, "file:"); !path.empty())
        return read_csv_matrix(path);
    throw InputError("--matrix: expected id, random or file:path, got '"
                     + spec + "'");
}

int run_lift(LiftArgs const& a)
{
    MatrixXd u = load_matrix(a.matrix, a.n, a.m, a.seed);
    if (a.matrix.rfind("file:", 0) == 0 && a.n > 0
        && (u.rows() != a.n || (a.m > 0 && u.cols() != a.m)))
        throw InputError("--matrix: file shape " + std::to_string(u.rows())
                         + "x" + std::to_string(u.cols())
                         + " does not match --n/--m");
    if (a.kind != "symmetrized" && a.kind != "full_kron")
        throw InputError("--kind: expected symmetrized or full_kron");
    auto lift = a.kind == "symmetrized" ? sym_lift(u, a.d) : kron_lift(u, a.d);
    json cfg = {{"n", u.rows()},   {"m", u.cols()},     {"d", a.d},
                {"kind", a.kind},  {"matrix", a.matrix}, {"seed", a.seed}};
    emit(a.out, matrix_to_csv(lift.data,
                              {"config: " + cfg.dump(),
                               "lift: " + lift_descriptor_json(lift)}));
    return exit_ok;
}

//---------------------------------------------------------------------------//

struct SpectrumArgs
{
    std::string matrix;
    double tol = -1;
    std::string out;
};

int run_spectrum(SpectrumArgs const& a)
{
    auto path = strip_prefix(a.matrix, "file:");
    MatrixXd u = read_csv_matrix(path.empty() ? a.matrix : path);
    std::optional<double> tol;
    if (a.tol >= 0)
        tol = a.tol;
    SpectrumQuery q(u, tol);
    json j;
    j["rows"] = u.rows();
    j["cols"] = u.cols();
    std::vector<double> sv(q.values().data(),
                           q.values().data() + q.values().size());
    j["singular_values"] = sv;
    j["tolerance"] = q.tolerance();
    j["rank"] = q.rank();
    j["sigma_min"] = q.least();
    j["leave_one_out"] = leave_one_out(u);
    emit(a.out, j.dump(2) + "\n");
    return exit_ok;
}

//---------------------------------------------------------------------------//

struct ExperimentArgs
{
    std::string config;
    std::string out;
    std::string summary;
};

void report_timing(ExperimentReport const& rep)
{
    double total = 0;
    for (auto const& t : rep.trials)
        total += t.wall_time_ms;
    std::fprintf(stderr, "%s: %zu trials, %.1f ms of trial time\n",
                 rep.config.target.c_str(), rep.trials.size(), total);
}

int run_experiment_cmd(ExperimentArgs const& a)
{
    auto cfg = ExperimentConfig::parse(read_text_file(a.config), a.config);
    auto rep = run_experiment(cfg);
    report_timing(rep);
    emit(a.out, rep.csv());
    if (!a.summary.empty())
        write_text_file(a.summary, rep.summary_json());
    return rep.accepted ? exit_ok : exit_failed;
}

//---------------------------------------------------------------------------//

struct PowersumArgs
{
    std::string check;
    int n = 0;
    int m = 0;
    int ell = 0;
    int s = 0;
    int d = 0;
    int r = 0;
    int dim = 0;
    int rows = -1;
    double rho = 0.1;
    double threshold = -1;
    std::size_t trials = 50;
    std::uint64_t seed = 0;
    long min_passes = -1;
    std::string out;
};

int run_powersum(PowersumArgs const& a)
{
    json j;
    j["target"] = a.check;
    json params = json::object();
    auto set = [&](char const* key, int v) {
        if (v > 0)
            params[key] = v;
    };
    set("n", a.n);
    set("m", a.m);
    set("ell", a.ell);
    set("s", a.s);
    set("d", a.d);
    set("r", a.r);
    set("dim", a.dim);
    if (a.rows >= 0)
        params["N"] = a.rows;
    j["params"] = params;
    j["rho_grid"] = {a.rho};
    j["trials"] = a.trials;
    j["master_seed"] = a.seed;
    double thr = a.threshold;
    if (thr < 0)
        thr = (a.check == "conj81" || a.check == "conj82") ? 1e-6 : 1e-8;
    j["threshold"] = thr;
    j["min_passes"] = a.min_passes >= 0 ? std::size_t(a.min_passes)
                                        : a.trials;
    auto cfg = ExperimentConfig::from_json(j);
    auto rep = run_experiment(cfg);
    report_timing(rep);

    std::string csv = "# config: " + cfg.to_json().dump() + "\n";
    csv += "trial,seed,sigma_target,threshold,pass\n";
    for (auto const& t : rep.trials)
        csv += std::to_string(t.trial) + "," + std::to_string(t.seed) + ","
               + format_double(t.outcome.value) + ","
               + format_double(t.outcome.threshold) + ","
               + (t.outcome.pass ? "1" : "0") + "\n";
    emit(a.out, csv);
    return rep.accepted ? exit_ok : exit_failed;
}

std::string targets_footer()
{
    std::string s = "\nExperiment targets (experiment --config):\n";
    for (auto const& t : experiment_targets())
        s += "  " + t + std::string(t.size() < 16 ? 16 - t.size() : 1, ' ')
             + describe_target(t) + "\n";
    s += "\nExit codes: 0 success, 1 acceptance failure, 2 usage or input "
         "error.\nLIFTCERT_THREADS caps the experiment worker pool.\n";
    return s;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Symmetric lifts, variety certificates and smoothed "
                 "least-singular-value experiments"};
    app.footer(targets_footer());
    app.require_subcommand(1);

    CertifyArgs ca;
    auto* certify_cmd = app.add_subcommand(
        "certify", "certify that a subspace is far from a variety");
    certify_cmd->add_option("--variety", ca.variety,
                            "determinantal:n1,n2,r or separable:n1,n2,...")
        ->required();
    certify_cmd->add_option("--basis", ca.basis,
                            "random:m, file:path.csv or planted:path.csv+index")
        ->required();
    certify_cmd->add_option("--tol", ca.tol, "verdict tolerance on eta")
        ->capture_default_str();
    certify_cmd->add_option("--rho", ca.rho, "noise level for random:m")
        ->capture_default_str();
    certify_cmd->add_option("--seed", ca.seed, "seed for random:m")
        ->capture_default_str();
    certify_cmd->add_option("--out", ca.out, "report path (default stdout)");

    LiftArgs la;
    auto* lift_cmd = app.add_subcommand("lift", "emit a lifted matrix as CSV");
    lift_cmd->add_option("--n", la.n, "rows")->required();
    lift_cmd->add_option("--m", la.m, "columns")->required();
    lift_cmd->add_option("--d", la.d, "lift order")->capture_default_str();
    lift_cmd->add_option("--matrix", la.matrix, "id, random or file:path")
        ->capture_default_str();
    lift_cmd->add_option("--kind", la.kind, "symmetrized or full_kron")
        ->capture_default_str();
    lift_cmd->add_option("--seed", la.seed, "seed for --matrix random")
        ->capture_default_str();
    lift_cmd->add_option("--out", la.out, "output path (default stdout)");

    SpectrumArgs sa;
    auto* spec_cmd = app.add_subcommand(
        "spectrum", "singular values, rank and leave-one-out distance");
    spec_cmd->add_option("--matrix", sa.matrix, "CSV path or file:path")
        ->required();
    spec_cmd->add_option("--tol", sa.tol,
                         "rank tolerance (default 1e-10 sigma_1)");
    spec_cmd->add_option("--out", sa.out, "output path (default stdout)");

    ExperimentArgs ea;
    auto* exp_cmd = app.add_subcommand("experiment",
                                       "run a Monte Carlo experiment config");
    exp_cmd->add_option("--config", ea.config, "JSON config")->required();
    exp_cmd->add_option("--out", ea.out, "per-trial CSV (default stdout)");
    exp_cmd->add_option("--summary", ea.summary, "JSON summary path");

    PowersumArgs pa;
    auto* ps_cmd = app.add_subcommand(
        "powersum", "power-sum and subspace-lift matrix checks");
    ps_cmd->add_option("--check", pa.check)
        ->required()
        ->check(CLI::IsMember({"prop71", "prop72", "prop73", "lemma74",
                               "claim77", "conj81", "conj82"}));
    ps_cmd->add_option("--n", pa.n, "variables or ambient dimension");
    ps_cmd->add_option("--m", pa.m, "components or subspace dimension");
    ps_cmd->add_option("--ell", pa.ell, "selected columns (prop72)");
    ps_cmd->add_option("--s", pa.s, "number of subspaces (conj81)");
    ps_cmd->add_option("--d", pa.d, "lift order (conj81)");
    ps_cmd->add_option("--r", pa.r, "power (conj82)");
    ps_cmd->add_option("--dim", pa.dim, "point dimension (conj82)");
    ps_cmd->add_option("--rows", pa.rows, "point count N (conj82)");
    ps_cmd->add_option("--rho", pa.rho, "noise level")->capture_default_str();
    ps_cmd->add_option("--threshold", pa.threshold,
                       "pass level (default 1e-8, 1e-6 for conj81/82)");
    ps_cmd->add_option("--trials", pa.trials)->capture_default_str();
    ps_cmd->add_option("--seed", pa.seed)->capture_default_str();
    ps_cmd->add_option("--min-passes", pa.min_passes,
                       "required passes (default all trials)");
    ps_cmd->add_option("--out", pa.out, "CSV path (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForAllHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        return exit_usage;
    }

    try
    {
        if (certify_cmd->parsed())
            return run_certify(ca);
        if (lift_cmd->parsed())
            return run_lift(la);
        if (spec_cmd->parsed())
            return run_spectrum(sa);
        if (exp_cmd->parsed())
            return run_experiment_cmd(ea);
        if (ps_cmd->parsed())
            return run_powersum(pa);
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
