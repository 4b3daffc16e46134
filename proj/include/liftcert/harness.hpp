#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "io.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace liftcert
{
using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::ordered_json;

//! Invalid experiment configuration; the message names the field.
class ConfigError : public InputError
{
  public:
    using InputError::InputError;
};

enum class Direction
{
    at_least,  // pass when value >= threshold
    at_most    // pass when value <= threshold
};

//---------------------------------------------------------------------------//
/*!
 * \brief One Monte Carlo experiment.
 *
 * params are merged over per-target defaults when parsed, so to_json()
 * always shows the full resolved configuration. grid holds the swept
 * value: the noise level for every target except caa_probe, which sweeps
 * h (read from "h_grid", with the noise level in params.rho).
 */
struct ExperimentConfig
{
    std::string target;
    json params = json::object();
    std::vector<double> grid;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    double threshold = 0;
    Direction direction = Direction::at_least;
    std::optional<double> min_pass_rate;   // against the Wilson lower bound
    std::optional<std::size_t> min_passes;  // literal count per grid point
    bool require_scaling = false;  // accept only monotone, enveloped medians

    //! "rho" or "h".
    std::string grid_name() const;

    static ExperimentConfig from_json(json const& j);
    static ExperimentConfig parse(std::string const& text,
                                  std::string const& source = "config");
    json to_json() const;
};

//! Known target names, in help order.
std::vector<std::string> const& experiment_targets();
//! One-line description of a target.
std::string describe_target(std::string const& target);
//! Default parameters for a target; throws ConfigError when unknown.
json default_params(std::string const& target);

struct TrialOutcome
{
    double value = 0;
    double threshold = 0;
    bool pass = false;
};

struct TrialReport
{
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double grid_value = 0;
    TrialOutcome outcome;
    double wall_time_ms = 0;
};

struct GridSummary
{
    double grid_value = 0;
    std::size_t trials = 0;
    std::size_t passes = 0;
    double rate = 0;
    WilsonInterval interval;
    Summary stats;
    bool accepted = true;
};

struct ScalingReport
{
    bool monotone = false;  // median nondecreasing along the grid
    bool flat = false;      // all medians equal to 1e-12 relative
    bool envelope = false;  // median >= rho^d / n^6 everywhere
    double slope = 0;       // log-log slope of median against the grid
};

struct ExperimentReport
{
    ExperimentConfig config;
    bool applicable = true;
    std::vector<TrialReport> trials;  // grid outer, trial inner
    std::vector<GridSummary> grid;
    std::optional<ScalingReport> scaling;
    json extras = json::object();  // target-specific aggregates
    bool accepted = true;

    //! '#' config header, then trial,seed,<grid>,value,threshold,pass.
    std::string csv() const;
    //! Deterministic JSON summary (no timing).
    std::string summary_json() const;
};

//---------------------------------------------------------------------------//
/*!
 * \brief Prepared experiment: holds calibration shared by all trials.
 *
 * trial() is a pure function of (config, grid value, trial index) and is
 * safe to call concurrently. The trial seed is trial_seed(master, t) and
 * does not depend on the grid value, so arms of a sweep are paired.
 */
class Experiment
{
  public:
    explicit Experiment(ExperimentConfig config);

    ExperimentConfig const& config() const { return config_; }
    bool applicable() const { return applicable_; }
    //! Target-specific aggregates known before any trial runs.
    json const& calibration() const { return calibration_; }

    TrialOutcome trial(double grid_value, std::size_t t) const;

  private:
    ExperimentConfig config_;
    bool applicable_ = true;
    json calibration_ = json::object();
    double caa_median_ = 0;
};

//! Worker count from LIFTCERT_THREADS, else hardware concurrency.
unsigned default_thread_count();

//! Run every (grid value, trial) pair and fold results by index.
ExperimentReport run_experiment(ExperimentConfig const& config,
                                unsigned threads = 0);

//! Median trend checks for at least three grid points.
ScalingReport scaling_study(std::vector<double> const& grid,
                            std::vector<double> const& medians,
                            int d,
                            int n);

//---------------------------------------------------------------------------//
// Builders shared by targets and tests
//---------------------------------------------------------------------------//

/*!
 * \brief p x n^d matrix with orthonormal Sym_d-fixed rows spanning a
 * random p-dimensional subspace of Sym^d(R^n).
 *
 * When avoid is given, the subspace is drawn orthogonal to
 * Sym_d(avoid^{(x)d}), so the operator annihilates that tensor.
 */
MatrixXd random_sym_operator(int n, int d, Eigen::Index p, Stream& rng,
                             std::optional<VectorXd> const& avoid = {});

//! p x cols matrix with orthonormal rows.
MatrixXd random_row_orthonormal(Eigen::Index p, Eigen::Index cols,
                                Stream& rng);

//! Random n x m matrix with unit-norm columns.
MatrixXd random_unit_columns(Eigen::Index n, Eigen::Index m, Stream& rng);

}  // namespace liftcert
