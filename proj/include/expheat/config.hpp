#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expheat/initial_data.hpp"
#include "expheat/mild_solver.hpp"

namespace expheat {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUnparseable = 2;
inline constexpr int kExitInvariant = 3;
inline constexpr int kExitMissingArtifact = 4;
inline constexpr int kExitBlowup = 10;

/// Configuration failure carrying the process exit code.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int exit_code, const std::string& what) : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const { return exit_code_; }

private:
    int exit_code_;
};

struct ProblemParams {
    int n = 1;
    double theta = 2.0;
    double r = 2.0;
    double L = 64.0;
    int N = 1024;
    bool nonlinear = true;
    bool signed_mode = false;

    bool operator==(const ProblemParams&) const = default;
};

struct TimeParams {
    double t0 = 0.01;
    int ramp_steps = 16;
    double rho = 1.15;
    double T = 1e3;
    int substeps = 4;

    bool operator==(const TimeParams&) const = default;
};

struct AnalysisParams {
    std::vector<double> q_list = {2.0, 4.0, kInf};
    std::optional<std::pair<double, double>> fit_window;
    /// Integrability exponent of the data for the predicted rates; defaults
    /// to r for log spikes and 1 otherwise.
    std::optional<double> p;
    bool write_snapshots = false;
    std::string trajectory_csv = "trajectory.csv";
    std::string decay_csv = "decay.csv";
    std::string profile_json = "profile.json";

    bool operator==(const AnalysisParams&) const = default;
};

struct ExperimentConfig {
    ProblemParams problem;
    DataRecipe data;
    TimeParams time;
    SolverConfig solver;
    AnalysisParams analysis;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates a JSON config. Errors name the source and line:
/// "<source>:<line>: <pointer>: <message>". Syntax and type errors carry
/// kExitUnparseable, domain violations kExitInvariant.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Full JSON form (every field explicit); parse_config(to_json_text(c)) == c.
std::string to_json_text(const ExperimentConfig& config);

GridSpec build_grid(const ExperimentConfig& config);
ProblemSpec build_problem(const ExperimentConfig& config);
TimeGrid build_time_grid(const ExperimentConfig& config);

/// p used for predicted decay rates (see AnalysisParams::p).
double theory_p(const ExperimentConfig& config);

/// Innermost non-wrapper recipe.
const DataRecipe& root_recipe(const DataRecipe& recipe);
/// Amplitude of the root recipe times every `scaled` factor above it.
double effective_amplitude(const DataRecipe& recipe);

/// Line (1-based) of the value at each JSON pointer of `text`.
std::vector<std::pair<std::string, int>> json_pointer_lines(const std::string& text);

} // namespace expheat
