#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "expheat/config.hpp"
#include "expheat/decay_analysis.hpp"

namespace expheat {

/// Fixed-notation-free decimal with 17 significant digits ("inf", "nan" for
/// non-finite values).
std::string format_double(double x);

/// Column label of an exponent: "2", "4", "inf".
std::string exponent_label(double q);
double parse_exponent(const std::string& text);
/// Comma-separated exponents, e.g. "2,4,inf".
std::vector<double> parse_exponent_list(const std::string& text);

struct SnapshotHeader {
    int n = 1;
    int N = 16;
    double L = 1.0;
    double t = 0.0;
};

inline constexpr char kSnapshotMagic[8] = {'E', 'X', 'P', 'H', 'S', 'N', 'P', '1'};

/// 64-byte header (magic, int64 n, int64 N, float64 L, float64 t, zero pad)
/// then N^n little-endian float64 samples.
void write_snapshot(const std::string& path, const Field& f, double t);
std::pair<SnapshotHeader, Field> read_snapshot(const std::string& path);

/// Columns t, mass, norm_<q>..., orlicz_norm.
struct TrajectoryTable {
    std::vector<double> times;
    std::vector<double> mass;
    std::vector<double> qs;
    /// norms[j][i] = ||u(times[i])||_{qs[j]}.
    std::vector<std::vector<double>> norms;
    std::vector<double> orlicz;
};

TrajectoryTable table_from_trajectory(const Trajectory& traj, const std::vector<double>& qs);
void write_trajectory_csv(const std::string& path, const TrajectoryTable& table);
TrajectoryTable read_trajectory_csv(const std::string& path);

struct DecayRow {
    double q = 2.0;
    PowerLawFit fit;
    double fitted = 0.0;
    double theoretical = 0.0;
    double gap = 0.0;
    /// "PASS", "FAIL" (gap above 0.05) or "N/A" (no prediction).
    std::string status;
};

inline constexpr double kDecayTolerance = 0.05;

/// Fits every q of the table inside the window. `prediction` maps q to the
/// predicted exponent (NaN when unavailable).
std::vector<DecayRow> decay_rows(const TrajectoryTable& table, const std::vector<double>& qs,
                                 std::pair<double, double> window,
                                 const std::optional<ExperimentConfig>& config);

void write_decay_csv(const std::string& path, const std::vector<DecayRow>& rows, std::pair<double, double> window);

/// Result of one solve run kept in memory for sweeps.
struct SolveOutcome {
    int exit_code = kExitOk;
    std::string message;
    std::optional<Trajectory> trajectory;
    double initial_orlicz = 0.0;
    double initial_lp = 0.0;
};

SolveOutcome run_solve(const ExperimentConfig& config, const std::string& out_dir);

int cmd_solve(const std::string& config_path, const std::string& out_dir, std::ostream& log);
int cmd_decay(const std::string& trajectory_path, const std::vector<double>& q_list,
              std::optional<std::pair<double, double>> window, const std::string& out_dir, std::ostream& log);
int cmd_profile(const std::string& trajectory_path, const std::string& out_dir, std::ostream& log);
int cmd_sweep(const std::string& config_glob, int parallelism, const std::string& out_dir, std::ostream& log);
int cmd_orlicz_norm(const std::string& config_path, const std::string& out_dir, std::ostream& log);

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

} // namespace expheat
