#include "expheat/harness.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "expheat/errors.hpp"
#include "expheat/orlicz.hpp"

namespace expheat {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string exponent_label(double q) {
    if (q == kInf) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", q);
    return buf;
}

double parse_exponent(const std::string& text) {
    if (text == "inf") return kInf;
    char* end = nullptr;
    const double q = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || !(q >= 1.0))
        throw std::invalid_argument("bad exponent '" + text + "' (need a number >= 1 or inf)");
    return q;
}

std::vector<double> parse_exponent_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
        if (!item.empty()) out.push_back(parse_exponent(item));
    }
    if (out.empty()) throw std::invalid_argument("empty exponent list");
    return out;
}

void write_snapshot(const std::string& path, const Field& f, double t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot write snapshot");
    unsigned char header[64] = {};
    const std::int64_t n = f.grid().dimension;
    const std::int64_t N = f.grid().points_per_axis;
    const double L = f.grid().half_width;
    std::memcpy(header, kSnapshotMagic, 8);
    std::memcpy(header + 8, &n, 8);
    std::memcpy(header + 16, &N, 8);
    std::memcpy(header + 24, &L, 8);
    std::memcpy(header + 32, &t, 8);
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    out.write(reinterpret_cast<const char*>(f.values().data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!out) throw std::runtime_error(path + ": short write");
}

std::pair<SnapshotHeader, Field> read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open snapshot");
    unsigned char header[64];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (!in || std::memcmp(header, kSnapshotMagic, 8) != 0) throw std::runtime_error(path + ": not a snapshot file");
    std::int64_t n = 0, N = 0;
    SnapshotHeader h;
    std::memcpy(&n, header + 8, 8);
    std::memcpy(&N, header + 16, 8);
    std::memcpy(&h.L, header + 24, 8);
    std::memcpy(&h.t, header + 32, 8);
    h.n = static_cast<int>(n);
    h.N = static_cast<int>(N);
    const GridSpec grid = make_grid(h.n, h.N, h.L);
    std::vector<double> vals(grid.size());
    in.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated snapshot");
    return {h, Field(grid, std::move(vals))};
}

TrajectoryTable table_from_trajectory(const Trajectory& traj, const std::vector<double>& qs) {
    TrajectoryTable t;
    t.times = traj.times;
    t.mass = traj.mass_series;
    t.qs = qs;
    t.norms.assign(qs.size(), {});
    for (std::size_t j = 0; j < qs.size(); ++j)
        for (std::size_t i = 0; i < traj.times.size(); ++i) t.norms[j].push_back(traj.norm(i, qs[j]));
    if (traj.orlicz_norms.size() == traj.times.size()) t.orlicz = traj.orlicz_norms;
    else t.orlicz.assign(traj.times.size(), std::numeric_limits<double>::quiet_NaN());
    return t;
}

void write_trajectory_csv(const std::string& path, const TrajectoryTable& t) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot write");
    out << "t,mass";
    for (double q : t.qs) out << ",norm_" << exponent_label(q);
    out << ",orlicz_norm\n";
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        out << format_double(t.times[i]) << ',' << format_double(t.mass[i]);
        for (const auto& col : t.norms) out << ',' << format_double(col[i]);
        out << ',' << format_double(t.orlicz[i]) << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_cell(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw std::invalid_argument("bad CSV number '" + s + "'");
    return v;
}

} // namespace

TrajectoryTable read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(kExitMissingArtifact, path + ": trajectory CSV not found");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(kExitUnparseable, path + ": empty trajectory CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv(line);
    TrajectoryTable t;
    int col_t = -1, col_mass = -1, col_orlicz = -1;
    std::vector<int> norm_cols;
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        const std::string& h = header[c];
        if (h == "t") col_t = c;
        else if (h == "mass") col_mass = c;
        else if (h == "orlicz_norm") col_orlicz = c;
        else if (h.rfind("norm_", 0) == 0) {
            t.qs.push_back(parse_exponent(h.substr(5)));
            norm_cols.push_back(c);
        }
    }
    if (col_t < 0 || norm_cols.empty())
        throw ConfigError(kExitUnparseable, path + ": need a 't' column and at least one norm_<q> column");
    t.norms.assign(norm_cols.size(), {});
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw ConfigError(kExitUnparseable, path + ":" + std::to_string(lineno) + ": wrong number of columns");
        try {
            t.times.push_back(parse_cell(cells[col_t]));
            t.mass.push_back(col_mass >= 0 ? parse_cell(cells[col_mass]) : std::numeric_limits<double>::quiet_NaN());
            t.orlicz.push_back(col_orlicz >= 0 ? parse_cell(cells[col_orlicz]) : std::numeric_limits<double>::quiet_NaN());
            for (std::size_t j = 0; j < norm_cols.size(); ++j) t.norms[j].push_back(parse_cell(cells[norm_cols[j]]));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(kExitUnparseable, path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return t;
}

std::vector<DecayRow> decay_rows(const TrajectoryTable& table, const std::vector<double>& qs,
                                 std::pair<double, double> window, const std::optional<ExperimentConfig>& config) {
    std::vector<DecayRow> rows;
    for (double q : qs) {
        const auto it = std::find(table.qs.begin(), table.qs.end(), q);
        if (it == table.qs.end()) throw std::invalid_argument("trajectory has no norm_" + exponent_label(q) + " column");
        const auto& col = table.norms[it - table.qs.begin()];
        std::vector<double> ts, ys;
        for (std::size_t i = 0; i < table.times.size(); ++i) {
            const double t = table.times[i];
            if (!(t > 0.0) || t < window.first * (1 - 1e-12) || t > window.second * (1 + 1e-12)) continue;
            if (!(col[i] > 0.0)) continue;
            ts.push_back(t);
            ys.push_back(col[i]);
        }
        DecayRow row;
        row.q = q;
        row.theoretical = std::numeric_limits<double>::quiet_NaN();
        if (config) {
            const auto& p = config->problem;
            const double ps = exponent_selector(theory_p(*config), p.n, p.theta, p.r).p_star;
            if (q >= ps) row.theoretical = theoretical_exponent(p.n, p.theta, ps, q);
        }
        if (static_cast<int>(ts.size()) < kMinFitPoints) {
            row.fitted = row.gap = std::numeric_limits<double>::quiet_NaN();
            row.status = "FAIL";
            rows.push_back(row);
            continue;
        }
        row.fit = fit_power_law(ts, ys);
        row.fitted = -row.fit.slope;
        row.gap = std::abs(row.fitted - row.theoretical);
        if (std::isnan(row.theoretical)) row.status = "N/A";
        else row.status = row.gap <= kDecayTolerance ? "PASS" : "FAIL";
        rows.push_back(row);
    }
    return rows;
}

void write_decay_csv(const std::string& path, const std::vector<DecayRow>& rows, std::pair<double, double> window) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot write");
    out << "q,fitted,theoretical,gap,r_squared,points,window_lo,window_hi,status\n";
    for (const auto& r : rows) {
        out << exponent_label(r.q) << ',' << format_double(r.fitted) << ',' << format_double(r.theoretical) << ','
            << format_double(r.gap) << ',' << format_double(r.fit.r_squared) << ',' << r.fit.points << ','
            << format_double(window.first) << ',' << format_double(window.second) << ',' << r.status << '\n';
    }
}

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot write");
    out << text;
}

std::vector<double> union_qs(std::vector<double> a, const std::vector<double>& b) {
    for (double q : b)
        if (std::find(a.begin(), a.end(), q) == a.end()) a.push_back(q);
    return a;
}

std::string snapshot_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "state_%05zu.bin", i);
    return buf;
}

struct RunMetadata {
    ExperimentConfig config;
    std::optional<double> blowup_time;
    std::vector<std::string> snapshots;
    std::string trajectory_csv;
};

/// Locates the run directory and its metadata from a directory or CSV path.
std::pair<fs::path, std::optional<RunMetadata>> locate_run(const std::string& path) {
    fs::path p(path);
    fs::path dir = fs::is_directory(p) ? p : p.parent_path();
    if (dir.empty()) dir = ".";
    std::optional<RunMetadata> meta;
    const fs::path mpath = dir / "metadata.json";
    if (fs::exists(mpath)) {
        std::ifstream in(mpath);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(kExitUnparseable, mpath.string() + ": " + e.what());
        }
        RunMetadata m;
        m.config = parse_config(j.at("config").dump(2), mpath.string() + "#config");
        if (j.contains("blowup_time") && j["blowup_time"].is_number()) m.blowup_time = j["blowup_time"].get<double>();
        if (j.contains("snapshots")) m.snapshots = j["snapshots"].get<std::vector<std::string>>();
        m.trajectory_csv = j.value("trajectory_csv", m.config.analysis.trajectory_csv);
        meta = std::move(m);
    }
    return {dir, meta};
}

std::pair<double, double> resolve_window(const std::optional<std::pair<double, double>>& requested,
                                         const std::optional<RunMetadata>& meta, const TrajectoryTable& table) {
    if (requested) return *requested;
    if (meta && meta->config.analysis.fit_window) return *meta->config.analysis.fit_window;
    if (table.times.empty()) throw std::invalid_argument("trajectory has no rows");
    const double T = table.times.back();
    return {T / 100.0, T};
}

std::string decay_table_text(const std::vector<DecayRow>& rows) {
    std::ostringstream os;
    os << "q        fitted      theory      gap         R^2         status\n";
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-8s %-11.6f %-11.6f %-11.6f %-11.8f %s\n", exponent_label(r.q).c_str(),
                      r.fitted, r.theoretical, r.gap, r.fit.r_squared, r.status.c_str());
        os << buf;
    }
    return os.str();
}

json decay_json(const std::vector<DecayRow>& rows, std::pair<double, double> window) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"q", r.q == kInf ? json("inf") : json(r.q)},
                       {"fitted", number_or_null(r.fitted)},
                       {"theoretical", number_or_null(r.theoretical)},
                       {"gap", number_or_null(r.gap)},
                       {"r_squared", number_or_null(r.fit.r_squared)},
                       {"intercept", number_or_null(r.fit.intercept)},
                       {"points", r.fit.points},
                       {"status", r.status}});
    }
    return {{"window", {window.first, window.second}}, {"tolerance", kDecayTolerance}, {"rows", arr}};
}

/// Decay step shared by cmd_decay and cmd_sweep.
std::vector<DecayRow> run_decay(const fs::path& csv, const std::optional<RunMetadata>& meta,
                                std::vector<double> qs, std::optional<std::pair<double, double>> window,
                                const fs::path& out_dir, std::pair<double, double>* used_window) {
    const TrajectoryTable table = read_trajectory_csv(csv.string());
    if (qs.empty()) qs = meta ? meta->config.analysis.q_list : table.qs;
    const auto w = resolve_window(window, meta, table);
    std::optional<ExperimentConfig> cfg;
    if (meta) cfg = meta->config;
    auto rows = decay_rows(table, qs, w, cfg);
    fs::create_directories(out_dir);
    const std::string name = meta ? meta->config.analysis.decay_csv : "decay.csv";
    write_decay_csv((out_dir / name).string(), rows, w);
    write_text(out_dir / (fs::path(name).stem().string() + ".json"), decay_json(rows, w).dump(2) + "\n");
    if (used_window) *used_window = w;
    return rows;
}

} // namespace

SolveOutcome run_solve(const ExperimentConfig& config, const std::string& out_dir) {
    SolveOutcome out;
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    ProblemSpec spec;
    try {
        spec = build_problem(config);
    } catch (const ConfigError& e) {
        out.exit_code = e.exit_code();
        out.message = e.what();
        return out;
    }
    const auto info = generate_with_info(config.data, spec.grid);
    const TimeGrid tg = build_time_grid(config);
    SolverConfig cfg = config.solver;
    cfg.norm_qs = union_qs(cfg.norm_qs, config.analysis.q_list);
    cfg.store_states = cfg.store_states || config.analysis.write_snapshots;
    const double p = theory_p(config);
    out.initial_orlicz = luxemburg_norm(spec.initial, OrliczParams{config.problem.r});
    out.initial_lp = lp_norm(spec.initial, p);

    json meta;
    meta["config"] = json::parse(to_json_text(config));
    meta["trajectory_csv"] = config.analysis.trajectory_csv;
    meta["initial"] = {{"orlicz_norm", out.initial_orlicz}, {"lp_norm", out.initial_lp},
                       {"p", p},
                       {"mass", spec.initial.integral()},
                       {"sample_capped", info.sample_capped},
                       {"cap_value", info.cap_value}};
    meta["blowup_time"] = nullptr;
    try {
        Trajectory traj;
        if (cfg.mode == SolverMode::global_picard) {
            auto res = picard_solve(spec, tg, cfg);
            meta["picard"] = {{"iterations", res.iterations}, {"gaps", res.gaps},
                              {"monotonicity_violations", res.monotonicity_violations}};
            traj = std::move(res.trajectory);
        } else {
            traj = integrate(spec, tg, cfg);
        }
        write_trajectory_csv((dir / config.analysis.trajectory_csv).string(), table_from_trajectory(traj, cfg.norm_qs));
        std::vector<std::string> snaps;
        if (config.analysis.write_snapshots) {
            fs::create_directories(dir / "snapshots");
            for (std::size_t i = 0; i < traj.states.size(); ++i) {
                const std::string name = "snapshots/" + snapshot_name(i);
                write_snapshot((dir / name).string(), traj.states[i], traj.times[i]);
                snaps.push_back(name);
            }
        }
        meta["snapshots"] = snaps;
        meta["blowup_time"] = traj.blowup_time ? json(*traj.blowup_time) : json(nullptr);
        meta["boundary_mass_fraction"] = traj.boundary_mass_fraction;
        meta["max_clamp"] = traj.max_clamp;
        meta["max_high_band_fraction"] = traj.max_high_band_fraction;
        meta["warnings"] = traj.warnings;
        if (traj.blowup_time) {
            out.exit_code = kExitBlowup;
            out.message = "blowup at t = " + format_double(*traj.blowup_time);
        }
        out.trajectory = std::move(traj);
    } catch (const BlowupError& e) {
        meta["blowup_time"] = e.time();
        out.exit_code = kExitBlowup;
        out.message = e.what();
    } catch (const BoundaryMassViolation& e) {
        meta["boundary_mass_fraction"] = e.fraction();
        out.exit_code = kExitInvariant;
        out.message = e.what();
    } catch (const PicardNonConvergence& e) {
        out.exit_code = kExitInvariant;
        out.message = e.what();
    } catch (const std::invalid_argument& e) {
        out.exit_code = kExitInvariant;
        out.message = e.what();
    } catch (const CorruptSpectrum& e) {
        out.exit_code = kExitInvariant;
        out.message = e.what();
    }
    meta["exit_code"] = out.exit_code;
    meta["message"] = out.message;
    write_text(dir / "metadata.json", meta.dump(2) + "\n");
    return out;
}

int cmd_solve(const std::string& config_path, const std::string& out_dir, std::ostream& log) {
    try {
        const ExperimentConfig cfg = load_config(config_path);
        const SolveOutcome res = run_solve(cfg, out_dir);
        if (res.exit_code == kExitOk) log << "solve: wrote " << (fs::path(out_dir) / cfg.analysis.trajectory_csv).string() << "\n";
        else log << "solve: " << res.message << "\n";
        return res.exit_code;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return e.exit_code();
    }
}

int cmd_decay(const std::string& trajectory_path, const std::vector<double>& q_list,
              std::optional<std::pair<double, double>> window, const std::string& out_dir, std::ostream& log) {
    try {
        if (!fs::exists(trajectory_path)) {
            log << "error: " << trajectory_path << ": no such trajectory\n";
            return kExitMissingArtifact;
        }
        const auto [dir, meta] = locate_run(trajectory_path);
        fs::path csv = fs::is_directory(trajectory_path)
                           ? dir / (meta ? meta->trajectory_csv : std::string("trajectory.csv"))
                           : fs::path(trajectory_path);
        if (!fs::exists(csv)) {
            log << "error: " << csv.string() << ": no such trajectory\n";
            return kExitMissingArtifact;
        }
        const fs::path target = out_dir.empty() ? dir : fs::path(out_dir);
        std::pair<double, double> used{};
        const auto rows = run_decay(csv, meta, q_list, window, target, &used);
        log << "window [" << format_double(used.first) << ", " << format_double(used.second) << "]\n"
            << decay_table_text(rows);
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInvariant;
    }
}

int cmd_profile(const std::string& trajectory_path, const std::string& out_dir, std::ostream& log) {
    try {
        if (!fs::exists(trajectory_path)) {
            log << "error: " << trajectory_path << ": no such trajectory\n";
            return kExitMissingArtifact;
        }
        const auto [dir, meta] = locate_run(trajectory_path);
        if (!meta) {
            log << "error: " << (dir / "metadata.json").string() << ": run metadata not found\n";
            return kExitMissingArtifact;
        }
        if (meta->blowup_time) {
            log << "error: trajectory blew up at t = " << format_double(*meta->blowup_time) << "\n";
            return kExitBlowup;
        }
        if (meta->snapshots.empty()) {
            log << "error: no state snapshots; rerun solve with analysis.write_snapshots = true\n";
            return kExitMissingArtifact;
        }
        Trajectory traj;
        traj.problem = build_problem(meta->config);
        for (const auto& name : meta->snapshots) {
            const fs::path sp = dir / name;
            if (!fs::exists(sp)) {
                log << "error: " << sp.string() << ": missing snapshot\n";
                return kExitMissingArtifact;
            }
            auto [h, f] = read_snapshot(sp.string());
            if (!(f.grid() == traj.problem.grid)) throw std::invalid_argument(sp.string() + ": grid differs from config");
            traj.times.push_back(h.t);
            traj.mass_series.push_back(f.integral());
            traj.states.push_back(std::move(f));
        }
        const std::vector<double> qs = {1.0, kInf};
        const AsymptoticsReport rep = mass_asymptotics(traj, qs);
        const double T = rep.times.back();
        std::optional<PowerLawFit> tail;
        try {
            tail = fit_mass_tail(rep, {T / 100.0, T});
        } catch (const std::invalid_argument&) {
        }
        bool mass_nondecreasing = true;
        for (std::size_t i = 1; i < rep.mass.size(); ++i)
            mass_nondecreasing = mass_nondecreasing && rep.mass[i] >= rep.mass[i - 1] * (1.0 - 1e-12);
        json decreasing = json::object();
        bool all_decreasing = true;
        for (std::size_t j = 0; j < qs.size(); ++j) {
            const bool d = decreasing_over(rep.times, rep.profile_errors[j], T / 10.0, T);
            decreasing[exponent_label(qs[j])] = d;
            all_decreasing = all_decreasing && d;
        }

        const fs::path target = out_dir.empty() ? dir : fs::path(out_dir);
        fs::create_directories(target);
        json j;
        j["m_star_estimate"] = rep.m_star_estimate;
        j["m_final"] = rep.m_final;
        j["initial_mass"] = rep.mass.front();
        j["times"] = rep.times;
        j["mass"] = rep.mass;
        j["mass_tail"] = rep.mass_tail;
        j["mass_nondecreasing"] = mass_nondecreasing;
        j["tail_fit"] = tail ? json{{"slope", tail->slope}, {"r_squared", tail->r_squared}, {"points", tail->points}}
                             : json(nullptr);
        json errs = json::object();
        for (std::size_t k = 0; k < qs.size(); ++k) {
            json col = json::array();
            for (double e : rep.profile_errors[k]) col.push_back(number_or_null(e));
            errs[exponent_label(qs[k])] = col;
        }
        j["profile_errors"] = errs;
        j["decreasing_final_decade"] = decreasing;
        j["status"] = all_decreasing ? "PASS" : "FAIL";
        const std::string name = meta->config.analysis.profile_json;
        write_text(target / name, j.dump(2) + "\n");

        std::ostringstream dat;
        dat << "# t mass profile_error_q1 profile_error_qinf\n";
        for (std::size_t i = 0; i < rep.times.size(); ++i) {
            if (!(rep.times[i] > 0.0)) continue;
            dat << format_double(rep.times[i]) << ' ' << format_double(rep.mass[i]) << ' '
                << format_double(rep.profile_errors[0][i]) << ' ' << format_double(rep.profile_errors[1][i]) << '\n';
        }
        write_text(target / "profile.dat", dat.str());
        std::ostringstream gp;
        gp << "set terminal pngcairo size 900,600\n"
           << "set output 'profile.png'\n"
           << "set logscale xy\n"
           << "set xlabel 't'\n"
           << "set ylabel 'rescaled profile error'\n"
           << "set key top right\n"
           << "plot 'profile.dat' using 1:3 with linespoints title 'q = 1', \\\n"
           << "     'profile.dat' using 1:4 with linespoints title 'q = inf'\n";
        write_text(target / "profile.gp", gp.str());

        log << "m* = " << format_double(rep.m_star_estimate) << " (initial mass " << format_double(rep.mass.front())
            << ")\n";
        if (tail) log << "mass tail slope " << format_double(tail->slope) << "\n";
        log << "profile error decreasing over final decade: " << (all_decreasing ? "PASS" : "FAIL") << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInvariant;
    }
}

namespace {

struct SweepResult {
    std::string config;
    std::optional<ExperimentConfig> cfg;
    int exit_code = kExitOk;
    std::string error;
    std::optional<double> blowup_time;
    double phi_orlicz = std::numeric_limits<double>::quiet_NaN();
    double phi_lp = std::numeric_limits<double>::quiet_NaN();
    std::vector<DecayRow> rows;
};

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

} // namespace

int cmd_sweep(const std::string& config_glob, int parallelism, const std::string& out_dir, std::ostream& log) {
    if (parallelism < 1) {
        log << "error: parallelism must be >= 1\n";
        return kExitInvariant;
    }
    std::vector<std::string> paths;
    glob_t g{};
    if (::glob(config_glob.c_str(), 0, nullptr, &g) == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) {
        log << "error: no config matches '" << config_glob << "'\n";
        return kExitMissingArtifact;
    }
    std::vector<std::string> subdirs;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        std::string stem = fs::path(paths[i]).stem().string();
        if (std::count(subdirs.begin(), subdirs.end(), stem) > 0) stem += "_" + std::to_string(i);
        subdirs.push_back(stem);
    }

    std::vector<SweepResult> results(paths.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= paths.size()) return;
            SweepResult& res = results[i];
            res.config = paths[i];
            const fs::path dir = fs::path(out_dir) / subdirs[i];
            try {
                res.cfg = load_config(paths[i]);
                const SolveOutcome solved = run_solve(*res.cfg, dir.string());
                res.exit_code = solved.exit_code;
                res.error = solved.message;
                res.phi_orlicz = solved.initial_orlicz;
                res.phi_lp = solved.initial_lp;
                if (solved.trajectory) res.blowup_time = solved.trajectory->blowup_time;
                if (solved.exit_code == kExitOk) {
                    const auto [rdir, meta] = locate_run(dir.string());
                    res.rows = run_decay(rdir / meta->trajectory_csv, meta, {}, std::nullopt, rdir, nullptr);
                } else if (solved.exit_code == kExitBlowup && !res.blowup_time) {
                    const auto [rdir, meta] = locate_run(dir.string());
                    res.blowup_time = meta->blowup_time;
                }
            } catch (const ConfigError& e) {
                res.exit_code = e.exit_code();
                res.error = e.what();
            } catch (const std::exception& e) {
                res.exit_code = kExitInvariant;
                res.error = e.what();
            }
            std::lock_guard<std::mutex> lock(log_mutex);
            log << "sweep: " << paths[i] << " -> exit " << res.exit_code
                << (res.error.empty() ? "" : " (" + res.error + ")") << "\n";
        }
    };
    const int workers = std::min<int>(parallelism, static_cast<int>(paths.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    fs::create_directories(out_dir);
    const fs::path csv = fs::path(out_dir) / "sweep.csv";
    std::ofstream out(csv);
    out << "config,n,theta,r,p,kind,base_kind,amplitude,lambda,q,fitted,theoretical,gap,r_squared,status,"
           "blowup_time,phi_orlicz,phi_lp,exit_code,error\n";
    int successes = 0;
    int first_failure = kExitOk;
    for (const auto& res : results) {
        const bool ok = res.exit_code == kExitOk || res.exit_code == kExitBlowup;
        if (ok) ++successes;
        else if (first_failure == kExitOk) first_failure = res.exit_code;
        std::string key = csv_escape(res.config) + ",";
        if (res.cfg) {
            const auto& c = *res.cfg;
            key += std::to_string(c.problem.n) + "," + format_double(c.problem.theta) + "," +
                   format_double(c.problem.r) + "," + format_double(theory_p(c)) + "," + to_string(c.data.kind) +
                   "," + to_string(root_recipe(c.data).kind) + "," + format_double(effective_amplitude(c.data)) + "," +
                   format_double(c.data.kind == DataKind::dilated ? c.data.lambda : 1.0);
        } else {
            key += ",,,,,,,";
        }
        const std::string tail = "," + (res.blowup_time ? format_double(*res.blowup_time) : std::string()) + "," +
                                 format_double(res.phi_orlicz) + "," + format_double(res.phi_lp) + "," +
                                 std::to_string(res.exit_code) + "," + csv_escape(res.error);
        if (res.rows.empty()) {
            out << key << ",,,,,,," << tail << "\n";
            continue;
        }
        for (const auto& r : res.rows) {
            out << key << "," << exponent_label(r.q) << "," << format_double(r.fitted) << ","
                << format_double(r.theoretical) << "," << format_double(r.gap) << ","
                << format_double(r.fit.r_squared) << "," << r.status << tail << "\n";
        }
    }
    log << "sweep: wrote " << csv.string() << " (" << successes << "/" << results.size() << " succeeded)\n";
    return successes > 0 ? kExitOk : first_failure;
}

int cmd_orlicz_norm(const std::string& config_path, const std::string& out_dir, std::ostream& log) {
    try {
        const ExperimentConfig cfg = load_config(config_path);
        const GridSpec grid = build_grid(cfg);
        const GeneratedData gen = generate_with_info(cfg.data, grid);
        const double norm = luxemburg_norm(gen.field, OrliczParams{cfg.problem.r});
        json j = {{"r", cfg.problem.r},
                  {"luxemburg_norm", norm},
                  {"l1_norm", lp_norm(gen.field, 1.0)},
                  {"l2_norm", lp_norm(gen.field, 2.0)},
                  {"linf_sample", gen.field.max_abs()},
                  {"linf_unbounded", gen.sample_capped},
                  {"sample_capped", gen.sample_capped},
                  {"cap_value", gen.cap_value}};
        const std::string text = j.dump(2) + "\n";
        log << text;
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            write_text(fs::path(out_dir) / "orlicz.json", text);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitInvariant;
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"expheat: pseudospectral experiments for heat equations with exponential nonlinearity"};
    app.require_subcommand(1);

    std::string config, out_dir = "out", trajectory, q_list, window;
    int parallelism = 1;

    auto* solve = app.add_subcommand("solve", "Run one experiment and write its trajectory");
    solve->add_option("--config", config, "JSON experiment config")->required();
    solve->add_option("--out-dir", out_dir, "Output directory");

    std::string decay_out;
    auto* decay = app.add_subcommand("decay", "Fit decay exponents of a trajectory");
    decay->add_option("trajectory", trajectory, "Run directory or trajectory CSV")->required();
    decay->add_option("--q-list", q_list, "Comma-separated exponents, e.g. 2,4,inf");
    decay->add_option("--window", window, "Fit window t_lo,t_hi");
    decay->add_option("--out-dir", decay_out, "Output directory (default: the run directory)");

    std::string profile_out;
    auto* profile = app.add_subcommand("profile", "Mass limit and heat-kernel profile errors");
    profile->add_option("trajectory", trajectory, "Run directory")->required();
    profile->add_option("--out-dir", profile_out, "Output directory (default: the run directory)");

    auto* sweep = app.add_subcommand("sweep", "Run every matching config and aggregate decay reports");
    sweep->add_option("--config", config, "Glob of JSON configs")->required();
    sweep->add_option("--parallelism", parallelism, "Concurrent experiments");
    sweep->add_option("--out-dir", out_dir, "Output directory");

    std::string orlicz_out;
    auto* orlicz = app.add_subcommand("orlicz-norm", "Luxemburg norm of the configured initial data");
    orlicz->add_option("--config", config, "JSON experiment config")->required();
    orlicz->add_option("--out-dir", orlicz_out, "Optional output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUnparseable;
    }

    try {
        if (*solve) return cmd_solve(config, out_dir, std::cout);
        if (*decay) {
            std::vector<double> qs;
            if (!q_list.empty()) qs = parse_exponent_list(q_list);
            std::optional<std::pair<double, double>> w;
            if (!window.empty()) {
                const auto comma = window.find(',');
                if (comma == std::string::npos) throw std::invalid_argument("--window expects t_lo,t_hi");
                const double lo = std::stod(window.substr(0, comma));
                const double hi = std::stod(window.substr(comma + 1));
                if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("--window needs 0 < t_lo < t_hi");
                w = std::make_pair(lo, hi);
            }
            return cmd_decay(trajectory, qs, w, decay_out, std::cout);
        }
        if (*profile) return cmd_profile(trajectory, profile_out, std::cout);
        if (*sweep) return cmd_sweep(config, parallelism, out_dir, std::cout);
        if (*orlicz) return cmd_orlicz_norm(config, orlicz_out, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnparseable;
    }
    return kExitUnparseable;
}

} // namespace expheat
