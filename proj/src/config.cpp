#include "expheat/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace expheat {

using nlohmann::json;

namespace {

/// Minimal recursive scan of already-validated JSON text, recording the line
/// at which each value starts.
class LineScanner {
public:
    explicit LineScanner(const std::string& text) : s_(text) {}

    std::vector<std::pair<std::string, int>> run() {
        skip_ws();
        if (pos_ < s_.size()) value("");
        return out_;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            if (s_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }

    std::string string_token() {
        std::string out;
        ++pos_;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
                out += s_[pos_ + 1];
                pos_ += 2;
                continue;
            }
            out += s_[pos_++];
        }
        ++pos_;
        return out;
    }

    static std::string escape(const std::string& key) {
        std::string out;
        for (char c : key) {
            if (c == '~') out += "~0";
            else if (c == '/') out += "~1";
            else out += c;
        }
        return out;
    }

    void value(const std::string& pointer) {
        out_.emplace_back(pointer, line_);
        if (pos_ >= s_.size()) return;
        const char c = s_[pos_];
        if (c == '{') {
            ++pos_;
            skip_ws();
            while (pos_ < s_.size() && s_[pos_] != '}') {
                const std::string key = string_token();
                skip_ws();
                ++pos_; // ':'
                skip_ws();
                value(pointer + "/" + escape(key));
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
                skip_ws();
            }
            ++pos_;
        } else if (c == '[') {
            ++pos_;
            skip_ws();
            int index = 0;
            while (pos_ < s_.size() && s_[pos_] != ']') {
                value(pointer + "/" + std::to_string(index++));
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
                skip_ws();
            }
            ++pos_;
        } else if (c == '"') {
            string_token();
        } else {
            while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}' && s_[pos_] != ']' &&
                   !std::isspace(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
        }
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::vector<std::pair<std::string, int>> out_;
};

class Reader {
public:
    Reader(const std::string& text, std::string source) : source_(std::move(source)) {
        for (auto& [ptr, line] : json_pointer_lines(text)) lines_.emplace(ptr, line);
    }

    [[noreturn]] void fail(int code, const std::string& pointer, const std::string& msg) const {
        std::string p = pointer;
        int line = 1;
        for (;;) {
            auto it = lines_.find(p);
            if (it != lines_.end()) {
                line = it->second;
                break;
            }
            const auto cut = p.rfind('/');
            if (cut == std::string::npos) break;
            p = p.substr(0, cut);
        }
        throw ConfigError(code, source_ + ":" + std::to_string(line) + ": " + (pointer.empty() ? "/" : pointer) +
                                    ": " + msg);
    }

    const json* object(const json& parent, const std::string& key, const std::string& ptr, bool required) const {
        if (!parent.contains(key)) {
            if (required) fail(kExitUnparseable, ptr, "missing required section '" + key + "'");
            return nullptr;
        }
        const json& v = parent.at(key);
        if (!v.is_object()) fail(kExitUnparseable, ptr + "/" + key, "expected an object");
        return &v;
    }

    void allowed_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys) const {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (const char* k : keys) ok = ok || it.key() == k;
            if (!ok) fail(kExitUnparseable, ptr + "/" + it.key(), "unknown key");
        }
    }

    void number(const json& obj, const std::string& ptr, const char* key, double& out) const {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        if (!v.is_number()) fail(kExitUnparseable, ptr + "/" + key, "expected a number");
        out = v.get<double>();
    }

    void integer(const json& obj, const std::string& ptr, const char* key, int& out) const {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        if (!v.is_number_integer()) fail(kExitUnparseable, ptr + "/" + key, "expected an integer");
        const auto x = v.get<long long>();
        if (x < -(1LL << 30) || x > (1LL << 30)) fail(kExitInvariant, ptr + "/" + key, "integer out of range");
        out = static_cast<int>(x);
    }

    void boolean(const json& obj, const std::string& ptr, const char* key, bool& out) const {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        if (!v.is_boolean()) fail(kExitUnparseable, ptr + "/" + key, "expected true or false");
        out = v.get<bool>();
    }

    void string(const json& obj, const std::string& ptr, const char* key, std::string& out) const {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        if (!v.is_string()) fail(kExitUnparseable, ptr + "/" + key, "expected a string");
        out = v.get<std::string>();
    }

    double exponent(const json& v, const std::string& ptr) const {
        if (v.is_number()) return v.get<double>();
        if (v.is_string() && v.get<std::string>() == "inf") return kInf;
        fail(kExitUnparseable, ptr, "expected a number or \"inf\"");
    }

    void exponent_list(const json& obj, const std::string& ptr, const char* key, std::vector<double>& out) const {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        const std::string p = ptr + "/" + key;
        if (!v.is_array()) fail(kExitUnparseable, p, "expected an array");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double q = exponent(v[i], p + "/" + std::to_string(i));
            if (!(q >= 1.0)) fail(kExitInvariant, p + "/" + std::to_string(i), "exponent must be >= 1");
            out.push_back(q);
        }
        if (out.empty()) fail(kExitInvariant, p, "list must not be empty");
    }

private:
    std::string source_;
    std::map<std::string, int> lines_;
};

bool power_of_two(int N) { return N > 0 && (N & (N - 1)) == 0; }

DataRecipe read_recipe(const Reader& rd, const json& obj, const std::string& ptr, const ProblemParams& prob) {
    rd.allowed_keys(obj, ptr, {"kind", "amplitude", "center", "width", "r", "base", "lambda", "p", "factor"});
    DataRecipe d;
    d.r = prob.r;
    std::string kind = "gaussian_bump";
    rd.string(obj, ptr, "kind", kind);
    try {
        d.kind = data_kind_from_string(kind);
    } catch (const std::invalid_argument& e) {
        rd.fail(kExitInvariant, ptr + "/kind", e.what());
    }
    rd.number(obj, ptr, "amplitude", d.amplitude);
    rd.number(obj, ptr, "width", d.width);
    rd.number(obj, ptr, "r", d.r);
    rd.number(obj, ptr, "lambda", d.lambda);
    rd.number(obj, ptr, "p", d.p);
    rd.number(obj, ptr, "factor", d.factor);
    if (obj.contains("center")) {
        const json& c = obj.at("center");
        if (!c.is_array()) rd.fail(kExitUnparseable, ptr + "/center", "expected an array");
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!c[i].is_number()) rd.fail(kExitUnparseable, ptr + "/center/" + std::to_string(i), "expected a number");
            d.center.push_back(c[i].get<double>());
        }
        if (!d.center.empty() && static_cast<int>(d.center.size()) != prob.n)
            rd.fail(kExitInvariant, ptr + "/center", "center must have n = " + std::to_string(prob.n) + " coordinates");
    }
    if (!std::isfinite(d.amplitude)) rd.fail(kExitInvariant, ptr + "/amplitude", "amplitude must be finite");
    if (!(d.width > 0.0) || !std::isfinite(d.width)) rd.fail(kExitInvariant, ptr + "/width", "width must be positive");
    if (!(d.r > 1.0)) rd.fail(kExitInvariant, ptr + "/r", "r must exceed 1");
    if (!(d.lambda > 0.0) || !std::isfinite(d.lambda)) rd.fail(kExitInvariant, ptr + "/lambda", "lambda must be positive");
    if (!(d.p >= 1.0)) rd.fail(kExitInvariant, ptr + "/p", "p must be >= 1");
    if (!std::isfinite(d.factor)) rd.fail(kExitInvariant, ptr + "/factor", "factor must be finite");
    const bool wrapper = d.kind == DataKind::dilated || d.kind == DataKind::scaled;
    if (obj.contains("base")) {
        const json& b = obj.at("base");
        if (!b.is_object()) rd.fail(kExitUnparseable, ptr + "/base", "expected an object");
        if (!wrapper) rd.fail(kExitInvariant, ptr + "/base", "only dilated and scaled recipes take a base");
        d.base = std::make_shared<DataRecipe>(read_recipe(rd, b, ptr + "/base", prob));
    } else if (wrapper) {
        rd.fail(kExitInvariant, ptr, kind + " recipe needs a base");
    }
    return d;
}

json recipe_json(const DataRecipe& d) {
    json j;
    j["kind"] = to_string(d.kind);
    j["amplitude"] = d.amplitude;
    j["center"] = d.center;
    j["width"] = d.width;
    j["r"] = d.r;
    j["lambda"] = d.lambda;
    j["p"] = d.p;
    j["factor"] = d.factor;
    if (d.base) j["base"] = recipe_json(*d.base);
    return j;
}

json exponent_json(double q) { return q == kInf ? json("inf") : json(q); }

} // namespace

std::vector<std::pair<std::string, int>> json_pointer_lines(const std::string& text) {
    return LineScanner(text).run();
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        for (std::size_t i = 0; i + 1 < upto; ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError(kExitUnparseable, source + ":" + std::to_string(line) + ": syntax error: " + e.what());
    }
    const Reader rd(text, source);
    if (!root.is_object()) rd.fail(kExitUnparseable, "", "config must be a JSON object");
    rd.allowed_keys(root, "", {"problem", "data", "time", "solver", "analysis"});

    ExperimentConfig c;
    const json* pj = rd.object(root, "problem", "", true);
    rd.allowed_keys(*pj, "/problem", {"n", "theta", "r", "L", "N", "nonlinear", "signed"});
    ProblemParams& p = c.problem;
    rd.integer(*pj, "/problem", "n", p.n);
    rd.number(*pj, "/problem", "theta", p.theta);
    rd.number(*pj, "/problem", "r", p.r);
    rd.number(*pj, "/problem", "L", p.L);
    rd.integer(*pj, "/problem", "N", p.N);
    rd.boolean(*pj, "/problem", "nonlinear", p.nonlinear);
    rd.boolean(*pj, "/problem", "signed", p.signed_mode);
    if (p.n < 1 || p.n > 3) rd.fail(kExitInvariant, "/problem/n", "dimension must be 1, 2 or 3");
    if (!(p.theta > 0.0 && p.theta <= 2.0)) rd.fail(kExitInvariant, "/problem/theta", "theta must lie in (0, 2]");
    if (!(p.r > 1.0) || !std::isfinite(p.r)) rd.fail(kExitInvariant, "/problem/r", "r must exceed 1");
    if (!(p.L > 0.0) || !std::isfinite(p.L)) rd.fail(kExitInvariant, "/problem/L", "L must be positive");
    if (!power_of_two(p.N) || p.N < 16) rd.fail(kExitInvariant, "/problem/N", "N must be a power of two >= 16");
    if (p.signed_mode && !admits_signed_mode(p.r))
        rd.fail(kExitInvariant, "/problem/signed", "signed data needs r to be an even integer");
    double bytes = 24.0;
    for (int a = 0; a < p.n; ++a) bytes *= p.N;
    if (bytes > static_cast<double>(memory_budget_bytes()))
        rd.fail(kExitInvariant, "/problem/N", "grid exceeds the memory budget (EXPHEAT_MEM_BUDGET_MB)");

    const json* dj = rd.object(root, "data", "", true);
    c.data = read_recipe(rd, *dj, "/data", p);

    if (const json* tj = rd.object(root, "time", "", false)) {
        rd.allowed_keys(*tj, "/time", {"t0", "ramp_steps", "rho", "T", "substeps"});
        TimeParams& t = c.time;
        rd.number(*tj, "/time", "t0", t.t0);
        rd.integer(*tj, "/time", "ramp_steps", t.ramp_steps);
        rd.number(*tj, "/time", "rho", t.rho);
        rd.number(*tj, "/time", "T", t.T);
        rd.integer(*tj, "/time", "substeps", t.substeps);
        if (!(t.t0 > 0.0) || !std::isfinite(t.t0)) rd.fail(kExitInvariant, "/time/t0", "t0 must be positive");
        if (t.ramp_steps < 1) rd.fail(kExitInvariant, "/time/ramp_steps", "ramp_steps must be >= 1");
        if (!(t.rho > 1.0 && t.rho <= 2.0)) rd.fail(kExitInvariant, "/time/rho", "rho must lie in (1, 2]");
        if (!(t.T >= t.t0) || !std::isfinite(t.T)) rd.fail(kExitInvariant, "/time/T", "T must be finite and >= t0");
        if (t.substeps < 1) rd.fail(kExitInvariant, "/time/substeps", "substeps must be >= 1");
    }

    if (const json* sj = rd.object(root, "solver", "", false)) {
        rd.allowed_keys(*sj, "/solver",
                        {"mode", "picard_tol", "picard_max_iter", "blowup_threshold", "boundary_mass_tol",
                         "stiffness_limit", "norm_qs", "track_orlicz", "store_states"});
        SolverConfig& s = c.solver;
        std::string mode = "time_march";
        rd.string(*sj, "/solver", "mode", mode);
        if (mode == "time_march") s.mode = SolverMode::time_march;
        else if (mode == "global_picard") s.mode = SolverMode::global_picard;
        else rd.fail(kExitInvariant, "/solver/mode", "mode must be time_march or global_picard");
        rd.number(*sj, "/solver", "picard_tol", s.picard_tol);
        rd.integer(*sj, "/solver", "picard_max_iter", s.picard_max_iter);
        rd.number(*sj, "/solver", "blowup_threshold", s.blowup_threshold);
        rd.number(*sj, "/solver", "boundary_mass_tol", s.boundary_mass_tol);
        rd.number(*sj, "/solver", "stiffness_limit", s.stiffness_limit);
        rd.exponent_list(*sj, "/solver", "norm_qs", s.norm_qs);
        rd.boolean(*sj, "/solver", "track_orlicz", s.track_orlicz);
        rd.boolean(*sj, "/solver", "store_states", s.store_states);
        if (!(s.picard_tol > 0.0)) rd.fail(kExitInvariant, "/solver/picard_tol", "picard_tol must be positive");
        if (s.picard_max_iter < 1) rd.fail(kExitInvariant, "/solver/picard_max_iter", "picard_max_iter must be >= 1");
        if (!(s.blowup_threshold > 0.0)) rd.fail(kExitInvariant, "/solver/blowup_threshold", "blowup_threshold must be positive");
        if (!(s.boundary_mass_tol > 0.0 && s.boundary_mass_tol <= 1.0))
            rd.fail(kExitInvariant, "/solver/boundary_mass_tol", "boundary_mass_tol must lie in (0, 1]");
        if (!(s.stiffness_limit > 0.0)) rd.fail(kExitInvariant, "/solver/stiffness_limit", "stiffness_limit must be positive");
    }

    if (const json* aj = rd.object(root, "analysis", "", false)) {
        rd.allowed_keys(*aj, "/analysis",
                        {"q_list", "fit_window", "p", "write_snapshots", "trajectory_csv", "decay_csv", "profile_json"});
        AnalysisParams& a = c.analysis;
        rd.exponent_list(*aj, "/analysis", "q_list", a.q_list);
        if (aj->contains("fit_window") && !aj->at("fit_window").is_null()) {
            const json& w = aj->at("fit_window");
            if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
                rd.fail(kExitUnparseable, "/analysis/fit_window", "expected [t_lo, t_hi]");
            const double lo = w[0].get<double>(), hi = w[1].get<double>();
            if (!(lo > 0.0 && hi > lo)) rd.fail(kExitInvariant, "/analysis/fit_window", "need 0 < t_lo < t_hi");
            a.fit_window = std::make_pair(lo, hi);
        }
        if (aj->contains("p") && !aj->at("p").is_null()) {
            double pv = 1.0;
            rd.number(*aj, "/analysis", "p", pv);
            if (!(pv >= 1.0 && pv <= p.r)) rd.fail(kExitInvariant, "/analysis/p", "p must lie in [1, r]");
            a.p = pv;
        }
        rd.boolean(*aj, "/analysis", "write_snapshots", a.write_snapshots);
        rd.string(*aj, "/analysis", "trajectory_csv", a.trajectory_csv);
        rd.string(*aj, "/analysis", "decay_csv", a.decay_csv);
        rd.string(*aj, "/analysis", "profile_json", a.profile_json);
        for (const auto* name : {&a.trajectory_csv, &a.decay_csv, &a.profile_json})
            if (name->empty()) rd.fail(kExitInvariant, "/analysis", "report paths must not be empty");
    }

    // Cross-module checks the per-field pass cannot see.
    try {
        build_problem(c).validate();
        build_time_grid(c).validate();
        c.solver.validate();
    } catch (const std::invalid_argument& e) {
        rd.fail(kExitInvariant, "/data", e.what());
    } catch (const ConfigError& e) {
        rd.fail(kExitInvariant, "/data", e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(kExitMissingArtifact, path + ": cannot open config");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string to_json_text(const ExperimentConfig& c) {
    json j;
    j["problem"] = {{"n", c.problem.n},         {"theta", c.problem.theta}, {"r", c.problem.r},
                    {"L", c.problem.L},         {"N", c.problem.N},         {"nonlinear", c.problem.nonlinear},
                    {"signed", c.problem.signed_mode}};
    j["data"] = recipe_json(c.data);
    j["time"] = {{"t0", c.time.t0},
                 {"ramp_steps", c.time.ramp_steps},
                 {"rho", c.time.rho},
                 {"T", c.time.T},
                 {"substeps", c.time.substeps}};
    json qs = json::array();
    for (double q : c.solver.norm_qs) qs.push_back(exponent_json(q));
    j["solver"] = {{"mode", c.solver.mode == SolverMode::time_march ? "time_march" : "global_picard"},
                   {"picard_tol", c.solver.picard_tol},
                   {"picard_max_iter", c.solver.picard_max_iter},
                   {"blowup_threshold", c.solver.blowup_threshold},
                   {"boundary_mass_tol", c.solver.boundary_mass_tol},
                   {"stiffness_limit", c.solver.stiffness_limit},
                   {"norm_qs", qs},
                   {"track_orlicz", c.solver.track_orlicz},
                   {"store_states", c.solver.store_states}};
    json ql = json::array();
    for (double q : c.analysis.q_list) ql.push_back(exponent_json(q));
    json a;
    a["q_list"] = ql;
    a["fit_window"] = c.analysis.fit_window ? json::array({c.analysis.fit_window->first, c.analysis.fit_window->second})
                                            : json(nullptr);
    a["p"] = c.analysis.p ? json(*c.analysis.p) : json(nullptr);
    a["write_snapshots"] = c.analysis.write_snapshots;
    a["trajectory_csv"] = c.analysis.trajectory_csv;
    a["decay_csv"] = c.analysis.decay_csv;
    a["profile_json"] = c.analysis.profile_json;
    j["analysis"] = a;
    return j.dump(2) + "\n";
}

GridSpec build_grid(const ExperimentConfig& c) { return make_grid(c.problem.n, c.problem.N, c.problem.L); }

ProblemSpec build_problem(const ExperimentConfig& c) {
    ProblemSpec spec;
    spec.grid = build_grid(c);
    spec.diffusion = DiffusionSpec{c.problem.theta, c.problem.n};
    spec.nonlin = NonlinearitySpec{c.problem.r, c.problem.theta, c.problem.n};
    spec.nonlin.signed_mode = c.problem.signed_mode;
    spec.nonlinear = c.problem.nonlinear;
    try {
        spec.initial = generate(c.data, spec.grid);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(kExitInvariant, std::string("data: ") + e.what());
    }
    return spec;
}

TimeGrid build_time_grid(const ExperimentConfig& c) {
    return make_time_grid(c.time.t0, c.time.ramp_steps, c.time.rho, c.time.T, c.time.substeps);
}

const DataRecipe& root_recipe(const DataRecipe& recipe) {
    const DataRecipe* d = &recipe;
    while (d->base) d = d->base.get();
    return *d;
}

double effective_amplitude(const DataRecipe& recipe) {
    if (recipe.kind == DataKind::scaled && recipe.base) return recipe.factor * effective_amplitude(*recipe.base);
    if (recipe.kind == DataKind::dilated && recipe.base) return effective_amplitude(*recipe.base);
    return recipe.amplitude;
}

double theory_p(const ExperimentConfig& c) {
    if (c.analysis.p) return *c.analysis.p;
    return root_recipe(c.data).kind == DataKind::log_spike ? c.problem.r : 1.0;
}

} // namespace expheat
