#include "hsr_cli/config.hpp"

#include "hsr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace hsr::cli {

using nlohmann::json;

namespace {

constexpr double kNnmGammaFloor = 1e-6;

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

std::string path_of(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

template <typename T>
void read_int(const json& obj, const std::string& where, const char* key, T& target) {
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
        throw ConfigError(path_of(where, key) + ": expected an integer");
    }
    const auto value = v.get<long long>();
    if (value < static_cast<long long>(std::numeric_limits<T>::min()) ||
        value > static_cast<long long>(std::numeric_limits<T>::max())) {
        throw ConfigError(path_of(where, key) + ": out of range");
    }
    target = static_cast<T>(value);
}

void read_seed(const json& obj, const std::string& where, const char* key, std::uint64_t& target) {
    const json& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw ConfigError(path_of(where, key) + ": expected a non-negative integer");
    }
    target = v.get<std::uint64_t>();
}

void read_real(const json& obj, const std::string& where, const char* key, double& target) {
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError(path_of(where, key) + ": expected a number");
    }
    target = v.get<double>();
    if (!std::isfinite(target)) {
        throw ConfigError(path_of(where, key) + ": must be finite");
    }
}

void read_real(const json& obj, const std::string& where, const char* key, std::optional<double>& target) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
        return;
    }
    double value = 0.0;
    read_real(obj, where, key, value);
    target = value;
}

void read_string(const json& obj, const std::string& where, const char* key, std::string& target,
                 std::initializer_list<const char*> choices = {}) {
    if (!obj.contains(key)) {
        return;
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
        throw ConfigError(path_of(where, key) + ": expected a string");
    }
    target = v.get<std::string>();
    if (choices.size() != 0 &&
        std::none_of(choices.begin(), choices.end(), [&](const char* c) { return target == c; })) {
        throw ConfigError(path_of(where, key) + ": unsupported value '" + target + "'");
    }
}

void read_bool(const json& obj, const std::string& where, const char* key, bool& target) {
    if (!obj.contains(key)) {
        return;
    }
    if (!obj.at(key).is_boolean()) {
        throw ConfigError(path_of(where, key) + ": expected a boolean");
    }
    target = obj.at(key).get<bool>();
}

void require_positive(double value, const std::string& what) {
    if (!(value > 0.0)) {
        throw ConfigError(what + " must be positive");
    }
}

PathsConfig parse_paths(const json& j) {
    const std::string w = "paths";
    check_keys(j, w, {"input_dir", "output_dir", "reference", "estimate", "image"});
    PathsConfig c;
    read_string(j, w, "input_dir", c.input_dir);
    read_string(j, w, "output_dir", c.output_dir);
    read_string(j, w, "reference", c.reference);
    read_string(j, w, "estimate", c.estimate);
    read_string(j, w, "image", c.image);
    return c;
}

SceneConfig parse_scene(const json& j) {
    const std::string w = "scene";
    check_keys(j, w,
               {"bands", "width", "height", "endmembers", "ev_magnitude", "layout", "patch_rows",
                "patch_cols", "patches", "active_min", "active_max", "smoothing_window", "dirichlet"});
    SceneConfig c;
    read_int(j, w, "bands", c.bands);
    read_int(j, w, "width", c.width);
    read_int(j, w, "height", c.height);
    read_int(j, w, "endmembers", c.endmembers);
    read_real(j, w, "ev_magnitude", c.ev_magnitude);
    read_string(j, w, "layout", c.layout, {"grid", "random"});
    read_int(j, w, "patch_rows", c.patch_rows);
    read_int(j, w, "patch_cols", c.patch_cols);
    read_int(j, w, "patches", c.patches);
    read_int(j, w, "active_min", c.active_min);
    read_int(j, w, "active_max", c.active_max);
    read_int(j, w, "smoothing_window", c.smoothing_window);
    read_real(j, w, "dirichlet", c.dirichlet);
    return c;
}

SimulationConfig parse_simulation(const json& j) {
    const std::string w = "simulation";
    check_keys(j, w,
               {"ms_bands", "spectral_mode", "spectral_table", "kernel_size", "variance", "factor",
                "snr_m_db", "snr_h_db"});
    SimulationConfig c;
    read_int(j, w, "ms_bands", c.ms_bands);
    read_string(j, w, "spectral_mode", c.spectral_mode, {"boxcar", "gaussian", "table"});
    read_string(j, w, "spectral_table", c.spectral_table);
    read_int(j, w, "kernel_size", c.kernel_size);
    read_real(j, w, "variance", c.variance);
    read_int(j, w, "factor", c.factor);
    if (j.contains("snr_m_db")) {
        c.snr_m_db = parse_snr(j.at("snr_m_db"), "simulation.snr_m_db");
    }
    if (j.contains("snr_h_db")) {
        c.snr_h_db = parse_snr(j.at("snr_h_db"), "simulation.snr_h_db");
    }
    if (c.spectral_mode == "table" && c.spectral_table.empty()) {
        throw ConfigError("simulation.spectral_table is required when spectral_mode is \"table\"");
    }
    return c;
}

SolverConfig parse_solver(const json& j) {
    const std::string w = "solver";
    check_keys(j, w,
               {"solver", "p", "tau", "gamma", "gamma_global", "gamma_schedule", "nnm_gamma", "patch_rows",
                "patch_cols", "max_iter", "tol", "seed", "inner_tol", "inner_max_iter", "report_wall_time"});
    SolverConfig c;
    read_string(j, w, "solver", c.solver, {"gloria", "exact_mm", "nominal_pg", "nnm"});
    read_real(j, w, "p", c.p);
    read_real(j, w, "tau", c.tau);
    read_real(j, w, "gamma", c.gamma);
    read_real(j, w, "gamma_global", c.gamma_global);
    read_string(j, w, "gamma_schedule", c.gamma_schedule, {"semi_real", "synthetic"});
    read_real(j, w, "nnm_gamma", c.nnm_gamma);
    read_int(j, w, "patch_rows", c.patch_rows);
    read_int(j, w, "patch_cols", c.patch_cols);
    read_int(j, w, "max_iter", c.max_iter);
    read_real(j, w, "tol", c.tol);
    if (j.contains("seed")) {
        std::uint64_t seed = 0;
        read_seed(j, w, "seed", seed);
        c.seed = seed;
    }
    read_real(j, w, "inner_tol", c.inner_tol);
    read_int(j, w, "inner_max_iter", c.inner_max_iter);
    read_bool(j, w, "report_wall_time", c.report_wall_time);
    if (c.max_iter < 0 || c.inner_max_iter < 0) {
        throw ConfigError("solver iteration limits must be non-negative");
    }
    if (c.tol < 0.0 || c.inner_tol < 0.0) {
        throw ConfigError("solver tolerances must be non-negative");
    }
    for (const auto* g : {&c.gamma, &c.gamma_global}) {
        if (*g && **g < 0.0) {
            throw ConfigError("solver gammas must be non-negative");
        }
    }
    if (c.nnm_gamma && !(*c.nnm_gamma > 0.0)) {
        throw ConfigError("solver.nnm_gamma must be positive");
    }
    return c;
}

MetricsConfig parse_metrics(const json& j) {
    const std::string w = "metrics";
    check_keys(j, w, {"resolution_ratio", "psnr_peak", "sam_degenerate", "sam_map_cap_deg"});
    MetricsConfig c;
    read_real(j, w, "resolution_ratio", c.resolution_ratio);
    read_string(j, w, "psnr_peak", c.psnr_peak, {"band_max", "unit"});
    read_string(j, w, "sam_degenerate", c.sam_degenerate, {"zero", "exclude"});
    read_real(j, w, "sam_map_cap_deg", c.sam_map_cap_deg);
    require_positive(c.resolution_ratio, "metrics.resolution_ratio");
    require_positive(c.sam_map_cap_deg, "metrics.sam_map_cap_deg");
    return c;
}

RankTableConfig parse_rank_table(const json& j) {
    const std::string w = "rank_table";
    check_keys(j, w, {"grids", "threshold"});
    RankTableConfig c;
    if (j.contains("grids")) {
        const json& g = j.at("grids");
        if (!g.is_array() || g.empty()) {
            throw ConfigError("rank_table.grids: expected a non-empty array of integers");
        }
        c.grids.clear();
        for (const auto& v : g) {
            if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1 << 20) {
                throw ConfigError("rank_table.grids: entries must be positive integers");
            }
            c.grids.push_back(v.get<int>());
        }
    }
    read_real(j, w, "threshold", c.threshold);
    if (!(c.threshold > 0.0 && c.threshold <= 1.0)) {
        throw ConfigError("rank_table.threshold must lie in (0, 1]");
    }
    return c;
}

} // namespace

double parse_snr(const json& value, const std::string& key) {
    if (value.is_string()) {
        if (value.get<std::string>() == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        throw ConfigError(key + ": expected a number or \"inf\"");
    }
    if (!value.is_number() || !std::isfinite(value.get<double>())) {
        throw ConfigError(key + ": expected a number or \"inf\"");
    }
    return value.get<double>();
}

json snr_to_json(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) {
        return "inf";
    }
    return snr_db;
}

RunConfig parse_config(const json& doc) {
    check_keys(doc, "config", {"seed", "paths", "scene", "simulation", "solver", "metrics", "rank_table"});
    RunConfig c;
    if (doc.contains("seed")) {
        read_seed(doc, "", "seed", c.seed);
    }
    if (doc.contains("paths")) {
        c.paths = parse_paths(doc.at("paths"));
    }
    if (doc.contains("scene")) {
        c.scene = parse_scene(doc.at("scene"));
    }
    if (doc.contains("simulation")) {
        c.simulation = parse_simulation(doc.at("simulation"));
    }
    if (doc.contains("solver")) {
        c.solver = parse_solver(doc.at("solver"));
    }
    if (doc.contains("metrics")) {
        c.metrics = parse_metrics(doc.at("metrics"));
    }
    if (doc.contains("rank_table")) {
        c.rank_table = parse_rank_table(doc.at("rank_table"));
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

std::vector<int> parse_grid_list(const std::string& text) {
    std::vector<int> grids;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("malformed grid list '" + text + "'");
        }
        if (used != item.size() || value < 1) {
            throw ConfigError("malformed grid list '" + text + "'");
        }
        grids.push_back(value);
    }
    if (grids.empty() || (!text.empty() && text.back() == ',')) {
        throw ConfigError("malformed grid list '" + text + "'");
    }
    return grids;
}

double default_gamma(const SolverConfig& solver, const SimulationConfig& simulation) {
    const double numerator = solver.gamma_schedule == "synthetic" ? 40.0 : 20.0;
    const double snr_sum = simulation.snr_m_db + simulation.snr_h_db;
    if (std::isinf(snr_sum)) {
        return 0.0;
    }
    if (!(snr_sum > 0.0)) {
        throw ConfigError("default gamma needs SNR_M + SNR_H > 0; set solver.gamma explicitly");
    }
    return numerator / snr_sum;
}

double default_nnm_gamma(const SolverConfig& solver, const SimulationConfig& simulation) {
    const double gamma = default_gamma(solver, simulation);
    return gamma > 0.0 ? gamma : kNnmGammaFloor;
}

} // namespace hsr::cli
