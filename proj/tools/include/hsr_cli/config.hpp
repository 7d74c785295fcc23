#pragma once

// Run configuration shared by all subcommands. Every block is optional and
// falls back to the defaults below; unknown keys are rejected.

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsr::cli {

struct PathsConfig {
    std::string input_dir = ".";
    std::string output_dir = ".";
    std::string reference;  ///< evaluate
    std::string estimate;   ///< evaluate
    std::string image;      ///< rank-table
};

struct SceneConfig {
    long bands = 30;
    int width = 48;
    int height = 48;
    long endmembers = 4;
    double ev_magnitude = 0.1;
    std::string layout = "grid";  ///< "grid" | "random"
    int patch_rows = 4;
    int patch_cols = 4;
    int patches = 16;  ///< target count for "random"
    long active_min = 1;
    long active_max = 0;
    int smoothing_window = 5;
    double dirichlet = 1.0;
};

struct SimulationConfig {
    long ms_bands = 6;
    std::string spectral_mode = "boxcar";  ///< "boxcar" | "gaussian" | "table"
    std::string spectral_table;
    int kernel_size = 11;
    double variance = 1.7 * 1.7;
    int factor = 4;
    double snr_m_db = 25.0;
    double snr_h_db = 25.0;
};

struct SolverConfig {
    std::string solver = "gloria";  ///< "gloria" | "exact_mm" | "nominal_pg" | "nnm"
    double p = 0.5;
    double tau = 1.0;
    std::optional<double> gamma;
    std::optional<double> gamma_global;
    std::string gamma_schedule = "semi_real";  ///< 20/(SNR_M+SNR_H); "synthetic" uses 40
    std::optional<double> nnm_gamma;  ///< falls back to gamma, then the schedule
    int patch_rows = 4;
    int patch_cols = 4;
    int max_iter = 100;
    double tol = 1e-5;
    std::optional<std::uint64_t> seed;
    double inner_tol = 1e-7;
    int inner_max_iter = 500;
    bool report_wall_time = false;
};

struct MetricsConfig {
    double resolution_ratio = 4.0;
    std::string psnr_peak = "band_max";    ///< "band_max" | "unit"
    std::string sam_degenerate = "zero";   ///< "zero" | "exclude"
    double sam_map_cap_deg = 30.0;
};

struct RankTableConfig {
    std::vector<int> grids{1, 2, 4, 8};
    double threshold = 0.9999;
};

struct RunConfig {
    std::uint64_t seed = 0;
    PathsConfig paths;
    SceneConfig scene;
    SimulationConfig simulation;
    SolverConfig solver;
    MetricsConfig metrics;
    RankTableConfig rank_table;
};

/// Throws ConfigError on schema violations.
RunConfig parse_config(const nlohmann::json& doc);
/// Throws IoError if unreadable, ConfigError if not valid JSON or not a valid config.
RunConfig load_config(const std::string& path);

/// Number or the string "inf".
double parse_snr(const nlohmann::json& value, const std::string& key);
nlohmann::json snr_to_json(double snr_db);

/// "1,2,4" → {1, 2, 4}; throws ConfigError on anything else.
std::vector<int> parse_grid_list(const std::string& text);

/// γ default for the configured schedule and SNRs (0 when both are infinite).
double default_gamma(const SolverConfig& solver, const SimulationConfig& simulation);

/// Nuclear-norm weight used when solver.nnm_gamma is unset: the same schedule,
/// floored at a small positive value for noiseless data.
double default_nnm_gamma(const SolverConfig& solver, const SimulationConfig& simulation);

} // namespace hsr::cli
