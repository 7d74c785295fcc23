#include "hsr_cli/commands.hpp"

#include "hsr/errors.hpp"
#include "hsr/imaging.hpp"
#include "hsr/io.hpp"
#include "hsr/metrics.hpp"
#include "hsr/patching.hpp"
#include "hsr/regularizer.hpp"
#include "hsr/solver.hpp"
#include "hsr/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

namespace hsr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    }
}

SpectralMode spectral_mode(const std::string& name) {
    if (name == "gaussian") {
        return SpectralMode::gaussian;
    }
    if (name == "table") {
        return SpectralMode::from_table;
    }
    return SpectralMode::boxcar;
}

PatchLayout scene_layout(const SceneConfig& scene, std::uint64_t seed) {
    if (scene.layout == "random") {
        return random_rect_layout(scene.width, scene.height, scene.patches, seed);
    }
    return grid_layout(scene.width, scene.height, scene.patch_rows, scene.patch_cols);
}

std::string trace_csv(const SolveReport& report) {
    std::ostringstream out;
    out << "iter,objective,step_size,wall_ms\n";
    for (std::size_t k = 0; k < report.objective_trace.size(); ++k) {
        out << k << ',' << format_real(report.objective_trace[k]) << ','
            << format_real(k < report.step_sizes.size() ? report.step_sizes[k] : 0.0) << ','
            << format_real(k < report.wall_ms.size() ? report.wall_ms[k] : 0.0) << '\n';
    }
    return out.str();
}

} // namespace

void cmd_simulate(const RunConfig& config, const std::string& out_dir) {
    const SceneConfig& sc = config.scene;
    SceneOptions options;
    options.bands = sc.bands;
    options.width = sc.width;
    options.height = sc.height;
    options.endmembers = sc.endmembers;
    options.ev_magnitude = sc.ev_magnitude;
    options.abundances.active_min = sc.active_min;
    options.abundances.active_max = sc.active_max;
    options.abundances.smoothing_window = sc.smoothing_window;
    options.abundances.dirichlet_concentration = sc.dirichlet;

    const PatchLayout layout = scene_layout(sc, config.seed);
    const Scene scene = gen_scene(options, layout, config.seed);

    const SimulationConfig& sim = config.simulation;
    WaldConfig wald;
    wald.ms_bands = sim.ms_bands;
    wald.spectral_mode = spectral_mode(sim.spectral_mode);
    wald.spectral_table = sim.spectral_table;
    wald.kernel_size = sim.kernel_size;
    wald.variance = sim.variance;
    wald.factor = sim.factor;
    wald.noise = NoiseSpec{sim.snr_m_db, sim.snr_h_db, config.seed};
    const WaldSimulation obs = wald_simulate(scene.x, wald);

    json meta = scene_metadata(scene);
    meta["simulation"] = {{"ms_bands", sim.ms_bands},
                          {"spectral_mode", sim.spectral_mode},
                          {"kernel_size", sim.kernel_size},
                          {"variance", sim.variance},
                          {"factor", sim.factor},
                          {"snr_m_db", snr_to_json(sim.snr_m_db)},
                          {"snr_h_db", snr_to_json(sim.snr_h_db)},
                          {"low_width", obs.g.low_width},
                          {"low_height", obs.g.low_height}};

    ensure_dir(out_dir);
    write_image(join(out_dir, "x_true.hsrm"), scene.x);
    write_image(join(out_dir, "y_m.hsrm"), obs.y_m);
    write_image(join(out_dir, "y_h.hsrm"), obs.y_h);
    write_matrix_csv(join(out_dir, "F.csv"), obs.f.f);
    write_sparse(join(out_dir, "G.sparse"), obs.g.g);
    write_text(join(out_dir, "scene.json"), meta.dump(2) + "\n");
}

void cmd_fuse(const RunConfig& config, const std::string& in_dir, const std::string& out_dir) {
    const SolverConfig& sc = config.solver;
    const HSImage y_m = read_image(join(in_dir, "y_m.hsrm"));
    const MatrixFile y_h = read_hsrm(join(in_dir, "y_h.hsrm"));
    const Matrix f = read_matrix_csv(join(in_dir, "F.csv"));
    const SparseMatrix g = read_sparse(join(in_dir, "G.sparse"));

    const PatchLayout layout = grid_layout(y_m.width, y_m.height, sc.patch_rows, sc.patch_cols);
    const double gamma = sc.gamma.value_or(default_gamma(sc, config.simulation));
    const SchattenParams params{sc.p, sc.tau};
    const Problem problem(y_m.data, y_h.data, f, g, layout, params,
                          Problem::uniform_gammas(gamma, layout.patch_count(), sc.gamma_global));

    const std::uint64_t seed = sc.seed.value_or(config.seed);
    const Matrix init = problem.to_patch_order(random_init(problem.bands(), problem.pixels(), seed));
    const StopCriteria stop{sc.tol, sc.max_iter};

    ensure_dir(out_dir);
    SolveReport report;
    double nnm_gamma = 0.0;
    try {
        if (sc.solver == "gloria") {
            report = gloria_solve(problem, init, stop);
        } else if (sc.solver == "nominal_pg") {
            report = nominal_pg_solve(problem, init, stop);
        } else if (sc.solver == "exact_mm") {
            report = exact_mm_solve(problem, init, stop, InnerStop{sc.inner_tol, sc.inner_max_iter});
        } else {
            nnm_gamma = sc.nnm_gamma ? *sc.nnm_gamma : sc.gamma.value_or(default_nnm_gamma(sc, config.simulation));
            report = nnm_solve(problem, nnm_gamma, init, stop);
        }
    } catch (const DivergenceError& e) {
        std::ostringstream out;
        out << "iter,objective\n";
        for (std::size_t k = 0; k < e.trace().size(); ++k) {
            out << k << ',' << format_real(e.trace()[k]) << '\n';
        }
        write_text(join(out_dir, "trace.csv"), out.str());
        throw;
    }

    write_image(join(out_dir, "x_est.hsrm"),
                HSImage(problem.from_patch_order(report.x_est), y_m.width, y_m.height));
    write_text(join(out_dir, "trace.csv"), trace_csv(report));

    json r;
    r["solver"] = report.solver;
    r["iterations"] = report.iterations;
    r["stop_reason"] = to_string(report.stop_reason);
    r["final_objective"] = report.final_objective;
    r["initial_objective"] = report.objective_trace.front();
    r["gradient_steps"] = report.work.empty() ? 0L : report.work.back();
    r["p"] = sc.p;
    r["tau"] = sc.tau;
    if (sc.solver == "nnm") {
        r["gamma"] = nnm_gamma;
    } else {
        r["gamma"] = problem.gammas().size() > 1 ? problem.gammas()[1] : gamma;
        r["gamma_global"] = problem.gammas()[0];
    }
    r["patch_rows"] = sc.patch_rows;
    r["patch_cols"] = sc.patch_cols;
    r["tol"] = sc.tol;
    r["max_iter"] = sc.max_iter;
    r["seed"] = seed;
    if (sc.report_wall_time) {
        r["wall_time_s"] = report.wall_time_s;
    }
    write_text(join(out_dir, "report.json"), r.dump(2) + "\n");
}

void cmd_evaluate(const RunConfig& config, const std::string& reference, const std::string& estimate,
                  const std::string& out_dir) {
    const MatrixFile ref = read_hsrm(reference);
    const MatrixFile est = read_hsrm(estimate);
    if (ref.data.rows() != est.data.rows() || ref.data.cols() != est.data.cols()) {
        throw DimensionError("reference is " + std::to_string(ref.data.rows()) + "x" +
                             std::to_string(ref.data.cols()) + " but estimate is " +
                             std::to_string(est.data.rows()) + "x" + std::to_string(est.data.cols()));
    }
    if ((est.width != 0 || est.height != 0) && (est.width != ref.width || est.height != ref.height)) {
        throw DimensionError("reference and estimate have different spatial dimensions");
    }
    const MetricsConfig& mc = config.metrics;
    MetricsOptions options;
    options.resolution_ratio = mc.resolution_ratio;
    options.psnr_peak = mc.psnr_peak == "unit" ? PsnrPeak::unit : PsnrPeak::band_max;
    options.sam_degenerate = mc.sam_degenerate == "exclude" ? SamDegenerate::exclude : SamDegenerate::zero;
    const MetricsReport report = evaluate(ref.data, est.data, options);

    // Plain matrices are mapped as a single row of pixels.
    const int width = ref.width != 0 ? static_cast<int>(ref.width) : static_cast<int>(ref.data.cols());
    const int height = ref.width != 0 ? static_cast<int>(ref.height) : 1;

    ensure_dir(out_dir);
    write_text(join(out_dir, "metrics.json"), to_json(report).dump(2) + "\n");
    write_text(join(out_dir, "metrics.csv"), to_csv(report));
    write_sam_map_pgm(report.sam_map, width, height, join(out_dir, "sam_map.pgm"), mc.sam_map_cap_deg);
}

void cmd_rank_table(const RunConfig& config, const std::string& image, const std::string& out_dir) {
    const HSImage cube = read_image(image);
    const auto rows = rank_table(cube, config.rank_table.grids, config.rank_table.threshold);
    ensure_dir(out_dir);
    write_text(join(out_dir, "rank_table.csv"), rank_table_csv(rows));
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hyperspectral super-resolution by global-local low-rank estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string solver;
    std::string out_dir;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--seed", seed, "override every seed in the configuration");
    app.add_option("--solver", solver, "override solver.solver")
        ->check(CLI::IsMember({"gloria", "exact_mm", "nominal_pg", "nnm"}));
    app.add_option("--out", out_dir, "output directory (default: paths.output_dir)");

    auto* simulate = app.add_subcommand("simulate", "synthesize a scene and its observation pair");
    auto* fuse = app.add_subcommand("fuse", "reconstruct the high-resolution image");
    std::string in_dir;
    fuse->add_option("--in", in_dir, "directory holding y_m.hsrm, y_h.hsrm, F.csv, G.sparse");
    auto* eval = app.add_subcommand("evaluate", "score an estimate against a reference");
    std::string reference, estimate;
    eval->add_option("reference", reference, "reference .hsrm");
    eval->add_option("estimate", estimate, "estimate .hsrm");
    auto* ranks = app.add_subcommand("rank-table", "local and global approximate ranks");
    std::string image, grids;
    std::optional<double> threshold;
    ranks->add_option("image", image, "image cube .hsrm");
    ranks->add_option("--grids", grids, "comma-separated grid sizes, e.g. 1,2,4,8");
    ranks->add_option("--threshold", threshold, "energy threshold");

    // Global flags are accepted after the subcommand as well.
    for (auto* sub : {simulate, fuse, eval, ranks}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed) {
            config.seed = *seed;
            config.solver.seed = *seed;
        }
        if (!solver.empty()) {
            config.solver.solver = solver;
        }
        const std::string dest = out_dir.empty() ? config.paths.output_dir : out_dir;

        if (simulate->parsed()) {
            cmd_simulate(config, dest);
        } else if (fuse->parsed()) {
            cmd_fuse(config, in_dir.empty() ? config.paths.input_dir : in_dir, dest);
        } else if (eval->parsed()) {
            const std::string r = reference.empty() ? config.paths.reference : reference;
            const std::string e = estimate.empty() ? config.paths.estimate : estimate;
            if (r.empty() || e.empty()) {
                throw ConfigError("evaluate needs a reference and an estimate");
            }
            cmd_evaluate(config, r, e, dest);
        } else if (ranks->parsed()) {
            if (!grids.empty()) {
                config.rank_table.grids = parse_grid_list(grids);
            }
            if (threshold) {
                if (!(*threshold > 0.0 && *threshold <= 1.0)) {
                    throw ConfigError("--threshold must lie in (0, 1]");
                }
                config.rank_table.threshold = *threshold;
            }
            const std::string img = image.empty() ? config.paths.image : image;
            if (img.empty()) {
                throw ConfigError("rank-table needs an image");
            }
            cmd_rank_table(config, img, dest);
        }
    } catch (const DivergenceError& e) {
        err << "error: solver diverged: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

} // namespace hsr::cli
