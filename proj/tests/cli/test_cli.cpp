#include "hsr/errors.hpp"
#include "hsr/io.hpp"
#include "hsr/matcore.hpp"
#include "hsr/solver.hpp"
#include "hsr_cli/commands.hpp"
#include "hsr_cli/config.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <vector>

using namespace hsr;
using namespace hsr::cli;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_config() {
    return nlohmann::json::parse(R"({
        "seed": 5,
        "scene": {"bands": 10, "width": 16, "height": 16, "endmembers": 3, "patch_rows": 2, "patch_cols": 2},
        "simulation": {"ms_bands": 4, "kernel_size": 5, "variance": 1.5, "factor": 4, "snr_m_db": 30, "snr_h_db": 30},
        "solver": {"patch_rows": 2, "patch_cols": 2, "max_iter": 15},
        "rank_table": {"grids": [1, 2, 4]}
    })");
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("hsr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write_config(const nlohmann::json& j, const std::string& name = "config.json") const {
        std::ofstream(path(name)) << j.dump(2);
        return path(name);
    }

    int invoke(std::vector<std::string> args) {
        args.insert(args.begin(), "hsr");
        std::vector<const char*> argv;
        for (const auto& a : args) {
            argv.push_back(a.c_str());
        }
        out_.str("");
        err_.str("");
        return run(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    std::string slurp(const std::string& name) const {
        std::ifstream in(path(name), std::ios::binary);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

} // namespace

TEST_F(CliTest, SimulateWritesAllArtifacts) {
    const std::string cfg = write_config(small_config());
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", path("sim")}), kExitOk) << err_.str();
    for (const char* name : {"x_true.hsrm", "y_m.hsrm", "y_h.hsrm", "F.csv", "G.sparse", "scene.json"}) {
        EXPECT_TRUE(fs::exists(dir_ / "sim" / name)) << name;
    }
    const HSImage x = read_image(path("sim/x_true.hsrm"));
    EXPECT_EQ(x.bands(), 10);
    EXPECT_EQ(x.width, 16);
    const HSImage y_h = read_image(path("sim/y_h.hsrm"));
    EXPECT_EQ(y_h.width, 4);
    EXPECT_EQ(y_h.height, 4);
    EXPECT_EQ(read_matrix_csv(path("sim/F.csv")).rows(), 4);
    const auto scene = nlohmann::json::parse(slurp("sim/scene.json"));
    EXPECT_EQ(scene.at("endmembers"), 3);
}

TEST_F(CliTest, SimulateIsByteDeterministic) {
    const std::string cfg = write_config(small_config());
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", path("a")}), kExitOk);
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", path("b")}), kExitOk);
    for (const char* name : {"x_true.hsrm", "y_m.hsrm", "y_h.hsrm", "F.csv", "G.sparse", "scene.json"}) {
        EXPECT_EQ(slurp(std::string("a/") + name), slurp(std::string("b/") + name)) << name;
    }
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--seed", "6", "--out", path("c")}), kExitOk);
    EXPECT_NE(slurp("a/y_m.hsrm"), slurp("c/y_m.hsrm"));
}

TEST_F(CliTest, NoiselessHyperspectralObservationIsExact) {
    auto j = small_config();
    j["simulation"]["snr_m_db"] = "inf";
    j["simulation"]["snr_h_db"] = "inf";
    ASSERT_EQ(invoke({"simulate", "--config", write_config(j), "--out", path("sim")}), kExitOk) << err_.str();
    const Matrix x = read_image(path("sim/x_true.hsrm")).data;
    const SparseMatrix g = read_sparse(path("sim/G.sparse"));
    const Matrix f = read_matrix_csv(path("sim/F.csv"));
    EXPECT_EQ(read_image(path("sim/y_h.hsrm")).data, sparse_apply_right(x, g));
    EXPECT_EQ(read_image(path("sim/y_m.hsrm")).data, Matrix(f * x));
}

TEST_F(CliTest, FuseAndEvaluateEndToEnd) {
    const std::string cfg = write_config(small_config());
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", path("sim")}), kExitOk);
    for (const char* solver : {"gloria", "exact_mm", "nominal_pg", "nnm"}) {
        const std::string out = path(std::string("fuse_") + solver);
        ASSERT_EQ(invoke({"fuse", "--config", cfg, "--solver", solver, "--in", path("sim"), "--out", out}), kExitOk)
            << solver << ": " << err_.str();
        const auto report = nlohmann::json::parse(slurp(std::string("fuse_") + solver + "/report.json"));
        EXPECT_EQ(report.at("solver"), solver);
        EXPECT_GT(report.at("iterations").get<int>(), 0);
        EXPECT_TRUE(report.contains("final_objective"));
        EXPECT_TRUE(report.contains("stop_reason"));

        std::istringstream trace(slurp(std::string("fuse_") + solver + "/trace.csv"));
        std::string line;
        std::getline(trace, line);
        EXPECT_EQ(line, "iter,objective,step_size,wall_ms");
        int rows = 0;
        while (std::getline(trace, line)) {
            ++rows;
        }
        EXPECT_EQ(rows, report.at("iterations").get<int>() + 1);

        ASSERT_EQ(invoke({"evaluate", path("sim/x_true.hsrm"), out + "/x_est.hsrm", "--out", out}), kExitOk)
            << err_.str();
        const auto metrics = nlohmann::json::parse(slurp(std::string("fuse_") + solver + "/metrics.json"));
        for (const char* key : {"psnr_db", "sam_deg", "ergas", "uiqi"}) {
            EXPECT_TRUE(metrics.at(key).is_number()) << key;
        }
        EXPECT_GT(metrics.at("psnr_db").get<double>(), 15.0) << solver;
    }
}

TEST_F(CliTest, DefaultGammaFollowsSchedule) {
    auto j = small_config();
    const std::string cfg = write_config(j);
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", path("sim")}), kExitOk);
    ASSERT_EQ(invoke({"fuse", "--config", cfg, "--in", path("sim"), "--out", path("f")}), kExitOk);
    const auto report = nlohmann::json::parse(slurp("f/report.json"));
    EXPECT_DOUBLE_EQ(report.at("gamma").get<double>(), 20.0 / 60.0);
    j["solver"]["gamma_schedule"] = "synthetic";
    ASSERT_EQ(invoke({"fuse", "--config", write_config(j, "syn.json"), "--in", path("sim"), "--out", path("g")}),
              kExitOk);
    EXPECT_DOUBLE_EQ(nlohmann::json::parse(slurp("g/report.json")).at("gamma").get<double>(), 40.0 / 60.0);
}

TEST_F(CliTest, ZeroIterationsKeepsInitialization) {
    auto j = small_config();
    j["solver"]["max_iter"] = 0;
    j["solver"]["seed"] = 17;
    const std::string cfg = write_config(j);
    ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", path("sim")}), kExitOk);
    ASSERT_EQ(invoke({"fuse", "--config", cfg, "--in", path("sim"), "--out", path("f")}), kExitOk) << err_.str();
    const auto report = nlohmann::json::parse(slurp("f/report.json"));
    EXPECT_EQ(report.at("iterations"), 0);
    EXPECT_EQ(read_image(path("f/x_est.hsrm")).data, random_init(10, 256, 17));
}

TEST_F(CliTest, ReportIsByteDeterministic) {
    const std::string cfg = write_config(small_config());
    for (const char* run_dir : {"r1", "r2"}) {
        const std::string base = path(run_dir);
        ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", base + "/sim"}), kExitOk);
        ASSERT_EQ(invoke({"fuse", "--config", cfg, "--in", base + "/sim", "--out", base + "/fuse"}), kExitOk);
    }
    EXPECT_EQ(slurp("r1/fuse/report.json"), slurp("r2/fuse/report.json"));
    EXPECT_EQ(slurp("r1/fuse/x_est.hsrm"), slurp("r2/fuse/x_est.hsrm"));
    EXPECT_EQ(nlohmann::json::parse(slurp("r1/fuse/report.json")).count("wall_time_s"), 0u);
}

TEST_F(CliTest, EvaluateIdentity) {
    write_image(path("x.hsrm"), HSImage(Matrix::Constant(3, 12, 0.4) + 0.1 * Matrix::Random(3, 12).cwiseAbs(), 4, 3));
    ASSERT_EQ(invoke({"evaluate", path("x.hsrm"), path("x.hsrm"), "--out", path("e")}), kExitOk) << err_.str();
    const auto metrics = nlohmann::json::parse(slurp("e/metrics.json"));
    EXPECT_EQ(metrics.at("psnr_db").get<double>(), 300.0);
    EXPECT_EQ(metrics.at("sam_deg").get<double>(), 0.0);
    EXPECT_EQ(metrics.at("ergas").get<double>(), 0.0);
    EXPECT_EQ(metrics.at("uiqi").get<double>(), 1.0);
    EXPECT_EQ(slurp("e/metrics.csv"), "psnr_db,sam_deg,ergas,uiqi\n300,0,0,1\n");
    const std::string pgm = slurp("e/sam_map.pgm");
    EXPECT_EQ(pgm.substr(0, 11), "P5\n4 3\n255\n");
    EXPECT_EQ(pgm.size(), 11u + 12u);
}

TEST_F(CliTest, EvaluateDimensionMismatch) {
    write_image(path("a.hsrm"), HSImage(Matrix::Constant(3, 12, 0.5), 4, 3));
    write_image(path("b.hsrm"), HSImage(Matrix::Constant(3, 16, 0.5), 4, 4));
    EXPECT_EQ(invoke({"evaluate", path("a.hsrm"), path("b.hsrm"), "--out", path("e")}), kExitConfig);
    EXPECT_FALSE(err_.str().empty());
}

TEST_F(CliTest, RankTable) {
    write_image(path("c.hsrm"), HSImage(Matrix::Constant(5, 64, 0.5), 8, 8));
    ASSERT_EQ(invoke({"rank-table", path("c.hsrm"), "--grids", "1,2,4", "--out", path("r")}), kExitOk) << err_.str();
    std::istringstream csv(slurp("r/rank_table.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "grid,patch_pixels,mean_rank,std_rank,global_rank");
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        EXPECT_NE(line.find(",1.0000,0.0000,1"), std::string::npos) << line;
    }
    EXPECT_EQ(rows, 3);
    EXPECT_EQ(invoke({"rank-table", path("c.hsrm"), "--grids", "1,x", "--out", path("r")}), kExitConfig);
    EXPECT_EQ(invoke({"rank-table", path("c.hsrm"), "--grids", "0", "--out", path("r")}), kExitConfig);
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(invoke({}), kExitConfig);
    EXPECT_EQ(invoke({"frobnicate"}), kExitConfig);
    EXPECT_EQ(invoke({"simulate", "--solver", "bogus"}), kExitConfig);

    auto unknown = small_config();
    unknown["solver"]["gama"] = 1.0;
    EXPECT_EQ(invoke({"simulate", "--config", write_config(unknown, "u.json"), "--out", path("s")}), kExitConfig);
    EXPECT_NE(err_.str().find("gama"), std::string::npos);

    auto invalid = small_config();
    invalid["simulation"]["kernel_size"] = 4;
    EXPECT_EQ(invoke({"simulate", "--config", write_config(invalid, "i.json"), "--out", path("s")}), kExitConfig);

    std::ofstream(path("broken.json")) << "{ not json";
    EXPECT_EQ(invoke({"simulate", "--config", path("broken.json")}), kExitConfig);

    EXPECT_EQ(invoke({"simulate", "--config", path("missing.json")}), kExitIo);
    EXPECT_EQ(invoke({"fuse", "--in", path("nowhere"), "--out", path("f")}), kExitIo);
    EXPECT_EQ(invoke({"evaluate", path("nope.hsrm"), path("nope.hsrm"), "--out", path("e")}), kExitIo);
}

TEST(Config, Defaults) {
    const RunConfig c = parse_config(nlohmann::json::object());
    EXPECT_EQ(c.solver.solver, "gloria");
    EXPECT_EQ(c.solver.p, 0.5);
    EXPECT_EQ(c.solver.tau, 1.0);
    EXPECT_EQ(c.solver.max_iter, 100);
    EXPECT_EQ(c.solver.tol, 1e-5);
    EXPECT_EQ(c.simulation.kernel_size, 11);
    EXPECT_EQ(c.simulation.factor, 4);
    EXPECT_EQ(c.simulation.snr_h_db, 25.0);
    EXPECT_DOUBLE_EQ(default_gamma(c.solver, c.simulation), 0.4);
}

TEST(Config, SnrAndGrids) {
    EXPECT_EQ(parse_snr(nlohmann::json("inf"), "snr"), std::numeric_limits<double>::infinity());
    EXPECT_EQ(parse_snr(nlohmann::json(15), "snr"), 15.0);
    EXPECT_THROW(parse_snr(nlohmann::json("loud"), "snr"), ConfigError);
    EXPECT_EQ(snr_to_json(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(parse_grid_list("1,2,4,8"), (std::vector<int>{1, 2, 4, 8}));
    EXPECT_THROW(parse_grid_list(""), ConfigError);
    EXPECT_THROW(parse_grid_list("1,,2"), ConfigError);
    EXPECT_THROW(parse_grid_list("2.5"), ConfigError);
}

TEST(Config, GammaSchedules) {
    SolverConfig s;
    SimulationConfig sim;
    sim.snr_m_db = 15.0;
    sim.snr_h_db = 15.0;
    EXPECT_DOUBLE_EQ(default_gamma(s, sim), 20.0 / 30.0);
    s.gamma_schedule = "synthetic";
    EXPECT_DOUBLE_EQ(default_gamma(s, sim), 40.0 / 30.0);
    EXPECT_DOUBLE_EQ(default_nnm_gamma(s, sim), 40.0 / 30.0);
    sim.snr_m_db = sim.snr_h_db = std::numeric_limits<double>::infinity();
    EXPECT_EQ(default_gamma(s, sim), 0.0);
    EXPECT_GT(default_nnm_gamma(s, sim), 0.0);
}
