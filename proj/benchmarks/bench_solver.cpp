// Hot paths of one accelerated MM iteration and whole solves at desk scale.

#include <benchmark/benchmark.h>

#include "hsr/imaging.hpp"
#include "hsr/matcore.hpp"
#include "hsr/patching.hpp"
#include "hsr/regularizer.hpp"
#include "hsr/solver.hpp"
#include "hsr/synth.hpp"

#include <map>
#include <optional>
#include <random>

using namespace hsr;

namespace {

Matrix uniform(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index k = 0; k < m.size(); ++k) {
        m.data()[k] = u(rng);
    }
    return m;
}

struct Setup {
    WaldSimulation sim;
    int side;
};

const Setup& desk(int side) {
    static std::map<int, Setup> cache;
    auto it = cache.find(side);
    if (it == cache.end()) {
        SceneOptions options;
        options.width = side;
        options.height = side;
        const Scene scene = gen_scene(options, grid_layout(side, side, 4, 4), 1);
        WaldConfig config;
        config.noise = {25.0, 25.0, 1};
        it = cache.emplace(side, Setup{wald_simulate(scene.x, config), side}).first;
    }
    return it->second;
}

Problem make_problem(const Setup& s, int grid) {
    const PatchLayout layout = grid_layout(s.side, s.side, grid, grid);
    return Problem(s.sim.y_m.data, s.sim.y_h.data, s.sim.f.f, s.sim.g.g, layout, {},
                   Problem::uniform_gammas(0.4, layout.patch_count()));
}

} // namespace

static void BM_SymEig(benchmark::State& state) {
    const Index n = state.range(0);
    const Matrix b = uniform(n, 2 * n, 3);
    const Matrix a = b * b.transpose();
    for (auto _ : state) {
        benchmark::DoNotOptimize(sym_eig(a));
    }
}
BENCHMARK(BM_SymEig)->Arg(30)->Arg(100)->Arg(200);

static void BM_Weight(benchmark::State& state) {
    const Matrix x = uniform(state.range(0), state.range(1), 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(weight(x, {}));
    }
}
BENCHMARK(BM_Weight)->Args({30, 144})->Args({30, 2304})->Args({100, 2304});

static void BM_ComputeWeights(benchmark::State& state) {
    const Problem problem = make_problem(desk(48), static_cast<int>(state.range(0)));
    const Matrix x = uniform(problem.bands(), problem.pixels(), 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_weights(x, problem));
    }
}
BENCHMARK(BM_ComputeWeights)->Arg(1)->Arg(4)->Arg(8);

static void BM_MajorantGradient(benchmark::State& state) {
    const Problem problem = make_problem(desk(48), 4);
    const Matrix x = uniform(problem.bands(), problem.pixels(), 6);
    const Weights w = compute_weights(x, problem);
    for (auto _ : state) {
        benchmark::DoNotOptimize(majorant_gradient(x, w, problem));
    }
}
BENCHMARK(BM_MajorantGradient);

static void BM_Lipschitz(benchmark::State& state) {
    const Problem problem = make_problem(desk(48), 4);
    const Matrix x = uniform(problem.bands(), problem.pixels(), 7);
    const Weights w = compute_weights(x, problem);
    std::optional<Vector> warm;
    for (auto _ : state) {
        LipschitzEstimate l = lipschitz(w, problem, warm);
        warm = l.top_vector;
        benchmark::DoNotOptimize(l.value);
    }
}
BENCHMARK(BM_Lipschitz);

static void BM_SparseApply(benchmark::State& state) {
    const Setup& s = desk(48);
    const Matrix x = uniform(30, 48 * 48, 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sparse_apply_right(x, s.sim.g.g));
    }
}
BENCHMARK(BM_SparseApply);

static void BM_Solve(benchmark::State& state) {
    const Problem problem = make_problem(desk(48), 4);
    const Matrix init = problem.to_patch_order(random_init(problem.bands(), problem.pixels(), 9));
    const int which = static_cast<int>(state.range(0));
    for (auto _ : state) {
        SolveReport r;
        switch (which) {
        case 0: r = gloria_solve(problem, init); break;
        case 1: r = nominal_pg_solve(problem, init); break;
        case 2: r = exact_mm_solve(problem, init); break;
        default: r = nnm_solve(problem, 0.4, init); break;
        }
        state.counters["iterations"] = r.iterations;
        benchmark::DoNotOptimize(r.final_objective);
    }
}
BENCHMARK(BM_Solve)->DenseRange(0, 3)->ArgNames({"solver"})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
