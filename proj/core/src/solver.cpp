#include "hsr/solver.hpp"

#include "hsr/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace hsr {

Problem::Problem(const Matrix& y_m, const Matrix& y_h, Matrix f, const SparseMatrix& g,
                 PatchLayout layout, SchattenParams params, std::vector<double> gammas)
    : layout_(std::move(layout)), params_(params), gammas_(std::move(gammas)), f_(std::move(f)) {
    params_.validate();
    require_valid(y_m, "Problem: Y_M");
    require_valid(y_h, "Problem: Y_H");
    require_valid(f_, "Problem: F");
    const Index m = f_.cols();
    const Index l = layout_.pixels();
    if (y_m.rows() != f_.rows() || y_m.cols() != l) {
        throw DimensionError("Problem: Y_M must be M_m x L");
    }
    if (g.rows() != l || y_h.rows() != m || y_h.cols() != g.cols()) {
        throw DimensionError("Problem: Y_H must be M x L_h and G must be L x L_h");
    }
    if (static_cast<Index>(gammas_.size()) != layout_.patch_count() + 1) {
        throw ConfigError("Problem: expected " + std::to_string(layout_.patch_count() + 1) +
                          " regularization weights");
    }
    for (double gamma : gammas_) {
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
            throw ConfigError("Problem: regularization weights must be finite and nonnegative");
        }
    }
    if (layout_.patch_count() == 1) {
        gammas_[0] += gammas_[1];
        gammas_[1] = 0.0;
    }

    y_m_ = layout_.to_patch_order(y_m);
    y_h_ = y_h;
    g_ = g.permute_rows(layout_.patch_index_of());
    ftf_ = f_.transpose() * f_;
    ft_ym_ = f_.transpose() * y_m_;
    yh_gt_ = sparse_apply_right_t(y_h_, g_);
    lambda_max_ggt_ = lambda_max_gram(g_);
}

std::vector<double> Problem::uniform_gammas(double gamma, Index patch_count,
                                            std::optional<double> gamma_global) {
    std::vector<double> out(static_cast<std::size_t>(patch_count + 1), gamma);
    out[0] = gamma_global.value_or(gamma);
    return out;
}

Eigen::Block<const Matrix, Eigen::Dynamic, Eigen::Dynamic, true> Problem::block(const Matrix& x, Index i) const {
    if (i == 0) {
        return x.middleCols(0, x.cols());
    }
    return x.middleCols(layout_.offset(i - 1), layout_.size(i - 1));
}

Eigen::Block<Matrix, Eigen::Dynamic, Eigen::Dynamic, true> Problem::block(Matrix& x, Index i) const {
    if (i == 0) {
        return x.middleCols(0, x.cols());
    }
    return x.middleCols(layout_.offset(i - 1), layout_.size(i - 1));
}

namespace {

void require_shape(const Matrix& x, const Problem& problem, const char* what) {
    if (x.rows() != problem.bands() || x.cols() != problem.pixels()) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(problem.bands()) +
                             "x" + std::to_string(problem.pixels()) + " matrix");
    }
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kDivergenceFactor = 1e6;

void check_divergence(const std::string& solver, double value, double initial,
                      const std::vector<double>& trace) {
    if (!std::isfinite(value) || value > kDivergenceFactor * std::max(std::abs(initial), 1e-300)) {
        throw DivergenceError(solver + ": objective diverged", trace);
    }
}

// Shared driver for the two inexact MM schemes; `accelerate` selects APG vs nominal PG.
SolveReport inexact_mm(const Problem& problem, const Matrix& init, const StopCriteria& stop,
                       bool accelerate, std::string name) {
    require_shape(init, problem, name.c_str());
    const auto start = Clock::now();

    SolveReport report;
    report.solver = std::move(name);

    Matrix x = project_box(init);
    Matrix x_prev = x;
    Weights weights_at_x = compute_weights(x, problem);
    double f = objective_from_weights(x, weights_at_x, problem);
    const double f0 = f;
    report.objective_trace.push_back(f);
    report.step_sizes.push_back(0.0);
    report.wall_ms.push_back(elapsed_ms(start));
    report.work.push_back(0);
    check_divergence(report.solver, f, f0, report.objective_trace);

    double xi_prev = 0.0;
    std::optional<Vector> warm;
    report.stop_reason = StopReason::max_iter;
    for (int k = 0; k < stop.max_iter; ++k) {
        const Extrapolation ex = extrapolation_next(xi_prev);
        xi_prev = ex.xi;
        const double alpha = accelerate ? ex.alpha : 0.0;

        Matrix z;
        Weights weights;
        if (alpha == 0.0 || k == 0) {
            // Z^k = X^k: reuse the weights already computed for the objective.
            z = x;
            weights = std::move(weights_at_x);
        } else {
            z = x + alpha * (x - x_prev);
            weights = compute_weights(z, problem);
        }
        const Matrix grad = majorant_gradient(z, weights, problem);
        LipschitzEstimate lip = lipschitz(weights, problem, warm);
        warm = lip.top_vector;

        x_prev = std::move(x);
        x = project_box(z - grad / lip.value);

        weights_at_x = compute_weights(x, problem);
        const double f_next = objective_from_weights(x, weights_at_x, problem);
        report.objective_trace.push_back(f_next);
        report.step_sizes.push_back(1.0 / lip.value);
        report.wall_ms.push_back(elapsed_ms(start));
        report.work.push_back(k + 1);
        report.iterations = k + 1;
        check_divergence(report.solver, f_next, f0, report.objective_trace);

        const double change = relative_change(f_next, f);
        f = f_next;
        if (change < stop.tol) {
            report.stop_reason = StopReason::tolerance;
            break;
        }
    }
    report.x_est = std::move(x);
    report.final_objective = f;
    report.wall_time_s = elapsed_ms(start) / 1000.0;
    return report;
}

} // namespace

double loss(const Matrix& x, const Problem& problem) {
    require_shape(x, problem, "loss");
    return 0.5 * (problem.y_m() - problem.f() * x).squaredNorm() +
           0.5 * (problem.y_h() - sparse_apply_right(x, problem.g())).squaredNorm();
}

Matrix grad_loss(const Matrix& x, const Problem& problem) {
    require_shape(x, problem, "grad_loss");
    const Matrix xg = sparse_apply_right(x, problem.g());
    Matrix grad = problem.ftf() * x - problem.ft_ym();
    grad += sparse_apply_right_t(xg, problem.g());
    grad -= problem.yh_gt();
    return grad;
}

double objective(const Matrix& x, const Problem& problem) {
    require_shape(x, problem, "objective");
    double value = loss(x, problem);
    const auto& gammas = problem.gammas();
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (gammas[i] != 0.0) {
            value += gammas[i] * phi(problem.block(x, static_cast<Index>(i)), problem.params());
        }
    }
    return value;
}

Weights compute_weights(const Matrix& x, const Problem& problem) {
    require_shape(x, problem, "compute_weights");
    const auto& gammas = problem.gammas();
    Weights out;
    out.blocks.resize(gammas.size());
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (gammas[i] != 0.0) {
            out.blocks[i] = weight(problem.block(x, static_cast<Index>(i)), problem.params());
        }
    }
    return out;
}

double objective_from_weights(const Matrix& x, const Weights& weights, const Problem& problem) {
    double value = loss(x, problem);
    const auto& gammas = problem.gammas();
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (gammas[i] != 0.0) {
            value += gammas[i] * weights.blocks.at(i).value().phi;
        }
    }
    return value;
}

double majorant(const Matrix& x, const Weights& weights, const Problem& problem) {
    double value = loss(x, problem);
    const auto& gammas = problem.gammas();
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (gammas[i] != 0.0) {
            value += gammas[i] * psi(problem.block(x, static_cast<Index>(i)),
                                     weights.blocks.at(i).value().w, problem.params());
        }
    }
    return value;
}

double reweighted_objective(const Matrix& x, const Weights& weights, const Problem& problem) {
    double value = loss(x, problem);
    const auto& gammas = problem.gammas();
    const double p = problem.params().p;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (gammas[i] != 0.0) {
            const auto xi = problem.block(x, static_cast<Index>(i));
            const Matrix& w = weights.blocks.at(i).value().w;
            value += 0.5 * p * gammas[i] * (w * xi).cwiseProduct(xi).sum();
        }
    }
    return value;
}

Matrix majorant_gradient(const Matrix& z, const Weights& weights, const Problem& problem) {
    Matrix grad = grad_loss(z, problem);
    const auto& gammas = problem.gammas();
    const double p = problem.params().p;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (gammas[i] != 0.0) {
            const Matrix& w = weights.blocks.at(i).value().w;
            problem.block(grad, static_cast<Index>(i)).noalias() +=
                (p * gammas[i]) * (w * problem.block(z, static_cast<Index>(i)));
        }
    }
    return grad;
}

namespace {
constexpr int kLipschitzPowerIterations = 300;
} // namespace

LipschitzEstimate lipschitz(const Weights& weights, const Problem& problem,
                            const std::optional<Vector>& warm_start) {
    const auto& gammas = problem.gammas();
    const double p = problem.params().p;
    Matrix global = problem.ftf();
    if (gammas[0] != 0.0) {
        global += (p * gammas[0]) * weights.blocks.at(0).value().w;
    }
    PowerIterationResult top;
    try {
        top = power_iteration([&](const Vector& v) -> Vector { return global * v; }, global.rows(),
                              warm_start, PowerIterationOptions{1e-10, kLipschitzPowerIterations});
    } catch (const ConvergenceError&) {
        const SymmetricEig eig = sym_eig(global);
        top = {eig.values(0), eig.vectors.col(0), kLipschitzPowerIterations};
    }
    double local = 0.0;
    for (std::size_t i = 1; i < gammas.size(); ++i) {
        if (gammas[i] != 0.0) {
            local = std::max(local, gammas[i] * weights.blocks.at(i).value().lambda_max_w);
        }
    }
    return {top.value + problem.lambda_max_ggt() + p * local, top.vector};
}

Matrix project_box(const Matrix& x) { return x.cwiseMax(0.0).cwiseMin(1.0); }

Extrapolation extrapolation_next(double xi_prev) {
    const double xi = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * xi_prev * xi_prev));
    return {xi, (xi_prev - 1.0) / xi};
}

double stationarity_residual(const Matrix& x, const Problem& problem) {
    const Weights weights = compute_weights(x, problem);
    const Matrix grad = majorant_gradient(x, weights, problem);
    const double lip = lipschitz(weights, problem).value;
    const double denom = std::max(x.norm(), 1e-300);
    return (x - project_box(x - grad / lip)).norm() / denom;
}

std::string to_string(StopReason reason) {
    return reason == StopReason::tolerance ? "tolerance" : "max_iter";
}

double relative_change(double current, double previous) {
    return std::abs(current - previous) / std::max(std::abs(previous), 1e-30);
}

Matrix random_init(Index bands, Index pixels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Matrix x(bands, pixels);
    for (Index j = 0; j < pixels; ++j) {
        for (Index i = 0; i < bands; ++i) {
            x(i, j) = uniform(rng);
        }
    }
    return x;
}

SolveReport gloria_solve(const Problem& problem, const Matrix& init, const StopCriteria& stop) {
    return inexact_mm(problem, init, stop, true, "gloria");
}

SolveReport nominal_pg_solve(const Problem& problem, const Matrix& init, const StopCriteria& stop) {
    return inexact_mm(problem, init, stop, false, "nominal_pg");
}

SolveReport exact_mm_solve(const Problem& problem, const Matrix& init, const StopCriteria& outer,
                           const InnerStop& inner) {
    require_shape(init, problem, "exact_mm");
    const auto start = Clock::now();

    SolveReport report;
    report.solver = "exact_mm";
    Matrix x = project_box(init);
    Weights weights = compute_weights(x, problem);
    double f = objective_from_weights(x, weights, problem);
    const double f0 = f;
    report.objective_trace.push_back(f);
    report.step_sizes.push_back(0.0);
    report.wall_ms.push_back(elapsed_ms(start));
    report.work.push_back(0);
    check_divergence(report.solver, f, f0, report.objective_trace);

    long inner_total = 0;
    std::optional<Vector> warm;
    report.stop_reason = StopReason::max_iter;
    for (int k = 0; k < outer.max_iter; ++k) {
        const LipschitzEstimate lip = lipschitz(weights, problem, warm);
        warm = lip.top_vector;

        // Inner accelerated PG on g_k, keeping the best iterate so the MM step
        // never increases g_k (APG itself is not monotone).
        Matrix y = x;
        Matrix y_prev = x;
        Matrix best = x;
        double best_value = reweighted_objective(x, weights, problem);
        double g_prev = best_value;
        double xi_prev = 0.0;
        for (int j = 0; j < inner.max_iter; ++j) {
            const Extrapolation ex = extrapolation_next(xi_prev);
            xi_prev = ex.xi;
            const Matrix z = y + ex.alpha * (y - y_prev);
            y_prev = std::move(y);
            y = project_box(z - majorant_gradient(z, weights, problem) / lip.value);
            ++inner_total;
            const double g_value = reweighted_objective(y, weights, problem);
            if (g_value < best_value) {
                best_value = g_value;
                best = y;
            }
            const double change = relative_change(g_value, g_prev);
            g_prev = g_value;
            if (change < inner.tol) {
                break;
            }
        }

        x = std::move(best);
        weights = compute_weights(x, problem);
        const double f_next = objective_from_weights(x, weights, problem);
        report.objective_trace.push_back(f_next);
        report.step_sizes.push_back(1.0 / lip.value);
        report.wall_ms.push_back(elapsed_ms(start));
        report.work.push_back(inner_total);
        report.iterations = k + 1;
        check_divergence(report.solver, f_next, f0, report.objective_trace);

        const double change = relative_change(f_next, f);
        f = f_next;
        if (change < outer.tol) {
            report.stop_reason = StopReason::tolerance;
            break;
        }
    }
    report.x_est = std::move(x);
    report.final_objective = f;
    report.wall_time_s = elapsed_ms(start) / 1000.0;
    return report;
}

Matrix singular_value_threshold(const Matrix& x, double threshold) {
    const Svd d = svd(x);
    const Vector shrunk = (d.sigma.array() - threshold).cwiseMax(0.0).matrix();
    return d.u * shrunk.asDiagonal() * d.v.transpose();
}

double nnm_objective(const Matrix& x, const Problem& problem, double gamma) {
    return loss(x, problem) + gamma * nuclear_norm(x);
}

SolveReport nnm_solve(const Problem& problem, double gamma, const Matrix& init,
                      const StopCriteria& stop) {
    require_shape(init, problem, "nnm");
    if (!(gamma > 0.0)) {
        throw ConfigError("nnm: gamma must be positive");
    }
    const auto start = Clock::now();
    SolveReport report;
    report.solver = "nnm";

    const double lip = lambda_max(problem.ftf()) + problem.lambda_max_ggt();
    const double step = 1.0 / lip;

    Matrix x = init;
    Matrix x_prev = x;
    double f = nnm_objective(x, problem, gamma);
    const double f0 = f;
    report.objective_trace.push_back(f);
    report.step_sizes.push_back(0.0);
    report.wall_ms.push_back(elapsed_ms(start));
    report.work.push_back(0);
    check_divergence(report.solver, f, f0, report.objective_trace);

    double xi_prev = 0.0;
    report.stop_reason = StopReason::max_iter;
    for (int k = 0; k < stop.max_iter; ++k) {
        const Extrapolation ex = extrapolation_next(xi_prev);
        xi_prev = ex.xi;
        const Matrix z = x + ex.alpha * (x - x_prev);
        x_prev = std::move(x);
        x = singular_value_threshold(z - step * grad_loss(z, problem), gamma * step);

        const double f_next = nnm_objective(x, problem, gamma);
        report.objective_trace.push_back(f_next);
        report.step_sizes.push_back(step);
        report.wall_ms.push_back(elapsed_ms(start));
        report.work.push_back(k + 1);
        report.iterations = k + 1;
        check_divergence(report.solver, f_next, f0, report.objective_trace);

        const double change = relative_change(f_next, f);
        f = f_next;
        if (change < stop.tol) {
            report.stop_reason = StopReason::tolerance;
            break;
        }
    }
    report.x_est = std::move(x);
    report.final_objective = f;
    report.wall_time_s = elapsed_ms(start) / 1000.0;
    return report;
}

} // namespace hsr
