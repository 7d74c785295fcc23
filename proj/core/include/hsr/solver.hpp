#pragma once

// Global-local low-rank estimation
//
//     min_{X ∈ [0,1]^{M×L}}  ℓ(X) + Σ_{i=0}^{P} γ_i φ_{p,τ}(X_i),
//     ℓ(X) = ½‖Y_M − F X‖² + ½‖Y_H − X G‖²,
//
// where X_0 = X and X_1..X_P are the patch blocks. Every matrix handed to the
// functions in this header is in *patch order* (see PatchLayout); Problem
// converts to and from raster order.
//
// Drivers:
//   gloria_solve      inexact MM, one accelerated projected-gradient step per majorant
//   nominal_pg_solve  inexact MM without extrapolation
//   exact_mm_solve    each majorant minimized by an inner accelerated PG loop
//   nnm_solve         nuclear-norm baseline min ℓ(X) + γ‖X‖_* (unconstrained)

#include "hsr/matcore.hpp"
#include "hsr/patching.hpp"
#include "hsr/regularizer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsr {

class Problem {
public:
    /// Observations and G in raster order. `gammas` holds γ_0..γ_P.
    ///
    /// With a single patch X_1 ≡ X_0, so γ_1 is folded into γ_0; the objective
    /// is unchanged and the Lipschitz bound becomes the tighter single-block one.
    Problem(const Matrix& y_m, const Matrix& y_h, Matrix f, const SparseMatrix& g, PatchLayout layout,
            SchattenParams params, std::vector<double> gammas);

    /// γ_0 = γ_global (defaults to γ), γ_1..γ_P = γ.
    static std::vector<double> uniform_gammas(double gamma, Index patch_count,
                                              std::optional<double> gamma_global = std::nullopt);

    Index bands() const noexcept { return f_.cols(); }
    Index pixels() const noexcept { return y_m_.cols(); }
    Index patch_count() const noexcept { return layout_.patch_count(); }

    const PatchLayout& layout() const noexcept { return layout_; }
    const SchattenParams& params() const noexcept { return params_; }
    /// Effective γ_0..γ_P after folding.
    const std::vector<double>& gammas() const noexcept { return gammas_; }

    const Matrix& y_m() const noexcept { return y_m_; }
    const Matrix& y_h() const noexcept { return y_h_; }
    const Matrix& f() const noexcept { return f_; }
    /// G with rows permuted into patch order, so X G is unchanged.
    const SparseMatrix& g() const noexcept { return g_; }
    const Matrix& ftf() const noexcept { return ftf_; }
    const Matrix& ft_ym() const noexcept { return ft_ym_; }
    const Matrix& yh_gt() const noexcept { return yh_gt_; }
    /// λ_max(G Gᵀ), computed once at construction.
    double lambda_max_ggt() const noexcept { return lambda_max_ggt_; }

    /// Column block of patch i (i ≥ 1); i = 0 is the whole matrix.
    Eigen::Block<const Matrix, Eigen::Dynamic, Eigen::Dynamic, true> block(const Matrix& x, Index i) const;
    Eigen::Block<Matrix, Eigen::Dynamic, Eigen::Dynamic, true> block(Matrix& x, Index i) const;

    Matrix to_patch_order(const Matrix& raster) const { return layout_.to_patch_order(raster); }
    Matrix from_patch_order(const Matrix& ordered) const { return layout_.from_patch_order(ordered); }

private:
    PatchLayout layout_;
    SchattenParams params_;
    std::vector<double> gammas_;
    Matrix y_m_, y_h_, f_;
    SparseMatrix g_;
    Matrix ftf_, ft_ym_, yh_gt_;
    double lambda_max_ggt_ = 0.0;
};

/// One weight per regularized block; entries with γ_i = 0 are left empty.
struct Weights {
    std::vector<std::optional<WeightMatrix>> blocks;  ///< index 0 is the global block
};

double loss(const Matrix& x, const Problem& problem);
Matrix grad_loss(const Matrix& x, const Problem& problem);
double objective(const Matrix& x, const Problem& problem);

Weights compute_weights(const Matrix& x, const Problem& problem);

/// Objective value assembled from the φ byproducts of weights computed at x.
double objective_from_weights(const Matrix& x, const Weights& weights, const Problem& problem);

/// g(X; X̄) = ℓ(X) + Σ γ_i ψ(X_i, W_i(X̄)), the MM majorant of the objective.
double majorant(const Matrix& x, const Weights& weights, const Problem& problem);

/// g_k(X) = ℓ(X) + Σ (pγ_i/2) tr(W_i X_i X_iᵀ); differs from the majorant by a constant.
double reweighted_objective(const Matrix& x, const Weights& weights, const Problem& problem);

/// ∇g_k(Z) = ∇ℓ(Z) + p(γ_0 W_0 Z + [γ_1 W_1 Z_1, …, γ_P W_P Z_P]).
Matrix majorant_gradient(const Matrix& z, const Weights& weights, const Problem& problem);

struct LipschitzEstimate {
    double value = 0.0;
    Vector top_vector;  ///< eigenvector of FᵀF + pγ_0 W_0, reusable as a warm start
};

/// λ_max(FᵀF + pγ_0W_0) + λ_max(GGᵀ) + p max_{i≥1} γ_i λ_max(W_i).
LipschitzEstimate lipschitz(const Weights& weights, const Problem& problem,
                            const std::optional<Vector>& warm_start = std::nullopt);

/// Element-wise clip to [0, 1].
Matrix project_box(const Matrix& x);

struct Extrapolation {
    double xi = 0.0;
    double alpha = 0.0;
};

/// ξ_j = (1 + √(1 + 4ξ_{j−1}²)) / 2,  α_j = (ξ_{j−1} − 1) / ξ_j.
Extrapolation extrapolation_next(double xi_prev);

/// ‖X − Π(X − ∇f(X)/L)‖_F / ‖X‖_F with L the Lipschitz bound at X.
double stationarity_residual(const Matrix& x, const Problem& problem);

struct StopCriteria {
    double tol = 1e-5;
    int max_iter = 100;
};

enum class StopReason { tolerance, max_iter };

std::string to_string(StopReason reason);

struct SolveReport {
    std::string solver;
    Matrix x_est;  ///< patch order
    int iterations = 0;
    double final_objective = 0.0;
    StopReason stop_reason = StopReason::max_iter;
    double wall_time_s = 0.0;
    std::vector<double> objective_trace;  ///< iterations + 1 entries, starting at the initial point
    std::vector<double> step_sizes;       ///< 1/L per trace entry (0 for the initial point)
    std::vector<double> wall_ms;          ///< elapsed time per trace entry
    std::vector<long> work;               ///< cumulative gradient steps per trace entry
};

/// Relative objective change |f_k − f_{k−1}| / max(|f_{k−1}|, 1e-30).
double relative_change(double current, double previous);

/// i.i.d. uniform [0,1] start.
Matrix random_init(Index bands, Index pixels, std::uint64_t seed);

SolveReport gloria_solve(const Problem& problem, const Matrix& init, const StopCriteria& stop = {});
SolveReport nominal_pg_solve(const Problem& problem, const Matrix& init,
                             const StopCriteria& stop = {});

struct InnerStop {
    double tol = 1e-7;
    int max_iter = 500;
};

SolveReport exact_mm_solve(const Problem& problem, const Matrix& init, const StopCriteria& outer = {},
                           const InnerStop& inner = {});

/// Singular-value soft thresholding U max(Σ − t, 0) Vᵀ.
Matrix singular_value_threshold(const Matrix& x, double threshold);

/// Accelerated proximal gradient on ℓ(X) + γ‖X‖_*, no box constraint.
/// The problem's γ's are ignored; ‖·‖_* is invariant to the column order.
SolveReport nnm_solve(const Problem& problem, double gamma, const Matrix& init,
                      const StopCriteria& stop = {});

/// ℓ(X) + γ‖X‖_*
double nnm_objective(const Matrix& x, const Problem& problem, double gamma);

} // namespace hsr
