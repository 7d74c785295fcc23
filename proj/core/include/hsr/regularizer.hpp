#pragma once

// Smooth Schatten-p function φ_{p,τ}(X) = tr((XXᵀ + τI)^{p/2}), its
// variational upper bound ψ(X, W) and the minimizing weight matrix, plus the
// energy-based approximate rank used to inspect local/global rank structure.

#include "hsr/imaging.hpp"
#include "hsr/matcore.hpp"

#include <string>
#include <vector>

namespace hsr {

struct SchattenParams {
    double p = 0.5;
    double tau = 1.0;

    /// Throws ConfigError unless 0 < p ≤ 1 and τ > 0.
    void validate() const;
};

/// W = (XXᵀ + τI)^{p/2−1} together with the spectral byproducts the solver needs.
struct WeightMatrix {
    Matrix w;
    double lambda_min_shifted = 0.0;  ///< λ_min(XXᵀ) + τ
    double lambda_max_w = 0.0;        ///< (λ_min(XXᵀ) + τ)^{p/2−1}
    double phi = 0.0;                 ///< φ_{p,τ}(X) from the same eigenvalues
};

double phi(const Matrix& x, const SchattenParams& params);

/// (p/2) tr(W(XXᵀ + τI)) + ((2−p)/2) tr(W^{p/(p−2)}). Throws DomainError if W is not SPD.
double psi(const Matrix& x, const Matrix& w, const SchattenParams& params);

WeightMatrix weight(const Matrix& x, const SchattenParams& params);

inline constexpr double kDefaultRankThreshold = 0.9999;

/// Smallest r with Σ_{j≤r} σ_j² ≥ threshold · Σ_j σ_j². Zero matrix → 0.
Index approx_rank(const Matrix& x, double energy_threshold = kDefaultRankThreshold);

struct RankRow {
    int grid = 1;               ///< grid × grid equal-space blocks
    double patch_pixels = 0.0;  ///< mean L_i
    double mean_rank = 0.0;
    double std_rank = 0.0;      ///< sample standard deviation over patches
    Index global_rank = 0;
};

std::vector<RankRow> rank_table(const HSImage& image, const std::vector<int>& grids,
                                double energy_threshold = kDefaultRankThreshold);

/// CSV with header "grid,patch_pixels,mean_rank,std_rank,global_rank".
std::string rank_table_csv(const std::vector<RankRow>& rows);

} // namespace hsr
