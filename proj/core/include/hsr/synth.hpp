#pragma once

// Synthetic scenes with patch-level endmember variability: every patch i
// follows its own linear mixture X_i = A_i S_i, where A_i is a smooth
// multiplicative perturbation of shared base spectra and S_i uses only a
// subset of the endmembers.

#include "hsr/imaging.hpp"
#include "hsr/patching.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace hsr {

/// N smooth spectra (sums of 3 to 6 Gaussian bumps) in [0, 1], pairwise cosine ≤ 0.995.
/// Returns an M × N matrix. Throws GenerationError if the similarity bound cannot be met.
Matrix gen_endmembers(Index bands, Index count, std::uint64_t seed);

/// Per-patch variants a ⊙ (1 + magnitude · n) clipped to [0, 1], where n is a
/// random combination of two shared smooth band profiles with |n| ≤ 1/2.
std::vector<Matrix> apply_ev(const Matrix& base, const PatchLayout& layout, double magnitude,
                             std::uint64_t seed);

struct AbundanceField {
    std::vector<Matrix> s;                    ///< N × L_i per patch, pixels raster-ordered within the block
    std::vector<std::vector<Index>> active;   ///< active endmembers per patch, ascending
};

struct AbundanceOptions {
    Index active_min = 1;
    Index active_max = 0;  ///< 0 means N
    int smoothing_window = 5;  ///< odd Gaussian window inside each patch; ≤ 1 disables
    double dirichlet_concentration = 1.0;
};

AbundanceField gen_abundances(const PatchLayout& layout, Index endmembers,
                              const AbundanceOptions& options, std::uint64_t seed);

struct SceneOptions {
    Index bands = 30;
    int width = 48;
    int height = 48;
    Index endmembers = 4;
    double ev_magnitude = 0.1;
    AbundanceOptions abundances;
};

struct Scene {
    HSImage x;
    Matrix base;                   ///< M × N
    std::vector<Matrix> variants;  ///< A_i per patch
    AbundanceField abundances;
    PatchLayout layout;
    double ev_magnitude = 0.0;
    std::uint64_t seed = 0;
};

Scene gen_scene(const SceneOptions& options, const PatchLayout& layout, std::uint64_t seed);

/// Endmembers, active sets, layout and generation parameters.
nlohmann::json scene_metadata(const Scene& scene);

} // namespace hsr
