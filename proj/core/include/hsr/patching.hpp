#pragma once

// Partitions of the pixel grid into rectangular patches and the permutation
// between raster order and patch-contiguous order X = [X_1 … X_P].

#include "hsr/matcore.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace hsr {

struct Rect {
    int x = 0;  ///< first column
    int y = 0;  ///< first row
    int w = 0;
    int h = 0;

    friend bool operator==(const Rect&, const Rect&) = default;
};

class PatchLayout {
public:
    /// Validates that `blocks` tile the width × height grid exactly.
    /// Patch order is the order of `blocks`; pixels inside a block are raster-ordered.
    PatchLayout(int width, int height, std::vector<Rect> blocks);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    Index pixels() const noexcept { return static_cast<Index>(width_) * height_; }
    Index patch_count() const noexcept { return static_cast<Index>(blocks_.size()); }

    const std::vector<Rect>& blocks() const noexcept { return blocks_; }
    /// First column of patch i in patch order.
    Index offset(Index i) const { return offsets_.at(static_cast<std::size_t>(i)); }
    /// L_i
    Index size(Index i) const { return offsets_.at(static_cast<std::size_t>(i) + 1) - offset(i); }

    /// raster index → patch-order index
    const std::vector<Index>& patch_index_of() const noexcept { return to_patch_; }
    /// patch-order index → raster index
    const std::vector<Index>& raster_index_of() const noexcept { return to_raster_; }

    Matrix to_patch_order(const Matrix& x) const;
    Matrix from_patch_order(const Matrix& x) const;

    nlohmann::json to_json() const;
    static PatchLayout from_json(const nlohmann::json& j);

    friend bool operator==(const PatchLayout& a, const PatchLayout& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.blocks_ == b.blocks_;
    }

private:
    int width_;
    int height_;
    std::vector<Rect> blocks_;
    std::vector<Index> offsets_;
    std::vector<Index> to_patch_;
    std::vector<Index> to_raster_;
};

/// Near-equal rectangular grid; block edges at ⌊height·i/rows⌋ and ⌊width·j/cols⌋.
PatchLayout grid_layout(int width, int height, int rows_of_patches, int cols_of_patches);

/// Random rectangular partition into exactly `target_patches` blocks, each at
/// least 2 pixels tall and wide. Throws ConfigError when infeasible.
PatchLayout random_rect_layout(int width, int height, int target_patches, std::uint64_t seed);

} // namespace hsr
