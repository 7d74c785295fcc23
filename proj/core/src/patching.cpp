#include "hsr/patching.hpp"

#include "hsr/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

namespace hsr {

PatchLayout::PatchLayout(int width, int height, std::vector<Rect> blocks)
    : width_(width), height_(height), blocks_(std::move(blocks)) {
    if (width_ <= 0 || height_ <= 0) {
        throw ConfigError("PatchLayout: image size must be positive");
    }
    if (blocks_.empty()) {
        throw ConfigError("PatchLayout: no patches");
    }
    const Index n = pixels();
    to_patch_.assign(static_cast<std::size_t>(n), -1);
    to_raster_.reserve(static_cast<std::size_t>(n));
    offsets_.reserve(blocks_.size() + 1);
    offsets_.push_back(0);
    for (const Rect& b : blocks_) {
        if (b.w <= 0 || b.h <= 0 || b.x < 0 || b.y < 0 || b.x + b.w > width_ || b.y + b.h > height_) {
            throw ConfigError("PatchLayout: block outside the image");
        }
        for (int r = b.y; r < b.y + b.h; ++r) {
            for (int c = b.x; c < b.x + b.w; ++c) {
                const Index raster = static_cast<Index>(r) * width_ + c;
                auto& slot = to_patch_[static_cast<std::size_t>(raster)];
                if (slot != -1) {
                    throw ConfigError("PatchLayout: blocks overlap");
                }
                slot = static_cast<Index>(to_raster_.size());
                to_raster_.push_back(raster);
            }
        }
        offsets_.push_back(static_cast<Index>(to_raster_.size()));
    }
    if (static_cast<Index>(to_raster_.size()) != n) {
        throw ConfigError("PatchLayout: blocks do not cover the image");
    }
}

Matrix PatchLayout::to_patch_order(const Matrix& x) const {
    if (x.cols() != pixels()) {
        throw DimensionError("to_patch_order: expected " + std::to_string(pixels()) + " columns");
    }
    Matrix out(x.rows(), x.cols());
    for (Index k = 0; k < x.cols(); ++k) {
        out.col(k) = x.col(to_raster_[static_cast<std::size_t>(k)]);
    }
    return out;
}

Matrix PatchLayout::from_patch_order(const Matrix& x) const {
    if (x.cols() != pixels()) {
        throw DimensionError("from_patch_order: expected " + std::to_string(pixels()) + " columns");
    }
    Matrix out(x.rows(), x.cols());
    for (Index k = 0; k < x.cols(); ++k) {
        out.col(to_raster_[static_cast<std::size_t>(k)]) = x.col(k);
    }
    return out;
}

nlohmann::json PatchLayout::to_json() const {
    nlohmann::json blocks = nlohmann::json::array();
    for (const Rect& b : blocks_) {
        blocks.push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
    }
    return {{"width", width_}, {"height", height_}, {"blocks", blocks}};
}

PatchLayout PatchLayout::from_json(const nlohmann::json& j) {
    try {
        std::vector<Rect> blocks;
        for (const auto& b : j.at("blocks")) {
            blocks.push_back({b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(),
                              b.at("h").get<int>()});
        }
        return PatchLayout(j.at("width").get<int>(), j.at("height").get<int>(), std::move(blocks));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("PatchLayout JSON: ") + e.what());
    }
}

namespace {

std::vector<Rect> blocks_from_edges(const std::vector<int>& row_edges,
                                    const std::vector<int>& col_edges) {
    std::vector<Rect> blocks;
    for (std::size_t i = 0; i + 1 < row_edges.size(); ++i) {
        for (std::size_t j = 0; j + 1 < col_edges.size(); ++j) {
            blocks.push_back({col_edges[j], row_edges[i], col_edges[j + 1] - col_edges[j],
                              row_edges[i + 1] - row_edges[i]});
        }
    }
    return blocks;
}

// Uniformly random composition of `length` into `parts` pieces, each >= 2.
std::vector<int> random_edges(int length, int parts, std::mt19937_64& rng) {
    const int slack = length - 2 * parts;
    // Stars and bars: pick parts-1 distinct bar positions among slack+parts-1 slots.
    std::vector<int> slots(static_cast<std::size_t>(slack + parts - 1));
    std::iota(slots.begin(), slots.end(), 0);
    std::vector<int> bars;
    std::sample(slots.begin(), slots.end(), std::back_inserter(bars), parts - 1, rng);
    std::vector<int> edges{0};
    int prev = -1;
    for (int bar : bars) {
        const int extra = bar - prev - 1;
        edges.push_back(edges.back() + 2 + extra);
        prev = bar;
    }
    edges.push_back(length);
    return edges;
}

} // namespace

PatchLayout grid_layout(int width, int height, int rows_of_patches, int cols_of_patches) {
    if (rows_of_patches <= 0 || cols_of_patches <= 0) {
        throw ConfigError("grid_layout: patch counts must be positive");
    }
    if (rows_of_patches > height || cols_of_patches > width) {
        throw ConfigError("grid_layout: more patches than pixels along an axis");
    }
    std::vector<int> row_edges, col_edges;
    for (int i = 0; i <= rows_of_patches; ++i) {
        row_edges.push_back(static_cast<int>(static_cast<long long>(height) * i / rows_of_patches));
    }
    for (int j = 0; j <= cols_of_patches; ++j) {
        col_edges.push_back(static_cast<int>(static_cast<long long>(width) * j / cols_of_patches));
    }
    return PatchLayout(width, height, blocks_from_edges(row_edges, col_edges));
}

PatchLayout random_rect_layout(int width, int height, int target_patches, std::uint64_t seed) {
    if (target_patches <= 0) {
        throw ConfigError("random_rect_layout: patch count must be positive");
    }
    if (target_patches == 1) {
        return PatchLayout(width, height, {{0, 0, width, height}});
    }
    std::vector<std::pair<int, int>> shapes;
    for (int r = 1; r <= target_patches; ++r) {
        if (target_patches % r != 0) {
            continue;
        }
        const int c = target_patches / r;
        if (2 * r <= height && 2 * c <= width) {
            shapes.emplace_back(r, c);
        }
    }
    if (shapes.empty()) {
        throw ConfigError("random_rect_layout: cannot split " + std::to_string(width) + "x" +
                          std::to_string(height) + " into " + std::to_string(target_patches) +
                          " blocks of at least 2x2 pixels");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, shapes.size() - 1);
    const auto [rows, cols] = shapes[pick(rng)];
    const auto row_edges = random_edges(height, rows, rng);
    const auto col_edges = random_edges(width, cols, rng);
    return PatchLayout(width, height, blocks_from_edges(row_edges, col_edges));
}

} // namespace hsr
