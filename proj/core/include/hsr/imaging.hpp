#pragma once

// Measurement model: Y_M = F X + V_M (spectral degradation) and
// Y_H = X G + V_H (spatial blur + downsampling), plus the Wald-protocol
// simulation that produces an observation pair from a known scene.

#include "hsr/matcore.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace hsr {

/// Spectral-spatial image: bands × pixels, pixels in raster (row-major) order.
struct HSImage {
    Matrix data;
    int width = 0;
    int height = 0;

    HSImage() = default;
    HSImage(Matrix data, int width, int height);

    Index bands() const noexcept { return data.rows(); }
    Index pixels() const noexcept { return data.cols(); }
    /// Raster index of grid position (row, col).
    Index pixel(int row, int col) const noexcept { return static_cast<Index>(row) * width + col; }
};

enum class SpectralMode { boxcar, gaussian, from_table };

struct SpectralResponse {
    Matrix f;                                  ///< M_m × M, rows sum to 1
    std::vector<std::vector<Index>> band_groups;  ///< HS bands with nonzero weight, per MS band
};

/// Synthetic bandpass response. `from_table` is served by load_spectral_response.
SpectralResponse build_spectral_response(Index hs_bands, Index ms_bands, SpectralMode mode);

/// Row-normalizes an arbitrary nonnegative table into a response.
SpectralResponse spectral_response_from_table(const Matrix& table);

/// Reads an M_m × M CSV (no header) and row-normalizes it.
SpectralResponse load_spectral_response(const std::string& path, Index hs_bands);

struct SpatialResponse {
    SparseMatrix g;  ///< L × L_h, column-stochastic
    int kernel_size = 1;
    double variance = 0.0;
    int factor = 1;
    int width = 0;
    int height = 0;
    int low_width = 0;
    int low_height = 0;
};

/// Gaussian blur truncated at the image border and renormalized, sampled on
/// the downsampling grid. Low-res pixel (i, j) is centred on high-res pixel
/// (r·i + ⌊r/2⌋, r·j + ⌊r/2⌋), clamped into the image.
SpatialResponse build_spatial_response(int width, int height, int kernel_size, double variance,
                                       int factor);

struct NoiseSpec {
    double snr_m_db = std::numeric_limits<double>::infinity();
    double snr_h_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
};

/// Variance giving the requested SNR for a signal matrix: ‖S‖² / (n · 10^(snr/10)).
double noise_variance(const Matrix& signal, double snr_db);

/// Adds i.i.d. zero-mean Gaussian noise calibrated to `snr_db`, drawn from a
/// stream derived from (seed, stream).
Matrix add_noise(const Matrix& signal, double snr_db, std::uint64_t seed, std::uint64_t stream);

struct ObservationPair {
    HSImage y_m;
    HSImage y_h;
};

ObservationPair degrade(const HSImage& x, const SpectralResponse& f, const SpatialResponse& g,
                        const NoiseSpec& noise);

struct WaldConfig {
    Index ms_bands = 6;
    SpectralMode spectral_mode = SpectralMode::boxcar;
    std::string spectral_table;  ///< CSV path for SpectralMode::from_table
    int kernel_size = 11;
    double variance = 1.7 * 1.7;
    int factor = 4;
    NoiseSpec noise{25.0, 25.0, 0};
};

struct WaldSimulation {
    HSImage y_m;
    HSImage y_h;
    SpectralResponse f;
    SpatialResponse g;
};

WaldSimulation wald_simulate(const HSImage& ground_truth, const WaldConfig& config);

/// ½‖Y_M − F X‖² + ½‖Y_H − X G‖² on raster-ordered data.
double fusion_loss(const Matrix& x, const Matrix& y_m, const Matrix& y_h, const Matrix& f,
                   const SparseMatrix& g);

} // namespace hsr
