#pragma once

// Full-reference quality metrics for reconstructed spectral images.
//
//   PSNR   per band 10·log10(peak² · L / ‖x_m − x̂_m‖²), averaged over bands
//   SAM    per-pixel spectral angle in degrees, averaged over pixels
//   ERGAS  (100/r) · sqrt(mean_m (RMSE_m / μ_m)²)
//   UIQI   per band 4σ_xy μ_x μ_y / ((σ_x² + σ_y²)(μ_x² + μ_y²)) over the whole band

#include "hsr/imaging.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hsr {

inline constexpr double kPsnrSentinelDb = 300.0;

enum class PsnrPeak {
    band_max,  ///< peak_m = max of reference band m
    unit,      ///< peak = 1 (reflectance)
};

struct PsnrResult {
    double mean_db = 0.0;
    std::vector<double> per_band;
};

PsnrResult psnr(const Matrix& reference, const Matrix& estimate, PsnrPeak peak = PsnrPeak::band_max);

enum class SamDegenerate {
    zero,     ///< pixels with a near-zero spectrum count with angle 0
    exclude,  ///< such pixels are left out of the mean (still 0 in the map)
};

struct SamResult {
    double mean_deg = 0.0;
    std::vector<double> map;  ///< one angle per pixel, raster order
};

SamResult sam(const Matrix& reference, const Matrix& estimate,
              SamDegenerate degenerate = SamDegenerate::zero);

/// Throws MetricError when a reference band has zero mean.
double ergas(const Matrix& reference, const Matrix& estimate, double resolution_ratio);

double uiqi(const Matrix& reference, const Matrix& estimate);

struct MetricsOptions {
    double resolution_ratio = 4.0;
    PsnrPeak psnr_peak = PsnrPeak::band_max;
    SamDegenerate sam_degenerate = SamDegenerate::zero;
};

struct MetricsReport {
    double psnr_db = 0.0;
    double sam_deg = 0.0;
    double ergas = 0.0;
    double uiqi = 0.0;
    std::vector<double> per_band_psnr;
    std::vector<double> sam_map;
};

MetricsReport evaluate(const Matrix& reference, const Matrix& estimate,
                       const MetricsOptions& options = {});

/// Scalar summary plus per-band PSNR; the SAM map goes to a PGM instead.
nlohmann::json to_json(const MetricsReport& report);
/// Header "psnr_db,sam_deg,ergas,uiqi" and one data row.
std::string to_csv(const MetricsReport& report);

/// Binary PGM (P5), angle 0 → 0 and cap_deg (or more) → 255, linear in between.
void write_sam_map_pgm(const std::vector<double>& sam_map, int width, int height,
                       const std::string& path, double cap_deg = 30.0);

/// Same pixel bytes as written by write_sam_map_pgm.
std::vector<unsigned char> sam_map_pixels(const std::vector<double>& sam_map, double cap_deg = 30.0);

} // namespace hsr
