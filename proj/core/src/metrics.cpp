#include "hsr/metrics.hpp"

#include "hsr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace hsr {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(what) + ": reference and estimate differ in shape");
    }
    require_valid(a, what);
    require_valid(b, what);
}

} // namespace

PsnrResult psnr(const Matrix& reference, const Matrix& estimate, PsnrPeak peak) {
    require_same_shape(reference, estimate, "psnr");
    PsnrResult out;
    const double pixels = static_cast<double>(reference.cols());
    for (Index m = 0; m < reference.rows(); ++m) {
        const double err = (reference.row(m) - estimate.row(m)).squaredNorm();
        const double top = peak == PsnrPeak::unit ? 1.0 : reference.row(m).maxCoeff();
        double db = kPsnrSentinelDb;
        if (err > 0.0) {
            db = std::min(10.0 * std::log10(top * top * pixels / err), kPsnrSentinelDb);
        }
        out.per_band.push_back(db);
    }
    double sum = 0.0;
    for (double v : out.per_band) {
        sum += v;
    }
    out.mean_db = sum / static_cast<double>(out.per_band.size());
    return out;
}

SamResult sam(const Matrix& reference, const Matrix& estimate, SamDegenerate degenerate) {
    require_same_shape(reference, estimate, "sam");
    SamResult out;
    out.map.resize(static_cast<std::size_t>(reference.cols()), 0.0);
    double sum = 0.0;
    Index counted = 0;
    for (Index j = 0; j < reference.cols(); ++j) {
        const double nr = reference.col(j).norm();
        const double ne = estimate.col(j).norm();
        if (nr > 1e-12 && ne > 1e-12) {
            // 2·atan2(|r̂ − ê|, |r̂ + ê|) stays accurate near 0° where acos does not.
            const Vector r = reference.col(j) / nr;
            const Vector e = estimate.col(j) / ne;
            const double angle = 2.0 * std::atan2((r - e).norm(), (r + e).norm()) * 180.0 / std::numbers::pi;
            out.map[static_cast<std::size_t>(j)] = angle;
            sum += angle;
            ++counted;
        } else if (degenerate == SamDegenerate::zero) {
            ++counted;
        }
    }
    out.mean_deg = counted > 0 ? sum / static_cast<double>(counted) : 0.0;
    return out;
}

double ergas(const Matrix& reference, const Matrix& estimate, double resolution_ratio) {
    require_same_shape(reference, estimate, "ergas");
    if (!(resolution_ratio > 0.0)) {
        throw ConfigError("ergas: resolution ratio must be positive");
    }
    const double pixels = static_cast<double>(reference.cols());
    double acc = 0.0;
    for (Index m = 0; m < reference.rows(); ++m) {
        const double mean = reference.row(m).mean();
        if (mean == 0.0) {
            throw MetricError("ergas: reference band " + std::to_string(m) + " has zero mean");
        }
        const double rmse = std::sqrt((reference.row(m) - estimate.row(m)).squaredNorm() / pixels);
        acc += (rmse / mean) * (rmse / mean);
    }
    return 100.0 / resolution_ratio * std::sqrt(acc / static_cast<double>(reference.rows()));
}

double uiqi(const Matrix& reference, const Matrix& estimate) {
    require_same_shape(reference, estimate, "uiqi");
    const double n = static_cast<double>(reference.cols());
    double total = 0.0;
    for (Index m = 0; m < reference.rows(); ++m) {
        const auto x = reference.row(m).array();
        const auto y = estimate.row(m).array();
        const double mx = x.mean();
        const double my = y.mean();
        const double vx = (x - mx).square().sum() / n;
        const double vy = (y - my).square().sum() / n;
        const double cxy = ((x - mx) * (y - my)).sum() / n;
        const double contrast = vx + vy;
        const double luminance = mx * mx + my * my;
        double q = 0.0;
        if (contrast == 0.0) {
            q = 0.0;  // both bands constant
        } else if (luminance == 0.0) {
            q = 2.0 * cxy / contrast;  // zero means agree exactly; luminance factor is 1
        } else {
            q = (2.0 * cxy / contrast) * (2.0 * mx * my / luminance);
        }
        total += q;
    }
    return total / static_cast<double>(reference.rows());
}

MetricsReport evaluate(const Matrix& reference, const Matrix& estimate, const MetricsOptions& options) {
    MetricsReport report;
    const PsnrResult p = psnr(reference, estimate, options.psnr_peak);
    SamResult s = sam(reference, estimate, options.sam_degenerate);
    report.psnr_db = p.mean_db;
    report.per_band_psnr = p.per_band;
    report.sam_deg = s.mean_deg;
    report.sam_map = std::move(s.map);
    report.ergas = ergas(reference, estimate, options.resolution_ratio);
    report.uiqi = uiqi(reference, estimate);
    return report;
}

nlohmann::json to_json(const MetricsReport& report) {
    return {{"psnr_db", report.psnr_db},
            {"sam_deg", report.sam_deg},
            {"ergas", report.ergas},
            {"uiqi", report.uiqi},
            {"per_band_psnr", report.per_band_psnr}};
}

std::string to_csv(const MetricsReport& report) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "psnr_db,sam_deg,ergas,uiqi\n%.17g,%.17g,%.17g,%.17g\n",
                  report.psnr_db, report.sam_deg, report.ergas, report.uiqi);
    return buf;
}

std::vector<unsigned char> sam_map_pixels(const std::vector<double>& sam_map, double cap_deg) {
    if (!(cap_deg > 0.0)) {
        throw ConfigError("sam map: cap must be positive");
    }
    std::vector<unsigned char> pixels;
    pixels.reserve(sam_map.size());
    for (double angle : sam_map) {
        const double scaled = std::clamp(angle / cap_deg, 0.0, 1.0) * 255.0;
        pixels.push_back(static_cast<unsigned char>(std::lround(scaled)));
    }
    return pixels;
}

void write_sam_map_pgm(const std::vector<double>& sam_map, int width, int height,
                       const std::string& path, double cap_deg) {
    if (width <= 0 || height <= 0 ||
        sam_map.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionError("sam map: length does not match width x height");
    }
    const auto pixels = sam_map_pixels(sam_map, cap_deg);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

} // namespace hsr
