#include "hsr/imaging.hpp"

#include "hsr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace hsr {

HSImage::HSImage(Matrix data_, int width_, int height_)
    : data(std::move(data_)), width(width_), height(height_) {
    if (width <= 0 || height <= 0) {
        throw DimensionError("HSImage: width and height must be positive");
    }
    if (data.cols() != static_cast<Index>(width) * height) {
        throw DimensionError("HSImage: pixel count " + std::to_string(data.cols()) +
                             " does not match " + std::to_string(width) + "x" +
                             std::to_string(height));
    }
    require_valid(data, "HSImage");
}

namespace {

std::vector<std::vector<Index>> groups_of(const Matrix& f) {
    std::vector<std::vector<Index>> groups(static_cast<std::size_t>(f.rows()));
    for (Index r = 0; r < f.rows(); ++r) {
        for (Index c = 0; c < f.cols(); ++c) {
            if (f(r, c) != 0.0) {
                groups[static_cast<std::size_t>(r)].push_back(c);
            }
        }
    }
    return groups;
}

} // namespace

SpectralResponse build_spectral_response(Index hs_bands, Index ms_bands, SpectralMode mode) {
    if (ms_bands <= 0 || hs_bands <= 0) {
        throw ConfigError("spectral response: band counts must be positive");
    }
    if (ms_bands >= hs_bands) {
        throw ConfigError("spectral response: MS band count must be smaller than HS band count");
    }
    Matrix f = Matrix::Zero(ms_bands, hs_bands);
    switch (mode) {
    case SpectralMode::boxcar:
        for (Index k = 0; k < ms_bands; ++k) {
            const Index lo = k * hs_bands / ms_bands;
            const Index hi = (k + 1) * hs_bands / ms_bands;
            f.block(k, lo, 1, hi - lo).setConstant(1.0 / static_cast<double>(hi - lo));
        }
        break;
    case SpectralMode::gaussian: {
        const double width = static_cast<double>(hs_bands) / static_cast<double>(2 * ms_bands);
        for (Index k = 0; k < ms_bands; ++k) {
            const double centre = (static_cast<double>(k) + 0.5) * static_cast<double>(hs_bands) /
                                      static_cast<double>(ms_bands) -
                                  0.5;
            for (Index b = 0; b < hs_bands; ++b) {
                const double d = (static_cast<double>(b) - centre) / width;
                if (std::abs(d) <= 3.0) {
                    f(k, b) = std::exp(-0.5 * d * d);
                }
            }
            f.row(k) /= f.row(k).sum();
        }
        break;
    }
    case SpectralMode::from_table:
        throw ConfigError("spectral response: from_table mode needs a table; use load_spectral_response");
    }
    return {f, groups_of(f)};
}

SpectralResponse spectral_response_from_table(const Matrix& table) {
    require_valid(table, "spectral response table");
    if (table.rows() >= table.cols()) {
        throw ConfigError("spectral response table: needs fewer rows (MS bands) than columns (HS bands)");
    }
    if ((table.array() < 0.0).any()) {
        throw ConfigError("spectral response table: negative entry");
    }
    Matrix f = table;
    for (Index r = 0; r < f.rows(); ++r) {
        const double s = f.row(r).sum();
        if (s <= 0.0) {
            throw ConfigError("spectral response table: row " + std::to_string(r) + " sums to zero");
        }
        f.row(r) /= s;
    }
    return {f, groups_of(f)};
}

SpectralResponse load_spectral_response(const std::string& path, Index hs_bands) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open spectral response table '" + path + "'");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
                    throw std::invalid_argument(cell);
                }
            } catch (const std::exception&) {
                throw ConfigError("spectral response table: malformed value '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ConfigError("spectral response table '" + path + "' is empty");
    }
    Matrix table(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) {
            throw ConfigError("spectral response table: ragged rows");
        }
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            table(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
        }
    }
    if (hs_bands > 0 && table.cols() != hs_bands) {
        throw DimensionError("spectral response table has " + std::to_string(table.cols()) +
                             " columns, expected " + std::to_string(hs_bands));
    }
    return spectral_response_from_table(table);
}

SpatialResponse build_spatial_response(int width, int height, int kernel_size, double variance,
                                       int factor) {
    if (width <= 0 || height <= 0) {
        throw ConfigError("spatial response: image size must be positive");
    }
    if (kernel_size <= 0 || kernel_size % 2 == 0) {
        throw ConfigError("spatial response: kernel size must be a positive odd number");
    }
    if (factor < 1 || factor > std::min(width, height)) {
        throw ConfigError("spatial response: downsampling factor out of range");
    }
    if (kernel_size > 1 && !(variance > 0.0)) {
        throw ConfigError("spatial response: kernel variance must be positive");
    }

    SpatialResponse out;
    out.kernel_size = kernel_size;
    out.variance = variance;
    out.factor = factor;
    out.width = width;
    out.height = height;
    out.low_width = (width + factor - 1) / factor;
    out.low_height = (height + factor - 1) / factor;

    const int half = kernel_size / 2;
    const Index low_pixels = static_cast<Index>(out.low_width) * out.low_height;
    std::vector<SparseMatrix::Entry> entries;
    entries.reserve(static_cast<std::size_t>(low_pixels) * kernel_size * kernel_size);

    for (int li = 0; li < out.low_height; ++li) {
        for (int lj = 0; lj < out.low_width; ++lj) {
            const Index column = static_cast<Index>(li) * out.low_width + lj;
            const int ci = std::min(factor * li + factor / 2, height - 1);
            const int cj = std::min(factor * lj + factor / 2, width - 1);
            const std::size_t first = entries.size();
            double total = 0.0;
            for (int di = -half; di <= half; ++di) {
                for (int dj = -half; dj <= half; ++dj) {
                    const int r = ci + di;
                    const int c = cj + dj;
                    if (r < 0 || r >= height || c < 0 || c >= width) {
                        continue;
                    }
                    const double w =
                        kernel_size == 1 ? 1.0 : std::exp(-(di * di + dj * dj) / (2.0 * variance));
                    entries.push_back({static_cast<Index>(r) * width + c, column, w});
                    total += w;
                }
            }
            for (std::size_t e = first; e < entries.size(); ++e) {
                entries[e].value /= total;
            }
        }
    }
    out.g = SparseMatrix(static_cast<Index>(width) * height, low_pixels, std::move(entries));
    return out;
}

double noise_variance(const Matrix& signal, double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) {
        return 0.0;
    }
    if (!std::isfinite(snr_db)) {
        throw ConfigError("noise: SNR must be finite or +inf");
    }
    const double energy = signal.squaredNorm();
    if (energy == 0.0) {
        return 0.0;
    }
    return energy / (static_cast<double>(signal.size()) * std::pow(10.0, snr_db / 10.0));
}

Matrix add_noise(const Matrix& signal, double snr_db, std::uint64_t seed, std::uint64_t stream) {
    const double var = noise_variance(signal, snr_db);
    if (var == 0.0) {
        return signal;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, std::sqrt(var));
    Matrix out = signal;
    for (Index j = 0; j < out.cols(); ++j) {
        for (Index i = 0; i < out.rows(); ++i) {
            out(i, j) += normal(rng);
        }
    }
    return out;
}

ObservationPair degrade(const HSImage& x, const SpectralResponse& f, const SpatialResponse& g,
                        const NoiseSpec& noise) {
    if (f.f.cols() != x.bands()) {
        throw DimensionError("degrade: spectral response expects " + std::to_string(f.f.cols()) +
                             " bands, image has " + std::to_string(x.bands()));
    }
    if (g.g.rows() != x.pixels() || g.width != x.width || g.height != x.height) {
        throw DimensionError("degrade: spatial response built for a different image size");
    }
    Matrix clean_m = f.f * x.data;
    Matrix clean_h = sparse_apply_right(x.data, g.g);
    return {HSImage(add_noise(clean_m, noise.snr_m_db, noise.seed, 1), x.width, x.height),
            HSImage(add_noise(clean_h, noise.snr_h_db, noise.seed, 2), g.low_width, g.low_height)};
}

WaldSimulation wald_simulate(const HSImage& ground_truth, const WaldConfig& config) {
    if (ground_truth.data.minCoeff() < 0.0 || ground_truth.data.maxCoeff() > 1.0) {
        throw DomainError("wald_simulate: ground truth must lie in [0, 1]");
    }
    SpectralResponse f =
        config.spectral_mode == SpectralMode::from_table
            ? load_spectral_response(config.spectral_table, ground_truth.bands())
            : build_spectral_response(ground_truth.bands(), config.ms_bands, config.spectral_mode);
    SpatialResponse g = build_spatial_response(ground_truth.width, ground_truth.height,
                                               config.kernel_size, config.variance, config.factor);
    auto [y_m, y_h] = degrade(ground_truth, f, g, config.noise);
    return {std::move(y_m), std::move(y_h), std::move(f), std::move(g)};
}

double fusion_loss(const Matrix& x, const Matrix& y_m, const Matrix& y_h, const Matrix& f,
                   const SparseMatrix& g) {
    if (f.cols() != x.rows() || y_m.rows() != f.rows() || y_m.cols() != x.cols() ||
        g.rows() != x.cols() || y_h.rows() != x.rows() || y_h.cols() != g.cols()) {
        throw DimensionError("fusion_loss: inconsistent dimensions");
    }
    return 0.5 * (y_m - f * x).squaredNorm() + 0.5 * (y_h - sparse_apply_right(x, g)).squaredNorm();
}

} // namespace hsr
