#include "hsr/synth.hpp"

#include "hsr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace hsr {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    return std::mt19937_64(seq);
}

double band_position(Index b, Index bands) {
    return bands > 1 ? static_cast<double>(b) / static_cast<double>(bands - 1) : 0.0;
}

Vector smooth_spectrum(Index bands, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(3, 6);
    std::uniform_real_distribution<double> centre(0.0, 1.0);
    std::uniform_real_distribution<double> width(0.05, 0.25);
    std::uniform_real_distribution<double> amplitude(0.2, 1.0);
    std::uniform_real_distribution<double> peak(0.6, 0.9);
    const int bumps = count(rng);
    Vector s = Vector::Constant(bands, 0.05);
    for (int k = 0; k < bumps; ++k) {
        const double c = centre(rng);
        const double w = width(rng);
        const double a = amplitude(rng);
        for (Index b = 0; b < bands; ++b) {
            const double d = (band_position(b, bands) - c) / w;
            s(b) += a * std::exp(-0.5 * d * d);
        }
    }
    return s * (peak(rng) / s.maxCoeff());
}

} // namespace

Matrix gen_endmembers(Index bands, Index count, std::uint64_t seed) {
    if (count <= 0 || count >= bands) {
        throw ConfigError("gen_endmembers: need 0 < N < M");
    }
    constexpr int kRetries = 1000;
    auto rng = stream(seed, 1);
    Matrix a(bands, count);
    for (Index j = 0; j < count; ++j) {
        bool accepted = false;
        for (int attempt = 0; attempt < kRetries && !accepted; ++attempt) {
            a.col(j) = smooth_spectrum(bands, rng);
            accepted = true;
            for (Index i = 0; i < j; ++i) {
                const double cosine = a.col(i).dot(a.col(j)) / (a.col(i).norm() * a.col(j).norm());
                if (cosine > 0.995) {
                    accepted = false;
                    break;
                }
            }
        }
        if (!accepted) {
            throw GenerationError("gen_endmembers: could not draw " + std::to_string(count) +
                                  " sufficiently distinct spectra");
        }
    }
    return a;
}

std::vector<Matrix> apply_ev(const Matrix& base, const PatchLayout& layout, double magnitude,
                             std::uint64_t seed) {
    if (!(magnitude >= 0.0 && magnitude <= 0.5)) {
        throw ConfigError("apply_ev: magnitude must lie in [0, 0.5]");
    }
    const Index bands = base.rows();
    Vector profile1(bands), profile2(bands);
    for (Index b = 0; b < bands; ++b) {
        const double t = band_position(b, bands);
        profile1(b) = std::cos(std::numbers::pi * t);
        profile2(b) = std::cos(2.0 * std::numbers::pi * t);
    }
    std::vector<Matrix> variants;
    variants.reserve(static_cast<std::size_t>(layout.patch_count()));
    for (Index i = 0; i < layout.patch_count(); ++i) {
        auto rng = stream(seed, 2, static_cast<std::uint64_t>(i));
        std::uniform_real_distribution<double> coeff(-0.25, 0.25);
        Matrix a = base;
        for (Index j = 0; j < base.cols(); ++j) {
            const double c1 = coeff(rng);
            const double c2 = coeff(rng);
            const Vector noise = c1 * profile1 + c2 * profile2;
            a.col(j) = (base.col(j).array() * (1.0 + magnitude * noise.array())).cwiseMax(0.0).cwiseMin(1.0);
        }
        variants.push_back(std::move(a));
    }
    return variants;
}

AbundanceField gen_abundances(const PatchLayout& layout, Index endmembers,
                              const AbundanceOptions& options, std::uint64_t seed) {
    const Index active_max = options.active_max == 0 ? endmembers : options.active_max;
    if (endmembers <= 0 || options.active_min < 1 || options.active_min > active_max ||
        active_max > endmembers) {
        throw ConfigError("gen_abundances: need 1 <= active_min <= active_max <= N");
    }
    if (!(options.dirichlet_concentration > 0.0)) {
        throw ConfigError("gen_abundances: Dirichlet concentration must be positive");
    }

    const int window = options.smoothing_window;
    const int half = window > 1 ? window / 2 : 0;
    const double sigma = std::max(window / 4.0, 0.5);

    AbundanceField field;
    for (Index i = 0; i < layout.patch_count(); ++i) {
        auto rng = stream(seed, 3, static_cast<std::uint64_t>(i));
        std::uniform_int_distribution<Index> pick_count(options.active_min, active_max);
        const Index count = pick_count(rng);
        std::vector<Index> all(static_cast<std::size_t>(endmembers));
        std::iota(all.begin(), all.end(), Index{0});
        std::vector<Index> active;
        std::sample(all.begin(), all.end(), std::back_inserter(active), count, rng);

        const Rect& block = layout.blocks()[static_cast<std::size_t>(i)];
        const Index pixels = static_cast<Index>(block.w) * block.h;
        Matrix raw = Matrix::Zero(endmembers, pixels);
        std::gamma_distribution<double> gamma(options.dirichlet_concentration, 1.0);
        for (Index k = 0; k < pixels; ++k) {
            double total = 0.0;
            for (Index e : active) {
                raw(e, k) = gamma(rng);
                total += raw(e, k);
            }
            raw.col(k) /= total;
        }

        Matrix s = raw;
        if (half > 0) {
            for (int r = 0; r < block.h; ++r) {
                for (int c = 0; c < block.w; ++c) {
                    Vector acc = Vector::Zero(endmembers);
                    double weight_sum = 0.0;
                    for (int dr = -half; dr <= half; ++dr) {
                        for (int dc = -half; dc <= half; ++dc) {
                            const int rr = r + dr;
                            const int cc = c + dc;
                            if (rr < 0 || rr >= block.h || cc < 0 || cc >= block.w) {
                                continue;
                            }
                            const double w = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
                            acc += w * raw.col(static_cast<Index>(rr) * block.w + cc);
                            weight_sum += w;
                        }
                    }
                    s.col(static_cast<Index>(r) * block.w + c) = acc / weight_sum;
                }
            }
        }
        // Back onto the simplex (the weighted average already is, up to round-off).
        for (Index k = 0; k < pixels; ++k) {
            s.col(k) = s.col(k).cwiseMax(0.0);
            s.col(k) /= s.col(k).sum();
        }
        std::sort(active.begin(), active.end());
        field.s.push_back(std::move(s));
        field.active.push_back(std::move(active));
    }
    return field;
}

Scene gen_scene(const SceneOptions& options, const PatchLayout& layout, std::uint64_t seed) {
    if (layout.width() != options.width || layout.height() != options.height) {
        throw DimensionError("gen_scene: layout size does not match the scene");
    }
    Matrix base = gen_endmembers(options.bands, options.endmembers, seed);
    std::vector<Matrix> variants = apply_ev(base, layout, options.ev_magnitude, seed);
    AbundanceField abundances = gen_abundances(layout, options.endmembers, options.abundances, seed);

    Matrix x(options.bands, layout.pixels());
    for (Index i = 0; i < layout.patch_count(); ++i) {
        const Matrix xi = variants[static_cast<std::size_t>(i)] * abundances.s[static_cast<std::size_t>(i)];
        const Rect& block = layout.blocks()[static_cast<std::size_t>(i)];
        for (int r = 0; r < block.h; ++r) {
            for (int c = 0; c < block.w; ++c) {
                const Index raster = static_cast<Index>(block.y + r) * options.width + block.x + c;
                x.col(raster) = xi.col(static_cast<Index>(r) * block.w + c);
            }
        }
    }
    x = x.cwiseMax(0.0).cwiseMin(1.0);

    return Scene{HSImage(std::move(x), options.width, options.height),
                 std::move(base),
                 std::move(variants),
                 std::move(abundances),
                 layout,
                 options.ev_magnitude,
                 seed};
}

nlohmann::json scene_metadata(const Scene& scene) {
    nlohmann::json base = nlohmann::json::array();
    for (Index j = 0; j < scene.base.cols(); ++j) {
        std::vector<double> spectrum(scene.base.col(j).data(),
                                     scene.base.col(j).data() + scene.base.rows());
        base.push_back(spectrum);
    }
    nlohmann::json active = nlohmann::json::array();
    for (const auto& set : scene.abundances.active) {
        active.push_back(set);
    }
    return {{"bands", scene.x.bands()},
            {"width", scene.x.width},
            {"height", scene.x.height},
            {"endmembers", scene.base.cols()},
            {"ev_magnitude", scene.ev_magnitude},
            {"seed", scene.seed},
            {"base_spectra", base},
            {"active_sets", active},
            {"layout", scene.layout.to_json()}};
}

} // namespace hsr
