#include "hsr/regularizer.hpp"

#include "hsr/errors.hpp"
#include "hsr/patching.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace hsr {

void SchattenParams::validate() const {
    if (!(p > 0.0 && p <= 1.0)) {
        throw ConfigError("Schatten parameter p must lie in (0, 1]");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ConfigError("Schatten parameter tau must be positive");
    }
}

namespace {

// Eigenvalues of XXᵀ (M of them, descending, clamped at 0), computed through
// whichever Gram side is smaller.
Vector gram_spectrum(const Matrix& x) {
    const Index m = x.rows();
    const Index l = x.cols();
    Vector values = Vector::Zero(m);
    if (m <= l) {
        values = sym_eigenvalues(x * x.transpose());
    } else {
        values.head(l) = sym_eigenvalues(x.transpose() * x);
    }
    return values.cwiseMax(0.0);
}

} // namespace

double phi(const Matrix& x, const SchattenParams& params) {
    params.validate();
    require_valid(x, "phi");
    const Vector lambda = gram_spectrum(x);
    return (lambda.array() + params.tau).pow(params.p / 2.0).sum();
}

double psi(const Matrix& x, const Matrix& w, const SchattenParams& params) {
    params.validate();
    require_valid(x, "psi");
    if (w.rows() != x.rows() || w.cols() != x.rows()) {
        throw DimensionError("psi: weight must be M x M");
    }
    const SymmetricEig eig = sym_eig(w);
    if (eig.values(eig.values.size() - 1) <= 0.0) {
        throw DomainError("psi: weight matrix is not positive definite");
    }
    const double p = params.p;
    const double quad = (w * x).cwiseProduct(x).sum() + params.tau * w.trace();
    const double conj = eig.values.array().pow(p / (p - 2.0)).sum();
    return 0.5 * p * quad + 0.5 * (2.0 - p) * conj;
}

WeightMatrix weight(const Matrix& x, const SchattenParams& params) {
    params.validate();
    require_valid(x, "weight");
    Matrix shifted = x * x.transpose();
    shifted.diagonal().array() += params.tau;
    SymmetricEig eig = sym_eig(shifted);
    // τ > 0 keeps the shifted Gram matrix positive definite; guard rounding anyway.
    eig.values = eig.values.cwiseMax(params.tau);
    const double exponent = params.p / 2.0 - 1.0;
    const Vector powered = eig.values.array().pow(exponent).matrix();

    WeightMatrix out;
    out.w = eig.vectors * powered.asDiagonal() * eig.vectors.transpose();
    out.w = 0.5 * (out.w + out.w.transpose());
    out.lambda_min_shifted = eig.values(eig.values.size() - 1);
    out.lambda_max_w = std::pow(out.lambda_min_shifted, exponent);
    out.phi = eig.values.array().pow(params.p / 2.0).sum();
    return out;
}

Index approx_rank(const Matrix& x, double energy_threshold) {
    if (!(energy_threshold > 0.0 && energy_threshold <= 1.0)) {
        throw ConfigError("approx_rank: threshold must lie in (0, 1]");
    }
    require_valid(x, "approx_rank");
    const Vector energy = gram_spectrum(x);
    const double total = energy.sum();
    if (total == 0.0) {
        return 0;
    }
    // Relative slack absorbs round-off in the cumulative sum (e.g. equal σ's).
    const double target = energy_threshold * total * (1.0 - 1e-12);
    double running = 0.0;
    const Index k = std::min(x.rows(), x.cols());
    for (Index r = 0; r < k; ++r) {
        running += energy(r);
        if (running >= target) {
            return r + 1;
        }
    }
    return k;
}

std::vector<RankRow> rank_table(const HSImage& image, const std::vector<int>& grids,
                                double energy_threshold) {
    const Index global = approx_rank(image.data, energy_threshold);
    std::vector<RankRow> rows;
    for (int grid : grids) {
        const PatchLayout layout = grid_layout(image.width, image.height, grid, grid);
        const Matrix ordered = layout.to_patch_order(image.data);
        const Index count = layout.patch_count();
        std::vector<double> ranks;
        double pixels = 0.0;
        for (Index i = 0; i < count; ++i) {
            ranks.push_back(static_cast<double>(
                approx_rank(ordered.middleCols(layout.offset(i), layout.size(i)), energy_threshold)));
            pixels += static_cast<double>(layout.size(i));
        }
        const double mean = std::accumulate(ranks.begin(), ranks.end(), 0.0) / count;
        double ss = 0.0;
        for (double r : ranks) {
            ss += (r - mean) * (r - mean);
        }
        RankRow row;
        row.grid = grid;
        row.patch_pixels = pixels / count;
        row.mean_rank = mean;
        row.std_rank = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : 0.0;
        row.global_rank = global;
        rows.push_back(row);
    }
    return rows;
}

std::string rank_table_csv(const std::vector<RankRow>& rows) {
    std::ostringstream out;
    out << "grid,patch_pixels,mean_rank,std_rank,global_rank\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.2f,%.4f,%.4f,%lld\n", r.grid, r.patch_pixels,
                      r.mean_rank, r.std_rank, static_cast<long long>(r.global_rank));
        out << buf;
    }
    return out.str();
}

} // namespace hsr
