#include "hsr/matcore.hpp"

#include "hsr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hsr {

void require_valid(const Matrix& a, const char* what) {
    if (a.rows() == 0 || a.cols() == 0) {
        throw DimensionError(std::string(what) + ": degenerate " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " matrix");
    }
    if (!a.allFinite()) {
        throw DomainError(std::string(what) + ": non-finite entry");
    }
}

namespace {

void require_square(const Matrix& a, const char* what) {
    require_valid(a, what);
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(what) + ": matrix is not square");
    }
}

void require_symmetric(const Matrix& a, const char* what) {
    require_square(a, what);
    const double scale = std::max(a.norm(), 1e-300);
    if ((a - a.transpose()).norm() > 1e-10 * scale) {
        throw DomainError(std::string(what) + ": matrix is not symmetric");
    }
}

SymmetricEig descending(const Eigen::SelfAdjointEigenSolver<Matrix>& solver) {
    // Eigen returns ascending order.
    SymmetricEig out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

} // namespace

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Entry> entries) {
    if (rows <= 0 || cols <= 0) {
        throw DimensionError("SparseMatrix: degenerate shape");
    }
    std::erase_if(entries, [](const Entry& e) { return e.value == 0.0; });
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
            throw DimensionError("SparseMatrix: entry index out of bounds");
        }
        if (!std::isfinite(e.value)) {
            throw DomainError("SparseMatrix: non-finite entry");
        }
        if (i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col) {
            throw DomainError("SparseMatrix: duplicate entry");
        }
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(entries.size());
    for (const auto& e : entries) {
        triplets.emplace_back(e.row, e.col, e.value);
    }
    eigen_.resize(rows, cols);
    eigen_.setFromTriplets(triplets.begin(), triplets.end());
    eigen_.makeCompressed();
    entries_ = std::move(entries);
}

SparseMatrix SparseMatrix::identity(Index n) {
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        entries.push_back({i, i, 1.0});
    }
    return SparseMatrix(n, n, std::move(entries));
}

SparseMatrix SparseMatrix::from_dense(const Matrix& dense) {
    require_valid(dense, "SparseMatrix::from_dense");
    std::vector<Entry> entries;
    for (Index i = 0; i < dense.rows(); ++i) {
        for (Index j = 0; j < dense.cols(); ++j) {
            if (dense(i, j) != 0.0) {
                entries.push_back({i, j, dense(i, j)});
            }
        }
    }
    return SparseMatrix(dense.rows(), dense.cols(), std::move(entries));
}

Matrix SparseMatrix::to_dense() const { return Matrix(eigen_); }

SparseMatrix SparseMatrix::permute_rows(const std::vector<Index>& new_of_old) const {
    if (static_cast<Index>(new_of_old.size()) != rows()) {
        throw DimensionError("SparseMatrix::permute_rows: permutation length mismatch");
    }
    std::vector<Entry> entries = entries_;
    for (auto& e : entries) {
        e.row = new_of_old[static_cast<std::size_t>(e.row)];
    }
    return SparseMatrix(rows(), cols(), std::move(entries));
}

SymmetricEig sym_eig(const Matrix& a) {
    require_symmetric(a, "sym_eig");
    const Matrix sym = 0.5 * (a + a.transpose());
    return descending(Eigen::SelfAdjointEigenSolver<Matrix>(sym));
}

Vector sym_eigenvalues(const Matrix& a) {
    require_symmetric(a, "sym_eigenvalues");
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().reverse();
}

Matrix spd_power(const SymmetricEig& eig, double p) {
    const Index n = eig.values.size();
    const double top = eig.values(0);
    const double floor = 1e-14 * std::max(top, 0.0);
    if (eig.values(n - 1) <= floor || top <= 0.0) {
        throw DomainError("spd_power: matrix is singular or not positive definite");
    }
    const Vector powered = eig.values.array().pow(p).matrix();
    Matrix out = eig.vectors * powered.asDiagonal() * eig.vectors.transpose();
    return 0.5 * (out + out.transpose());
}

Matrix spd_power(const Matrix& a, double p) { return spd_power(sym_eig(a), p); }

Svd svd(const Matrix& x) {
    require_valid(x, "svd");
    Eigen::BDCSVD<Matrix> solver(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

Vector singular_values(const Matrix& x) {
    require_valid(x, "singular_values");
    Eigen::BDCSVD<Matrix> solver(x);
    return solver.singularValues();
}

double nuclear_norm(const Matrix& x) { return singular_values(x).sum(); }

PowerIterationResult power_iteration(const std::function<Vector(const Vector&)>& apply,
                                     Index n,
                                     const std::optional<Vector>& start,
                                     const PowerIterationOptions& options) {
    if (n <= 0) {
        throw DimensionError("power_iteration: empty operator");
    }

    auto run = [&](Vector v) -> std::optional<PowerIterationResult> {
        v.normalize();
        Vector av = apply(v);
        if (av.norm() == 0.0) {
            return std::nullopt;  // start lies in the null space
        }
        double value = v.dot(av);
        for (int it = 1; it <= options.max_iterations; ++it) {
            v = av / av.norm();
            av = apply(v);
            const double next = v.dot(av);
            if (std::abs(next - value) <= options.tolerance * std::abs(next)) {
                return PowerIterationResult{next, v, it};
            }
            value = next;
            if (av.norm() == 0.0) {
                return PowerIterationResult{0.0, v, it};
            }
        }
        throw ConvergenceError("power_iteration: no convergence after " +
                               std::to_string(options.max_iterations) + " iterations");
    };

    Vector perturbed(n);
    for (Index i = 0; i < n; ++i) {
        perturbed(i) = 1.0 + 0.37 * std::cos(1.7 * static_cast<double>(i) + 0.3);
    }

    if (start) {
        if (start->size() != n) {
            throw DimensionError("power_iteration: warm start has wrong length");
        }
        if (start->norm() > 0.0) {
            if (auto r = run(*start)) {
                return *r;
            }
        }
        if (auto r = run(perturbed)) {
            return *r;
        }
        return {0.0, perturbed.normalized(), 0};
    }

    // Cold start: the all-ones vector can be an exact non-dominant eigenvector
    // (symmetric structure), so the perturbed start is always tried as well.
    auto from_ones = run(Vector::Ones(n));
    auto from_perturbed = run(perturbed);
    if (from_ones && from_perturbed) {
        return from_perturbed->value > from_ones->value ? *from_perturbed : *from_ones;
    }
    if (from_ones) {
        return *from_ones;
    }
    if (from_perturbed) {
        return *from_perturbed;
    }
    return {0.0, perturbed.normalized(), 0};
}

double lambda_max(const Matrix& a, const PowerIterationOptions& options) {
    require_symmetric(a, "lambda_max");
    try {
        return power_iteration([&](const Vector& v) -> Vector { return a * v; }, a.rows(), std::nullopt,
                               options)
            .value;
    } catch (const ConvergenceError&) {
        // Clustered top eigenvalues stall the iteration; fall back to a full solve.
        return sym_eigenvalues(a)(0);
    }
}

double lambda_max_gram(const SparseMatrix& g, const PowerIterationOptions& options) {
    const auto& gs = g.eigen();
    if (g.cols() <= kDenseGramLimit) {
        // GᵀG shares the nonzero spectrum of GGᵀ and is small.
        const Matrix gtg = Matrix(gs.transpose() * gs);
        return std::max(sym_eigenvalues(gtg)(0), 0.0);
    }
    return power_iteration([&](const Vector& v) -> Vector { return gs * (gs.transpose() * v); },
                           g.rows(), std::nullopt, options)
        .value;
}

Matrix sparse_apply_right(const Matrix& x, const SparseMatrix& g) {
    if (x.cols() != g.rows()) {
        throw DimensionError("sparse_apply_right: inner dimensions differ");
    }
    return x * g.eigen();
}

Matrix sparse_apply_right_t(const Matrix& x, const SparseMatrix& g) {
    if (x.cols() != g.cols()) {
        throw DimensionError("sparse_apply_right_t: inner dimensions differ");
    }
    return x * g.eigen().transpose();
}

} // namespace hsr
