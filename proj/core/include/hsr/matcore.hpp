#pragma once

// Dense and sparse linear-algebra kernels shared by the rest of the library.
//
// Dense matrices are Eigen column-major matrices, so every pixel spectrum
// (a column of a spectral-spatial matrix) is contiguous in memory.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace hsr {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Throws DimensionError for 0×n / n×0 matrices and DomainError for non-finite entries.
void require_valid(const Matrix& a, const char* what);

/// Sparse real matrix with a canonical entry list.
///
/// Entries are kept sorted by (row, col), free of duplicates and explicit
/// zeros. The Eigen representation is built once and shared by all products.
class SparseMatrix {
public:
    struct Entry {
        Index row;
        Index col;
        double value;

        friend bool operator==(const Entry&, const Entry&) = default;
    };

    SparseMatrix() = default;

    /// Duplicate coordinates or out-of-range indices throw; zero values are dropped.
    SparseMatrix(Index rows, Index cols, std::vector<Entry> entries);

    static SparseMatrix identity(Index n);
    static SparseMatrix from_dense(const Matrix& dense);

    Index rows() const noexcept { return eigen_.rows(); }
    Index cols() const noexcept { return eigen_.cols(); }
    Index nnz() const noexcept { return static_cast<Index>(entries_.size()); }

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    const Eigen::SparseMatrix<double>& eigen() const noexcept { return eigen_; }

    Matrix to_dense() const;

    /// Same matrix with rows reordered: row `new_of_old[r]` of the result is row `r` of this.
    SparseMatrix permute_rows(const std::vector<Index>& new_of_old) const;

    friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && a.entries_ == b.entries_;
    }

private:
    std::vector<Entry> entries_;
    Eigen::SparseMatrix<double> eigen_;
};

struct SymmetricEig {
    Matrix vectors;  ///< orthogonal; column i pairs with values(i)
    Vector values;   ///< descending
};

/// Full eigendecomposition of a symmetric matrix (eigenvalues descending).
SymmetricEig sym_eig(const Matrix& a);

/// Eigenvalues only, descending.
Vector sym_eigenvalues(const Matrix& a);

/// A^p = U diag(λ^p) Uᵀ for a symmetric positive-definite A.
Matrix spd_power(const Matrix& a, double p);
Matrix spd_power(const SymmetricEig& eig, double p);

struct Svd {
    Matrix u;      ///< m × k, k = min(m, n)
    Vector sigma;  ///< k values, descending, nonnegative
    Matrix v;      ///< n × k
};

Svd svd(const Matrix& x);

/// Singular values only, descending.
Vector singular_values(const Matrix& x);

double nuclear_norm(const Matrix& x);

struct PowerIterationOptions {
    double tolerance = 1e-10;
    int max_iterations = 10000;
};

struct PowerIterationResult {
    double value = 0.0;
    Vector vector;  ///< unit-norm estimate of the top eigenvector
    int iterations = 0;
};

/// Largest eigenvalue of a symmetric PSD operator given as v ↦ A v.
///
/// Starts from `start` when given (warm start), otherwise from the all-ones
/// vector. A start orthogonal to the dominant eigenspace is replaced by a
/// fixed perturbed vector. Throws ConvergenceError after max_iterations.
PowerIterationResult power_iteration(const std::function<Vector(const Vector&)>& apply,
                                     Index n,
                                     const std::optional<Vector>& start = std::nullopt,
                                     const PowerIterationOptions& options = {});

/// Falls back to a dense eigensolver when the power iteration stalls.
double lambda_max(const Matrix& a, const PowerIterationOptions& options = {});

inline constexpr Index kDenseGramLimit = 2048;

/// λ_max(G Gᵀ). Uses the dense GᵀG when G has at most kDenseGramLimit columns,
/// otherwise a power iteration on G Gᵀ applied implicitly.
double lambda_max_gram(const SparseMatrix& g, const PowerIterationOptions& options = {});

/// x · g
Matrix sparse_apply_right(const Matrix& x, const SparseMatrix& g);
/// x · gᵀ
Matrix sparse_apply_right_t(const Matrix& x, const SparseMatrix& g);

} // namespace hsr
