#pragma once

// On-disk formats.
//
// HSRM (binary matrix / image cube), all integers little-endian:
//   bytes 0-3   "HSRM"
//   byte  4     version = 1
//   byte  5     dtype = 1 (IEEE-754 float64, little-endian)
//   bytes 6-7   reserved, zero
//   bytes 8-23  uint32 rows, cols, width, height (width = height = 0 for a plain matrix)
//   then rows·cols float64 values, column-major.
//
// Sparse text ("G.sparse"): a header line "HSRG rows cols nnz" followed by one
// "row col value" line per entry, sorted by (row, col).
//
// Dense CSV: one line per row, comma-separated, no header.
//
// Reals in text formats use the shortest representation that round-trips.

#include "hsr/imaging.hpp"
#include "hsr/matcore.hpp"

#include <cstdint>
#include <string>

namespace hsr {

struct MatrixFile {
    Matrix data;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
};

void write_hsrm(const std::string& path, const Matrix& data, std::uint32_t width = 0,
                std::uint32_t height = 0);
MatrixFile read_hsrm(const std::string& path);

void write_image(const std::string& path, const HSImage& image);
/// Throws IoError when the file carries no spatial dimensions.
HSImage read_image(const std::string& path);

void write_sparse(const std::string& path, const SparseMatrix& g);
SparseMatrix read_sparse(const std::string& path);

void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

std::string format_real(double value);

/// Writes `content` to `path`, throwing IoError on failure.
void write_text(const std::string& path, const std::string& content);

} // namespace hsr
