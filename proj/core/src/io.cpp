#include "hsr/io.hpp"

#include "hsr/errors.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace hsr {

namespace {

constexpr std::array<char, 4> kMagic{'H', 'S', 'R', 'M'};
constexpr unsigned char kVersion = 1;
constexpr unsigned char kDtypeF64 = 1;
constexpr std::size_t kHeaderBytes = 24;

void put_u32(unsigned char* out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out[i] = static_cast<unsigned char>(v >> (8 * i));
    }
}

std::uint32_t get_u32(const unsigned char* in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
    }
    return v;
}

void put_f64(unsigned char* out, double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) {
        out[i] = static_cast<unsigned char>(bits >> (8 * i));
    }
}

double get_f64(const unsigned char* in) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

std::uint32_t checked_u32(Index v, const char* what) {
    if (v < 0 || v > static_cast<Index>(UINT32_MAX)) {
        throw DimensionError(std::string("HSRM: ") + what + " does not fit in 32 bits");
    }
    return static_cast<std::uint32_t>(v);
}

double parse_real(const std::string& token, const std::string& context) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw IoError(context + ": malformed number '" + token + "'");
    }
    return value;
}

} // namespace

std::string format_real(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << content;
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

void write_hsrm(const std::string& path, const Matrix& data, std::uint32_t width,
                std::uint32_t height) {
    require_valid(data, "write_hsrm");
    if ((width != 0 || height != 0) &&
        static_cast<Index>(width) * static_cast<Index>(height) != data.cols()) {
        throw DimensionError("write_hsrm: width x height must equal the column count");
    }
    std::vector<unsigned char> bytes(kHeaderBytes + 8 * static_cast<std::size_t>(data.size()));
    std::memcpy(bytes.data(), kMagic.data(), 4);
    bytes[4] = kVersion;
    bytes[5] = kDtypeF64;
    bytes[6] = bytes[7] = 0;
    put_u32(&bytes[8], checked_u32(data.rows(), "rows"));
    put_u32(&bytes[12], checked_u32(data.cols(), "cols"));
    put_u32(&bytes[16], width);
    put_u32(&bytes[20], height);
    // Eigen's default storage is column-major, matching the file order.
    for (Index k = 0; k < data.size(); ++k) {
        put_f64(&bytes[kHeaderBytes + 8 * static_cast<std::size_t>(k)], data.data()[k]);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

MatrixFile read_hsrm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
        throw IoError("'" + path + "' is not an HSRM file");
    }
    if (bytes[4] != kVersion || bytes[5] != kDtypeF64 || bytes[6] != 0 || bytes[7] != 0) {
        throw IoError("'" + path + "': unsupported HSRM version or dtype");
    }
    const std::uint32_t rows = get_u32(&bytes[8]);
    const std::uint32_t cols = get_u32(&bytes[12]);
    MatrixFile file;
    file.width = get_u32(&bytes[16]);
    file.height = get_u32(&bytes[20]);
    const std::size_t count = static_cast<std::size_t>(rows) * cols;
    if (bytes.size() != kHeaderBytes + 8 * count) {
        throw IoError("'" + path + "': payload length does not match the header");
    }
    if (rows == 0 || cols == 0) {
        throw IoError("'" + path + "': degenerate matrix");
    }
    if ((file.width != 0 || file.height != 0) &&
        static_cast<std::size_t>(file.width) * file.height != cols) {
        throw IoError("'" + path + "': width x height does not match the column count");
    }
    file.data.resize(rows, cols);
    for (std::size_t k = 0; k < count; ++k) {
        file.data.data()[k] = get_f64(&bytes[kHeaderBytes + 8 * k]);
    }
    return file;
}

void write_image(const std::string& path, const HSImage& image) {
    write_hsrm(path, image.data, static_cast<std::uint32_t>(image.width),
               static_cast<std::uint32_t>(image.height));
}

HSImage read_image(const std::string& path) {
    MatrixFile file = read_hsrm(path);
    if (file.width == 0 || file.height == 0) {
        throw IoError("'" + path + "' has no spatial dimensions");
    }
    return HSImage(std::move(file.data), static_cast<int>(file.width), static_cast<int>(file.height));
}

void write_sparse(const std::string& path, const SparseMatrix& g) {
    std::ostringstream out;
    out << "HSRG " << g.rows() << ' ' << g.cols() << ' ' << g.nnz() << '\n';
    for (const auto& e : g.entries()) {
        out << e.row << ' ' << e.col << ' ' << format_real(e.value) << '\n';
    }
    write_text(path, out.str());
}

SparseMatrix read_sparse(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::string magic;
    long long rows = 0, cols = 0, nnz = 0;
    if (!(in >> magic >> rows >> cols >> nnz) || magic != "HSRG" || rows <= 0 || cols <= 0 || nnz < 0) {
        throw IoError("'" + path + "': bad HSRG header");
    }
    std::vector<SparseMatrix::Entry> entries;
    entries.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
        long long r = 0, c = 0;
        std::string value;
        if (!(in >> r >> c >> value)) {
            throw IoError("'" + path + "': truncated entry list");
        }
        entries.push_back({static_cast<Index>(r), static_cast<Index>(c), parse_real(value, path)});
    }
    std::string extra;
    if (in >> extra) {
        throw IoError("'" + path + "': trailing data after " + std::to_string(nnz) + " entries");
    }
    try {
        return SparseMatrix(static_cast<Index>(rows), static_cast<Index>(cols), std::move(entries));
    } catch (const Error& e) {
        throw IoError("'" + path + "': " + e.what());
    }
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ostringstream out;
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c > 0) {
                out << ',';
            }
            out << format_real(m(r, c));
        }
        out << '\n';
    }
    write_text(path, out.str());
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(parse_real(cell, path));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw IoError("'" + path + "': ragged rows");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty()) {
        throw IoError("'" + path + "' is empty");
    }
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
        }
    }
    return m;
}

} // namespace hsr
