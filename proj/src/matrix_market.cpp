#include "clair/matrix_market.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace clair {

void write_matrix_market(std::ostream& os, const SparseMatrixd& A) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
    os << std::setprecision(17);
    for (int i = 0; i < A.outerSize(); ++i)
        for (SparseMatrixd::InnerIterator it(A, i); it; ++it) os << i + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_matrix_market(const std::string& path, const SparseMatrixd& A) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_matrix_market(os, A);
}

SparseMatrixd read_matrix_market(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("matrix market: empty input");
    std::string banner = line;
    std::transform(banner.begin(), banner.end(), banner.begin(), [](unsigned char c) { return std::tolower(c); });
    if (banner.rfind("%%matrixmarket", 0) != 0) throw std::runtime_error("matrix market: missing banner");
    if (banner.find("coordinate") == std::string::npos) throw std::runtime_error("matrix market: only coordinate format");
    if (banner.find("complex") != std::string::npos || banner.find("pattern") != std::string::npos)
        throw std::runtime_error("matrix market: unsupported field");
    const bool symmetric = banner.find("symmetric") != std::string::npos;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '%') break;
    long rows = 0;
    long cols = 0;
    long nnz = 0;
    if (!(std::istringstream(line) >> rows >> cols >> nnz)) throw std::runtime_error("matrix market: bad size line");
    std::vector<Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    for (long k = 0; k < nnz; ++k) {
        long i = 0;
        long j = 0;
        double v = 0.0;
        if (!(is >> i >> j >> v)) throw std::runtime_error("matrix market: truncated entries");
        if (i < 1 || i > rows || j < 1 || j > cols) throw std::out_of_range("matrix market: entry index");
        trip.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
        if (symmetric && i != j) trip.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
    }
    return from_triplets<double>(static_cast<int>(rows), static_cast<int>(cols), trip);
}

SparseMatrixd read_matrix_market(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    return read_matrix_market(is);
}

} // namespace clair
