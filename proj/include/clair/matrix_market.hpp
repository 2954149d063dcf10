#ifndef CLAIR_MATRIX_MARKET_HPP
#define CLAIR_MATRIX_MARKET_HPP

#include "clair/sparse.hpp"

#include <iosfwd>
#include <string>

namespace clair {

/// Coordinate/real/general, 1-based, 17 significant digits.
void write_matrix_market(std::ostream& os, const SparseMatrixd& A);
void write_matrix_market(const std::string& path, const SparseMatrixd& A);

/// Reads coordinate real or integer matrices, general or symmetric.
SparseMatrixd read_matrix_market(std::istream& is);
SparseMatrixd read_matrix_market(const std::string& path);

} // namespace clair

#endif
