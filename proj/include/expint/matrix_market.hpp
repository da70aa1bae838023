#pragma once

#include <filesystem>
#include <iosfwd>

#include "expint/sparse.hpp"

namespace expint {

/// Reads `%%MatrixMarket matrix coordinate <field> <symmetry>` files.
///
/// field: real, integer, complex or pattern (pattern entries read as 1).
/// symmetry: general, symmetric, skew-symmetric or hermitian; the stored
/// triangle is expanded on read. Errors carry the offending line number.
template <class T>
CsrMatrix<T> read_matrix_market(std::istream& is);
template <class T>
CsrMatrix<T> read_matrix_market(const std::filesystem::path& path);

/// Writes a general coordinate file with shortest round-trip decimal values.
template <class T>
void write_matrix_market(const CsrMatrix<T>& A, std::ostream& os);
template <class T>
void write_matrix_market(const CsrMatrix<T>& A, const std::filesystem::path& path);

} // namespace expint
