#pragma once

#include <string>

#include "paraprec/operators.hpp"

namespace paraprec {

// Matrix Market I/O. Sparse matrices use the coordinate format, dense
// matrices and vectors the array format; values are written with 17
// significant digits so a round trip is exact.
void write_matrix_market(const std::string& path, const SparseMatrix& A);
void write_matrix_market(const std::string& path, const Matrix& A);
void write_matrix_market(const std::string& path, const Vector& v);

// Both readers accept coordinate and array files (general, symmetric or
// skew-symmetric). Malformed input raises ParseError with the line number;
// a file with no data raises EmptyMatrix.
SparseMatrix read_sparse_matrix_market(const std::string& path);
Matrix read_dense_matrix_market(const std::string& path);
Vector read_vector_matrix_market(const std::string& path);

}  // namespace paraprec
