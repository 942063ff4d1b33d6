#include "paraprec/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "paraprec/error.hpp"

namespace paraprec {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path + " for writing");
  return out;
}

struct Triplets {
  Index rows = 0, cols = 0;
  std::vector<Eigen::Triplet<double>> entries;
};

Triplets read_any(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw EmptyMatrix(path + " is empty");
  ++lineno;
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") throw ParseError(path, lineno, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw ParseError(path, lineno, "unsupported object '" + object + "'");
  if (format != "coordinate" && format != "array") throw ParseError(path, lineno, "unsupported format '" + format + "'");
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError(path, lineno, "unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
    throw ParseError(path, lineno, "unsupported symmetry '" + symmetry + "'");

  auto next_data_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++lineno;
      const auto first = out.find_first_not_of(" \t\r");
      if (first == std::string::npos || out[first] == '%') continue;
      return true;
    }
    return false;
  };

  if (!next_data_line(line)) throw EmptyMatrix(path + " has a header but no size line");
  Triplets t;
  std::istringstream size_line(line);
  long long rows = -1, cols = -1, nnz = -1;
  size_line >> rows >> cols;
  if (format == "coordinate") size_line >> nnz;
  if (size_line.fail() || rows < 0 || cols < 0 || (format == "coordinate" && nnz < 0))
    throw ParseError(path, lineno, "malformed size line");
  if (rows == 0 || cols == 0) throw EmptyMatrix(path + " declares a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  t.rows = rows;
  t.cols = cols;
  const bool sym = symmetry != "general";
  const double mirror = symmetry == "skew-symmetric" ? -1.0 : 1.0;

  if (format == "coordinate") {
    t.entries.reserve(static_cast<std::size_t>(nnz) * (sym ? 2 : 1));
    for (long long e = 0; e < nnz; ++e) {
      if (!next_data_line(line)) throw ParseError(path, lineno, "expected " + std::to_string(nnz) + " entries, got " + std::to_string(e));
      std::istringstream is(line);
      long long i, j;
      double v;
      is >> i >> j >> v;
      if (is.fail()) throw ParseError(path, lineno, "malformed entry");
      if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError(path, lineno, "index out of range");
      t.entries.emplace_back(i - 1, j - 1, v);
      if (sym && i != j) t.entries.emplace_back(j - 1, i - 1, mirror * v);
    }
  } else {
    std::vector<double> values;
    while (next_data_line(line)) {
      std::istringstream is(line);
      double v;
      is >> v;
      if (is.fail()) throw ParseError(path, lineno, "malformed value");
      values.push_back(v);
    }
    std::size_t expected = static_cast<std::size_t>(rows * cols);
    if (sym) expected = static_cast<std::size_t>(symmetry == "symmetric" ? rows * (rows + 1) / 2 : rows * (rows - 1) / 2);
    if (values.size() != expected)
      throw ParseError(path, lineno, "expected " + std::to_string(expected) + " values, got " + std::to_string(values.size()));
    std::size_t k = 0;
    for (long long j = 0; j < cols; ++j) {
      const long long i0 = !sym ? 0 : (symmetry == "symmetric" ? j : j + 1);
      for (long long i = i0; i < rows; ++i) {
        const double v = values[k++];
        t.entries.emplace_back(i, j, v);
        if (sym && i != j) t.entries.emplace_back(j, i, mirror * v);
      }
    }
  }
  return t;
}

}  // namespace

void write_matrix_market(const std::string& path, const SparseMatrix& A) {
  auto out = open_out(path);
  SparseMatrix C = A;
  C.makeCompressed();
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << C.rows() << ' ' << C.cols() << ' ' << C.nonZeros() << '\n';
  for (Index c = 0; c < C.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(C, c); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << fmt(it.value()) << '\n';
}

void write_matrix_market(const std::string& path, const Matrix& A) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << A.rows() << ' ' << A.cols() << '\n';
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i) out << fmt(A(i, j)) << '\n';
}

void write_matrix_market(const std::string& path, const Vector& v) { write_matrix_market(path, Matrix(v)); }

SparseMatrix read_sparse_matrix_market(const std::string& path) {
  const Triplets t = read_any(path);
  SparseMatrix A(t.rows, t.cols);
  A.setFromTriplets(t.entries.begin(), t.entries.end());
  A.makeCompressed();
  return A;
}

Matrix read_dense_matrix_market(const std::string& path) {
  const Triplets t = read_any(path);
  Matrix A = Matrix::Zero(t.rows, t.cols);
  for (const auto& e : t.entries) A(e.row(), e.col()) += e.value();
  return A;
}

Vector read_vector_matrix_market(const std::string& path) {
  const Matrix A = read_dense_matrix_market(path);
  if (A.cols() != 1 && A.rows() != 1) throw ParseError(path, 2, "expected a single row or column");
  return A.cols() == 1 ? Vector(A.col(0)) : Vector(A.row(0).transpose());
}

}  // namespace paraprec
