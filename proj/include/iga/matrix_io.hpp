#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "iga/sparse.hpp"

namespace iga {

/// Writes a finalized matrix in Matrix Market coordinate format with 17
/// significant digits, which round-trips doubles exactly. In symmetric mode
/// only the lower triangle is stored; the matrix must actually be symmetric.
inline void write_matrix_market(std::ostream& os, const SparseMatrix& m, bool symmetric) {
  long long count = 0;
  for (int i = 0; i < m.size(); ++i)
    for (int j : m.row_cols(i))
      if (!symmetric || j <= i) ++count;
  os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general")
     << "\n";
  os << m.size() << ' ' << m.size() << ' ' << count << "\n";
  char buf[64];
  for (int i = 0; i < m.size(); ++i) {
    const auto cols = m.row_cols(i);
    const auto vals = m.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (symmetric && cols[k] > i) break;
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i + 1, cols[k] + 1, vals[k]);
      os << buf;
    }
  }
}

inline void write_matrix_market_file(const std::string& path, const SparseMatrix& m,
                                     bool symmetric) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_matrix_market_file: cannot open " + path);
  write_matrix_market(os, m, symmetric);
}

inline SparseMatrix read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error("read_matrix_market: missing MatrixMarket header");
  std::istringstream header(line);
  std::string tag, object, format, field, symmetry;
  header >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || format != "coordinate" || field != "real")
    throw std::runtime_error("read_matrix_market: unsupported header '" + line + "'");
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    throw std::runtime_error("read_matrix_market: unsupported symmetry '" + symmetry + "'");
  do {
    if (!std::getline(is, line)) throw std::runtime_error("read_matrix_market: missing sizes");
  } while (!line.empty() && line[0] == '%');
  std::istringstream sizes(line);
  long long rows = 0, cols = 0, count = 0;
  if (!(sizes >> rows >> cols >> count) || rows != cols || rows <= 0)
    throw std::runtime_error("read_matrix_market: bad size line");
  SparseMatrix m(static_cast<int>(rows));
  for (long long k = 0; k < count; ++k) {
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(is >> i >> j >> v)) throw std::runtime_error("read_matrix_market: truncated data");
    m.add(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    if (symmetric && i != j) m.add(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
  }
  m.finalize();
  return m;
}

inline SparseMatrix read_matrix_market_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_matrix_market_file: cannot open " + path);
  return read_matrix_market(is);
}

}  // namespace iga
