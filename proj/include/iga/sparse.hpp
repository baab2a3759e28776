#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace iga {

/// Square sparse matrix with a triplet accumulation phase and a compressed
/// sparse row form after finalization. Duplicate triplets are summed in
/// insertion order, which keeps finalization deterministic.
class SparseMatrix {
 public:
  struct Triplet {
    int row;
    int col;
    double value;
  };

  SparseMatrix() = default;
  explicit SparseMatrix(int n) : n_(n) {}

  int size() const { return n_; }
  bool finalized() const { return finalized_; }
  long long nnz() const { return static_cast<long long>(cols_.size()); }

  void add(int row, int col, double value) {
    if (finalized_) throw std::logic_error("SparseMatrix::add: matrix already finalized");
    if (row < 0 || row >= n_ || col < 0 || col >= n_)
      throw std::invalid_argument("SparseMatrix::add: index out of range");
    triplets_.push_back({row, col, value});
  }

  /// Sorts triplets by (row, col) keeping insertion order among duplicates,
  /// sums duplicates, and builds the compressed form.
  void finalize() {
    if (finalized_) return;
    std::vector<std::uint32_t> order(triplets_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const Triplet& ta = triplets_[a];
      const Triplet& tb = triplets_[b];
      if (ta.row != tb.row) return ta.row < tb.row;
      if (ta.col != tb.col) return ta.col < tb.col;
      return a < b;
    });
    row_ptr_.assign(n_ + 1, 0);
    cols_.clear();
    values_.clear();
    cols_.reserve(order.size());
    values_.reserve(order.size());
    int last_row = -1, last_col = -1;
    for (std::uint32_t idx : order) {
      const Triplet& t = triplets_[idx];
      if (t.row == last_row && t.col == last_col) {
        values_.back() += t.value;
      } else {
        cols_.push_back(t.col);
        values_.push_back(t.value);
        ++row_ptr_[t.row + 1];
        last_row = t.row;
        last_col = t.col;
      }
    }
    for (int i = 0; i < n_; ++i) row_ptr_[i + 1] += row_ptr_[i];
    triplets_.clear();
    triplets_.shrink_to_fit();
    finalized_ = true;
  }

  /// Builds a finalized matrix directly from CSR arrays (cols sorted per row).
  static SparseMatrix from_csr(int n, std::vector<long long> row_ptr, std::vector<int> cols,
                               std::vector<double> values) {
    if (static_cast<int>(row_ptr.size()) != n + 1 || cols.size() != values.size() ||
        row_ptr.back() != static_cast<long long>(cols.size()))
      throw std::invalid_argument("SparseMatrix::from_csr: inconsistent arrays");
    SparseMatrix m(n);
    m.row_ptr_ = std::move(row_ptr);
    m.cols_ = std::move(cols);
    m.values_ = std::move(values);
    m.finalized_ = true;
    return m;
  }

  std::span<const int> row_cols(int i) const {
    check_finalized();
    return {cols_.data() + row_ptr_[i], static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
  }
  std::span<const double> row_values(int i) const {
    check_finalized();
    return {values_.data() + row_ptr_[i],
            static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
  }
  std::span<double> row_values_mut(int i) {
    check_finalized();
    return {values_.data() + row_ptr_[i],
            static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
  }

  /// Index of entry (i,j) into the value array, or -1 if structurally absent.
  long long find(int i, int j) const {
    check_finalized();
    const int* begin = cols_.data() + row_ptr_[i];
    const int* end = cols_.data() + row_ptr_[i + 1];
    const int* it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return -1;
    return row_ptr_[i] + (it - begin);
  }
  bool has_entry(int i, int j) const { return find(i, j) >= 0; }
  double value_at(int i, int j) const {
    const long long k = find(i, j);
    return k < 0 ? 0.0 : values_[k];
  }
  void set_value(long long index, double v) { values_[index] = v; }
  double value(long long index) const { return values_[index]; }

  void multiply(std::span<const double> x, std::span<double> y) const {
    check_finalized();
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (long long k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
      y[i] = s;
    }
  }

  std::vector<double> diagonal() const {
    check_finalized();
    std::vector<double> d(n_, 0.0);
    for (int i = 0; i < n_; ++i) d[i] = value_at(i, i);
    return d;
  }

  double max_abs() const {
    check_finalized();
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  const std::vector<long long>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

 private:
  void check_finalized() const {
    if (!finalized_) throw std::logic_error("SparseMatrix: finalize() required");
  }

  int n_ = 0;
  bool finalized_ = false;
  std::vector<Triplet> triplets_;
  std::vector<long long> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> values_;
};

/// Maximum absolute entry difference over the union of both sparsity patterns.
inline double matrix_max_diff(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.size() != b.size()) throw std::invalid_argument("matrix_max_diff: size mismatch");
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const auto ca = a.row_cols(i);
    const auto va = a.row_values(i);
    const auto cb = b.row_cols(i);
    const auto vb = b.row_values(i);
    std::size_t ia = 0, ib = 0;
    while (ia < ca.size() || ib < cb.size()) {
      double d = 0.0;
      if (ib >= cb.size() || (ia < ca.size() && ca[ia] < cb[ib])) {
        d = va[ia++];
      } else if (ia >= ca.size() || cb[ib] < ca[ia]) {
        d = vb[ib++];
      } else {
        d = va[ia++] - vb[ib++];
      }
      m = std::max(m, std::abs(d));
    }
  }
  return m;
}

}  // namespace iga
