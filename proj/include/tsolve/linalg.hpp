#pragma once

/// @file linalg.hpp
/// @brief Dense and CSR matrix storage, the linear-operator concept used by
/// every solver, and the implicit H operator (A itself, or A*A^T applied as
/// A(A^T r) without forming the product).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"

namespace tsolve {

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

/// Neumaier-compensated dot product. Summation order is fixed (left to right).
inline double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double term = a[i] * b[i];
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "subtract: length mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector scaled(double s, std::span<const double> v) {
  Vector out(v.begin(), v.end());
  for (double& x : out) x *= s;
  return out;
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// Storage
// ---------------------------------------------------------------------------

/// Row-major dense matrix.
class DenseMatrix {
public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
      : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    require(data_.size() == rows_ * cols_, "DenseMatrix: storage length must equal rows*cols");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const DenseMatrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row.
class CsrMatrix {
public:
  CsrMatrix() = default;

  /// Takes ownership of raw CSR arrays and validates them.
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
            std::vector<std::size_t> col_idx, std::vector<double> values)
      : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
        values_(std::move(values)) {
    validate();
  }

  /// Assembles from unordered triplets. Duplicate (row, col) entries are
  /// summed; the number of merged duplicates is written to `duplicates`.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries,
                                 std::size_t* duplicates = nullptr) {
    for (const auto& e : entries)
      require(e.row < rows && e.col < cols, "CsrMatrix: triplet index out of range");
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    std::vector<std::size_t> row_ptr(rows + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(entries.size());
    values.reserve(entries.size());
    std::size_t merged = 0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& e = entries[k];
      if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
        values.back() += e.value;
        ++merged;
        continue;
      }
      col_idx.push_back(e.col);
      values.push_back(e.value);
      ++row_ptr[e.row + 1];
    }
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    if (duplicates) *duplicates = merged;
    return CsrMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const CsrMatrix&) const = default;

private:
  void validate() const {
    require(row_ptr_.size() == rows_ + 1, "CsrMatrix: row_ptr must have rows+1 entries");
    require(row_ptr_.front() == 0 && row_ptr_.back() == values_.size(),
            "CsrMatrix: row_ptr must start at 0 and end at nnz");
    require(col_idx_.size() == values_.size(), "CsrMatrix: col_idx/values length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) {
      require(row_ptr_[i] <= row_ptr_[i + 1], "CsrMatrix: row_ptr must be nondecreasing");
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        require(col_idx_[k] < cols_, "CsrMatrix: column index out of range");
        require(k == row_ptr_[i] || col_idx_[k - 1] < col_idx_[k],
                "CsrMatrix: column indices must be strictly increasing within a row");
      }
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Matrix: dense or sparse, immutable after construction
// ---------------------------------------------------------------------------

/// Solvers switch to sparse kernels above this column count.
inline constexpr std::size_t kSparseThreshold = 1000;

class Matrix {
public:
  Matrix() : storage_(DenseMatrix{}) {}
  Matrix(DenseMatrix d) : storage_(std::move(d)) {}  // NOLINT(google-explicit-constructor)
  Matrix(CsrMatrix s) : storage_(std::move(s)) {}    // NOLINT(google-explicit-constructor)

  std::size_t rows() const {
    return std::visit([](const auto& s) { return s.rows(); }, storage_);
  }
  std::size_t cols() const {
    return std::visit([](const auto& s) { return s.cols(); }, storage_);
  }
  bool is_sparse() const noexcept { return std::holds_alternative<CsrMatrix>(storage_); }

  const DenseMatrix& dense() const { return std::get<DenseMatrix>(storage_); }
  const CsrMatrix& sparse() const { return std::get<CsrMatrix>(storage_); }

  /// Stored nonzeros (exact zeros in dense storage are not counted).
  std::size_t nnz() const {
    if (is_sparse()) return sparse().nnz();
    const auto& d = dense().data();
    return static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [](double x) { return x != 0.0; }));
  }

  /// Entry lookup; O(log nnz_row) for sparse storage.
  double at(std::size_t i, std::size_t j) const {
    require(i < rows() && j < cols(), "Matrix::at: index out of range");
    if (!is_sparse()) return dense()(i, j);
    const auto& s = sparse();
    auto first = s.col_idx().begin() + static_cast<std::ptrdiff_t>(s.row_ptr()[i]);
    auto last = s.col_idx().begin() + static_cast<std::ptrdiff_t>(s.row_ptr()[i + 1]);
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return s.values()[static_cast<std::size_t>(it - s.col_idx().begin())];
  }

  DenseMatrix to_dense() const {
    if (!is_sparse()) return dense();
    const auto& s = sparse();
    DenseMatrix d(s.rows(), s.cols());
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t k = s.row_ptr()[i]; k < s.row_ptr()[i + 1]; ++k)
        d(i, s.col_idx()[k]) = s.values()[k];
    return d;
  }

  /// Drops exact zeros of dense storage.
  CsrMatrix to_sparse() const {
    if (is_sparse()) return sparse();
    const auto& d = dense();
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j)
        if (d(i, j) != 0.0) t.push_back({i, j, d(i, j)});
    return CsrMatrix::from_triplets(d.rows(), d.cols(), std::move(t));
  }

  double frobenius_norm() const {
    if (is_sparse()) return norm2(sparse().values());
    return norm2(dense().data());
  }

  // Linear-operator interface -------------------------------------------------

  /// y = A x
  void apply(std::span<const double> x, std::span<double> y) const {
    require(x.size() == cols(), "matvec: vector length must equal matrix column count");
    require(y.size() == rows(), "matvec: output length must equal matrix row count");
    if (is_sparse()) {
      const auto& s = sparse();
      const auto& rp = s.row_ptr();
      const auto& ci = s.col_idx();
      const auto& va = s.values();
      for (std::size_t i = 0; i < s.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) sum += va[k] * x[ci[k]];
        y[i] = sum;
      }
    } else {
      const auto& d = dense();
      for (std::size_t i = 0; i < d.rows(); ++i) {
        const double* a = d.data().data() + i * d.cols();
        double sum = 0.0;
        for (std::size_t j = 0; j < d.cols(); ++j) sum += a[j] * x[j];
        y[i] = sum;
      }
    }
  }

  /// y = A^T x, computed from row storage (no explicit transpose).
  void apply_transpose(std::span<const double> x, std::span<double> y) const {
    require(x.size() == rows(), "matvec_transpose: vector length must equal matrix row count");
    require(y.size() == cols(), "matvec_transpose: output length must equal matrix column count");
    std::fill(y.begin(), y.end(), 0.0);
    if (is_sparse()) {
      const auto& s = sparse();
      const auto& rp = s.row_ptr();
      const auto& ci = s.col_idx();
      const auto& va = s.values();
      for (std::size_t i = 0; i < s.rows(); ++i) {
        const double xi = x[i];
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) y[ci[k]] += va[k] * xi;
      }
    } else {
      const auto& d = dense();
      for (std::size_t i = 0; i < d.rows(); ++i) {
        const double* a = d.data().data() + i * d.cols();
        const double xi = x[i];
        for (std::size_t j = 0; j < d.cols(); ++j) y[j] += a[j] * xi;
      }
    }
  }

private:
  std::variant<DenseMatrix, CsrMatrix> storage_;
};

/// Converts dense storage to CSR when the column count exceeds the sparse
/// threshold; otherwise returns the matrix unchanged.
inline Matrix with_kernel_for_size(Matrix a) {
  if (!a.is_sparse() && a.cols() > kSparseThreshold) return Matrix(a.to_sparse());
  return a;
}

/// Full O(n^2) symmetry check. Debug validation only; solvers never call it.
inline bool is_symmetric(const Matrix& a, double tol = 0.0) {
  if (a.rows() != a.cols()) return false;
  const DenseMatrix d = a.to_dense();
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = i + 1; j < d.cols(); ++j)
      if (std::abs(d(i, j) - d(j, i)) > tol * std::max({1.0, std::abs(d(i, j)), std::abs(d(j, i))}))
        return false;
  return true;
}

// ---------------------------------------------------------------------------
// Linear-operator concept
// ---------------------------------------------------------------------------

template <class Op>
concept LinearOperator = requires(const Op& op, std::span<const double> x, std::span<double> y) {
  { op.rows() } -> std::convertible_to<std::size_t>;
  { op.cols() } -> std::convertible_to<std::size_t>;
  op.apply(x, y);
  op.apply_transpose(x, y);
};

template <LinearOperator Op>
Vector matvec(const Op& a, std::span<const double> v) {
  require(v.size() == a.cols(), "matvec: vector length must equal operator column count");
  Vector y(a.rows());
  a.apply(v, y);
  return y;
}

template <LinearOperator Op>
Vector matvec_transpose(const Op& a, std::span<const double> v) {
  require(v.size() == a.rows(), "matvec_transpose: vector length must equal operator row count");
  Vector y(a.cols());
  a.apply_transpose(v, y);
  return y;
}

/// r = b - A x
template <LinearOperator Op>
Vector residual(const Op& a, std::span<const double> x, std::span<const double> b) {
  Vector ax = matvec(a, x);
  return subtract(b, ax);
}

/// The symmetric PSD operator A^T A applied as A^T(A x). Lets TA and LP
/// feasibility run on the normal-equation pair (A^T A, A^T b).
template <LinearOperator Op>
class NormalOperator {
public:
  explicit NormalOperator(const Op& a) : a_(&a) {}

  std::size_t rows() const { return a_->cols(); }
  std::size_t cols() const { return a_->cols(); }

  void apply(std::span<const double> x, std::span<double> y) const {
    Vector tmp(a_->rows());
    a_->apply(x, tmp);
    a_->apply_transpose(tmp, y);
  }
  void apply_transpose(std::span<const double> x, std::span<double> y) const { apply(x, y); }

  const Op& base() const { return *a_; }

private:
  const Op* a_;
};

// ---------------------------------------------------------------------------
// H operator
// ---------------------------------------------------------------------------

enum class HMode {
  SymmetricA,  ///< H = A; caller asserts A is square and symmetric (PSD for the guarantees)
  GramAAT      ///< H = A A^T, applied as A(A^T r)
};

inline const char* to_string(HMode m) { return m == HMode::SymmetricA ? "a" : "aat"; }

template <LinearOperator Op>
class HOperator {
public:
  HOperator(const Op& a, HMode mode) : a_(&a), mode_(mode) {
    if (mode == HMode::SymmetricA)
      require(a.rows() == a.cols(), "HOperator: mode SymmetricA requires a square matrix");
  }

  HMode mode() const noexcept { return mode_; }
  const Op& matrix() const noexcept { return *a_; }
  std::size_t size() const { return a_->rows(); }

  void apply(std::span<const double> r, std::span<double> out) const {
    require(r.size() == size() && out.size() == size(), "apply_H: dimension mismatch");
    if (mode_ == HMode::SymmetricA) {
      a_->apply(r, out);
    } else {
      Vector tmp(a_->cols());
      a_->apply_transpose(r, tmp);
      a_->apply(tmp, out);
    }
  }

  Vector apply(std::span<const double> r) const {
    Vector out(size());
    apply(r, out);
    return out;
  }

  /// Maps a residual-space vector to the solution-space direction used in
  /// the x update: v itself for SymmetricA, A^T v for GramAAT.
  Vector lift(std::span<const double> v) const {
    if (mode_ == HMode::SymmetricA) return Vector(v.begin(), v.end());
    return matvec_transpose(*a_, v);
  }

private:
  const Op* a_;
  HMode mode_;
};

template <LinearOperator Op>
Vector apply_H(const HOperator<Op>& h, std::span<const double> r) {
  return h.apply(r);
}

} // namespace tsolve
