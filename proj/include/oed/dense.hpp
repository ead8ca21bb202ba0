#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "oed/rng.hpp"

namespace oed {

using Vector = std::vector<double>;

/// Column-major dense real matrix.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// Row-wise literal, convenient in tests: {{4, 2}, {2, 3}}.
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> d);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * rows_ + i]; }

  [[nodiscard]] std::span<double> col(std::size_t j) noexcept {
    return {data_.data() + j * rows_, rows_};
  }
  [[nodiscard]] std::span<const double> col(std::size_t j) const noexcept {
    return {data_.data() + j * rows_, rows_};
  }
  [[nodiscard]] Vector row(std::size_t i) const;

  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] std::span<double> data() noexcept { return data_; }

  [[nodiscard]] DenseMatrix transpose() const;
  [[nodiscard]] double max_abs() const noexcept;
  [[nodiscard]] bool all_finite() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
Vector operator*(const DenseMatrix& a, std::span<const double> x);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;
double norm_inf(std::span<const double> a) noexcept;

/// max |a_ij - b_ij|; matrices must have equal shape.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

/// Largest |a_ij - a_ji| relative to max |a_ij|.
double relative_asymmetry(const DenseMatrix& a);

/// Lower-triangular Cholesky factor L with L Lᵀ = M.
class CholeskyFactor {
public:
  CholeskyFactor(DenseMatrix lower) : lower_(std::move(lower)) {}

  [[nodiscard]] const DenseMatrix& lower() const noexcept { return lower_; }
  [[nodiscard]] std::size_t dim() const noexcept { return lower_.rows(); }

  /// Solves L y = b.
  [[nodiscard]] Vector solve_lower(std::span<const double> b) const;
  /// Solves Lᵀ x = y.
  [[nodiscard]] Vector solve_upper(std::span<const double> y) const;
  /// Solves M x = b.
  [[nodiscard]] Vector solve(std::span<const double> b) const;
  /// M⁻¹, symmetric by construction.
  [[nodiscard]] DenseMatrix inverse() const;

private:
  DenseMatrix lower_;
};

/// Throws NotPositiveDefinite when a pivot is ≤ dim·ε·max-diagonal and
/// DegenerateInput when M is not square or not symmetric within 1e-12.
CholeskyFactor cholesky(const DenseMatrix& m);

/// Tr(M⁻¹) as ‖L⁻¹‖²_F, one triangular solve per unit vector.
double trace_of_inverse(const DenseMatrix& m);
double trace_of_inverse(const CholeskyFactor& factor);

/// Thin QR: a = q r with q (m×n) orthonormal and r (n×n) upper triangular.
struct QrFactor {
  DenseMatrix q;
  DenseMatrix r;
};

/// Householder QR; never fails on rank deficiency (r then has zero pivots).
/// Throws DegenerateInput when a has fewer rows than columns.
QrFactor householder_qr(const DenseMatrix& a);

/// Thin Q factor (m×n, orthonormal columns) of a Householder QR of a.
/// Throws DegenerateInput if a is rank deficient to working precision.
DenseMatrix orthonormal_columns(const DenseMatrix& a);

/// Singular values cond^(-(k-1)/(n-1)), k = 1..n (all ones when n = 1).
Vector geometric_singular_values(std::size_t n, double cond);

/// J = U Σ Vᵀ with U, V drawn as Q factors of uniform[-1, 1] matrices and Σ
/// geometric with σ₁/σₙ = cond. Rows are scaled to unit length afterwards
/// when row_normalize is set.
DenseMatrix random_design_matrix(std::size_t m, std::size_t n, double cond, bool row_normalize,
                                 RngStream& rng);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(x+h eᵢ) - f(x-h eᵢ)) / 2h.
Vector finite_difference_gradient(const ScalarFunction& f, std::span<const double> x, double h);

} // namespace oed
