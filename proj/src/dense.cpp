#include "oed/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "oed/errors.hpp"

namespace oed {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("matrix shape mismatch");
}

} // namespace

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()),
      data_(rows_ * cols_) {
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != cols_)
      throw std::invalid_argument("ragged matrix literal");
    std::size_t j = 0;
    for (double v : r)
      (*this)(i, j++) = v;
    ++i;
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix id(n, n);
  for (std::size_t i = 0; i < n; ++i)
    id(i, i) = 1.0;
  return id;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    m(i, i) = d[i];
  return m;
}

Vector DenseMatrix::row(std::size_t i) const {
  Vector r(cols_);
  for (std::size_t j = 0; j < cols_; ++j)
    r[j] = (*this)(i, j);
  return r;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i)
      t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_)
    m = std::max(m, std::abs(v));
  return m;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matrix product shape mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto cj = c.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0)
        continue;
      auto ak = a.col(k);
      for (std::size_t i = 0; i < a.rows(); ++i)
        cj[i] += ak[i] * bkj;
    }
  }
  return c;
}

Vector operator*(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size())
    throw std::invalid_argument("matrix-vector shape mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    auto ak = a.col(k);
    for (std::size_t i = 0; i < a.rows(); ++i)
      y[i] += ak[i] * x[k];
  }
  return y;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b);
  DenseMatrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i)
    cd[i] -= bd[i];
  return c;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b);
  DenseMatrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i)
    cd[i] += bd[i];
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) noexcept {
  double m = 0.0;
  for (double v : a)
    m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) { return (a - b).max_abs(); }

double relative_asymmetry(const DenseMatrix& a) {
  if (!a.square())
    throw std::invalid_argument("relative_asymmetry: matrix not square");
  double asym = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = j + 1; i < a.rows(); ++i)
      asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
  const double scale = a.max_abs();
  return scale == 0.0 ? 0.0 : asym / scale;
}

// ---------------------------------------------------------------------------
// Cholesky

CholeskyFactor cholesky(const DenseMatrix& m) {
  if (!m.square())
    throw DegenerateInput("cholesky: matrix is not square");
  if (!m.all_finite())
    throw NonFiniteValue("cholesky: matrix has non-finite entries");
  if (relative_asymmetry(m) > 1e-12)
    throw DegenerateInput("cholesky: matrix is not symmetric");

  const std::size_t n = m.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_diag = std::max(max_diag, m(i, i));
  const double tol = static_cast<double>(n) * kEps * max_diag;

  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (std::size_t k = 0; k < j; ++k)
      pivot -= l(j, k) * l(j, k);
    if (!(pivot > tol))
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j) + " is " +
                                std::to_string(pivot));
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k)
        s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return CholeskyFactor(std::move(l));
}

Vector CholeskyFactor::solve_lower(std::span<const double> b) const {
  const std::size_t n = dim();
  Vector y(b.begin(), b.end());
  for (std::size_t j = 0; j < n; ++j) {
    y[j] /= lower_(j, j);
    const double yj = y[j];
    auto lj = lower_.col(j);
    for (std::size_t i = j + 1; i < n; ++i)
      y[i] -= lj[i] * yj;
  }
  return y;
}

Vector CholeskyFactor::solve_upper(std::span<const double> y) const {
  const std::size_t n = dim();
  Vector x(y.begin(), y.end());
  for (std::size_t jj = n; jj-- > 0;) {
    auto lj = lower_.col(jj);
    double s = x[jj];
    for (std::size_t i = jj + 1; i < n; ++i)
      s -= lj[i] * x[i];
    x[jj] = s / lower_(jj, jj);
  }
  return x;
}

Vector CholeskyFactor::solve(std::span<const double> b) const { return solve_upper(solve_lower(b)); }

DenseMatrix CholeskyFactor::inverse() const {
  const std::size_t n = dim();
  // Columns of L⁻¹, then M⁻¹ = L⁻ᵀ L⁻¹ accumulated on the lower triangle.
  DenseMatrix linv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Vector e(n, 0.0);
    e[j] = 1.0;
    const Vector c = solve_lower(e);
    std::copy(c.begin(), c.end(), linv.col(j).begin());
  }
  DenseMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = j; i < n; ++i) {
      // (L⁻ᵀL⁻¹)_ij = Σ_k (L⁻¹)_ki (L⁻¹)_kj, lower-triangular L⁻¹ means k ≥ i.
      double s = 0.0;
      for (std::size_t k = i; k < n; ++k)
        s += linv(k, i) * linv(k, j);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  }
  return inv;
}

double trace_of_inverse(const CholeskyFactor& factor) {
  const std::size_t n = factor.dim();
  double trace = 0.0;
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    const Vector c = factor.solve_lower(e);
    trace += dot(c, c);
  }
  return trace;
}

double trace_of_inverse(const DenseMatrix& m) { return trace_of_inverse(cholesky(m)); }

// ---------------------------------------------------------------------------
// Random design matrices

QrFactor householder_qr(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n || n == 0)
    throw DegenerateInput("householder_qr: need rows >= cols >= 1");

  DenseMatrix r = a;
  std::vector<Vector> reflectors;
  reflectors.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector v(m - k);
    for (std::size_t i = k; i < m; ++i)
      v[i - k] = r(i, k);
    const double alpha = norm2(v);
    if (alpha == 0.0) {
      reflectors.emplace_back(m - k, 0.0);
      continue;
    }
    v[0] += v[0] >= 0.0 ? alpha : -alpha;
    const double vnorm = norm2(v);
    for (double& vi : v)
      vi /= vnorm;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i)
        s += v[i - k] * r(i, j);
      for (std::size_t i = k; i < m; ++i)
        r(i, j) -= 2.0 * s * v[i - k];
    }
    reflectors.push_back(std::move(v));
  }

  QrFactor out{DenseMatrix(m, n), DenseMatrix(n, n)};
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i)
      out.r(i, j) = r(i, j);
  DenseMatrix& q = out.q;
  for (std::size_t j = 0; j < n; ++j)
    q(j, j) = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    const Vector& v = reflectors[kk];
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = kk; i < m; ++i)
        s += v[i - kk] * q(i, j);
      for (std::size_t i = kk; i < m; ++i)
        q(i, j) -= 2.0 * s * v[i - kk];
    }
  }
  return out;
}

DenseMatrix orthonormal_columns(const DenseMatrix& a) {
  if (a.rows() < a.cols() || a.cols() == 0)
    throw DegenerateInput("orthonormal_columns: need rows >= cols >= 1");
  QrFactor f = householder_qr(a);
  const double scale = std::max(a.max_abs(), std::numeric_limits<double>::min());
  const double tol = 1e-12 * scale * std::sqrt(static_cast<double>(a.rows()));
  for (std::size_t k = 0; k < a.cols(); ++k)
    if (std::abs(f.r(k, k)) <= tol)
      throw DegenerateInput("orthonormal_columns: QR pivot breakdown at column " +
                            std::to_string(k));
  return std::move(f.q);
}

Vector geometric_singular_values(std::size_t n, double cond) {
  Vector sigma(n, 1.0);
  if (n < 2)
    return sigma;
  const double denom = static_cast<double>(n - 1);
  for (std::size_t k = 1; k + 1 < n; ++k)
    sigma[k] = std::pow(cond, -static_cast<double>(k) / denom);
  sigma[n - 1] = 1.0 / cond;
  return sigma;
}

namespace {

DenseMatrix uniform_matrix(std::size_t m, std::size_t n, RngStream& rng) {
  DenseMatrix a(m, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i)
      a(i, j) = rng.uniform(-1.0, 1.0);
  return a;
}

} // namespace

DenseMatrix random_design_matrix(std::size_t m, std::size_t n, double cond, bool row_normalize,
                                 RngStream& rng) {
  if (n < 1 || m < n)
    throw DegenerateInput("random_design_matrix: need m >= n >= 1");
  if (!(cond >= 1.0) || !std::isfinite(cond))
    throw DegenerateInput("random_design_matrix: cond must be >= 1");

  constexpr int kAttempts = 4; // first draw plus three retries
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    DenseMatrix u_raw = uniform_matrix(m, n, rng);
    DenseMatrix v_raw = uniform_matrix(n, n, rng);
    DenseMatrix u, v;
    try {
      u = orthonormal_columns(u_raw);
      v = orthonormal_columns(v_raw);
    } catch (const DegenerateInput&) {
      continue;
    }
    const Vector sigma = geometric_singular_values(n, cond);
    for (std::size_t k = 0; k < n; ++k)
      for (double& x : u.col(k))
        x *= sigma[k];
    DenseMatrix j = u * v.transpose();
    if (row_normalize) {
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c)
          s += j(i, c) * j(i, c);
        const double nrm = std::sqrt(s);
        if (nrm == 0.0)
          throw DegenerateInput("random_design_matrix: zero row");
        for (std::size_t c = 0; c < n; ++c)
          j(i, c) /= nrm;
      }
    }
    return j;
  }
  throw DegenerateInput("random_design_matrix: QR breakdown after retries");
}

Vector finite_difference_gradient(const ScalarFunction& f, std::span<const double> x, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("finite_difference_gradient: h must be positive");
  Vector xp(x.begin(), x.end());
  Vector grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NonFiniteValue("finite_difference_gradient: non-finite evaluation");
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

} // namespace oed
