#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace oracle {

namespace {

// Row-major scratch copy, row swaps are cheap.
using Rows = std::vector<std::vector<double>>;

Rows to_rows(const DenseMatrix& a) {
  Rows r(a.rows(), std::vector<double>(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      r[i][j] = a(i, j);
  return r;
}

// Reduces [A | B] in place to [I | A⁻¹B].
void gauss_jordan(Rows& a, Rows& b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c]))
        piv = r;
    if (a[piv][c] == 0.0)
      throw std::runtime_error("gauss_jordan: singular matrix");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    const double p = a[c][c];
    for (double& v : a[c])
      v /= p;
    for (double& v : b[c])
      v /= p;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0.0)
        continue;
      const double f = a[r][c];
      for (std::size_t k = 0; k < a[r].size(); ++k)
        a[r][k] -= f * a[c][k];
      for (std::size_t k = 0; k < b[r].size(); ++k)
        b[r][k] -= f * b[c][k];
    }
  }
}

} // namespace

DenseMatrix gauss_jordan_inverse(const DenseMatrix& a) {
  const std::size_t n = a.rows();
  Rows lhs = to_rows(a);
  Rows rhs(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    rhs[i][i] = 1.0;
  gauss_jordan(lhs, rhs);
  DenseMatrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      inv(i, j) = rhs[i][j];
  return inv;
}

Vector gauss_jordan_solve(const DenseMatrix& a, const Vector& b) {
  Rows lhs = to_rows(a);
  Rows rhs(b.size(), std::vector<double>(1));
  for (std::size_t i = 0; i < b.size(); ++i)
    rhs[i][0] = b[i];
  gauss_jordan(lhs, rhs);
  Vector x(b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    x[i] = rhs[i][0];
  return x;
}

Vector jacobi_singular_values(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::vector<Vector> col(n, Vector(m));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i)
      col[j][i] = a(i, j);

  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += col[p][i] * col[p][i];
          beta += col[q][i] * col[q][i];
          gamma += col[p][i] * col[q][i];
        }
        if (gamma == 0.0)
          continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double xp = col[p][i];
          const double xq = col[q][i];
          col[p][i] = c * xp - s * xq;
          col[q][i] = s * xp + c * xq;
        }
      }
    if (off < 1e-15)
      break;
  }
  Vector sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (double v : col[j])
      s += v * v;
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

DenseMatrix random_spd(std::size_t n, double shift, oed::RngStream& rng) {
  DenseMatrix a(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      a(i, j) = rng.uniform(-1.0, 1.0);
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = i == j ? shift : 0.0;
      for (std::size_t k = 0; k < n; ++k)
        s += a(i, k) * a(j, k);
      m(i, j) = s;
      m(j, i) = s;
    }
  return m;
}

PlantedQp planted_qp(std::size_t n, bool with_equality, oed::RngStream& rng) {
  PlantedQp out;
  oed::QpProblem& p = out.problem;
  p.hessian = random_spd(n, 0.5, rng);
  p.lower.resize(n);
  p.upper.resize(n);
  out.solution.resize(n);
  out.activity.assign(n, 0);

  Vector z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    p.lower[i] = rng.uniform(-2.0, -0.5);
    p.upper[i] = rng.uniform(0.5, 2.0);
    const double u = rng.uniform();
    if (u < 0.3) {
      out.activity[i] = -1;
      out.solution[i] = p.lower[i];
      z[i] = rng.uniform(0.1, 2.0);
    } else if (u < 0.5) {
      out.activity[i] = 1;
      out.solution[i] = p.upper[i];
      z[i] = -rng.uniform(0.1, 2.0);
    } else {
      out.solution[i] = rng.uniform(p.lower[i] + 0.1, p.upper[i] - 0.1);
    }
  }

  double nu = 0.0;
  Vector a(n, 0.0);
  if (with_equality) {
    for (double& v : a)
      v = rng.uniform(0.5, 1.5);
    nu = rng.uniform(-1.0, 1.0);
    double b = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      b += a[i] * out.solution[i];
    p.equality = oed::LinearEquality{a, b};
  }
  // Stationarity Hx + g = aν + z fixes g.
  p.linear.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double hx = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      hx += p.hessian(i, k) * out.solution[k];
    p.linear[i] = a[i] * nu + z[i] - hx;
  }
  return out;
}

Vector nullspace_kkt_solve(const oed::QpProblem& p, const std::vector<int>& activity) {
  const std::size_t n = p.linear.size();
  Vector x(n, 0.0);
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (activity[i] < 0)
      x[i] = p.lower[i];
    else if (activity[i] > 0)
      x[i] = p.upper[i];
    else
      free.push_back(i);
  }
  const std::size_t nf = free.size();
  if (nf == 0)
    return x;

  // Reduced problem in the free variables: ½yᵀHy + cᵀy, a_Fᵀy = r.
  DenseMatrix h(nf, nf);
  Vector c(nf);
  for (std::size_t a = 0; a < nf; ++a) {
    double s = p.linear[free[a]];
    for (std::size_t k = 0; k < n; ++k)
      if (activity[k] != 0)
        s += p.hessian(free[a], k) * x[k];
    c[a] = s;
    for (std::size_t b = 0; b < nf; ++b)
      h(a, b) = p.hessian(free[a], free[b]);
  }

  Vector y0(nf, 0.0);
  DenseMatrix zb; // nullspace basis, nf × dim
  if (p.equality) {
    Vector af(nf);
    double r = p.equality->b;
    for (std::size_t i = 0; i < n; ++i)
      if (activity[i] != 0)
        r -= p.equality->a[i] * x[i];
    double an = 0.0;
    for (std::size_t a = 0; a < nf; ++a) {
      af[a] = p.equality->a[free[a]];
      an += af[a] * af[a];
    }
    for (std::size_t a = 0; a < nf; ++a)
      y0[a] = af[a] * r / an;
    // Householder reflector P with P a_F ∥ e₁; columns 2..nf of P span null(a_Fᵀ).
    Vector v = af;
    const double norm = std::sqrt(an);
    v[0] += v[0] >= 0.0 ? norm : -norm;
    double vv = 0.0;
    for (double t : v)
      vv += t * t;
    zb = DenseMatrix(nf, nf - 1);
    for (std::size_t col = 1; col < nf; ++col)
      for (std::size_t row = 0; row < nf; ++row)
        zb(row, col - 1) = (row == col ? 1.0 : 0.0) - 2.0 * v[row] * v[col] / vv;
  } else {
    zb = DenseMatrix::identity(nf);
  }

  const std::size_t dim = zb.cols();
  if (dim > 0) {
    // (ZᵀHZ) u = -Zᵀ(H y0 + c)
    DenseMatrix hz(nf, dim);
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t i = 0; i < nf; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < nf; ++k)
          s += h(i, k) * zb(k, j);
        hz(i, j) = s;
      }
    DenseMatrix reduced(dim, dim);
    Vector rhs(dim, 0.0);
    Vector grad0(nf);
    for (std::size_t i = 0; i < nf; ++i) {
      double s = c[i];
      for (std::size_t k = 0; k < nf; ++k)
        s += h(i, k) * y0[k];
      grad0[i] = s;
    }
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t b = 0; b < dim; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < nf; ++k)
          s += zb(k, a) * hz(k, b);
        reduced(a, b) = s;
      }
      for (std::size_t k = 0; k < nf; ++k)
        rhs[a] -= zb(k, a) * grad0[k];
    }
    const Vector u = gauss_jordan_solve(reduced, rhs);
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t a = 0; a < dim; ++a)
        y0[i] += zb(i, a) * u[a];
  }
  for (std::size_t a = 0; a < nf; ++a)
    x[free[a]] = y0[a];
  return x;
}

double explicit_trace_of_inverse(const DenseMatrix& m) {
  const DenseMatrix inv = gauss_jordan_inverse(m);
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    t += inv(i, i);
  return t;
}

DenseMatrix naive_information_matrix(const DenseMatrix& j, const Vector& w, double inv_alpha) {
  const std::size_t n = j.cols();
  DenseMatrix m(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      double s = a == b ? inv_alpha : 0.0;
      for (std::size_t i = 0; i < j.rows(); ++i)
        s += w[i] * j(i, a) * j(i, b);
      m(a, b) = s;
    }
  return m;
}

} // namespace oracle
