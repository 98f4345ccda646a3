#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace textcat {

// Dense row-major matrix of doubles. Rows are contiguous so the hot loops
// can work on raw pointers.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double* row(int i) { return a.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * cols; }

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  void zero() { std::fill(a.begin(), a.end(), 0.0); }

  bool operator==(const Matrix& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

inline double dot(const double* x, const double* y, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

// y += alpha * x
inline void axpy(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline double norm2(const double* x, int n) { return std::sqrt(dot(x, x, n)); }

// Cosine similarity; zero-norm inputs yield 0.
inline double cosine(const double* x, const double* y, int n) {
  double nx = norm2(x, n);
  double ny = norm2(y, n);
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return dot(x, y, n) / (nx * ny);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace textcat
