#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace conley {

/// Largest ambient dimension supported by the fixed-capacity jets.
inline constexpr int kMaxDim = 6;

/// First-order jet: value and gradient.
struct Jet1 {
  int dim = 0;
  double value = 0.0;
  std::array<double, kMaxDim> grad{};

  static Jet1 constant(int n, double v) {
    Jet1 j;
    j.dim = n;
    j.value = v;
    return j;
  }
  static Jet1 variable(int n, int index, double v) {
    Jet1 j = constant(n, v);
    j.grad[index] = 1.0;
    return j;
  }
};

/// Second-order jet: value, gradient and Hessian.
///
/// Every operation writes the upper triangle and mirrors it, so the Hessian
/// is exactly symmetric without a symmetrization pass.
struct Jet2 {
  int dim = 0;
  double value = 0.0;
  std::array<double, kMaxDim> grad{};
  std::array<std::array<double, kMaxDim>, kMaxDim> hess{};

  static Jet2 constant(int n, double v) {
    Jet2 j;
    j.dim = n;
    j.value = v;
    return j;
  }
  static Jet2 variable(int n, int index, double v) {
    Jet2 j = constant(n, v);
    j.grad[index] = 1.0;
    return j;
  }

  std::span<const double> gradient() const { return {grad.data(), static_cast<std::size_t>(dim)}; }
  double hessian(int i, int j) const { return hess[i][j]; }
};

// ---- Jet1 arithmetic -------------------------------------------------------

inline Jet1 operator+(const Jet1& a, const Jet1& b) {
  Jet1 r = a;
  r.value += b.value;
  for (int i = 0; i < a.dim; ++i) r.grad[i] += b.grad[i];
  return r;
}
inline Jet1 operator-(const Jet1& a, const Jet1& b) {
  Jet1 r = a;
  r.value -= b.value;
  for (int i = 0; i < a.dim; ++i) r.grad[i] -= b.grad[i];
  return r;
}
inline Jet1 operator-(const Jet1& a) {
  Jet1 r = a;
  r.value = -a.value;
  for (int i = 0; i < a.dim; ++i) r.grad[i] = -a.grad[i];
  return r;
}
inline Jet1 operator*(const Jet1& a, const Jet1& b) {
  Jet1 r;
  r.dim = a.dim;
  r.value = a.value * b.value;
  for (int i = 0; i < a.dim; ++i) r.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
  return r;
}
inline Jet1 operator*(double s, const Jet1& a) {
  Jet1 r = a;
  r.value *= s;
  for (int i = 0; i < a.dim; ++i) r.grad[i] *= s;
  return r;
}

/// Applies a scalar function with derivative d1 at a.value.
inline Jet1 chain(const Jet1& a, double v, double d1) {
  Jet1 r;
  r.dim = a.dim;
  r.value = v;
  for (int i = 0; i < a.dim; ++i) r.grad[i] = d1 * a.grad[i];
  return r;
}

// ---- Jet2 arithmetic -------------------------------------------------------

inline void mirror(Jet2& r) {
  for (int i = 0; i < r.dim; ++i)
    for (int j = i + 1; j < r.dim; ++j) r.hess[j][i] = r.hess[i][j];
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.dim = a.dim;
  r.value = a.value + b.value;
  for (int i = 0; i < a.dim; ++i) {
    r.grad[i] = a.grad[i] + b.grad[i];
    for (int j = i; j < a.dim; ++j) r.hess[i][j] = a.hess[i][j] + b.hess[i][j];
  }
  mirror(r);
  return r;
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.dim = a.dim;
  r.value = a.value - b.value;
  for (int i = 0; i < a.dim; ++i) {
    r.grad[i] = a.grad[i] - b.grad[i];
    for (int j = i; j < a.dim; ++j) r.hess[i][j] = a.hess[i][j] - b.hess[i][j];
  }
  mirror(r);
  return r;
}
inline Jet2 operator-(const Jet2& a) {
  Jet2 r;
  r.dim = a.dim;
  r.value = -a.value;
  for (int i = 0; i < a.dim; ++i) {
    r.grad[i] = -a.grad[i];
    for (int j = i; j < a.dim; ++j) r.hess[i][j] = -a.hess[i][j];
  }
  mirror(r);
  return r;
}
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.dim = a.dim;
  r.value = a.value * b.value;
  for (int i = 0; i < a.dim; ++i) {
    r.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
    for (int j = i; j < a.dim; ++j)
      r.hess[i][j] = a.value * b.hess[i][j] + b.value * a.hess[i][j] +
                     (a.grad[i] * b.grad[j] + b.grad[i] * a.grad[j]);
  }
  mirror(r);
  return r;
}
inline Jet2 operator*(double s, const Jet2& a) {
  Jet2 r;
  r.dim = a.dim;
  r.value = s * a.value;
  for (int i = 0; i < a.dim; ++i) {
    r.grad[i] = s * a.grad[i];
    for (int j = i; j < a.dim; ++j) r.hess[i][j] = s * a.hess[i][j];
  }
  mirror(r);
  return r;
}

/// Applies a scalar function with first and second derivatives d1, d2.
inline Jet2 chain(const Jet2& a, double v, double d1, double d2) {
  Jet2 r;
  r.dim = a.dim;
  r.value = v;
  for (int i = 0; i < a.dim; ++i) {
    r.grad[i] = d1 * a.grad[i];
    for (int j = i; j < a.dim; ++j) r.hess[i][j] = d1 * a.hess[i][j] + d2 * (a.grad[i] * a.grad[j]);
  }
  mirror(r);
  return r;
}

inline double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Spectral norm of the (symmetric) Hessian block of a jet.
double hessian_norm(const Jet2& j);

}  // namespace conley
