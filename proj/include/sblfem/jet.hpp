#pragma once

#include <array>
#include <cmath>

namespace sblfem {

/// Truncated Taylor expansion of order 3 about a point t0:
///   f(t0 + h) = c[0] + c[1] h + c[2] h^2 + c[3] h^3 + O(h^4).
/// Used to get exact parametric derivatives of analytic boundary curves.
struct Jet {
  static constexpr int kOrder = 3;
  std::array<double, kOrder + 1> c{};

  static Jet variable(double t0) { return Jet{{t0, 1.0, 0.0, 0.0}}; }
  static Jet constant(double v) { return Jet{{v, 0.0, 0.0, 0.0}}; }

  double value() const { return c[0]; }

  /// k-th derivative at t0.
  double derivative(int k) const {
    static constexpr std::array<double, kOrder + 1> factorial{1.0, 1.0, 2.0, 6.0};
    return factorial[k] * c[k];
  }
};

inline Jet operator-(const Jet& a) {
  Jet r;
  for (int k = 0; k <= Jet::kOrder; ++k) r.c[k] = -a.c[k];
  return r;
}

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k <= Jet::kOrder; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

inline Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k <= Jet::kOrder; ++k)
    for (int i = 0; i <= k; ++i) r.c[k] += a.c[i] * b.c[k - i];
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  Jet q;
  for (int k = 0; k <= Jet::kOrder; ++k) {
    double s = a.c[k];
    for (int i = 1; i <= k; ++i) s -= b.c[i] * q.c[k - i];
    q.c[k] = s / b.c[0];
  }
  return q;
}

inline Jet operator+(const Jet& a, double s) { Jet r = a; r.c[0] += s; return r; }
inline Jet operator+(double s, const Jet& a) { return a + s; }
inline Jet operator-(const Jet& a, double s) { return a + (-s); }
inline Jet operator-(double s, const Jet& a) { return (-a) + s; }

inline Jet operator*(const Jet& a, double s) {
  Jet r;
  for (int k = 0; k <= Jet::kOrder; ++k) r.c[k] = a.c[k] * s;
  return r;
}
inline Jet operator*(double s, const Jet& a) { return a * s; }
inline Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }

inline Jet sqrt(const Jet& a) {
  Jet r;
  r.c[0] = std::sqrt(a.c[0]);
  for (int k = 1; k <= Jet::kOrder; ++k) {
    double s = a.c[k];
    for (int i = 1; i < k; ++i) s -= r.c[i] * r.c[k - i];
    r.c[k] = s / (2.0 * r.c[0]);
  }
  return r;
}

namespace detail {
// sin and cos share one recurrence: s' = c a', c' = -s a'.
inline void sincos(const Jet& a, Jet& s, Jet& c) {
  s = Jet{};
  c = Jet{};
  s.c[0] = std::sin(a.c[0]);
  c.c[0] = std::cos(a.c[0]);
  for (int k = 1; k <= Jet::kOrder; ++k) {
    double ss = 0.0, cc = 0.0;
    for (int i = 1; i <= k; ++i) {
      ss += i * a.c[i] * c.c[k - i];
      cc -= i * a.c[i] * s.c[k - i];
    }
    s.c[k] = ss / k;
    c.c[k] = cc / k;
  }
}
}  // namespace detail

inline Jet sin(const Jet& a) {
  Jet s, c;
  detail::sincos(a, s, c);
  return s;
}

inline Jet cos(const Jet& a) {
  Jet s, c;
  detail::sincos(a, s, c);
  return c;
}

}  // namespace sblfem
