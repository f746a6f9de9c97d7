#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace bogovskii {

/// Fixed-size point / vector in R^N.
template <int N>
struct Vec {
  static_assert(N == 2 || N == 3, "only n = 2 and n = 3 are supported");
  std::array<double, N> v{};

  constexpr double& operator[](std::size_t i) { return v[i]; }
  constexpr double operator[](std::size_t i) const { return v[i]; }

  static constexpr Vec zero() { return Vec{}; }
  static constexpr Vec unit(int k) {
    Vec e{};
    e.v[k] = 1.0;
    return e;
  }

  constexpr Vec& operator+=(const Vec& o) {
    for (int i = 0; i < N; ++i) v[i] += o.v[i];
    return *this;
  }
  constexpr Vec& operator-=(const Vec& o) {
    for (int i = 0; i < N; ++i) v[i] -= o.v[i];
    return *this;
  }
  constexpr Vec& operator*=(double s) {
    for (auto& c : v) c *= s;
    return *this;
  }
  friend constexpr Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend constexpr Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend constexpr Vec operator-(Vec a) { return a *= -1.0; }
  friend constexpr Vec operator*(Vec a, double s) { return a *= s; }
  friend constexpr Vec operator*(double s, Vec a) { return a *= s; }
  friend constexpr Vec operator/(Vec a, double s) { return a *= (1.0 / s); }
  friend constexpr bool operator==(const Vec& a, const Vec& b) = default;
};

template <int N>
constexpr double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <int N>
constexpr double norm2(const Vec<N>& a) {
  return dot(a, a);
}

template <int N>
inline double norm(const Vec<N>& a) {
  return std::sqrt(norm2(a));
}

/// Dense N x N matrix, row-major: m(i, j).
template <int N>
struct Mat {
  std::array<double, N * N> a{};

  constexpr double& operator()(int i, int j) { return a[i * N + j]; }
  constexpr double operator()(int i, int j) const { return a[i * N + j]; }

  static constexpr Mat zero() { return Mat{}; }
  static constexpr Mat identity() {
    Mat m{};
    for (int i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }

  constexpr Mat& operator+=(const Mat& o) {
    for (int k = 0; k < N * N; ++k) a[k] += o.a[k];
    return *this;
  }
  constexpr Mat& operator-=(const Mat& o) {
    for (int k = 0; k < N * N; ++k) a[k] -= o.a[k];
    return *this;
  }
  constexpr Mat& operator*=(double s) {
    for (auto& c : a) c *= s;
    return *this;
  }
  friend constexpr Mat operator+(Mat x, const Mat& y) { return x += y; }
  friend constexpr Mat operator-(Mat x, const Mat& y) { return x -= y; }
  friend constexpr Mat operator*(Mat x, double s) { return x *= s; }
  friend constexpr Mat operator*(double s, Mat x) { return x *= s; }
  friend constexpr bool operator==(const Mat& x, const Mat& y) = default;

  constexpr double trace() const {
    double t = 0.0;
    for (int i = 0; i < N; ++i) t += (*this)(i, i);
    return t;
  }
  constexpr Mat transpose() const {
    Mat t{};
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) t(i, j) = (*this)(j, i);
    return t;
  }
};

template <int N>
inline double frobenius(const Mat<N>& m) {
  double s = 0.0;
  for (double c : m.a) s += c * c;
  return std::sqrt(s);
}

// Uniform magnitude/zero helpers so field code can be written once for
// scalar, vector and matrix values.
inline double magnitude(double x) { return std::abs(x); }
template <int N>
inline double magnitude(const Vec<N>& x) {
  return norm(x);
}
template <int N>
inline double magnitude(const Mat<N>& x) {
  return frobenius(x);
}

template <class T>
struct ValueTraits;

template <>
struct ValueTraits<double> {
  static constexpr int components = 1;
  static double zero() { return 0.0; }
  static double& at(double& x, int) { return x; }
  static double at(const double& x, int) { return x; }
};

template <int N>
struct ValueTraits<Vec<N>> {
  static constexpr int components = N;
  static Vec<N> zero() { return Vec<N>{}; }
  static double& at(Vec<N>& x, int k) { return x[k]; }
  static double at(const Vec<N>& x, int k) { return x[k]; }
};

template <int N>
struct ValueTraits<Mat<N>> {
  static constexpr int components = N * N;
  static Mat<N> zero() { return Mat<N>{}; }
  static double& at(Mat<N>& x, int k) { return x.a[k]; }
  static double at(const Mat<N>& x, int k) { return x.a[k]; }
};

}  // namespace bogovskii
