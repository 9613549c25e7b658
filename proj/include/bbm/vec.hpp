#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace bbm {

// Points in R^d, d <= 3. Unused trailing components stay zero.
using Vec = std::array<double, 3>;

inline constexpr int kMaxDim = 3;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }

}  // namespace bbm
