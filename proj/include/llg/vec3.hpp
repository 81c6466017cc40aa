#pragma once

#include <array>
#include <cmath>

namespace llg {

using Vec3 = std::array<double, 3>;

/// Row b of the Jacobian holds the partial derivatives with respect to x_b:
/// jac[a][b] = d f_a / d x_b.
using Mat3 = std::array<Vec3, 3>;

inline constexpr Vec3 kUnitX{1.0, 0.0, 0.0};
inline constexpr Vec3 kUnitY{0.0, 1.0, 0.0};
inline constexpr Vec3 kUnitZ{0.0, 0.0, 1.0};

[[nodiscard]] constexpr double dot(const Vec3& a, const Vec3& b) noexcept {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

[[nodiscard]] constexpr Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

[[nodiscard]] inline double norm(const Vec3& a) noexcept { return std::sqrt(dot(a, a)); }

[[nodiscard]] constexpr Vec3 operator+(const Vec3& a, const Vec3& b) noexcept {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

[[nodiscard]] constexpr Vec3 operator-(const Vec3& a, const Vec3& b) noexcept {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

[[nodiscard]] constexpr Vec3 operator*(double s, const Vec3& a) noexcept {
    return {s * a[0], s * a[1], s * a[2]};
}

constexpr Vec3& operator+=(Vec3& a, const Vec3& b) noexcept {
    a[0] += b[0];
    a[1] += b[1];
    a[2] += b[2];
    return a;
}

}  // namespace llg
