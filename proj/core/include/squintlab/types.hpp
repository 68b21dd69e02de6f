#pragma once

#include <complex>

#include <Eigen/Core>

namespace squintlab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s, exact

}  // namespace squintlab
