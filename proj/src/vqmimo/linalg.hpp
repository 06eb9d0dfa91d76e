#pragma once

#include <Eigen/Dense>
#include <complex>

namespace vqmimo {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;

}  // namespace vqmimo
