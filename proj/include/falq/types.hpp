#pragma once

#include <complex>

#include <Eigen/Dense>

namespace falq {

using Index = Eigen::Index;
using Complex = std::complex<double>;

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

}  // namespace falq
