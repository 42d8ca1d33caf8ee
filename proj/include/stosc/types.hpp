#pragma once

#include <Eigen/Dense>

namespace stosc {

// Row-major dense storage is used throughout; matrices here are small (d <= 16).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

}  // namespace stosc
