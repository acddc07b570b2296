#pragma once

#include <Eigen/Dense>

namespace dackrr {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace dackrr
