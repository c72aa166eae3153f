#pragma once

#include <Eigen/Dense>

namespace srl {

// Row-major dense matrix; rows of W are neurons, rows of a data matrix are
// examples.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using ColMatrix = Eigen::MatrixXd;

}  // namespace srl
