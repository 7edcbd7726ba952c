#pragma once

#include <Eigen/Dense>

namespace rnn_surgery {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline Vector relu(const Vector& v) { return v.cwiseMax(0.0); }

inline Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

}  // namespace rnn_surgery
