// Copyright 2026 The dtf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DTF_TYPES_HPP_
#define DTF_TYPES_HPP_

#include <Eigen/Dense>

namespace dtf
{

/// A trajectory is a (steps x coords) matrix: row t is the position at
/// step t. Futures are T x D, pasts H x D.
using Trajectory = Eigen::MatrixXd;

/// One training/evaluation example: future x given past h.
struct DataExample
{
  Trajectory x;  // future, T x D
  Trajectory h;  // past, H x D
};

/// Row-major (time-major) flattening: element t*D + d is step t, coord d.
inline Eigen::VectorXd flatten(const Trajectory & m)
{
  Eigen::VectorXd v(m.rows() * m.cols());
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    for (Eigen::Index d = 0; d < m.cols(); ++d) {
      v[t * m.cols() + d] = m(t, d);
    }
  }
  return v;
}

inline Trajectory unflatten(const Eigen::VectorXd & v, int rows, int cols)
{
  Trajectory m(rows, cols);
  for (int t = 0; t < rows; ++t) {
    for (int d = 0; d < cols; ++d) {
      m(t, d) = v[t * cols + d];
    }
  }
  return m;
}

}  // namespace dtf

#endif  // DTF_TYPES_HPP_
