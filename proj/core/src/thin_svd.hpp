#pragma once

#include <Eigen/Core>

namespace dfield::detail {

struct ThinSvd {
  Eigen::VectorXd s;
  Eigen::MatrixXd u;
  Eigen::MatrixXd v;
};

// Divide-and-conquer SVD, checked by reconstruction and orthogonality. Eigen 3.4.0's BDCSVD
// can return a wrong left basis for rank-deficient input; such results fall back to JacobiSVD.
ThinSvd thin_svd(const Eigen::MatrixXd& m);

}  // namespace dfield::detail
