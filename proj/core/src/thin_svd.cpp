#include "thin_svd.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/SVD>

namespace dfield::detail {

namespace {

template <class Svd>
ThinSvd unpack(const Svd& svd) {
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

bool consistent(const Eigen::MatrixXd& m, const ThinSvd& r) {
  const double scale = std::max(m.norm(), std::numeric_limits<double>::min());
  const Eigen::Index k = r.s.size();
  const double rec = (m - r.u * r.s.asDiagonal() * r.v.transpose()).norm();
  const double ou = (r.u.transpose() * r.u - Eigen::MatrixXd::Identity(k, k)).norm();
  const double ov = (r.v.transpose() * r.v - Eigen::MatrixXd::Identity(k, k)).norm();
  return rec <= 1e-11 * scale && ou <= 1e-10 && ov <= 1e-10;
}

}  // namespace

ThinSvd thin_svd(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    return {Eigen::VectorXd(0), Eigen::MatrixXd(m.rows(), 0), Eigen::MatrixXd(m.cols(), 0)};
  }
  ThinSvd fast = unpack(Eigen::BDCSVD<Eigen::MatrixXd>(m, Eigen::ComputeThinU | Eigen::ComputeThinV));
  if (consistent(m, fast)) return fast;
  return unpack(Eigen::JacobiSVD<Eigen::MatrixXd>(m, Eigen::ComputeThinU | Eigen::ComputeThinV));
}

}  // namespace dfield::detail
