#include "dfield/subspace.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "dfield/potential.hpp"
#include "thin_svd.hpp"

namespace dfield {

namespace {

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& m) {
  if (m.cols() == 0 || m.rows() == 0) return Eigen::MatrixXd(m.rows(), 0);
  double largest = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) largest = std::max(largest, m.col(c).norm());
  if (largest == 0.0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), r);
  return q;
}

void require_same_field(std::uint64_t a, std::uint64_t b) {
  if (a != b) throw InputError("subspaces belong to different fields");
}

struct Residual {
  Eigen::MatrixXd directions;    // orthonormal, white-noise coordinates
  Eigen::MatrixXd coefficients;  // basis coefficients producing each direction
};

// Orthonormal directions of span(white) left after removing span(ow), together with the
// basis coefficients that generate them.
Residual residual_directions(const Eigen::MatrixXd& white, const Eigen::MatrixXd& ow) {
  Residual out;
  if (white.cols() == 0 || white.rows() == 0) {
    out.directions.resize(white.rows(), 0);
    out.coefficients.resize(white.cols(), 0);
    return out;
  }
  Eigen::MatrixXd r = white;
  if (ow.cols() > 0) {
    for (int pass = 0; pass < 2; ++pass) r -= ow * (ow.transpose() * r);
  }
  const double scale = detail::thin_svd(white).s(0);
  const detail::ThinSvd svd = detail::thin_svd(r);
  const auto& s = svd.s;
  Eigen::Index keep = 0;
  while (keep < s.size() && s(keep) > 1e-7 * scale) ++keep;
  out.directions = svd.u.leftCols(keep);
  out.coefficients = svd.v.leftCols(keep) * s.head(keep).cwiseInverse().asDiagonal();
  return out;
}

}  // namespace

FunctionalSubspace::FunctionalSubspace(std::uint64_t field_id, Eigen::MatrixXd orthonormal_basis)
    : field_id_(field_id), basis_(std::move(orthonormal_basis)) {}

FunctionalSubspace::FunctionalSubspace(const GaussianField& field, const Eigen::MatrixXd& vectors)
    : field_id_(field.id()) {
  if (vectors.rows() != field.size()) throw InputError("functional has wrong length");
  const DirichletForm& form = field.form();
  if (!form.nonsingular()) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
      const double scale = vectors.col(c).lpNorm<1>();
      if (form.range_defect(vectors.col(c)) > 1e-10 * std::max(scale, 1e-300)) {
        throw InputError("basis vector is not in range(Q)");
      }
    }
  }
  basis_ = orthonormal_columns(vectors);
}

FunctionalSubspace FunctionalSubspace::zero(const GaussianField& field) {
  return FunctionalSubspace(field.id(), Eigen::MatrixXd(field.size(), 0));
}

FunctionalSubspace sigma_field(const GaussianField& field, const VertexSet& a) {
  const DirichletForm& form = field.form();
  const Vertex n = form.size();
  for (Vertex x : a) {
    if (x >= n) throw InputError("vertex " + std::to_string(x) + " outside the space");
  }
  std::vector<std::vector<Vertex>> by_component(static_cast<std::size_t>(form.component_count()));
  for (Vertex x : a) by_component[static_cast<std::size_t>(form.component_of()[static_cast<std::size_t>(x)])].push_back(x);

  std::vector<Eigen::VectorXd> cols;
  for (std::size_t c = 0; c < by_component.size(); ++c) {
    const auto& members = by_component[c];
    if (form.component_killed(static_cast<Vertex>(c))) {
      for (Vertex x : members) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[x] = 1.0;
        cols.push_back(std::move(e));
      }
      continue;
    }
    // Helmert basis of the sum-zero vectors on the members.
    for (std::size_t j = 1; j < members.size(); ++j) {
      Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
      const double jd = static_cast<double>(j);
      const double norm = std::sqrt(jd * (jd + 1.0));
      for (std::size_t i = 0; i < j; ++i) h[members[i]] = 1.0 / norm;
      h[members[j]] = -jd / norm;
      cols.push_back(std::move(h));
    }
  }
  Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = cols[k];
  return FunctionalSubspace(field.id(), std::move(basis));
}

FunctionalSubspace join(const FunctionalSubspace& w1, const FunctionalSubspace& w2) {
  require_same_field(w1.field_id(), w2.field_id());
  Eigen::MatrixXd both(w1.ambient_dim(), w1.dim() + w2.dim());
  both << w1.basis(), w2.basis();
  return FunctionalSubspace::like(w1, orthonormal_columns(both));
}

FunctionalSubspace meet(const FunctionalSubspace& w1, const FunctionalSubspace& w2) {
  require_same_field(w1.field_id(), w2.field_id());
  if (w1.dim() == 0 || w2.dim() == 0) return FunctionalSubspace::like(w1, Eigen::MatrixXd(w1.ambient_dim(), 0));
  const detail::ThinSvd svd = detail::thin_svd(w1.basis().transpose() * w2.basis());
  const auto& s = svd.s;
  Eigen::Index keep = 0;
  while (keep < s.size() && s(keep) >= 1.0 - 1e-10) ++keep;
  return FunctionalSubspace::like(w1, orthonormal_columns(w1.basis() * svd.u.leftCols(keep)));
}

double containment_residual(const FunctionalSubspace& inner, const FunctionalSubspace& outer) {
  require_same_field(inner.field_id(), outer.field_id());
  if (inner.dim() == 0) return 0.0;
  Eigen::MatrixXd r = inner.basis() - outer.basis() * (outer.basis().transpose() * inner.basis());
  return detail::thin_svd(r).s(0);
}

bool contains(const FunctionalSubspace& outer, const FunctionalSubspace& inner, double tol) {
  return containment_residual(inner, outer) <= tol;
}

Eigen::VectorXd project(const GaussianField& field, const FunctionalSubspace& w, const Eigen::VectorXd& v) {
  if (w.field_id() != field.id()) throw InputError("subspace belongs to a different field");
  if (w.dim() == 0) return Eigen::VectorXd::Zero(field.size());
  const Eigen::MatrixXd wb = field.whiten(w.basis());
  const Eigen::MatrixXd wv = field.whiten(Eigen::MatrixXd(v));
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(wb);
  const Eigen::VectorXd c = cod.solve(wv);
  return w.basis() * c;
}

Eigen::VectorXd cond_expect(const GaussianField& field, const Eigen::VectorXd& f, const VertexSet& a) {
  return field.functional(hitting(field.form(), a, f));
}

CondIndepResult cond_indep(const GaussianField& field, const FunctionalSubspace& u, const FunctionalSubspace& v,
                           const FunctionalSubspace& w, double tol) {
  require_same_field(u.field_id(), field.id());
  require_same_field(v.field_id(), field.id());
  require_same_field(w.field_id(), field.id());
  CondIndepResult out;
  out.tol = tol;

  Eigen::MatrixXd ow(field.noise_dim(), 0);
  if (w.dim() > 0 && field.noise_dim() > 0) {
    const Eigen::MatrixXd ww = field.whiten(w.basis());
    const detail::ThinSvd svd = detail::thin_svd(ww);
    const auto& s = svd.s;
    Eigen::Index keep = 0;
    while (keep < s.size() && s(keep) > 1e-6 * s(0)) ++keep;
    ow = svd.u.leftCols(keep);
  }
  if (u.dim() == 0 || v.dim() == 0 || field.noise_dim() == 0) return out;

  const Residual ru = residual_directions(field.whiten(u.basis()), ow);
  const Residual rv = residual_directions(field.whiten(v.basis()), ow);
  if (ru.directions.cols() == 0 || rv.directions.cols() == 0) return out;

  const detail::ThinSvd cross = detail::thin_svd(ru.directions.transpose() * rv.directions);
  out.max_violation = std::min(1.0, cross.s(0));
  out.holds = out.max_violation <= tol;
  Eigen::VectorXd wu = u.basis() * (ru.coefficients * cross.u.col(0));
  Eigen::VectorXd wv = v.basis() * (rv.coefficients * cross.v.col(0));
  if (wu.norm() > 0) wu /= wu.norm();
  if (wv.norm() > 0) wv /= wv.norm();
  out.witness_u = std::move(wu);
  out.witness_v = std::move(wv);
  return out;
}

}  // namespace dfield
