#pragma once

#include <cstdint>
#include <memory>

#include <Eigen/Core>

#include "dfield/dirichlet_form.hpp"

namespace dfield {

/// Centered Gaussian vector h with covariance Q+ (mean-zero gauge on unkilled components).
/// The field variable X_f is (Qf).h, so Cov(X_f, X_g) = E(f, g). A functional v in
/// range(Q) stands for the variable v.h.
class GaussianField {
 public:
  GaussianField(DirichletForm form, std::uint64_t seed);

  const DirichletForm& form() const { return form_; }
  Vertex size() const { return form_.size(); }
  std::uint64_t seed() const { return seed_; }
  /// Identity shared by copies; subspaces remember the field they belong to.
  std::uint64_t id() const { return id_; }
  /// Dimension of the white-noise coordinates.
  Eigen::Index noise_dim() const;

  /// Functional of X_f, i.e. Qf.
  Eigen::VectorXd functional(const Eigen::VectorXd& f) const;
  /// Cov(u.h, v.h) = u^T Q+ v for functionals in range(Q).
  double covariance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  /// Gram matrix U^T Q+ V.
  Eigen::MatrixXd covariance(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) const;

  /// White-noise coordinates of functionals: columns w with w.z = v.h when h = color(z).
  /// Throws InputError for a column outside range(Q).
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& v) const;
  /// Field samples (columns) from white-noise columns.
  Eigen::MatrixXd color(const Eigen::MatrixXd& z) const;

  /// Standard normal noise, N rows of length noise_dim(). Rows are generated in blocks of
  /// 256, each block seeded from (seed, block index), so row i never depends on N.
  Eigen::MatrixXd white_noise(Eigen::Index n_samples, std::uint64_t seed) const;
  /// N field samples, one per row (row = sample, column = vertex).
  Eigen::MatrixXd sample_batch(Eigen::Index n_samples, std::uint64_t seed) const;
  Eigen::MatrixXd sample_batch(Eigen::Index n_samples) const { return sample_batch(n_samples, seed_); }

 private:
  DirichletForm form_;
  std::uint64_t seed_;
  std::uint64_t id_;
};

GaussianField realize(const DirichletForm& form, std::uint64_t seed);

/// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

inline constexpr Eigen::Index kSampleBlock = 256;

}  // namespace dfield
