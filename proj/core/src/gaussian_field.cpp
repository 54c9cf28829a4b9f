#include "dfield/gaussian_field.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <string>

#include "dfield/factor.hpp"

namespace dfield {

namespace {

std::uint64_t next_field_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GaussianField::GaussianField(DirichletForm form, std::uint64_t seed)
    : form_(std::move(form)), seed_(seed), id_(next_field_id()) {
  (void)form_.grounded_factor();
}

GaussianField realize(const DirichletForm& form, std::uint64_t seed) { return GaussianField(form, seed); }

Eigen::Index GaussianField::noise_dim() const { return form_.grounded_factor().rank(); }

Eigen::VectorXd GaussianField::functional(const Eigen::VectorXd& f) const {
  if (f.size() != size()) throw InputError("test function has wrong length");
  return form_.matrix() * f;
}

Eigen::MatrixXd GaussianField::whiten(const Eigen::MatrixXd& v) const {
  if (v.rows() != size()) throw InputError("functional has wrong length");
  if (!form_.nonsingular()) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      const double scale = v.col(c).lpNorm<1>();
      if (form_.range_defect(v.col(c)) > 1e-10 * std::max(scale, 1e-300)) {
        throw InputError("functional is not in range(Q): it sums to a nonzero value on a recurrent component");
      }
    }
  }
  return form_.grounded_factor().whiten(v);
}

double GaussianField::covariance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return covariance(Eigen::MatrixXd(u), Eigen::MatrixXd(v))(0, 0);
}

Eigen::MatrixXd GaussianField::covariance(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) const {
  return whiten(u).transpose() * whiten(v);
}

Eigen::MatrixXd GaussianField::color(const Eigen::MatrixXd& z) const {
  if (z.rows() != noise_dim()) throw InputError("white noise has wrong dimension");
  Eigen::MatrixXd h = form_.grounded_factor().color(z);
  if (!form_.nonsingular()) {
    for (Eigen::Index c = 0; c < h.cols(); ++c) form_.project_to_range(h.col(c));
  }
  return h;
}

Eigen::MatrixXd GaussianField::white_noise(Eigen::Index n_samples, std::uint64_t seed) const {
  if (n_samples < 1) throw InputError("sample count must be at least 1");
  const Eigen::Index d = noise_dim();
  Eigen::MatrixXd z(n_samples, d);
  for (Eigen::Index start = 0, block = 0; start < n_samples; start += kSampleBlock, ++block) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(block)));
    std::normal_distribution<double> normal;
    const Eigen::Index rows = std::min(kSampleBlock, n_samples - start);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) z(start + r, c) = normal(rng);
    }
  }
  return z;
}

Eigen::MatrixXd GaussianField::sample_batch(Eigen::Index n_samples, std::uint64_t seed) const {
  const Eigen::MatrixXd z = white_noise(n_samples, seed);
  return color(z.transpose()).transpose();
}

}  // namespace dfield
