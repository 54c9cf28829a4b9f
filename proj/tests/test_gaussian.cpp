#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "dfield/potential.hpp"
#include "dfield/subspace.hpp"
#include "test_util.hpp"

namespace dfield {
namespace {

using testing::killed_path3;
using testing::recurrent_path3;
using testing::unit;

Eigen::MatrixXd cols(std::initializer_list<Eigen::VectorXd> vs) {
  Eigen::MatrixXd m(vs.begin()->size(), static_cast<Eigen::Index>(vs.size()));
  Eigen::Index c = 0;
  for (const auto& v : vs) m.col(c++) = v;
  return m;
}

bool same_subspace(const FunctionalSubspace& a, const FunctionalSubspace& b, double tol = 1e-10) {
  return a.dim() == b.dim() && containment_residual(a, b) <= tol && containment_residual(b, a) <= tol;
}

TEST(Realize, KilledPathCovariance) {
  const GaussianField field = realize(killed_path3(), 42);
  const Eigen::VectorXd x0 = field.functional(unit(3, 0));
  EXPECT_NEAR(field.covariance(x0, x0), 2.0, 1e-14);
}

TEST(Realize, IdentityFormGivesStandardNormalCoordinates) {
  const DirichletForm id = form_from_components(Space::uniform(3, {}), {}, Eigen::VectorXd::Ones(3));
  const GaussianField field(id, 1);
  EXPECT_EQ(field.functional(unit(3, 1)), unit(3, 1));
  EXPECT_TRUE(field.covariance(Eigen::MatrixXd(Eigen::MatrixXd::Identity(3, 3)), Eigen::MatrixXd(Eigen::MatrixXd::Identity(3, 3)))
                  .isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-15));
}

TEST(Realize, RecurrentConstantHasZeroVariance) {
  const GaussianField field(recurrent_path3(), 1);
  const Eigen::VectorXd one = field.functional(Eigen::VectorXd::Ones(3));
  EXPECT_TRUE(one.isZero());
  EXPECT_EQ(field.covariance(one, one), 0.0);
  const Eigen::MatrixXd h = field.sample_batch(50, 3);
  EXPECT_LE((h * one).cwiseAbs().maxCoeff(), 1e-12);
  // mean-zero gauge
  EXPECT_LE(h.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Realize, NonRangeFunctionalRejected) {
  const GaussianField field(recurrent_path3(), 1);
  EXPECT_THROW(field.covariance(unit(3, 0), unit(3, 0)), InputError);
}

TEST(SigmaField, Examples) {
  const GaussianField killed(killed_path3(), 1);
  EXPECT_TRUE(same_subspace(sigma_field(killed, {1}), FunctionalSubspace(killed, unit(3, 1))));
  EXPECT_EQ(sigma_field(killed, {}).dim(), 0);
  const GaussianField rec(recurrent_path3(), 1);
  EXPECT_EQ(sigma_field(rec, {1}).dim(), 0);
  EXPECT_EQ(sigma_field(rec, {0, 1}).dim(), 1);
  EXPECT_EQ(sigma_field(rec, VertexSet::all(3)).dim(), 2);
}

TEST(JoinMeet, Examples) {
  const GaussianField field(killed_path3(), 1);
  const FunctionalSubspace w(field, cols({unit(3, 0), unit(3, 2)}));
  EXPECT_TRUE(same_subspace(join(w, FunctionalSubspace::zero(field)), w));
  EXPECT_TRUE(same_subspace(join(FunctionalSubspace(field, unit(3, 0)), FunctionalSubspace(field, unit(3, 1))),
                            FunctionalSubspace(field, cols({unit(3, 0), unit(3, 1)}))));
  const Eigen::VectorXd e01 = unit(3, 0) + unit(3, 1);
  const FunctionalSubspace m =
      meet(FunctionalSubspace(field, cols({e01, unit(3, 2)})), FunctionalSubspace(field, cols({e01, unit(3, 0)})));
  EXPECT_TRUE(same_subspace(m, FunctionalSubspace(field, e01)));
}

TEST(JoinMeet, LatticeLaws) {
  const GaussianField field(grid_form(3, 3, {{0, 1.0}}), 1);
  std::mt19937_64 rng(4);
  auto rand_sub = [&](int d) {
    Eigen::MatrixXd m(9, d);
    for (int c = 0; c < d; ++c) m.col(c) = testing::random_vector(9, rng);
    return FunctionalSubspace(field, m);
  };
  for (int t = 0; t < 20; ++t) {
    const auto a = rand_sub(3), b = rand_sub(4), c = rand_sub(2);
    EXPECT_TRUE(same_subspace(join(a, a), a));
    EXPECT_TRUE(same_subspace(meet(a, a), a, 1e-8));
    EXPECT_TRUE(same_subspace(join(a, b), join(b, a)));
    EXPECT_TRUE(same_subspace(meet(a, b), meet(b, a), 1e-8));
    EXPECT_TRUE(same_subspace(join(join(a, b), c), join(a, join(b, c))));
    EXPECT_EQ(meet(join(a, b), join(a, c)).dim() >= a.dim(), true);
  }
}

TEST(JoinMeet, FieldMismatchRejected) {
  const GaussianField f1(killed_path3(), 1), f2(killed_path3(), 1);
  EXPECT_THROW(join(sigma_field(f1, {0}), sigma_field(f2, {1})), InputError);
  EXPECT_THROW(cond_indep(f1, sigma_field(f1, {0}), sigma_field(f2, {1}), FunctionalSubspace::zero(f1)), InputError);
  const GaussianField copy = f1;
  EXPECT_NO_THROW(join(sigma_field(f1, {0}), sigma_field(copy, {1})));
}

TEST(CondExpect, Examples) {
  const GaussianField field(killed_path3(), 1);
  const Eigen::VectorXd f(Eigen::Vector3d(0.5, -1.0, 2.0));
  EXPECT_TRUE(cond_expect(field, f, VertexSet::all(3)).isApprox(field.functional(f), 1e-14));
  EXPECT_LE(cond_expect(field, unit(3, 2), {0}).norm(), 1e-15);
  const Eigen::VectorXd u2 = potential(killed_path3(), unit(3, 2));
  const Eigen::VectorXd u1 = potential(killed_path3(), unit(3, 1));
  EXPECT_TRUE(cond_expect(field, u2, {0, 1}).isApprox(field.functional(u1), 1e-13));
}

TEST(CondIndep, Examples) {
  const GaussianField field(killed_path3(), 1);
  const FunctionalSubspace u = sigma_field(field, {0}), v = sigma_field(field, {2}), w = sigma_field(field, {1});
  const CondIndepResult r = cond_indep(field, u, v, w);
  EXPECT_TRUE(r.holds);
  EXPECT_LE(r.max_violation, 1e-12);
  const CondIndepResult absorbed = cond_indep(field, u, v, sigma_field(field, {0, 1}));
  EXPECT_EQ(absorbed.max_violation, 0.0);

  const GaussianField jump(testing::jump_path3(), 1);
  const CondIndepResult bad =
      cond_indep(jump, sigma_field(jump, {0}), sigma_field(jump, {2}), sigma_field(jump, {1}));
  EXPECT_FALSE(bad.holds);
  EXPECT_GT(bad.max_violation, 0.1);
  EXPECT_EQ(bad.witness_u.size(), 3);
}

TEST(CondIndep, PartialCovarianceByHand) {
  // Cov = Q^-1 = [[1,1,1],[1,2,2],[1,2,3]]: 1 - 1 * (1/2) * 2 = 0.
  const Eigen::Matrix3d c = killed_path3().dense().inverse();
  EXPECT_NEAR(c(0, 2) - c(0, 1) / c(1, 1) * c(1, 2), 0.0, 1e-14);
}

TEST(Sampling, DeterministicAndStreaming) {
  const GaussianField field(grid_form(4, 4, {{0, 1.0}}), 9);
  EXPECT_EQ(field.sample_batch(1, 5), field.sample_batch(1, 5));
  const Eigen::MatrixXd big = field.sample_batch(600, 5);
  EXPECT_EQ(field.sample_batch(300, 5), big.topRows(300));
  EXPECT_NE(field.sample_batch(3, 5), field.sample_batch(3, 6));
  EXPECT_EQ(field.sample_batch(4), field.sample_batch(4, 9));
}

TEST(Sampling, EmpiricalVarianceOfMiddleVertex) {
  const GaussianField field(killed_path3(), 2024);
  const Eigen::Index n = 100000;
  const Eigen::MatrixXd h = field.sample_batch(n, 2024);
  const Eigen::VectorXd x1 = h * field.functional(unit(3, 1));
  const double var = x1.squaredNorm() / static_cast<double>(n);
  EXPECT_NEAR(var, 2.0, 5.0 * 2.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST(GaussianProperties, ExactCovarianceIsEnergy) {
  std::mt19937_64 rng(31);
  for (const auto& entry : local_corpus(true, 7)) {
    const GaussianField field(entry.form, 1);
    for (int t = 0; t < 5; ++t) {
      const Eigen::VectorXd f = testing::random_vector(entry.form.size(), rng);
      const Eigen::VectorXd g = testing::random_vector(entry.form.size(), rng);
      const double e = energy(entry.form, f, g);
      const double c = field.covariance(field.functional(f), field.functional(g));
      const double scale = std::sqrt(energy(entry.form, f, f) * energy(entry.form, g, g));
      EXPECT_NEAR(c, e, 1e-12 * std::max(scale, 1e-300)) << entry.name;
    }
  }
}

TEST(GaussianProperties, ConditionalExpectationIsProjection) {
  std::mt19937_64 rng(32);
  for (const auto& entry : local_corpus(false, 8)) {
    const GaussianField field(entry.form, 1);
    for (int t = 0; t < 10; ++t) {
      const VertexSet a = testing::random_proper_set(entry.form.size(), rng);
      const Eigen::VectorXd f = testing::random_vector(entry.form.size(), rng);
      const Eigen::VectorXd qf = field.functional(f);
      const Eigen::VectorXd proj = project(field, sigma_field(field, a), qf);
      EXPECT_LE((cond_expect(field, f, a) - proj).norm(), 1e-10 * qf.norm()) << entry.name;
    }
  }
}

TEST(GaussianProperties, SigmaFieldMonotoneAndScaling) {
  std::mt19937_64 rng(33);
  for (const auto& entry : local_corpus(false, 9)) {
    const GaussianField field(entry.form, 1);
    const Vertex n = entry.form.size();
    for (int t = 0; t < 10; ++t) {
      const VertexSet a = testing::random_set(n, rng);
      const VertexSet b = a.unite(testing::random_set(n, rng));
      EXPECT_TRUE(contains(sigma_field(field, b), sigma_field(field, a))) << entry.name;
      const Eigen::VectorXd f = testing::random_vector(n, rng);
      EXPECT_TRUE(field.functional(-2.5 * f).isApprox(-2.5 * field.functional(f), 1e-14));
    }
  }
}

TEST(GaussianProperties, SeparatorImpliesIndependence) {
  std::mt19937_64 rng(34);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const DirichletForm form = random_local_form(12, 6, 100 + s, true);
    const GaussianField field(form, 1);
    for (int t = 0; t < 5; ++t) {
      const VertexSet a = testing::random_proper_set(12, rng);
      const VertexSet sep = boundary(form.space(), a);
      const VertexSet inside = a.minus(sep), outside = a.complement(12);
      auto coords = [&](const VertexSet& set) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(12, static_cast<Eigen::Index>(set.size()));
        Eigen::Index c = 0;
        for (Vertex x : set) m(x, c++) = 1.0;
        return FunctionalSubspace(field, m);
      };
      const CondIndepResult r = cond_indep(field, coords(inside), coords(outside), coords(sep));
      EXPECT_TRUE(r.holds) << "violation " << r.max_violation;
    }
  }
}

}  // namespace
}  // namespace dfield
