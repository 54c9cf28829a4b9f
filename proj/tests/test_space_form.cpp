#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "dfield/form_io.hpp"
#include "dfield/potential.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>

namespace dfield {
namespace {

using testing::killed_path3;
using testing::recurrent_path3;

const Space& path3_space() {
  static const Space s = Space::uniform(3, {{0, 1}, {1, 2}});
  return s;
}

TEST(VertexSet, SortsAndDeduplicates) {
  const VertexSet s(std::vector<Vertex>{3, 1, 3, 0});
  EXPECT_EQ(s.members(), (std::vector<Vertex>{0, 1, 3}));
  EXPECT_EQ(s.to_string(), "0,1,3");
  EXPECT_EQ(s.complement(5), (VertexSet{2, 4}));
  EXPECT_EQ(s.unite({2}), (VertexSet{0, 1, 2, 3}));
  EXPECT_EQ(s.intersect({1, 2, 3}), (VertexSet{1, 3}));
  EXPECT_EQ(s.minus({1}), (VertexSet{0, 3}));
  EXPECT_TRUE((VertexSet{1, 3}).is_subset_of(s));
  EXPECT_FALSE((VertexSet{2}).is_subset_of(s));
}

TEST(Topology, BoundaryOfPathPrefix) {
  EXPECT_EQ(boundary(path3_space(), {0, 1}), (VertexSet{1}));
  EXPECT_TRUE(boundary(path3_space(), {}).empty());
  EXPECT_TRUE(boundary(path3_space(), VertexSet::all(3)).empty());
}

TEST(Topology, ThickenedComplementOfPathPrefix) {
  EXPECT_EQ(thickened_complement(path3_space(), {0, 1}), (VertexSet{1, 2}));
  EXPECT_TRUE(thickened_complement(path3_space(), VertexSet::all(3)).empty());
  EXPECT_EQ(thickened_complement(path3_space(), {}), VertexSet::all(3));
}

TEST(Topology, SetIdentitiesOnRandomSets) {
  std::mt19937_64 rng(5);
  const DirichletForm g = grid_form(4, 5);
  const Space& space = g.space();
  for (int trial = 0; trial < 200; ++trial) {
    const VertexSet a = testing::random_set(space.size(), rng);
    const VertexSet b = boundary(space, a);
    const VertexSet tc = thickened_complement(space, a);
    EXPECT_TRUE(b.is_subset_of(a));
    EXPECT_EQ(tc.intersect(a), b);
    EXPECT_EQ(tc.unite(a), VertexSet::all(space.size()));
    EXPECT_EQ(interior(space, a), a.minus(b));
  }
}

TEST(FormFromComponents, KilledPathAssembly) {
  Eigen::Matrix3d expected;
  expected << 2, -1, 0, -1, 2, -1, 0, -1, 1;
  EXPECT_EQ(killed_path3().dense(), Eigen::MatrixXd(expected));
}

TEST(FormFromComponents, SingleVertexAndZeroForm) {
  const DirichletForm one = form_from_components(Space::uniform(1, {}), {}, Eigen::VectorXd::Ones(1));
  EXPECT_EQ(one.dense()(0, 0), 1.0);
  const DirichletForm zero = form_from_components(Space::uniform(2, {{0, 1}}), {}, Eigen::VectorXd::Zero(2));
  EXPECT_TRUE(zero.dense().isZero());
  EXPECT_EQ(classify(zero).recurrence, Recurrence::Recurrent);
}

TEST(FormFromComponents, RejectsNegativeWeights) {
  EXPECT_THROW(form_from_components(path3_space(), {{0, 1, -1.0}}, Eigen::VectorXd::Zero(3)), InputError);
  Eigen::VectorXd k = Eigen::VectorXd::Zero(3);
  k[2] = -0.5;
  EXPECT_THROW(form_from_components(path3_space(), {{0, 1, 1.0}}, k), InputError);
}

TEST(ValidateMarkovian, AcceptsKilledPathAndIdentity) {
  const DirichletForm f = validate_markovian(path3_space(), killed_path3().dense());
  EXPECT_EQ(f.dense(), killed_path3().dense());
  EXPECT_EQ(f.killing(), Eigen::Vector3d(1, 0, 0));
  const DirichletForm id = validate_markovian(path3_space(), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(id.edges().empty());
}

TEST(ValidateMarkovian, RejectsPositiveOffDiagonalWithWitness) {
  Eigen::Matrix2d q;
  q << 1, 1, 1, 1;
  try {
    validate_markovian(Space::uniform(2, {{0, 1}}), q);
    FAIL() << "accepted a non-Markovian matrix";
  } catch (const NonMarkovianError& e) {
    const Eigen::VectorXd f = e.witness();
    ASSERT_EQ(f.size(), 2);
    const Eigen::VectorXd c = unit_contraction(f);
    EXPECT_GT(c.dot(q * c), f.dot(q * f));
  }
}

TEST(ValidateMarkovian, HandWitnessForOnesMatrix) {
  Eigen::Matrix2d q;
  q << 1, 1, 1, 1;
  const Eigen::Vector2d f(1, -1);
  const Eigen::VectorXd c = unit_contraction(f);
  EXPECT_EQ(c, Eigen::Vector2d(1, 0));
  EXPECT_EQ(f.dot(q * f), 0.0);
  EXPECT_EQ(c.dot(q * c), 1.0);
}

TEST(ValidateMarkovian, RejectsAsymmetricAndNegativeRowSum) {
  Eigen::Matrix2d asym;
  asym << 1, -1, -0.5, 1;
  EXPECT_THROW(validate_markovian(Space::uniform(2, {{0, 1}}), asym), InputError);
  Eigen::Matrix2d neg;
  neg << 1, -2, -2, 1;
  EXPECT_THROW(validate_markovian(Space::uniform(2, {{0, 1}}), neg), NonMarkovianError);
}

TEST(Locality, PathJumpAndDiagonal) {
  EXPECT_TRUE(is_local_wrt(killed_path3()));
  const DirichletForm jump = testing::jump_path3();
  EXPECT_FALSE(is_local_wrt(jump));
  ASSERT_EQ(nonlocal_edges(jump).size(), 1u);
  EXPECT_EQ(nonlocal_edges(jump)[0].i, 0);
  EXPECT_EQ(nonlocal_edges(jump)[0].j, 2);
  const DirichletForm diag = form_from_components(Space::uniform(3, {}), {}, Eigen::VectorXd::Ones(3));
  EXPECT_TRUE(is_local_wrt(diag));
}

TEST(Classify, Examples) {
  const Classification killed = classify(killed_path3());
  EXPECT_EQ(killed.recurrence, Recurrence::Transient);
  EXPECT_EQ(killed.connectivity, Connectivity::Irreducible);
  EXPECT_NEAR(killed_path3().dense().determinant(), 1.0, 1e-12);

  const Classification rec = classify(recurrent_path3());
  EXPECT_EQ(rec.recurrence, Recurrence::Recurrent);
  EXPECT_EQ(rec.connectivity, Connectivity::Irreducible);
  EXPECT_TRUE((recurrent_path3().dense() * Eigen::VectorXd::Ones(3)).isZero());

  const DirichletForm two = form_from_components(Space::uniform(4, {{0, 1}, {2, 3}}), {{0, 1, 1.0}, {2, 3, 1.0}},
                                                 Eigen::VectorXd::Zero(4));
  EXPECT_EQ(classify(two).connectivity, Connectivity::Reducible);

  Eigen::VectorXd k = Eigen::VectorXd::Zero(4);
  k[0] = 1.0;
  const DirichletForm mixed =
      form_from_components(Space::uniform(4, {{0, 1}, {2, 3}}), {{0, 1, 1.0}, {2, 3, 1.0}}, k);
  EXPECT_EQ(classify(mixed).recurrence, Recurrence::Mixed);
}

TEST(FormProperties, EnergySymmetricAndNonnegative) {
  std::mt19937_64 rng(11);
  for (const auto& entry : local_corpus(false, 3)) {
    const DirichletForm& form = entry.form;
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd f = testing::random_vector(form.size(), rng);
      const Eigen::VectorXd g = testing::random_vector(form.size(), rng);
      const double fg = energy(form, f, g), gf = energy(form, g, f);
      EXPECT_NEAR(fg, gf, 1e-12 * std::max(1.0, std::abs(fg))) << entry.name;
      EXPECT_GE(energy(form, f, f), -1e-12 * f.squaredNorm()) << entry.name;
    }
  }
}

TEST(FormProperties, ContractionOnRandomFunctions) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (const auto& entry : local_corpus(false, 4)) {
    const DirichletForm& form = entry.form;
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd f(form.size());
      for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = u(rng);
      const double ef = energy(form, f, f);
      const Eigen::VectorXd c = unit_contraction(f);
      EXPECT_LE(energy(form, c, c), ef + 1e-12 * ef) << entry.name;
    }
  }
}

TEST(FormProperties, DecompositionRoundTrip) {
  for (const auto& entry : local_corpus(false, 5)) {
    const DirichletForm back = validate_markovian(entry.form.space(), entry.form.dense());
    EXPECT_EQ(back.dense(), entry.form.dense()) << entry.name;
    const DirichletForm again = form_from_components(back.space(), back.edges(), back.killing());
    EXPECT_EQ(again.dense(), entry.form.dense()) << entry.name;
  }
}

TEST(FormProperties, ClassificationMatchesSpectrum) {
  for (const auto& entry : local_corpus(false, 6)) {
    const Eigen::MatrixXd q = entry.form.dense();
    const Classification c = classify(entry.form);
    if (c.recurrence == Recurrence::Recurrent) {
      EXPECT_LE((q * Eigen::VectorXd::Ones(q.rows())).norm(), 1e-12) << entry.name;
    }
    if (c.recurrence == Recurrence::Transient && c.connectivity == Connectivity::Irreducible) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
      EXPECT_GT(eig.eigenvalues()(0), 0.0) << entry.name;
    }
  }
}

TEST(FormIo, ReadsKilledPath) {
  std::istringstream in("# comment\nv 0 1\nv 1 1\nv 2 1\n\ne 0 1 1\ne 1 2 1\nk 0 1\n");
  const DirichletForm f = read_form(in);
  EXPECT_EQ(f.dense(), killed_path3().dense());
  EXPECT_TRUE(f.space().adjacent(0, 1));
  EXPECT_FALSE(f.space().adjacent(0, 2));
}

TEST(FormIo, ExplicitReferenceAdjacency) {
  std::istringstream in("v 0 1\nv 1 1\nv 2 1\ne 0 1 1\ne 1 2 1\ne 0 2 1\nref 0 1\nref 1 2\n");
  const DirichletForm f = read_form(in);
  EXPECT_FALSE(is_local_wrt(f));
}

TEST(FormIo, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_form(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("v 0 1\nv 1 1\ne 0 1 oops\n"), 3);
  EXPECT_EQ(line_of("v 0 1\nv 1 1\ne 0 1 1\ne 1 0 2\n"), 4);  // duplicate edge
  EXPECT_EQ(line_of("v 0 1\nv 1 -1\n"), 2);
  EXPECT_EQ(line_of("v 0 1\nx 1 1\n"), 2);
  EXPECT_EQ(line_of("v 0 1\nv 2 1\n"), 2);  // ids not contiguous
  EXPECT_EQ(line_of("v 0 1\nv 1 1\ne 0 5 1\n"), 3);
}

TEST(FormIo, WriteReadRoundTrip) {
  const DirichletForm src = testing::jump_path3();
  std::ostringstream out;
  write_form(out, src);
  std::istringstream in(out.str());
  const DirichletForm back = read_form(in);
  EXPECT_EQ(back.dense(), src.dense());
  EXPECT_EQ(back.space().ref_edges(), src.space().ref_edges());
  EXPECT_EQ(back.space().measure(), src.space().measure());
}

}  // namespace
}  // namespace dfield
