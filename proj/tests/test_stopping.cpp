#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "dfield/markov.hpp"
#include "dfield/stopping.hpp"
#include "scenarios.hpp"

namespace dfield {
namespace {

using testing::annulus_rule;
using testing::path30;
using testing::peeking_rule;

SetBasis singletons(Vertex n) {
  std::vector<VertexSet> sets;
  for (Vertex x = 0; x < n; ++x) sets.push_back({x});
  return SetBasis(n, sets);
}

TEST(DiscretizeSet, Examples) {
  const SetBasis basis = singletons(5);
  EXPECT_TRUE(basis.separating());
  EXPECT_EQ(discretize_set({1, 3}, basis, 0), VertexSet::all(5));
  EXPECT_EQ(discretize_set({1, 3}, basis, 2), (VertexSet{1, 2, 3, 4}));
  EXPECT_EQ(discretize_set({1, 3}, basis, 5), (VertexSet{1, 3}));
  EXPECT_THROW(discretize_set({1, 3}, basis, 6), InputError);
}

TEST(DiscretizeSet, SeparatingFlag) {
  EXPECT_FALSE(SetBasis(3, {{0, 1}}).separating());
  EXPECT_FALSE(SetBasis(3, {{0}, {0, 1}}).separating());  // points apart but 1 and 2 not closed
  EXPECT_TRUE(SetBasis(3, {{0, 1}, {2}, {1}, {0}}).separating());
  EXPECT_THROW(SetBasis(3, {}), InputError);
}

TEST(DiscretizeSet, MonotoneAndExactOnRandomInstances) {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 500; ++t) {
    const Vertex n = 2 + static_cast<Vertex>(rng() % 9);
    std::vector<VertexSet> sets;
    const std::size_t count = 1 + rng() % 12;
    for (std::size_t i = 0; i < count; ++i) sets.push_back(testing::random_set(n, rng));
    if (rng() & 1U) {
      for (Vertex x = 0; x < n; ++x) sets.insert(sets.begin() + static_cast<std::ptrdiff_t>(rng() % (sets.size() + 1)), {x});
    }
    const SetBasis basis(n, sets);
    const VertexSet f = testing::random_set(n, rng);
    VertexSet prev = VertexSet::all(n);
    for (std::size_t k = 0; k <= basis.size(); ++k) {
      const VertexSet cur = discretize_set(f, basis, k);
      EXPECT_TRUE(cur.is_subset_of(prev));
      EXPECT_TRUE(f.is_subset_of(cur));
      prev = cur;
    }
    if (basis.separating()) {
      EXPECT_EQ(prev, f);
    }
  }
}

TEST(ExplorationRule, ConstructionChecks) {
  const DirichletForm form = path30();
  const Space& s = form.space();
  const auto a = testing::annulus_a(s), b = testing::annulus_b(s);
  EXPECT_NO_THROW(annulus_rule(s));
  EXPECT_THROW(ExplorationRule(s, a, b, {1.0, Statistic::MaxAbs}, {15}), InputError);  // peek audit
  EXPECT_THROW(ExplorationRule(s, {a[1], a[0]}, {b[0], b[1]}, {1.0, Statistic::MaxAbs}), InputError);
  EXPECT_THROW(ExplorationRule(s, {a[0], a[1]}, {b[1], b[0]}, {1.0, Statistic::MaxAbs}), InputError);
  EXPECT_THROW(ExplorationRule(s, {b[0]}, {a[0]}, {1.0, Statistic::MaxAbs}), InputError);
  EXPECT_THROW(ExplorationRule(s, {a[0]}, {b[0], b[1]}, {1.0, Statistic::MaxAbs}), InputError);
  const ExplorationRule r = annulus_rule(s);
  for (std::size_t k = 0; k < r.steps(); ++k) {
    EXPECT_EQ(r.annulus(k), r.a(k).intersect(thickened_complement(s, r.b(k))));
    EXPECT_TRUE(r.reads(k).is_subset_of(r.annulus(k)));
    if (k > 0) EXPECT_TRUE(r.annulus(k - 1).is_subset_of(r.annulus(k)));
  }
  EXPECT_TRUE(peeking_rule(s).reads(0).contains(15));
  EXPECT_FALSE(peeking_rule(s).audited());
}

TEST(RunExploration, ImmediateStops) {
  const GaussianField field(path30(), 1);
  const Space& s = field.form().space();
  const Eigen::MatrixXd h = field.sample_batch(20, 3);
  const ExplorationRule never = annulus_rule(s, -std::numeric_limits<double>::infinity());
  const ExplorationRule constant = ExplorationRule::constant(s, s.ball(15, 6), s.ball(15, 2));
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    const StoppingSample a = run_exploration(field, never, h.row(i).transpose());
    EXPECT_EQ(a.k, 0u);
    EXPECT_EQ(a.a, never.a(0));
    const StoppingSample c = run_exploration(field, constant, h.row(i).transpose());
    EXPECT_EQ(c.a, s.ball(15, 6));
    EXPECT_EQ(c.b, s.ball(15, 2));
  }
}

TEST(RunExploration, AnnulusRuleRealizesSeveralCells) {
  const GaussianField field(path30(), 1);
  const ExplorationRule rule = annulus_rule(field.form().space());
  const Eigen::MatrixXd h = field.sample_batch(4000, 7);
  const std::vector<std::size_t> ks = run_exploration_batch(field, rule, h);
  std::set<std::size_t> seen(ks.begin(), ks.end());
  EXPECT_EQ(seen.size(), 4u);
  for (Eigen::Index i = 0; i < 200; ++i) {
    const StoppingSample s = run_exploration(field, rule, h.row(i).transpose());
    EXPECT_EQ(s.k, ks[static_cast<std::size_t>(i)]);
    EXPECT_TRUE(s.b.is_subset_of(s.a));
    // first firing index
    for (std::size_t j = 0; j < s.k; ++j) EXPECT_LT(rule_statistic(field, rule, j, h.row(i).transpose()), 4.0);
    if (s.k + 1 < rule.steps()) EXPECT_GE(rule_statistic(field, rule, s.k, h.row(i).transpose()), 4.0);
  }
}

TEST(RunExploration, DiscretizationOfRealizedSetsDecreasesToSet) {
  const GaussianField field(path30(), 1);
  const ExplorationRule rule = annulus_rule(field.form().space());
  std::vector<VertexSet> sets;
  for (Vertex x = 0; x < 30; ++x) sets.push_back({x});
  const SetBasis basis(30, sets);
  const Eigen::MatrixXd h = field.sample_batch(50, 8);
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    const VertexSet a = run_exploration(field, rule, h.row(i).transpose()).a;
    VertexSet prev = VertexSet::all(30);
    for (std::size_t n = 0; n <= basis.size(); ++n) {
      const VertexSet cur = discretize_set(a, basis, n);
      EXPECT_TRUE(cur.is_subset_of(prev));
      prev = cur;
    }
    EXPECT_EQ(prev, a);
  }
}

TEST(StoppingHypothesis, ConstantAndAnnulusRulesPass) {
  const GaussianField field(path30(), 1);
  const Space& s = field.form().space();
  const ExplorationRule constant = ExplorationRule::constant(s, s.ball(15, 6), s.ball(15, 2));
  EXPECT_TRUE(verify_stopping_hypothesis(field, constant, s.ball(15, 6), thickened_complement(s, s.ball(15, 2)),
                                         500, 1)
                  .pass);
  const ExplorationRule rule = annulus_rule(s);
  const HypothesisReport r =
      verify_stopping_hypothesis(field, rule, rule.a(1), thickened_complement(s, rule.b(1)), 2000, 2);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.event_rate, 0.05);
  EXPECT_LT(r.event_rate, 0.95);
}

TEST(StoppingHypothesis, PeekingRuleFails) {
  const GaussianField field(path30(), 1);
  const Space& s = field.form().space();
  const ExplorationRule rule = peeking_rule(s);
  const HypothesisReport r =
      verify_stopping_hypothesis(field, rule, rule.a(1), thickened_complement(s, rule.b(1)), 2000, 2);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.violations, 0u);
}

TEST(CellMeasurability, AnnulusPassesPeekingFails) {
  const GaussianField field(path30(), 1);
  const Space& s = field.form().space();
  EXPECT_TRUE(check_cell_measurability(field, annulus_rule(s), 1000, 4).pass);
  EXPECT_TRUE(check_cell_measurability(field, ExplorationRule::constant(s, s.ball(3, 2), s.ball(3, 1)), 200, 4).pass);
  EXPECT_FALSE(check_cell_measurability(field, peeking_rule(s), 1000, 4).pass);
}

TEST(StrongMarkovMc, ConstantRuleMatchesTwoSet) {
  const GaussianField field(path30(), 1);
  const Space& s = field.form().space();
  const VertexSet a = s.ball(15, 6), b = s.ball(15, 2);
  const StrongMarkovReport r = strong_markov_mc(field, ExplorationRule::constant(s, a, b), 20000, 5);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.cells[0].max_partial_correlation, 4.0 / std::sqrt(20000.0));
  EXPECT_TRUE(check_two_set(field, a, b).holds);
}

TEST(StrongMarkovMc, AnnulusRulePassesJumpFails) {
  const GaussianField field(path30(), 1);
  const StrongMarkovReport ok = strong_markov_mc(field, annulus_rule(field.form().space()), 20000, 6);
  EXPECT_TRUE(ok.pass);
  std::size_t asserted = 0;
  for (const auto& c : ok.cells) asserted += c.asserted ? 1 : 0;
  EXPECT_GE(asserted, 3u);

  const GaussianField jump(testing::path30_jump(), 1);
  const StrongMarkovReport bad = strong_markov_mc(jump, annulus_rule(jump.form().space()), 20000, 6);
  EXPECT_FALSE(bad.pass);
}

TEST(StrongMarkovMc, ReportIsDeterministic) {
  const GaussianField field(path30(), 1);
  const ExplorationRule rule = annulus_rule(field.form().space());
  EXPECT_EQ(strong_markov_mc(field, rule, 5000, 9).to_json().dump(),
            strong_markov_mc(field, rule, 5000, 9).to_json().dump());
}

TEST(RuleConfig, BallDescriptorsAndLists) {
  const DirichletForm form = path30();
  const Space& s = form.space();
  const ExplorationRule r = parse_rule(nlohmann::json::parse(R"j({
      "a_schedule": "ball(15, 5:8)",
      "b_schedule": "ball(15, 3:0)",
      "predicate": "threshold(4, max_abs)"})j"),
                                       s);
  ASSERT_EQ(r.steps(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(r.a(k), s.ball(15, 5 + static_cast<int>(k)));
    EXPECT_EQ(r.b(k), s.ball(15, 3 - static_cast<int>(k)));
  }
  EXPECT_EQ(r.predicate().theta, 4.0);
  EXPECT_EQ(r.predicate().stat, Statistic::MaxAbs);
  EXPECT_TRUE(r.audited());

  const ExplorationRule lists = parse_rule(nlohmann::json::parse(R"j({
      "a_schedule": [[1, 2, 3], [0, 1, 2, 3, 4]],
      "b_schedule": "ball(2, [1, 0])",
      "predicate": "threshold(-inf, mean)"})j"),
                                           s);
  EXPECT_EQ(lists.a(1), (VertexSet{0, 1, 2, 3, 4}));
  EXPECT_EQ(lists.b(0), (VertexSet{1, 2, 3}));
  EXPECT_EQ(lists.b(1), (VertexSet{2}));
  EXPECT_EQ(lists.predicate().stat, Statistic::Mean);
  EXPECT_TRUE(std::isinf(lists.predicate().theta));
}

TEST(RuleConfig, PeekAndAudit) {
  const DirichletForm form = path30();
  const Space& s = form.space();
  const std::string base = R"j("a_schedule": "ball(15, 5:8)", "b_schedule": "ball(15, 3:0)",
      "predicate": "threshold(4, max_abs)", "peek": [15])j";
  EXPECT_THROW(parse_rule(nlohmann::json::parse("{" + base + "}"), s), InputError);
  const ExplorationRule r = parse_rule(nlohmann::json::parse("{" + base + R"(, "audit": false})"), s);
  EXPECT_FALSE(r.audited());
  EXPECT_TRUE(r.peek().contains(15));
}

TEST(RuleConfig, Malformed) {
  const DirichletForm form = path30();
  const Space& s = form.space();
  for (const char* text : {R"j({"a_schedule": "ball(15 5:8)", "b_schedule": "ball(15, 3:0)", "predicate": "threshold(1, max_abs)"})j",
                           R"j({"a_schedule": "ball(15, 5:8)", "b_schedule": "ball(15, 3:0)", "predicate": "threshold(1, median)"})j",
                           R"j({"a_schedule": "ball(15, 5:8)", "predicate": "threshold(1, max_abs)"})j",
                           R"j({"a_schedule": [[40]], "b_schedule": [[40]], "predicate": "threshold(1, max_abs)"})j"}) {
    EXPECT_THROW(parse_rule(nlohmann::json::parse(text), s), InputError) << text;
  }
  EXPECT_THROW(read_rule_file("/nonexistent/rule.json", s), InputError);
}

}  // namespace
}  // namespace dfield
