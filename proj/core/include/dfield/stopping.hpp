#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "dfield/gaussian_field.hpp"

namespace dfield {

/// Ordered family U_1..U_N of vertex sets playing the role of a countable open basis.
class SetBasis {
 public:
  SetBasis(Vertex universe, std::vector<VertexSet> sets);

  Vertex universe() const { return universe_; }
  std::size_t size() const { return sets_.size(); }
  const VertexSet& operator[](std::size_t i) const { return sets_[i]; }
  /// Every singleton {x} is a basis set, i.e. the basis generates the (Hausdorff, hence discrete)
  /// topology. Then discretize_set(F, basis, size()) == F for every F.
  bool separating() const { return separating_; }

 private:
  Vertex universe_;
  std::vector<VertexSet> sets_;
  bool separating_;
};

/// F^n: V minus every U_i (i <= n) that misses F. n = 0 gives V.
VertexSet discretize_set(const VertexSet& f, const SetBasis& basis, std::size_t n);

enum class Statistic { MaxAbs, Mean };
std::string to_string(Statistic s);

/// Stop at the first step whose statistic reaches theta.
struct ThresholdPredicate {
  double theta = 0.0;
  Statistic stat = Statistic::MaxAbs;
};

/// Nested schedules A_0 <= A_1 <= ... and B_0 >= B_1 >= ... with B_k <= A_k. At step k the
/// predicate reads the field on R_k = A_k n TC(B_k) (plus any declared peek vertices).
class ExplorationRule {
 public:
  /// Audited rule: rejects peek vertices outside the annuli.
  ExplorationRule(const Space& space, std::vector<VertexSet> a_schedule, std::vector<VertexSet> b_schedule,
                  ThresholdPredicate predicate, VertexSet peek = {});
  /// Skips the support audit. Only for negative controls.
  static ExplorationRule unaudited(const Space& space, std::vector<VertexSet> a_schedule,
                                   std::vector<VertexSet> b_schedule, ThresholdPredicate predicate, VertexSet peek);
  /// Single-step rule that always returns (A, B).
  static ExplorationRule constant(const Space& space, VertexSet a, VertexSet b);

  std::size_t steps() const { return a_.size(); }
  const VertexSet& a(std::size_t k) const { return a_[k]; }
  const VertexSet& b(std::size_t k) const { return b_[k]; }
  const VertexSet& annulus(std::size_t k) const { return annulus_[k]; }
  /// Vertices the predicate reads at step k.
  const VertexSet& reads(std::size_t k) const { return reads_[k]; }
  const ThresholdPredicate& predicate() const { return predicate_; }
  const VertexSet& peek() const { return peek_; }
  bool audited() const { return audited_; }

 private:
  ExplorationRule(const Space& space, std::vector<VertexSet> a_schedule, std::vector<VertexSet> b_schedule,
                  ThresholdPredicate predicate, VertexSet peek, bool audit);

  std::vector<VertexSet> a_, b_, annulus_, reads_;
  ThresholdPredicate predicate_;
  VertexSet peek_;
  bool audited_;
};

struct StoppingSample {
  std::size_t k = 0;
  VertexSet a;
  VertexSet b;
};

/// Statistic of the predicate at step k for the field sample h. Values are h_x on killed
/// components and h_x minus the mean over the read set on unkilled ones. -inf when nothing is read.
double rule_statistic(const GaussianField& field, const ExplorationRule& rule, std::size_t k, const Eigen::VectorXd& h);

StoppingSample run_exploration(const GaussianField& field, const ExplorationRule& rule, const Eigen::VectorXd& h);
/// Realized step per sample row.
std::vector<std::size_t> run_exploration_batch(const GaussianField& field, const ExplorationRule& rule,
                                               const Eigen::MatrixXd& samples);

/// Conditional resampler: keeps every functional of `keep` fixed and redraws the rest.
class ConditionalResampler {
 public:
  ConditionalResampler(const GaussianField& field, const VertexSet& keep);
  /// White-noise draw z' = zt + P(z - zt), P the projection onto the kept directions.
  Eigen::MatrixXd resample(const Eigen::VectorXd& z, const Eigen::MatrixXd& fresh) const;

 private:
  Eigen::MatrixXd kept_;
};

struct HypothesisReport {
  VertexSet a;
  VertexSet b;
  std::size_t trials = 0;
  std::size_t bases = 0;
  std::size_t violations = 0;
  /// Fraction of base samples on which the event occurred.
  double event_rate = 0.0;
  bool pass = true;
  nlohmann::json to_json() const;
};

/// Resamples the field given sigma(A n B) and checks that 1{A_w <= A, TC(B_w) <= B} never changes.
/// A new base sample is drawn every 100 trials.
HypothesisReport verify_stopping_hypothesis(const GaussianField& field, const ExplorationRule& rule,
                                            const VertexSet& a, const VertexSet& b, std::size_t trials,
                                            std::uint64_t seed);

struct CellMeasurability {
  std::size_t k = 0;
  std::size_t bases = 0;
  std::size_t trials = 0;
  std::size_t a_violations = 0;  // {A_w = A_k} changed under resampling given sigma(A_k)
  std::size_t b_violations = 0;  // {B_w = B_k} changed under resampling given sigma(TC(B_k))
};

struct MeasurabilityReport {
  std::vector<CellMeasurability> cells;
  bool pass = true;
  nlohmann::json to_json() const;
};

/// Cell-level measurability of the realized values of (A_w, B_w).
MeasurabilityReport check_cell_measurability(const GaussianField& field, const ExplorationRule& rule,
                                             std::size_t trials, std::uint64_t seed);

struct CellStatistics {
  std::size_t k = 0;
  VertexSet a;
  VertexSet b;
  std::size_t count = 0;
  bool asserted = false;
  std::size_t inside_dim = 0;
  std::size_t outside_dim = 0;
  double max_partial_correlation = 0.0;
  double threshold = 0.0;
  bool pass = true;
};

struct StrongMarkovReport {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t min_cell = 0;
  std::vector<CellStatistics> cells;
  bool pass = true;
  nlohmann::json to_json() const;
};

/// Monte Carlo test of the strong Markov property for (A_w, B_w): within each realized cell,
/// residuals of sigma(A_k) and sigma(TC(B_k)) functionals after regression on sigma(R_k)
/// functionals must be uncorrelated (|r| <= 4/sqrt(cell size)). Cells below `min_cell` are
/// reported but not asserted.
StrongMarkovReport strong_markov_mc(const GaussianField& field, const ExplorationRule& rule, std::size_t n_samples,
                                    std::uint64_t seed, std::size_t min_cell = 200);

/// Rule from a JSON config:
///   {"a_schedule": "ball(15, 5:8)" | [[..], ..], "b_schedule": ..., "predicate": "threshold(1.5, max_abs)",
///    "peek": [..], "audit": true}
ExplorationRule parse_rule(const nlohmann::json& config, const Space& space);
ExplorationRule read_rule_file(const std::string& path, const Space& space);

}  // namespace dfield
