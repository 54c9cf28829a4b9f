#pragma once

#include "dfield/stopping.hpp"
#include "test_util.hpp"

namespace dfield::testing {

// Path of 30 vertices, unit weights, killed at both ends.
inline DirichletForm path30() { return path_form(30, {{0, 1.0}, {29, 1.0}}); }

// Same path plus the jump 15 -- 0, which crosses every annulus.
inline DirichletForm path30_jump() { return add_edge(path30(), 15, 0, 1.0); }

inline constexpr double kAnnulusTheta = 4.0;

// A_k = ball(15, 5 + k), B_k = ball(15, 3 - k), k = 0..3.
inline std::vector<VertexSet> annulus_a(const Space& s) {
  std::vector<VertexSet> out;
  for (int k = 0; k <= 3; ++k) out.push_back(s.ball(15, 5 + k));
  return out;
}
inline std::vector<VertexSet> annulus_b(const Space& s) {
  std::vector<VertexSet> out;
  for (int k = 0; k <= 3; ++k) out.push_back(s.ball(15, 3 - k));
  return out;
}

inline ExplorationRule annulus_rule(const Space& s, double theta = kAnnulusTheta) {
  return ExplorationRule(s, annulus_a(s), annulus_b(s), {theta, Statistic::MaxAbs});
}

// Reads the centre vertex, which lies outside every annulus.
inline ExplorationRule peeking_rule(const Space& s) {
  return ExplorationRule::unaudited(s, annulus_a(s), annulus_b(s), {kAnnulusTheta, Statistic::MaxAbs}, {15});
}

}  // namespace dfield::testing
