#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "dfield/subspace.hpp"

namespace dfield {

struct MarkovReport {
  std::string check;
  VertexSet a;
  std::optional<VertexSet> b;
  bool holds = true;
  double max_violation = 0.0;
  double tol = 0.0;
  /// Offending functionals (inside / outside side) when the check fails.
  Eigen::VectorXd witness_f;
  Eigen::VectorXd witness_g;
  /// Vertex where the offending functional is largest, for vertex-level diagnostics.
  std::optional<Vertex> witness_vertex;

  nlohmann::json to_json() const;
};

/// sigma(A) and sigma(thickened complement) conditionally independent given sigma(boundary).
MarkovReport check_markov(const GaussianField& field, const VertexSet& a, double tol = 1e-9);

/// For every f with s(f) in the thickened complement of A, s(H_A f) must lie in boundary(A).
/// Violation: operator norm of v -> (Q H_A Q+ v) restricted to interior(A), over unit
/// v in sigma(thickened complement).
MarkovReport check_spectrum_criterion(const GaussianField& field, const VertexSet& a, double tol = 1e-9);

/// Same as check_markov with the conditioning replaced by the span of the harmonic
/// extensions Q H_A f. Holds without locality.
MarkovReport check_pseudo_markov(const GaussianField& field, const VertexSet& a, double tol = 1e-9);

/// sigma(A) and sigma(TC(B)) conditionally independent given sigma(A n TC(B)), for B subset of A.
MarkovReport check_two_set(const GaussianField& field, const VertexSet& a, const VertexSet& b, double tol = 1e-9);

/// sigma(TC(A)) v sigma(A n TC(B)) == sigma(TC(B)) for B subset of A; violation is the larger
/// of the two containment residuals.
MarkovReport check_join_identity(const GaussianField& field, const VertexSet& a, const VertexSet& b,
                                 double tol = 1e-9);

enum class ScanLabel { Holds, Fails, Indeterminate };
std::string to_string(ScanLabel label);

struct ScanCell {
  VertexSet a;
  double violation = 0.0;
  ScanLabel label = ScanLabel::Holds;
};

struct ScanRow {
  std::string name;
  bool local = true;
  bool irreducible = true;
  std::vector<ScanCell> cells;
  bool all_hold = true;
  std::size_t indeterminate = 0;
  double worst_violation = 0.0;
  std::optional<VertexSet> witness;
  /// local <=> all_hold, and no indeterminate cells.
  bool consistent = true;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  bool pass() const;
  /// One line per (form, set): name,local,set,violation,label.
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

struct NamedForm {
  std::string name;
  DirichletForm form;
};

/// Runs check_markov over `sets` plus, for every nonlocal edge (x, y), the reference balls of
/// radius 1 around x and y. Violations in (tol, 1e-4) are labelled indeterminate and make
/// the row inconsistent.
ScanTable equivalence_scan(const std::vector<NamedForm>& forms, const std::vector<std::vector<VertexSet>>& sets,
                           double tol = 1e-9, double indeterminate_ceiling = 1e-4);

/// Every nonempty proper subset of {0..n-1}; n <= 20.
std::vector<VertexSet> all_proper_subsets(Vertex n);

}  // namespace dfield
