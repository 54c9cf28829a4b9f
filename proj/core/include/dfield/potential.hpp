#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dfield/dirichlet_form.hpp"

namespace dfield {

/// E(f, g) = f^T Q g.
double energy(const DirichletForm& form, const Eigen::VectorXd& f, const Eigen::VectorXd& g);

struct Spectrum {
  VertexSet support;
  double tolerance;  // entries of Qf with magnitude <= tolerance count as zero
};

/// supp(Qf), with zero threshold 1e-10 * ||Qf||_inf.
Spectrum spectrum(const DirichletForm& form, const Eigen::VectorXd& f);

/// Harmonic extension of f|_A: equals f on A and solves (Qh)_x = 0 off A.
/// Throws SingularSystemError when some piece of A^c is neither killed nor connected to A.
Eigen::VectorXd hitting(const DirichletForm& form, const VertexSet& a, const Eigen::VectorXd& f);
/// Column-wise hitting; factorizes the Dirichlet block once.
Eigen::MatrixXd hitting(const DirichletForm& form, const VertexSet& a, const Eigen::MatrixXd& f);

/// Hitting of A before leaving U: f on A, 0 on U^c, harmonic on U \ A. Requires A subset of U.
Eigen::VectorXd part_hitting(const DirichletForm& form, const VertexSet& u, const VertexSet& a,
                             const Eigen::VectorXd& f);

/// Solves E(U mu, g) = sum_x g(x) mu(x) for all g. On singular forms mu must be balanced
/// on each unkilled component; the solution is returned in the mean-zero gauge.
Eigen::VectorXd potential(const DirichletForm& form, const Eigen::VectorXd& mu);

/// Q^-1 v, or the Moore-Penrose Q+ v when Q is singular (v must lie in range(Q)).
Eigen::VectorXd green_apply(const DirichletForm& form, const Eigen::VectorXd& v);
Eigen::MatrixXd green_apply(const DirichletForm& form, const Eigen::MatrixXd& v);

/// Schur complement Q_SS - Q_SB Q_BB^-1 Q_BS onto S (B = S^c), validated as Markovian.
/// Vertices of the result are the members of S in increasing order. The reference
/// adjacency of the result is `ref_edges` (in the new labels) when given, otherwise the
/// reference adjacency induced on S.
DirichletForm trace_form(const DirichletForm& form, const VertexSet& s,
                         const std::optional<std::vector<std::pair<Vertex, Vertex>>>& ref_edges = std::nullopt);

}  // namespace dfield
