#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dfield/dirichlet_form.hpp"

namespace dfield {

/// Path 0-1-...-(n-1), unit weights, reference adjacency = path edges.
/// `killing` lists (vertex, kappa) pairs.
DirichletForm path_form(Vertex n, const std::vector<std::pair<Vertex, double>>& killing = {}, double weight = 1.0);

/// rows x cols grid, unit weights, vertex r*cols + c.
DirichletForm grid_form(Vertex rows, Vertex cols, const std::vector<std::pair<Vertex, double>>& killing = {});

/// Random spanning tree on n vertices (each vertex attaches to an earlier one), weights in [0.5, 2].
DirichletForm random_tree_form(Vertex n, std::uint64_t seed, bool killed);

/// Random connected graph: a random tree plus `extra` random edges, weights in [0.5, 2];
/// the reference adjacency is the jump graph itself.
DirichletForm random_local_form(Vertex n, Vertex extra, std::uint64_t seed, bool killed);

/// Same form plus one jump edge between two vertices that are not reference neighbours,
/// weight in [0.5, 1.5]. The reference adjacency is unchanged.
DirichletForm add_long_edge(const DirichletForm& form, std::uint64_t seed);

/// Same form plus the jump edge (i, j) of the given weight; reference adjacency unchanged.
DirichletForm add_edge(const DirichletForm& form, Vertex i, Vertex j, double weight);

/// Grid 1..n times delta on the half line: edge weights 1/(2 delta) and killing 1/(2 delta) at
/// the first vertex, which stands for the absorbing point 0. Vertex i sits at (i + 1) delta.
DirichletForm half_line_form(Vertex n, double delta);

/// Diagonal form Q = diag(h(s_i) delta), s_i = i delta, with path reference adjacency.
DirichletForm diagonal_form(Vertex n, double delta, const std::function<double(double)>& h);

struct DiskMesh {
  DirichletForm form;
  double spacing = 0.0;
  std::vector<std::pair<double, double>> coords;
  /// Vertices with a missing grid neighbour, sorted by angle.
  std::vector<Vertex> ring;
  std::vector<double> ring_angle;
};

/// Grid points of spacing 2/mesh_n inside the closed unit disk, edge weight 1/2, no killing
/// (reflecting boundary).
DiskMesh neumann_disk(int mesh_n);

/// Grid points of spacing 2/mesh_n strictly inside the unit disk, edge weight 1/2, killing 1/2
/// for every grid neighbour outside the disk (absorbing boundary).
DiskMesh dirichlet_disk(int mesh_n);

/// Corpus of local forms: paths, grids, trees and random local forms, transient and recurrent.
struct CorpusEntry {
  std::string name;
  DirichletForm form;
};
std::vector<CorpusEntry> local_corpus(bool include_large, std::uint64_t seed);

}  // namespace dfield
