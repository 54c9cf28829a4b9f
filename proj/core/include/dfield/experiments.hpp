#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dfield/meshes.hpp"
#include "dfield/report.hpp"
#include "dfield/subspace.hpp"

namespace dfield {

/// Brownian covariance on half-line grids: Cov(X_{U delta_{t/2}}, X_{U delta_{s/2}}) against t^s,
/// Markov checks at A = {x <= t}, and sigma({t}) = span{e_t}. With samples > 0 an empirical
/// covariance check is added.
Report example_half_line(const std::vector<Vertex>& sizes, double delta, std::size_t samples = 0,
                         std::uint64_t seed = 1);

struct TraceProfile {
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<double> estimate;
  std::vector<double> reference;
  /// max over bins of |estimate / reference - 1|
  double max_relative_error = 0.0;
};

/// 1 / (4 pi (1 - cos theta)).
double stable_kernel(double theta);

/// Angular profile of the jump weights of a trace form on a circle. `angles[i]` is the angle of
/// trace vertex i. Each weight is compared with kernel(theta) dtheta_i dtheta_j, dtheta_i being
/// half the gap between the angular neighbours of i; pairs are binned over |theta| in [lo, pi].
TraceProfile trace_profile(const DirichletForm& trace, const std::vector<double>& angles, int bins,
                           double lo = 0.7853981633974483);

struct DiskTrace {
  DiskMesh mesh;
  DirichletForm trace;
  /// Angle of each trace vertex (trace labels follow increasing mesh ids).
  std::vector<double> angles;
};

/// Neumann disk traced onto its boundary ring; the trace carries the cyclic angular adjacency.
DiskTrace disk_trace(int mesh_n);

struct DiskTraceOptions {
  std::vector<int> meshes{32, 64, 128};
  int profile_mesh = 64;
  int bulk_mesh = 32;
  int bins = 8;
  double profile_tolerance = 0.25;
};

Report example_disk_trace(const DiskTraceOptions& options = {});

/// Conditional independence of sigma(S1) and sigma(S2) with nothing conditioned on. Rejects
/// overlapping sets.
CondIndepResult independent_increments(const GaussianField& field, const VertexSet& s1, const VertexSet& s2);

Report example_diagonal(Vertex n = 10);

struct CircleAverage {
  /// Columns are the circle measures mu_t, one per radius.
  Eigen::MatrixXd measures;
  /// Cov(X_{U mu_t}, X_{U mu_s}).
  Eigen::MatrixXd covariance;
  std::vector<double> t;
};

/// Circle-average measures on the Dirichlet disk: ceil(2 pi r / spacing) equally spaced points,
/// each carrying mass 1/M at its nearest grid vertex.
CircleAverage circle_average(int mesh_n, const std::vector<double>& radii);

Report example_circle_average(const std::vector<int>& meshes = {32, 64, 128},
                              const std::vector<double>& radii = {0.4, 0.3, 0.2, 0.1});

/// Ids: half-line, disk-trace, diagonal, circle-average.
Report run_example(const std::string& id, std::size_t samples, std::uint64_t seed);
std::vector<std::string> example_ids();

}  // namespace dfield
