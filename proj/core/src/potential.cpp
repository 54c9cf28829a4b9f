#include "dfield/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SparseCholesky>

#include "dfield/factor.hpp"

namespace dfield {

namespace {

void check_length(const DirichletForm& form, Eigen::Index len, const char* what) {
  if (len != form.size()) {
    throw InputError(std::string(what) + " has length " + std::to_string(len) + ", expected " +
                     std::to_string(form.size()));
  }
}

/// Factorized block Q_DD for an index set D plus the coupling rows Q_{D, D^c}.
class DirichletBlock {
 public:
  DirichletBlock(const DirichletForm& form, const VertexSet& d) : n_(form.size()), d_(d.members()) {
    std::vector<Vertex> relabel(static_cast<std::size_t>(n_), -1);
    for (std::size_t k = 0; k < d_.size(); ++k) relabel[static_cast<std::size_t>(d_[k])] = static_cast<Vertex>(k);
    check_anchored(form, relabel);
    const auto m = static_cast<Eigen::Index>(d_.size());
    std::vector<Eigen::Triplet<double>> inner, outer;
    const SparseMatrix& q = form.matrix();
    for (Eigen::Index col = 0; col < q.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(q, col); it; ++it) {
        Vertex r = relabel[static_cast<std::size_t>(it.row())];
        if (r < 0) continue;
        Vertex c = relabel[static_cast<std::size_t>(it.col())];
        if (c >= 0) {
          inner.emplace_back(r, c, it.value());
        } else {
          outer.emplace_back(r, it.col(), it.value());
        }
      }
    }
    SparseMatrix qdd(m, m);
    qdd.setFromTriplets(inner.begin(), inner.end());
    coupling_.resize(m, n_);
    coupling_.setFromTriplets(outer.begin(), outer.end());
    if (m > 0) {
      llt_.compute(qdd);
      if (llt_.info() != Eigen::Success) throw SingularSystemError("Dirichlet block is not positive definite");
    }
  }

  /// Fills the D rows of `x` with the harmonic values for the data already in the other rows.
  void solve_in_place(Eigen::MatrixXd& x) const {
    if (d_.empty()) return;
    Eigen::MatrixXd rhs = -(coupling_ * x);
    Eigen::MatrixXd sol = llt_.solve(rhs);
    for (std::size_t k = 0; k < d_.size(); ++k) x.row(d_[k]) = sol.row(static_cast<Eigen::Index>(k));
  }

  /// Q_DD^-1 applied to columns indexed by D.
  Eigen::MatrixXd solve_block(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }
  const SparseMatrix& coupling() const { return coupling_; }

 private:
  // Every connected piece of D must carry killing or a jump edge leaving D.
  static void check_anchored(const DirichletForm& form, const std::vector<Vertex>& relabel) {
    const Vertex n = form.size();
    std::vector<Vertex> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Vertex{0});
    auto find = [&](Vertex x) {
      while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      return x;
    };
    std::vector<char> anchored(static_cast<std::size_t>(n), 0);
    for (Vertex x = 0; x < n; ++x) {
      if (relabel[static_cast<std::size_t>(x)] >= 0 && form.killing()[x] > 0.0) anchored[static_cast<std::size_t>(x)] = 1;
    }
    for (const auto& e : form.edges()) {
      bool in_i = relabel[static_cast<std::size_t>(e.i)] >= 0, in_j = relabel[static_cast<std::size_t>(e.j)] >= 0;
      if (in_i && in_j) {
        Vertex a = find(e.i), b = find(e.j);
        if (a != b) parent[static_cast<std::size_t>(a)] = b;
      } else if (in_i) {
        anchored[static_cast<std::size_t>(e.i)] = 1;
      } else if (in_j) {
        anchored[static_cast<std::size_t>(e.j)] = 1;
      }
    }
    std::vector<char> root_ok(static_cast<std::size_t>(n), 0);
    for (Vertex x = 0; x < n; ++x) {
      if (relabel[static_cast<std::size_t>(x)] >= 0 && anchored[static_cast<std::size_t>(x)]) root_ok[static_cast<std::size_t>(find(x))] = 1;
    }
    for (Vertex x = 0; x < n; ++x) {
      if (relabel[static_cast<std::size_t>(x)] >= 0 && !root_ok[static_cast<std::size_t>(find(x))]) {
        throw SingularSystemError("singular Dirichlet problem: vertex " + std::to_string(x) +
                                  " lies in an unkilled piece with no exit");
      }
    }
  }

  Vertex n_;
  std::vector<Vertex> d_;
  SparseMatrix coupling_;
  Eigen::SimplicialLLT<SparseMatrix> llt_;
};

void require_range(const DirichletForm& form, const Eigen::MatrixXd& v, const char* what) {
  if (form.nonsingular()) return;
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::VectorXd col = v.col(c);
    const double scale = std::max(col.lpNorm<1>(), 1e-300);
    if (form.range_defect(col) > 1e-10 * scale) {
      throw InputError(std::string(what) + " is not balanced on a recurrent component (no solution in range(Q))");
    }
  }
}

}  // namespace

double energy(const DirichletForm& form, const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  check_length(form, f.size(), "f");
  check_length(form, g.size(), "g");
  return f.dot(form.matrix() * g);
}

Spectrum spectrum(const DirichletForm& form, const Eigen::VectorXd& f) {
  check_length(form, f.size(), "f");
  const Eigen::VectorXd r = form.matrix() * f;
  const double tol = 1e-10 * r.lpNorm<Eigen::Infinity>();
  std::vector<Vertex> support;
  for (Vertex x = 0; x < form.size(); ++x) {
    if (std::abs(r[x]) > tol) support.push_back(x);
  }
  return {VertexSet(std::move(support)), tol};
}

Eigen::MatrixXd hitting(const DirichletForm& form, const VertexSet& a, const Eigen::MatrixXd& f) {
  check_length(form, f.rows(), "f");
  const VertexSet d = a.complement(form.size());
  Eigen::MatrixXd x = f;
  if (d.empty()) return x;
  for (Vertex v : d) x.row(v).setZero();
  DirichletBlock block(form, d);
  block.solve_in_place(x);
  return x;
}

Eigen::VectorXd hitting(const DirichletForm& form, const VertexSet& a, const Eigen::VectorXd& f) {
  Eigen::MatrixXd x = hitting(form, a, Eigen::MatrixXd(f));
  return x.col(0);
}

Eigen::VectorXd part_hitting(const DirichletForm& form, const VertexSet& u, const VertexSet& a,
                             const Eigen::VectorXd& f) {
  check_length(form, f.size(), "f");
  if (!a.is_subset_of(u)) throw InputError("part_hitting requires A to be a subset of U");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(form.size(), 1);
  for (Vertex v : a) x(v, 0) = f[v];
  const VertexSet d = u.minus(a);
  if (!d.empty()) {
    DirichletBlock block(form, d);
    block.solve_in_place(x);
  }
  return x.col(0);
}

Eigen::MatrixXd green_apply(const DirichletForm& form, const Eigen::MatrixXd& v) {
  check_length(form, v.rows(), "v");
  require_range(form, v, "right-hand side");
  Eigen::MatrixXd x = form.grounded_factor().solve(v);
  if (!form.nonsingular()) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) form.project_to_range(x.col(c));
  }
  return x;
}

Eigen::VectorXd green_apply(const DirichletForm& form, const Eigen::VectorXd& v) {
  Eigen::MatrixXd x = green_apply(form, Eigen::MatrixXd(v));
  return x.col(0);
}

Eigen::VectorXd potential(const DirichletForm& form, const Eigen::VectorXd& mu) {
  check_length(form, mu.size(), "measure");
  require_range(form, Eigen::MatrixXd(mu), "measure");
  return green_apply(form, mu);
}

DirichletForm trace_form(const DirichletForm& form, const VertexSet& s,
                         const std::optional<std::vector<std::pair<Vertex, Vertex>>>& ref_edges) {
  const Vertex n = form.size();
  for (Vertex x : s) {
    if (x >= n) throw InputError("trace set contains vertex " + std::to_string(x) + " outside the space");
  }
  if (s.empty()) throw InputError("trace onto the empty set");
  const VertexSet b = s.complement(n);
  const auto m = static_cast<Eigen::Index>(s.size());

  std::vector<Vertex> pos(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < s.size(); ++k) pos[static_cast<std::size_t>(s.members()[k])] = static_cast<Vertex>(k);
  Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
  const SparseMatrix& q = form.matrix();
  for (Eigen::Index col = 0; col < q.outerSize(); ++col) {
    const Vertex c = pos[static_cast<std::size_t>(col)];
    if (c < 0) continue;
    for (SparseMatrix::InnerIterator it(q, col); it; ++it) {
      const Vertex r = pos[static_cast<std::size_t>(it.row())];
      if (r >= 0) schur(r, c) = it.value();
    }
  }
  if (!b.empty()) {
    DirichletBlock block(form, b);
    const SparseMatrix& coupling = block.coupling();
    Eigen::MatrixXd qbs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(b.size()), m);
    for (Eigen::Index col = 0; col < coupling.outerSize(); ++col) {
      const Vertex c = pos[static_cast<std::size_t>(col)];
      if (c < 0) continue;
      for (SparseMatrix::InnerIterator it(coupling, col); it; ++it) qbs(it.row(), c) = it.value();
    }
    const Eigen::MatrixXd z = block.solve_block(qbs);
    schur.noalias() -= qbs.transpose() * z;
  }
  schur = 0.5 * (schur + schur.transpose()).eval();

  Space sub = form.space().restrict_to(s);
  if (ref_edges) sub = Space(sub.measure(), *ref_edges);
  MarkovianOptions opts;
  opts.tol = 1e-11;
  return validate_markovian(sub, schur, opts);
}

}  // namespace dfield
