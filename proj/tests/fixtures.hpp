#pragma once

// Small hand-built meshes and solutions shared by the unit tests.

#include <memory>
#include <random>
#include <vector>

#include "sblfem/femspace.hpp"
#include "sblfem/mesh.hpp"
#include "sblfem/refspace.hpp"

namespace fixture {

using namespace sblfem;

// Axis-aligned square [x0, x0+h] x [y0, y0+h], xi along x.
inline MeshElement square(double x0, double y0, double h = 1.0) {
  Vec2 a(x0, y0), b(x0 + h, y0), c(x0, y0 + h), d(x0 + h, y0 + h);
  MeshElement e;
  e.map = transfinite_map({EdgeCurve::segment(a, c), EdgeCurve::segment(b, d),
                           EdgeCurve::segment(a, b), EdgeCurve::segment(c, d)});
  return e;
}

// Two unit squares side by side: element 0 side xi1 glued to element 1 side xi0.
inline std::vector<EdgeRecord> two_square_edges() { return {{0, 1, 1, 0, +1}}; }

// Wraps hand-made elements as an SBL mesh (one child per parent) so that the
// point location machinery works on them.
inline std::shared_ptr<const SBLMesh> as_sbl_mesh(std::vector<MeshElement> elements,
                                                  std::vector<EdgeRecord> edges, int p) {
  auto base = std::make_shared<AsymptoticMesh>(BoundaryCurve::circle(1.0));
  base->elements = elements;
  base->edges = edges;
  auto mesh = std::make_shared<SBLMesh>();
  mesh->base = base;
  mesh->p = p;
  for (int i = 0; i < static_cast<int>(elements.size()); ++i) {
    elements[i].parent = i;
    mesh->children.push_back({i});
  }
  mesh->elements = std::move(elements);
  mesh->edges = std::move(edges);
  return mesh;
}

// Solution with the given coefficient vectors (interpolants or random data).
inline Solution make_solution(std::shared_ptr<const SBLMesh> mesh, int p, Eigen::VectorXd u,
                              Eigen::VectorXd w, double eps1 = 1e-3, double eps2 = 1e-1) {
  Solution s;
  s.mesh = mesh;
  s.p = p;
  s.u_map = std::make_shared<DofMap>(build_dof_map(*mesh, p, FieldKind::U));
  s.w_map = std::make_shared<DofMap>(build_dof_map(*mesh, p, FieldKind::W));
  s.basis = std::make_shared<TensorBasis>(p);
  s.u = std::move(u);
  s.w = std::move(w);
  s.eps1 = eps1;
  s.eps2 = eps2;
  s.kappa = mesh->kappa;
  return s;
}

inline Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline Solution random_solution(std::shared_ptr<const SBLMesh> mesh, int p, unsigned seed) {
  DofMap um = build_dof_map(*mesh, p, FieldKind::U), wm = build_dof_map(*mesh, p, FieldKind::W);
  return make_solution(mesh, p, random_vector(um.num_free, seed),
                       random_vector(wm.num_free, seed + 1));
}

inline std::shared_ptr<const SBLMesh> disk_mesh(int p, double eps1, double eps2, int m = 2) {
  return build_sbl_mesh(build_asymptotic_mesh(BoundaryCurve::circle(1.0), m), 1.0, p, eps1, eps2);
}

inline std::shared_ptr<const SBLMesh> cranioid_mesh(int p, double eps1, double eps2) {
  return build_sbl_mesh(build_asymptotic_mesh(BoundaryCurve::cranioid(), 2), 1.0, p, eps1, eps2);
}

}  // namespace fixture
