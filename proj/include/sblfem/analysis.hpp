#pragma once

#include <functional>
#include <vector>

#include "sblfem/assembly.hpp"
#include "sblfem/femspace.hpp"

namespace sblfem {

/// Values of a pair (u, w) at one point.
struct FieldSample {
  double u = 0.0;
  Vec2 grad_u = Vec2::Zero();
  double w = 0.0;
};

/// Integration cell: the strip [a, b] x [0,1] of `map`'s reference square.
struct Cell {
  const ElementMap* map = nullptr;
  double a = 0.0, b = 1.0;
  int id = 0;  ///< element or parent id, passed back to the sampler
};

/// Called at each quadrature point with the cell, the map coordinates
/// (a + (b - a) xi_q, eta_q) and the physical point.
using CellSampler =
    std::function<FieldSample(const Cell& cell, double map_xi, double eta, const Vec2& x)>;

/// Squared L2 norms of u, grad u and w.
struct NormParts {
  double u2 = 0.0, grad_u2 = 0.0, w2 = 0.0;
};

/// One cell per element, covering the whole element.
std::vector<Cell> element_cells(const std::vector<MeshElement>& elements);

/// Tensor Gauss quadrature with det J weights; element sums are combined
/// pairwise in cell order.
NormParts integrate_norm_parts(const std::vector<Cell>& cells, const CellSampler& sample,
                               int quad_order);

/// sqrt(|u|^2 + eps2^2 |grad u|^2 + |w|^2)
double energy_norm(const NormParts& parts, double eps2);
/// sqrt((eps2/eps1) |w|^2 + eps2 |grad u|^2 + |u|^2); throws ConfigError if eps1 <= 0.
double balanced_norm(const NormParts& parts, double eps1, double eps2);

double energy_norm(const std::vector<MeshElement>& elements, const CellSampler& sample,
                   int quad_order, double eps2);
double balanced_norm(const std::vector<MeshElement>& elements, const CellSampler& sample,
                     int quad_order, double eps1, double eps2);

enum class ComparisonKind { Exact, Reference };

struct ErrorReport {
  double energy_error = 0.0, balanced_error = 0.0;
  double l2_u_error = 0.0, l2_w_error = 0.0, h1semi_u_error = 0.0;
  int quad_order = 0;
  ComparisonKind kind = ComparisonKind::Exact;
};

ErrorReport make_report(const NormParts& parts, double eps1, double eps2, int quad_order,
                        ComparisonKind kind);

/// u = (1 - x^2 - y^2)^2 on the unit disk with c = 1; satisfies the clamped
/// boundary conditions exactly.
struct ManufacturedCase {
  double eps1 = 1e-3, eps2 = 1e-1;

  double u(double x, double y) const;
  Vec2 grad_u(double x, double y) const;
  double laplacian_u(double x, double y) const;
  double bilaplacian_u(double x, double y) const;
  double w(double x, double y) const;  ///< eps1 * laplacian
  double f(double x, double y) const;  ///< eps1^2 bilap - eps2^2 lap + u

  ProblemConfig config(int p, double kappa = 1.0, int m = 2) const;
};

/// Integrates (u_N - u, w_N - w) on the solution's own mesh, default order p + 3.
ErrorReport error_against_exact(const Solution& sol, const ManufacturedCase& exact,
                                int quad_order = 0);

/// Integrates the difference on the reference mesh, default order ref.p + 3.
/// With a shared asymptotic mesh, every parent strip is cut at the breakpoints
/// of both meshes and the coarse field is evaluated in parent coordinates;
/// otherwise the coarse field is located by Newton inversion.
ErrorReport error_against_reference(const Solution& sol, const Solution& ref, int quad_order = 0);

/// Norm parts of the discrete solution itself.
NormParts solution_norm_parts(const Solution& sol, int quad_order = 0);

struct CoercivityResult {
  double max_defect = 0.0;  ///< max |v^T A v - (<cu,u> + eps2^2 |grad u|^2 + |w|^2)| / |||v|||^2
  double min_ratio = 0.0;   ///< min v^T A v / |||v|||^2
  int trials = 0;           ///< nonzero vectors probed
};

CoercivityResult coercivity_probe(const SBLMesh& mesh, const DofMap& u_map, const DofMap& w_map,
                                  const ProblemConfig& config, int trials, unsigned seed = 1);

}  // namespace sblfem
