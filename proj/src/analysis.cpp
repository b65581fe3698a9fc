#include "sblfem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <limits>
#include <set>

#include "sblfem/errors.hpp"
#include "sblfem/refspace.hpp"

namespace sblfem {

namespace {

NormParts pairwise_sum(const std::vector<NormParts>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 0) return {};
  if (hi - lo == 1) return v[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  NormParts a = pairwise_sum(v, lo, mid), b = pairwise_sum(v, mid, hi);
  return {a.u2 + b.u2, a.grad_u2 + b.grad_u2, a.w2 + b.w2};
}

}  // namespace

std::vector<Cell> element_cells(const std::vector<MeshElement>& elements) {
  std::vector<Cell> cells;
  cells.reserve(elements.size());
  for (int e = 0; e < static_cast<int>(elements.size()); ++e)
    cells.push_back({&elements[e].map, 0.0, 1.0, e});
  return cells;
}

NormParts integrate_norm_parts(const std::vector<Cell>& cells, const CellSampler& sample,
                               int quad_order) {
  const auto rule = gauss_rule(quad_order);
  std::vector<NormParts> per_cell(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const double width = cell.b - cell.a;
    NormParts acc;
    for (std::size_t j = 0; j < rule.size(); ++j) {
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const double xi = cell.a + width * rule.points[i], eta = rule.points[j];
        const double det = cell.map->jacobian(xi, eta).determinant() * width;
        const double wq = rule.weights[i] * rule.weights[j] * std::abs(det);
        const Vec2 x = cell.map->point(xi, eta);
        const FieldSample s = sample(cell, xi, eta, x);
        acc.u2 += wq * s.u * s.u;
        acc.grad_u2 += wq * s.grad_u.squaredNorm();
        acc.w2 += wq * s.w * s.w;
      }
    }
    per_cell[c] = acc;
  }
  return pairwise_sum(per_cell, 0, per_cell.size());
}

double energy_norm(const NormParts& p, double eps2) {
  return std::sqrt(p.u2 + eps2 * eps2 * p.grad_u2 + p.w2);
}

double balanced_norm(const NormParts& p, double eps1, double eps2) {
  if (!(eps1 > 0.0)) throw ConfigError("balanced norm needs eps1 > 0");
  return std::sqrt(eps2 / eps1 * p.w2 + eps2 * p.grad_u2 + p.u2);
}

double energy_norm(const std::vector<MeshElement>& elements, const CellSampler& sample,
                   int quad_order, double eps2) {
  return energy_norm(integrate_norm_parts(element_cells(elements), sample, quad_order), eps2);
}

double balanced_norm(const std::vector<MeshElement>& elements, const CellSampler& sample,
                     int quad_order, double eps1, double eps2) {
  if (!(eps1 > 0.0)) throw ConfigError("balanced norm needs eps1 > 0");
  return balanced_norm(integrate_norm_parts(element_cells(elements), sample, quad_order), eps1,
                       eps2);
}

ErrorReport make_report(const NormParts& parts, double eps1, double eps2, int quad_order,
                        ComparisonKind kind) {
  ErrorReport r;
  r.l2_u_error = std::sqrt(parts.u2);
  r.h1semi_u_error = std::sqrt(parts.grad_u2);
  r.l2_w_error = std::sqrt(parts.w2);
  r.energy_error = energy_norm(parts, eps2);
  r.balanced_error = balanced_norm(parts, eps1, eps2);
  r.quad_order = quad_order;
  r.kind = kind;
  return r;
}

// ---------------------------------------------------------------------------
// Manufactured case

double ManufacturedCase::u(double x, double y) const {
  double s = 1.0 - x * x - y * y;
  return s * s;
}

Vec2 ManufacturedCase::grad_u(double x, double y) const {
  double s = 1.0 - x * x - y * y;
  return Vec2(-4.0 * s * x, -4.0 * s * y);
}

double ManufacturedCase::laplacian_u(double x, double y) const {
  return 16.0 * (x * x + y * y) - 8.0;
}

double ManufacturedCase::bilaplacian_u(double, double) const { return 64.0; }

double ManufacturedCase::w(double x, double y) const { return eps1 * laplacian_u(x, y); }

double ManufacturedCase::f(double x, double y) const {
  return eps1 * eps1 * bilaplacian_u(x, y) - eps2 * eps2 * laplacian_u(x, y) + u(x, y);
}

ProblemConfig ManufacturedCase::config(int p, double kappa, int m) const {
  ProblemConfig c;
  c.curve = BoundaryCurve::circle(1.0);
  c.m = m;
  c.eps1 = eps1;
  c.eps2 = eps2;
  c.kappa = kappa;
  c.p = p;
  ManufacturedCase self = *this;
  c.f = [self](double x, double y) { return self.f(x, y); };
  c.forcing_name = "manufactured-disk";
  return c;
}

// ---------------------------------------------------------------------------
// Errors

NormParts solution_norm_parts(const Solution& sol, int quad_order) {
  if (quad_order <= 0) quad_order = sol.p + 3;
  auto sample = [&](const Cell& cell, double xi, double eta, const Vec2&) {
    FieldValue u = evaluate_local(sol, FieldKind::U, cell.id, xi, eta);
    FieldValue w = evaluate_local(sol, FieldKind::W, cell.id, xi, eta);
    return FieldSample{u.value, u.gradient, w.value};
  };
  return integrate_norm_parts(element_cells(sol.mesh->elements), sample, quad_order);
}

ErrorReport error_against_exact(const Solution& sol, const ManufacturedCase& exact,
                                int quad_order) {
  if (quad_order <= 0) quad_order = sol.p + 3;
  auto sample = [&](const Cell& cell, double xi, double eta, const Vec2& x) {
    FieldValue u = evaluate_local(sol, FieldKind::U, cell.id, xi, eta);
    FieldValue w = evaluate_local(sol, FieldKind::W, cell.id, xi, eta);
    return FieldSample{u.value - exact.u(x.x(), x.y()), u.gradient - exact.grad_u(x.x(), x.y()),
                       w.value - exact.w(x.x(), x.y())};
  };
  NormParts parts = integrate_norm_parts(element_cells(sol.mesh->elements), sample, quad_order);
  return make_report(parts, sol.eps1, sol.eps2, quad_order, ComparisonKind::Exact);
}

ErrorReport error_against_reference(const Solution& sol, const Solution& ref, int quad_order) {
  if (quad_order <= 0) quad_order = ref.p + 3;
  const auto& coarse_mesh = *sol.mesh;
  const auto& ref_mesh = *ref.mesh;
  NormParts parts;

  if (coarse_mesh.base->key() == ref_mesh.base->key()) {
    const auto& parents = ref_mesh.base->elements;
    std::vector<Cell> cells;
    for (int i = 0; i < static_cast<int>(parents.size()); ++i) {
      std::set<double> cuts;
      for (int id : coarse_mesh.children[i]) {
        cuts.insert(coarse_mesh.elements[id].xi_interval[0]);
        cuts.insert(coarse_mesh.elements[id].xi_interval[1]);
      }
      for (int id : ref_mesh.children[i]) {
        cuts.insert(ref_mesh.elements[id].xi_interval[0]);
        cuts.insert(ref_mesh.elements[id].xi_interval[1]);
      }
      std::vector<double> v(cuts.begin(), cuts.end());
      for (std::size_t k = 0; k + 1 < v.size(); ++k) cells.push_back({&parents[i].map, v[k], v[k + 1], i});
    }
    auto sample = [&](const Cell& cell, double pxi, double eta, const Vec2&) {
      // Evaluate each field on the sub-element containing the cell, so kinks
      // of the coarse solution never fall inside a cell.
      const double mid = 0.5 * (cell.a + cell.b);
      auto eval = [&](const Solution& s, FieldKind f) {
        const int child = s.mesh->child_at(cell.id, mid);
        const auto& iv = s.mesh->elements[child].xi_interval;
        double xi = std::clamp((pxi - iv[0]) / (iv[1] - iv[0]), 0.0, 1.0);
        return evaluate_local(s, f, child, xi, eta);
      };
      FieldValue uc = eval(sol, FieldKind::U), wc = eval(sol, FieldKind::W);
      FieldValue ur = eval(ref, FieldKind::U), wr = eval(ref, FieldKind::W);
      return FieldSample{ur.value - uc.value, ur.gradient - uc.gradient, wr.value - wc.value};
    };
    parts = integrate_norm_parts(cells, sample, quad_order);
  } else {
    auto sample = [&](const Cell& cell, double xi, double eta, const Vec2& x) {
      FieldValue ur = evaluate_local(ref, FieldKind::U, cell.id, xi, eta);
      FieldValue wr = evaluate_local(ref, FieldKind::W, cell.id, xi, eta);
      FieldValue uc = evaluate_field(sol, FieldKind::U, x);
      FieldValue wc = evaluate_field(sol, FieldKind::W, x);
      return FieldSample{ur.value - uc.value, ur.gradient - uc.gradient, wr.value - wc.value};
    };
    parts = integrate_norm_parts(element_cells(ref_mesh.elements), sample, quad_order);
  }
  return make_report(parts, ref.eps1, ref.eps2, quad_order, ComparisonKind::Reference);
}

// ---------------------------------------------------------------------------
// Coercivity

CoercivityResult coercivity_probe(const SBLMesh& mesh, const DofMap& u_map, const DofMap& w_map,
                                  const ProblemConfig& config, int trials, unsigned seed) {
  AssembledBlocks blocks = assemble_blocks(mesh, u_map, w_map, config);
  LinearSystem sys = compose_system(blocks, config.eps1, config.eps2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  CoercivityResult out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  const double e22 = config.eps2 * config.eps2;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd v(sys.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
    Eigen::VectorXd u = v.head(sys.n_u), w = v.tail(sys.n_w);
    const double ku = u.dot(blocks.stiff_uu * u);
    const double wmass = w.dot(blocks.mass_ww * w);
    const double norm2 = u.dot(blocks.mass_uu * u) + e22 * ku + wmass;
    if (norm2 == 0.0) continue;
    const double q = v.dot(sys.A * v);
    const double expected = u.dot(blocks.mass_c_uu * u) + e22 * ku + wmass;
    out.max_defect = std::max(out.max_defect, std::abs(q - expected) / norm2);
    out.min_ratio = std::min(out.min_ratio, q / norm2);
    ++out.trials;
  }
  if (out.trials == 0) out.min_ratio = 0.0;
  return out;
}

}  // namespace sblfem
