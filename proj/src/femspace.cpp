#include "sblfem/femspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sblfem/errors.hpp"

namespace sblfem {

const char* to_string(FieldKind field) { return field == FieldKind::U ? "u" : "w"; }

int side_node(int p, int side, int t) {
  const int n = p + 1;
  switch (side) {
    case kXi0: return n * t;
    case kXi1: return p + n * t;
    case kEta0: return t;
    default: return t + n * p;
  }
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  // The smaller id becomes the root, so roots are independent of merge order.
  void merge(int a, int b) {
    a = find(a), b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

DofMap build_dof_map(const std::vector<MeshElement>& elements,
                     const std::vector<EdgeRecord>& edges, int p, FieldKind field) {
  if (p < 1) throw ConfigError("polynomial degree must be >= 1");
  const int ne = static_cast<int>(elements.size());
  const int nloc = (p + 1) * (p + 1);
  UnionFind uf(ne * nloc);

  for (const auto& r : edges) {
    if (r.elem_a < 0 || r.elem_a >= ne || r.elem_b < 0 || r.elem_b >= ne || r.side_a < 0 ||
        r.side_a > 3 || r.side_b < 0 || r.side_b > 3 || std::abs(r.orientation) != 1 ||
        (r.elem_a == r.elem_b && r.side_a == r.side_b))
      throw GeometryError("inconsistent edge record between elements " +
                          std::to_string(r.elem_a) + " and " + std::to_string(r.elem_b));
    for (int t = 0; t <= p; ++t) {
      int s = r.orientation > 0 ? t : p - t;
      uf.merge(r.elem_a * nloc + side_node(p, r.side_a, t),
               r.elem_b * nloc + side_node(p, r.side_b, s));
    }
  }

  DofMap map;
  map.field = field;
  map.p = p;
  map.num_elements = ne;
  map.node.resize(ne * nloc);
  std::vector<int> global_of_root(ne * nloc, -1);
  for (int e = 0; e < ne; ++e) {
    for (int k = 0; k < nloc; ++k) {
      int root = uf.find(e * nloc + k);
      if (global_of_root[root] < 0) global_of_root[root] = map.num_nodes++;
      map.node[e * nloc + k] = global_of_root[root];
    }
    std::vector<int> ids(map.node.begin() + e * nloc, map.node.begin() + (e + 1) * nloc);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw GeometryError("element " + std::to_string(e) + " is identified with itself");
  }

  std::vector<char> fixed(map.num_nodes, 0);
  if (field == FieldKind::U) {
    // Sides without a neighbour lie on the boundary (build_topology rejects
    // any other kind), plus the flagged curve side.
    std::vector<char> shared(ne * 4, 0);
    for (const auto& r : edges) shared[r.elem_a * 4 + r.side_a] = shared[r.elem_b * 4 + r.side_b] = 1;
    for (int e = 0; e < ne; ++e)
      for (int side = 0; side < 4; ++side) {
        if (shared[e * 4 + side] && !(side == kXi0 && elements[e].on_boundary)) continue;
        for (int t = 0; t <= p; ++t) fixed[map.node[e * nloc + side_node(p, side, t)]] = 1;
      }
  }
  map.free_index.assign(map.num_nodes, -1);
  for (int g = 0; g < map.num_nodes; ++g) {
    if (fixed[g]) map.constrained.push_back(g);
    else map.free_index[g] = map.num_free++;
  }
  map.dof.resize(map.node.size());
  for (std::size_t i = 0; i < map.node.size(); ++i) map.dof[i] = map.free_index[map.node[i]];
  return map;
}

DofMap build_dof_map(const SBLMesh& mesh, int p, FieldKind field) {
  return build_dof_map(mesh.elements, mesh.edges, p, field);
}

std::vector<Vec2> element_nodes(const MeshElement& element, int p) {
  const auto nodes = gll_nodes(p).nodes;
  std::vector<Vec2> out;
  out.reserve((p + 1) * (p + 1));
  for (int j = 0; j <= p; ++j)
    for (int i = 0; i <= p; ++i) out.push_back(element.map.point(nodes[i], nodes[j]));
  return out;
}

Eigen::VectorXd interpolate(const std::vector<MeshElement>& elements, const DofMap& map,
                            const std::function<double(double, double)>& g) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(map.num_free);
  const int nloc = map.nodes_per_element();
  for (int e = 0; e < map.num_elements; ++e) {
    const auto pts = element_nodes(elements[e], map.p);
    const int* dofs = map.element_dofs(e);
    for (int k = 0; k < nloc; ++k)
      if (dofs[k] >= 0) v[dofs[k]] = g(pts[k].x(), pts[k].y());
  }
  return v;
}

// ---------------------------------------------------------------------------
// Evaluation

FieldValue evaluate_local(const Solution& sol, FieldKind field, int element, double xi,
                          double eta) {
  std::shared_ptr<const TensorBasis> basis = sol.basis;
  if (!basis || basis->degree() != sol.p) basis = std::make_shared<TensorBasis>(sol.p);
  const DofMap& map = sol.dof_map(field);
  const Eigen::VectorXd& c = sol.coefficients(field);
  const int nloc = map.nodes_per_element();
  thread_local std::vector<double> values, grads;
  values.resize(nloc);
  grads.resize(2 * nloc);
  basis->eval(xi, eta, values.data(), grads.data());
  const int* dofs = map.element_dofs(element);
  double v = 0.0, gx = 0.0, gy = 0.0;
  for (int k = 0; k < nloc; ++k) {
    if (dofs[k] < 0) continue;
    double a = c[dofs[k]];
    v += a * values[k];
    gx += a * grads[2 * k];
    gy += a * grads[2 * k + 1];
  }
  Mat2 J = sol.mesh->elements[element].map.jacobian(xi, eta);
  FieldValue out;
  out.value = v;
  out.gradient = J.transpose().inverse() * Vec2(gx, gy);
  return out;
}

FieldValue evaluate_parent(const Solution& sol, FieldKind field, int parent, double parent_xi,
                           double eta) {
  const int child = sol.mesh->child_at(parent, parent_xi);
  const auto& iv = sol.mesh->elements[child].xi_interval;
  double xi = (parent_xi - iv[0]) / (iv[1] - iv[0]);
  xi = std::min(1.0, std::max(0.0, xi));
  return evaluate_local(sol, field, child, xi, eta);
}

bool locate(const SBLMesh& mesh, const Vec2& x, Location& out) {
  const auto& parents = mesh.base->elements;
  const auto& boxes = mesh.base->boxes;
  for (int i = 0; i < static_cast<int>(parents.size()); ++i) {
    if (!boxes.empty() && ((x - boxes[i][0]).minCoeff() < 0.0 || (boxes[i][1] - x).minCoeff() < 0.0))
      continue;
    auto res = inverse_map(parents[i].map, x);
    if (res.status == LocateStatus::Inside) {
      out.parent = i;
      out.ref = res.ref;
      return true;
    }
  }
  return false;
}

FieldValue evaluate_field(const Solution& sol, FieldKind field, const Vec2& x) {
  Location loc;
  if (!locate(*sol.mesh, x, loc)) {
    std::ostringstream os;
    os.precision(17);
    os << "point (" << x.x() << ", " << x.y() << ") lies in no element";
    throw NumericalError(os.str());
  }
  const int child = sol.mesh->child_at(loc.parent, loc.ref.x());
  const auto& el = sol.mesh->elements[child];
  const auto& iv = el.xi_interval;
  Vec2 ref((loc.ref.x() - iv[0]) / (iv[1] - iv[0]), loc.ref.y());
  // Parent coordinates resolve thin layers poorly; refine on the child map.
  if (iv[1] - iv[0] < 1.0) {
    auto res = inverse_map(el.map, x);
    if (res.status == LocateStatus::Inside) ref = res.ref;
  }
  ref = ref.cwiseMax(0.0).cwiseMin(1.0);
  return evaluate_local(sol, field, child, ref.x(), ref.y());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize_solution(const Solution& sol) {
  const auto& base = *sol.mesh->base;
  // Written by hand so every double carries 17 significant digits.
  std::ostringstream os;
  os << "{\n";
  os << " \"curve\": \"" << base.curve.name() << "\",\n";
  os << " \"radius\": " << number(base.curve.radius()) << ",\n";
  os << " \"m\": " << base.m << ",\n";
  os << " \"strip_fraction\": " << number(base.strip_fraction) << ",\n";
  os << " \"kappa\": " << number(sol.kappa) << ",\n";
  os << " \"p\": " << sol.p << ",\n";
  os << " \"eps1\": " << number(sol.eps1) << ",\n";
  os << " \"eps2\": " << number(sol.eps2) << ",\n";
  os << " \"regime\": \"" << to_string(sol.mesh->regime) << "\",\n";
  os << " \"residual\": " << number(sol.residual) << ",\n";
  auto vec = [&](const char* name, const Eigen::VectorXd& v, bool last) {
    os << " \"" << name << "\": [";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << number(v[i]);
    os << "]" << (last ? "\n" : ",\n");
  };
  vec("u", sol.u, false);
  vec("w", sol.w, true);
  os << "}\n";
  return os.str();
}

Solution deserialize_solution(const std::string& text) {
  try {
    auto doc = nlohmann::json::parse(text);
    auto curve = curve_from_name(doc.at("curve").get<std::string>(), doc.at("radius").get<double>());
    auto base = build_asymptotic_mesh(curve, doc.at("m").get<int>(),
                                      doc.at("strip_fraction").get<double>());
    Solution sol;
    sol.kappa = doc.at("kappa").get<double>();
    sol.p = doc.at("p").get<int>();
    sol.eps1 = doc.at("eps1").get<double>();
    sol.eps2 = doc.at("eps2").get<double>();
    sol.residual = doc.at("residual").get<double>();
    sol.mesh = build_sbl_mesh(base, sol.kappa, sol.p, sol.eps1, sol.eps2);
    sol.u_map = std::make_shared<DofMap>(build_dof_map(*sol.mesh, sol.p, FieldKind::U));
    sol.w_map = std::make_shared<DofMap>(build_dof_map(*sol.mesh, sol.p, FieldKind::W));
    sol.basis = std::make_shared<TensorBasis>(sol.p);
    auto u = doc.at("u").get<std::vector<double>>();
    auto w = doc.at("w").get<std::vector<double>>();
    if (static_cast<int>(u.size()) != sol.u_map->num_free ||
        static_cast<int>(w.size()) != sol.w_map->num_free)
      throw IoError("coefficient vector length does not match the rebuilt dof maps");
    sol.u = Eigen::Map<Eigen::VectorXd>(u.data(), u.size());
    sol.w = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
    return sol;
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(std::string("malformed solution JSON: ") + ex.what());
  } catch (const ConfigError& ex) {
    throw IoError(std::string("solution file describes an invalid setup: ") + ex.what());
  }
}

}  // namespace sblfem
