#include "sblfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "sblfem/errors.hpp"
#include "sblfem/refspace.hpp"

namespace sblfem {

const char* to_string(LayerTag tag) {
  switch (tag) {
    case LayerTag::BL1: return "BL1";
    case LayerTag::BL2: return "BL2";
    case LayerTag::Regular: return "regular";
    default: return "interior";
  }
}

const char* to_string(Regime regime) {
  return regime == Regime::Asymptotic ? "asymptotic" : "pre-asymptotic";
}

namespace {

// Start and end vertex of each side, in the side's parameter direction.
std::pair<int, int> side_vertices(const MeshElement& e, int side) {
  const auto& v = e.vertices;
  switch (side) {
    case kXi0: return {v[0], v[2]};
    case kXi1: return {v[1], v[3]};
    case kEta0: return {v[0], v[1]};
    default: return {v[2], v[3]};
  }
}

}  // namespace

std::vector<EdgeRecord> build_topology(const std::vector<MeshElement>& elements) {
  struct Seen {
    int elem, side, start;
    bool matched;
  };
  std::map<std::pair<int, int>, Seen> open;
  std::vector<EdgeRecord> edges;
  for (int e = 0; e < static_cast<int>(elements.size()); ++e) {
    for (int side = 0; side < 4; ++side) {
      auto [a, b] = side_vertices(elements[e], side);
      if (a == b) throw GeometryError("collapsed side on element " + std::to_string(e));
      auto key = std::minmax(a, b);
      auto it = open.find(key);
      if (it == open.end()) {
        open.emplace(key, Seen{e, side, a, false});
        continue;
      }
      if (it->second.matched)
        throw GeometryError("side shared by more than two elements at element " +
                            std::to_string(e));
      it->second.matched = true;
      edges.push_back({it->second.elem, it->second.side, e, side, it->second.start == a ? 1 : -1});
    }
  }
  for (const auto& [key, seen] : open) {
    if (seen.matched) continue;
    const auto& e = elements[seen.elem];
    if (!(e.on_boundary && seen.side == kXi0))
      throw GeometryError("unshared side " + std::to_string(seen.side) + " of element " +
                          std::to_string(seen.elem) + " is not a boundary side");
  }
  std::sort(edges.begin(), edges.end(), [](const EdgeRecord& x, const EdgeRecord& y) {
    return std::tie(x.elem_a, x.side_a) < std::tie(y.elem_a, y.side_a);
  });
  return edges;
}

// ---------------------------------------------------------------------------
// Asymptotic mesh

std::string AsymptoticMesh::key() const {
  std::ostringstream os;
  os.precision(17);
  os << curve.name() << ':' << curve.radius() << ':' << m << ':' << strip_fraction;
  return os.str();
}

std::shared_ptr<const AsymptoticMesh> build_asymptotic_mesh(const BoundaryCurve& curve, int m,
                                                            double strip_fraction) {
  if (m < 1) throw ConfigError("angular refinement m must be >= 1");
  if (!(strip_fraction > 0.0 && strip_fraction <= 0.5))
    throw ConfigError("strip_fraction must lie in (0, 1/2]");

  const double period = curve.period();
  for (int i = 0; i < 10000; ++i) {
    auto d = curve.derivatives(period * i / 10000);
    if (d[0].x() * d[1].y() - d[0].y() * d[1].x() <= 0.0)
      throw GeometryError("boundary curve is not star-shaped with respect to the origin");
  }

  auto mesh = std::make_shared<AsymptoticMesh>(curve);
  mesh->m = m;
  mesh->strip_fraction = strip_fraction;
  mesh->ring_depth = strip_fraction * curve.min_curvature_radius();

  const int n = 4 * m;
  std::vector<double> theta(n + 1);
  // Start an eighth of a turn back so the block corners sit on the diagonals;
  // corners on the axes fold the block for elongated domains.
  for (int k = 0; k <= n; ++k) theta[k] = period * (k - 0.5 * m) / n;
  std::vector<Vec2> outer(n), inner(n);
  for (int k = 0; k < n; ++k) {
    outer[k] = curve.position(theta[k]);
    inner[k] = offset_point(curve, theta[k], mesh->ring_depth);
  }
  // Vertex ids: outer k -> k, inner k -> n + k, block interior from 2n.
  auto outer_id = [n](int k) { return k % n; };
  auto inner_id = [n](int k) { return n + k % n; };

  // Ring: eta runs clockwise so that (xi inward, eta) is positively oriented.
  for (int k = 0; k < n; ++k) {
    const int k1 = (k + 1) % n;
    std::array<EdgeCurve, 4> edges = {
        EdgeCurve::boundary_arc(curve, theta[k + 1], theta[k]),
        EdgeCurve::segment(inner[k1], inner[k]),
        EdgeCurve::segment(outer[k1], inner[k1]),
        EdgeCurve::segment(outer[k], inner[k]),
    };
    MeshElement e;
    e.map = transfinite_map(std::move(edges));
    e.tag = LayerTag::Regular;
    e.parent = k;
    e.on_boundary = true;
    e.vertices = {outer_id(k + 1), inner_id(k + 1), outer_id(k), inner_id(k)};
    mesh->elements.push_back(std::move(e));
  }
  mesh->num_boundary = n;

  // Block: boundary walk q -> grid position, counterclockwise.
  std::vector<Vec2> grid((m + 1) * (m + 1));
  std::vector<int> grid_id((m + 1) * (m + 1), -1);
  auto at = [m](int i, int j) { return i + (m + 1) * j; };
  for (int q = 0; q < n; ++q) {
    int i, j;
    if (q < m) i = q, j = 0;
    else if (q < 2 * m) i = m, j = q - m;
    else if (q < 3 * m) i = 3 * m - q, j = m;
    else i = 0, j = 4 * m - q;
    grid[at(i, j)] = inner[q];
    grid_id[at(i, j)] = inner_id(q);
  }
  int next_id = 2 * n;
  for (int j = 1; j < m; ++j) {
    for (int i = 1; i < m; ++i) {
      double s = static_cast<double>(i) / m, t = static_cast<double>(j) / m;
      grid[at(i, j)] = (1 - s) * grid[at(0, j)] + s * grid[at(m, j)] + (1 - t) * grid[at(i, 0)] +
                       t * grid[at(i, m)] -
                       ((1 - s) * (1 - t) * grid[at(0, 0)] + s * (1 - t) * grid[at(m, 0)] +
                        (1 - s) * t * grid[at(0, m)] + s * t * grid[at(m, m)]);
      grid_id[at(i, j)] = next_id++;
    }
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const Vec2 &c00 = grid[at(i, j)], &c10 = grid[at(i + 1, j)], &c01 = grid[at(i, j + 1)],
                 &c11 = grid[at(i + 1, j + 1)];
      std::array<EdgeCurve, 4> edges = {EdgeCurve::segment(c00, c01), EdgeCurve::segment(c10, c11),
                                        EdgeCurve::segment(c00, c10), EdgeCurve::segment(c01, c11)};
      MeshElement e;
      e.map = transfinite_map(std::move(edges));
      e.tag = LayerTag::Interior;
      e.parent = static_cast<int>(mesh->elements.size());
      e.vertices = {grid_id[at(i, j)], grid_id[at(i + 1, j)], grid_id[at(i, j + 1)],
                    grid_id[at(i + 1, j + 1)]};
      mesh->elements.push_back(std::move(e));
    }
  }

  mesh->edges = build_topology(mesh->elements);
  auto report = check_admissibility(mesh->elements, mesh->edges, 12, 2);
  for (int e = 0; e < mesh->size(); ++e) {
    if (!(report.min_det[e] > 0.0))
      throw GeometryError("asymptotic mesh element " + std::to_string(e) +
                          " has nonpositive Jacobian (min det J = " +
                          std::to_string(report.min_det[e]) + ")");
  }
  // Padded boxes from 33 points per side; the pad covers the bulge of a
  // curved side between samples.
  for (const auto& el : mesh->elements) {
    Vec2 lo = el.map.corner(0), hi = lo;
    for (int side = 0; side < 4; ++side)
      for (int k = 0; k <= 32; ++k) {
        Vec2 q = el.map.edge_point(side, k / 32.0);
        lo = lo.cwiseMin(q);
        hi = hi.cwiseMax(q);
      }
    Vec2 pad = Vec2::Constant(0.02 * (hi - lo).norm());
    mesh->boxes.push_back({lo - pad, hi + pad});
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// Spectral boundary layer mesh

double layer_ratio(double kappa, int p, double eps1, double eps2) {
  return kappa * p * eps1 / eps2;
}

Regime sbl_regime(double kappa, int p, double eps1, double eps2) {
  return layer_ratio(kappa, p, eps1, eps2) < 0.5 ? Regime::PreAsymptotic : Regime::Asymptotic;
}

SplitPoints split_points(double kappa, int p, double eps1, double eps2) {
  const double wide = kappa * p * eps2;
  return {layer_ratio(kappa, p, eps1, eps2), std::min(wide, 0.5), wide >= 0.5};
}

int SBLMesh::child_at(int parent, double parent_xi) const {
  const auto& kids = children.at(parent);
  for (int id : kids)
    if (parent_xi <= elements[id].xi_interval[1]) return id;
  return kids.back();
}

std::shared_ptr<const SBLMesh> build_sbl_mesh(std::shared_ptr<const AsymptoticMesh> base,
                                              double kappa, int p, double eps1, double eps2) {
  if (!(eps1 > 0.0 && eps1 <= eps2 && eps2 <= 1.0))
    throw ConfigError("need 0 < eps1 <= eps2 <= 1");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (p < 1) throw ConfigError("polynomial degree must be >= 1");

  auto mesh = std::make_shared<SBLMesh>();
  mesh->base = base;
  mesh->kappa = kappa;
  mesh->p = p;
  mesh->eps1 = eps1;
  mesh->eps2 = eps2;
  mesh->regime = sbl_regime(kappa, p, eps1, eps2);
  mesh->children.resize(base->size());

  if (mesh->regime == Regime::Asymptotic) {
    mesh->elements = base->elements;
    mesh->edges = base->edges;
    for (int e = 0; e < base->size(); ++e) mesh->children[e] = {e};
    return mesh;
  }

  const SplitPoints split = split_points(kappa, p, eps1, eps2);
  mesh->clamped = split.clamped;
  if (!(split.layer2 > split.layer1))
    throw ConfigError("degenerate BL2 layer: kappa p eps1/eps2 = " + std::to_string(split.layer1) +
                      " >= min(kappa p eps2, 1/2) = " + std::to_string(split.layer2) +
                      " (requires eps1 < eps2^2)");
  const std::array<double, 4> cuts = {0.0, split.layer1, split.layer2, 1.0};
  const std::array<LayerTag, 3> tags = {LayerTag::BL1, LayerTag::BL2, LayerTag::Regular};

  int next_vertex = 0;
  for (const auto& e : base->elements)
    for (int v : e.vertices) next_vertex = std::max(next_vertex, v + 1);
  // New vertices on a lateral side, keyed by its (xi = 0, xi = 1) end vertices.
  std::map<std::tuple<int, int, int>, int> split_vertex;
  auto cut_vertex = [&](int from, int to, int index) {
    if (index == 0) return from;
    if (index == 3) return to;
    auto [it, inserted] = split_vertex.try_emplace({from, to, index}, next_vertex);
    if (inserted) ++next_vertex;
    return it->second;
  };

  const int n2 = base->num_boundary;
  mesh->elements.resize(base->size() + 2 * n2);
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < n2; ++i) {
      const auto& parent = base->elements[i];
      const auto& v = parent.vertices;
      MeshElement e;
      e.map = parent.map.restrict(cuts[k], cuts[k + 1]);
      e.tag = tags[k];
      e.parent = i;
      e.xi_interval = {cuts[k], cuts[k + 1]};
      e.on_boundary = k == 0;
      e.vertices = {cut_vertex(v[0], v[1], k), cut_vertex(v[0], v[1], k + 1),
                    cut_vertex(v[2], v[3], k), cut_vertex(v[2], v[3], k + 1)};
      const int id = k * n2 + i;
      mesh->elements[id] = std::move(e);
      mesh->children[i].push_back(id);
    }
  }
  for (int i = n2; i < base->size(); ++i) {
    const int id = i + 2 * n2;
    mesh->elements[id] = base->elements[i];
    mesh->children[i] = {id};
  }
  mesh->edges = build_topology(mesh->elements);
  return mesh;
}

// ---------------------------------------------------------------------------
// Admissibility

bool AdmissibilityReport::positive() const {
  return std::all_of(min_det.begin(), min_det.end(), [](double d) { return d > 0.0; });
}

double AdmissibilityReport::global_min_det() const {
  return min_det.empty() ? 0.0 : *std::min_element(min_det.begin(), min_det.end());
}

AdmissibilityReport check_admissibility(const std::vector<MeshElement>& elements,
                                        const std::vector<EdgeRecord>& edges, int quad_order,
                                        int edge_points) {
  AdmissibilityReport report;
  const auto rule = gauss_rule(quad_order);
  for (const auto& e : elements) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double x : rule.points) {
      for (double y : rule.points) {
        double d = e.map.jacobian(x, y).determinant();
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    }
    report.min_det.push_back(lo);
    report.max_det.push_back(hi);
  }
  const auto nodes = gll_nodes(std::max(edge_points, 1)).nodes;
  for (int k = 0; k < static_cast<int>(edges.size()); ++k) {
    const auto& r = edges[k];
    for (double t : nodes) {
      double s = r.orientation > 0 ? t : 1.0 - t;
      double gap = (elements[r.elem_a].map.edge_point(r.side_a, t) -
                    elements[r.elem_b].map.edge_point(r.side_b, s))
                       .norm();
      if (gap > report.worst_edge_mismatch || report.worst_edge < 0) {
        report.worst_edge_mismatch = gap;
        report.worst_edge = k;
      }
    }
  }
  return report;
}

AdmissibilityReport check_admissibility(const SBLMesh& mesh, int quad_order) {
  auto report = check_admissibility(mesh.elements, mesh.edges, quad_order, mesh.p);
  report.clamped = mesh.clamped;
  return report;
}

double mesh_area(const std::vector<MeshElement>& elements, int quad_order) {
  const auto rule = gauss_rule(quad_order);
  double area = 0.0;
  for (const auto& e : elements) {
    double a = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
      for (std::size_t j = 0; j < rule.size(); ++j)
        a += rule.weights[i] * rule.weights[j] *
             e.map.jacobian(rule.points[i], rule.points[j]).determinant();
    area += a;
  }
  return area;
}

// ---------------------------------------------------------------------------
// Export

namespace {

// Corner order in exported files: counterclockwise from (0,0).
constexpr std::array<int, 4> kCcwCorners = {0, 1, 3, 2};

std::string export_json(const SBLMesh& mesh) {
  using nlohmann::json;
  json doc;
  doc["regime"] = to_string(mesh.regime);
  doc["kappa"] = mesh.kappa;
  doc["p"] = mesh.p;
  doc["eps1"] = mesh.eps1;
  doc["eps2"] = mesh.eps2;
  doc["clamped"] = mesh.clamped;
  json elements = json::array();
  for (int id = 0; id < mesh.size(); ++id) {
    const auto& e = mesh.elements[id];
    json corners = json::array();
    for (int c : kCcwCorners) {
      Vec2 x = e.map.corner(c);
      corners.push_back({x.x(), x.y()});
    }
    elements.push_back({{"id", id},
                        {"tag", to_string(e.tag)},
                        {"parent", e.parent},
                        {"xi_interval", {e.xi_interval[0], e.xi_interval[1]}},
                        {"corners", corners}});
  }
  doc["elements"] = std::move(elements);
  json edges = json::array();
  for (const auto& r : mesh.edges)
    edges.push_back(
        {{"a", {r.elem_a, r.side_a}}, {"b", {r.elem_b, r.side_b}}, {"orientation", r.orientation}});
  doc["edges"] = std::move(edges);
  return doc.dump(1) + "\n";
}

const char* tag_color(LayerTag tag) {
  switch (tag) {
    case LayerTag::BL1: return "#d62728";
    case LayerTag::BL2: return "#ff7f0e";
    case LayerTag::Regular: return "#1f77b4";
    default: return "#555555";
  }
}

std::string export_svg(const SBLMesh& mesh) {
  constexpr int kSamples = 16;
  // Counterclockwise walk: (side, reversed).
  constexpr std::array<std::pair<int, bool>, 4> walk = {
      {{kEta0, false}, {kXi1, false}, {kEta1, true}, {kXi0, true}}};

  std::vector<std::vector<Vec2>> outlines;
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (const auto& e : mesh.elements) {
    std::vector<Vec2> pts;
    for (auto [side, reversed] : walk) {
      for (int s = 0; s < kSamples; ++s) {
        double t = static_cast<double>(s) / kSamples;
        Vec2 x = e.map.edge_point(side, reversed ? 1.0 - t : t);
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
        pts.push_back(x);
      }
    }
    outlines.push_back(std::move(pts));
  }
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const double pad = 0.02 * span;
  std::ostringstream os;
  os.precision(9);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\""
     << lo.x() - pad << ' ' << -hi.y() - pad << ' ' << hi.x() - lo.x() + 2 * pad << ' '
     << hi.y() - lo.y() + 2 * pad << "\">\n";
  for (int id = 0; id < mesh.size(); ++id) {
    os << "<path data-element=\"" << id << "\" data-tag=\"" << to_string(mesh.elements[id].tag)
       << "\" fill=\"none\" stroke=\"" << tag_color(mesh.elements[id].tag)
       << "\" stroke-width=\"" << 0.002 * span << "\" d=\"";
    const auto& pts = outlines[id];
    for (std::size_t i = 0; i < pts.size(); ++i)
      os << (i == 0 ? "M" : " L") << pts[i].x() << ' ' << -pts[i].y();
    os << " Z\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string export_mesh(const SBLMesh& mesh, MeshFormat format) {
  return format == MeshFormat::Json ? export_json(mesh) : export_svg(mesh);
}

MeshSummary import_mesh_json(const std::string& text) {
  using nlohmann::json;
  MeshSummary out;
  try {
    json doc = json::parse(text);
    out.regime = doc.at("regime").get<std::string>();
    out.kappa = doc.at("kappa").get<double>();
    out.p = doc.at("p").get<int>();
    out.eps1 = doc.at("eps1").get<double>();
    out.eps2 = doc.at("eps2").get<double>();
    for (const auto& e : doc.at("elements")) {
      MeshSummary::Element el;
      el.id = e.at("id").get<int>();
      el.parent = e.at("parent").get<int>();
      el.tag = e.at("tag").get<std::string>();
      el.xi_interval = {e.at("xi_interval").at(0).get<double>(),
                        e.at("xi_interval").at(1).get<double>()};
      for (int c = 0; c < 4; ++c)
        el.corners[c] = Vec2(e.at("corners").at(c).at(0).get<double>(),
                             e.at("corners").at(c).at(1).get<double>());
      out.elements.push_back(el);
    }
    for (const auto& r : doc.at("edges"))
      out.edges.push_back({r.at("a").at(0).get<int>(), r.at("a").at(1).get<int>(),
                           r.at("b").at(0).get<int>(), r.at("b").at(1).get<int>(),
                           r.at("orientation").get<int>()});
  } catch (const json::exception& ex) {
    throw IoError(std::string("malformed mesh JSON: ") + ex.what());
  }
  return out;
}

}  // namespace sblfem
