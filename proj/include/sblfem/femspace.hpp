#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sblfem/mesh.hpp"
#include "sblfem/refspace.hpp"

namespace sblfem {

/// u carries the homogeneous Dirichlet trace, w is unconstrained.
enum class FieldKind { U, W };

const char* to_string(FieldKind field);

/**
 * Global numbering of the tensor GLL nodes of a conforming mesh. Nodes are
 * identified through the mesh's edge records, never by coordinates.
 */
struct DofMap {
  FieldKind field = FieldKind::W;
  int p = 1;
  int num_elements = 0;
  int num_nodes = 0;  ///< global nodes, constrained ones included
  int num_free = 0;
  std::vector<int> node;              ///< element-major global node id of each local node
  std::vector<int> free_index;        ///< per global node: free dof or -1
  std::vector<int> constrained;       ///< global node ids with prescribed value 0
  std::vector<int> dof;               ///< element-major free dof of each local node, -1 if constrained

  int nodes_per_element() const { return (p + 1) * (p + 1); }
  const int* element_dofs(int e) const { return dof.data() + e * nodes_per_element(); }
  const int* element_nodes(int e) const { return node.data() + e * nodes_per_element(); }

  bool operator==(const DofMap&) const = default;
};

/// Throws GeometryError on inconsistent topology (bad edge records, or two
/// local nodes of one element identified with each other).
DofMap build_dof_map(const std::vector<MeshElement>& elements,
                     const std::vector<EdgeRecord>& edges, int p, FieldKind field);
DofMap build_dof_map(const SBLMesh& mesh, int p, FieldKind field);

/// Local node index on `side` at edge position t = 0..p (side parameter order).
int side_node(int p, int side, int t);

/// Physical coordinates of the GLL nodes of element e, lexicographic order.
std::vector<Vec2> element_nodes(const MeshElement& element, int p);

/// Nodal interpolant of g as a free-dof vector; constrained nodes are dropped.
Eigen::VectorXd interpolate(const std::vector<MeshElement>& elements, const DofMap& map,
                            const std::function<double(double, double)>& g);

struct Solution {
  std::shared_ptr<const SBLMesh> mesh;
  int p = 1;
  std::shared_ptr<const DofMap> u_map, w_map;
  std::shared_ptr<const TensorBasis> basis;
  Eigen::VectorXd u, w;  ///< free-dof coefficients
  double residual = 0.0;
  double eps1 = 1.0, eps2 = 1.0, kappa = 1.0;

  int dofs() const { return static_cast<int>(u.size() + w.size()); }
  const Eigen::VectorXd& coefficients(FieldKind f) const { return f == FieldKind::U ? u : w; }
  const DofMap& dof_map(FieldKind f) const { return f == FieldKind::U ? *u_map : *w_map; }
};

/// JSON with the mesh recipe, p, parameters and both coefficient vectors
/// (17 significant digits).
std::string serialize_solution(const Solution& sol);
/// Rebuilds the mesh and dof maps. Throws IoError on malformed input.
Solution deserialize_solution(const std::string& text);

struct FieldValue {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
};

/// Evaluates the field on element e at local reference coordinates.
FieldValue evaluate_local(const Solution& sol, FieldKind field, int element, double xi,
                          double eta);

/// Evaluates at parent (asymptotic element) coordinates: the sub-element is
/// chosen by comparing parent_xi with the stored breakpoints.
FieldValue evaluate_parent(const Solution& sol, FieldKind field, int parent, double parent_xi,
                           double eta);

/// Point location by Newton inversion of the parent maps, then evaluation.
/// Throws NumericalError if no element contains x.
FieldValue evaluate_field(const Solution& sol, FieldKind field, const Vec2& x);

/// Parent element and parent coordinates of a physical point; false if not found.
struct Location {
  int parent = -1;
  Vec2 ref = Vec2::Zero();
};
bool locate(const SBLMesh& mesh, const Vec2& x, Location& out);

}  // namespace sblfem
