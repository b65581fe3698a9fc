#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "sblfem/geometry.hpp"

namespace sblfem {

enum class LayerTag { BL1, BL2, Regular, Interior };
enum class Regime { Asymptotic, PreAsymptotic };

const char* to_string(LayerTag tag);
const char* to_string(Regime regime);

/// Two element sides identified with each other. orientation = +1 when the
/// side parameters run the same way, -1 when reversed.
struct EdgeRecord {
  int elem_a, side_a;
  int elem_b, side_b;
  int orientation;
};

struct MeshElement {
  ElementMap map;
  LayerTag tag = LayerTag::Interior;
  int parent = 0;                           ///< asymptotic element id
  std::array<double, 2> xi_interval{0, 1};  ///< strip of the parent square
  bool on_boundary = false;                 ///< side xi = 0 lies on the boundary curve
  std::array<int, 4> vertices{};            ///< topological ids of (0,0),(1,0),(0,1),(1,1)
};

/// Edge identification from shared vertex ids. Throws GeometryError if a side
/// is shared by more than two elements or an unshared side is not a boundary side.
std::vector<EdgeRecord> build_topology(const std::vector<MeshElement>& elements);

/**
 * Fixed mesh of the domain: one ring of 4m boundary-fitted elements around a
 * straight-edged m x m block. Boundary elements come first and have their
 * xi = 0 side on the curve with xi increasing inward.
 */
struct AsymptoticMesh {
  explicit AsymptoticMesh(BoundaryCurve c) : curve(std::move(c)) {}

  BoundaryCurve curve;
  int m = 1;
  double strip_fraction = 0.5;
  double ring_depth = 0.0;  ///< rho_0
  std::vector<MeshElement> elements;
  int num_boundary = 0;  ///< N2
  std::vector<EdgeRecord> edges;
  /// Padded bounding box (lower, upper) per element, for point location.
  /// May be empty, in which case every element is tried.
  std::vector<std::array<Vec2, 2>> boxes;

  int size() const { return static_cast<int>(elements.size()); }  ///< N1
  /// Identifies the construction; equal keys give identical element maps.
  std::string key() const;
};

std::shared_ptr<const AsymptoticMesh> build_asymptotic_mesh(const BoundaryCurve& curve, int m,
                                                            double strip_fraction = 0.5);

/// Reference-coordinate breakpoints of a split boundary element.
struct SplitPoints {
  double layer1;  ///< kappa p eps1 / eps2
  double layer2;  ///< min(kappa p eps2, 1/2)
  bool clamped;   ///< kappa p eps2 >= 1/2
};

double layer_ratio(double kappa, int p, double eps1, double eps2);
Regime sbl_regime(double kappa, int p, double eps1, double eps2);
SplitPoints split_points(double kappa, int p, double eps1, double eps2);

struct SBLMesh {
  std::shared_ptr<const AsymptoticMesh> base;
  double kappa = 1.0;
  int p = 1;
  double eps1 = 1.0, eps2 = 1.0;
  Regime regime = Regime::Asymptotic;
  bool clamped = false;
  std::vector<MeshElement> elements;
  std::vector<EdgeRecord> edges;
  /// children[parent] lists element ids covering that parent, in xi order.
  std::vector<std::vector<int>> children;

  int size() const { return static_cast<int>(elements.size()); }
  /// Child of `parent` whose xi interval contains parent_xi.
  int child_at(int parent, double parent_xi) const;
};

std::shared_ptr<const SBLMesh> build_sbl_mesh(std::shared_ptr<const AsymptoticMesh> base,
                                              double kappa, int p, double eps1, double eps2);

struct AdmissibilityReport {
  std::vector<double> min_det, max_det;
  double worst_edge_mismatch = 0.0;
  int worst_edge = -1;
  bool clamped = false;

  bool positive() const;
  double global_min_det() const;
};

/// det J at tensor Gauss points of `quad_order`, shared edges at GLL points of
/// degree max(p, 1). Report only.
AdmissibilityReport check_admissibility(const SBLMesh& mesh, int quad_order);
AdmissibilityReport check_admissibility(const std::vector<MeshElement>& elements,
                                        const std::vector<EdgeRecord>& edges, int quad_order,
                                        int edge_points);

/// Sum of the integrals of det J over all elements.
double mesh_area(const std::vector<MeshElement>& elements, int quad_order);

enum class MeshFormat { Json, Svg };

std::string export_mesh(const SBLMesh& mesh, MeshFormat format);

/// Element records read back from exported JSON.
struct MeshSummary {
  std::string regime;
  double kappa = 0, eps1 = 0, eps2 = 0;
  int p = 0;
  struct Element {
    int id, parent;
    std::string tag;
    std::array<double, 2> xi_interval;
    std::array<Vec2, 4> corners;
  };
  std::vector<Element> elements;
  std::vector<EdgeRecord> edges;
};

MeshSummary import_mesh_json(const std::string& text);

}  // namespace sblfem
