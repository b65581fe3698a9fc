#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "sblfem/jet.hpp"

namespace sblfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class CurveKind { Circle, Cranioid, Parametric };

/**
 * Closed analytic curve bounding a smooth domain, oriented counterclockwise.
 *
 * Components are evaluated on Taylor jets so every parametric derivative up
 * to order 3 is exact. The parameter is the curve's native one (not
 * arclength); normals and curvature do not depend on that choice.
 */
class BoundaryCurve {
 public:
  using Component = std::function<Jet(const Jet&)>;

  static BoundaryCurve circle(double radius = 1.0);
  /// r(t) = sin(t)/4 + sqrt(1 - 0.9 cos^2 t)/2 + sqrt(1 - 0.7 cos^2 t)/2.
  static BoundaryCurve cranioid();
  static BoundaryCurve parametric(Component x, Component y, double period,
                                  std::string name = "parametric");

  CurveKind kind() const { return impl_->kind; }
  const std::string& name() const { return impl_->name; }
  double period() const { return impl_->period; }
  /// Radius for circles, 0 otherwise.
  double radius() const { return impl_->radius; }

  Vec2 position(double theta) const;
  /// Parametric derivatives of order 0..3 at theta.
  std::array<Vec2, 4> derivatives(double theta) const;

  /// Sampled estimate (10^4 points) of min 1/|curvature|, cached.
  double min_curvature_radius() const { return impl_->min_radius; }

 private:
  struct Impl {
    CurveKind kind;
    std::string name;
    double period;
    double radius;
    Component x, y;
    double min_radius;
  };

  explicit BoundaryCurve(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  static BoundaryCurve make(Impl impl);

  std::shared_ptr<const Impl> impl_;
};

struct CurveFrame {
  Vec2 tangent;        ///< unit tangent
  Vec2 inward_normal;  ///< tangent rotated +90 degrees
  double curvature;    ///< signed; positive where the domain is locally convex
};

/// "circle" (with radius) or "cranioid". Throws ConfigError otherwise.
BoundaryCurve curve_from_name(const std::string& name, double radius = 1.0);

Vec2 curve_eval(const BoundaryCurve& curve, double theta);

/// Throws GeometryError if |curve'(theta)| < 1e-12.
CurveFrame curve_frame(const BoundaryCurve& curve, double theta);

/// position(theta) + rho * inward_normal(theta). Throws GeometryError unless
/// 0 <= rho < min_curvature_radius(curve).
Vec2 offset_point(const BoundaryCurve& curve, double theta, double rho);

/// Minimum of 1/|curvature| over `samples` equally spaced parameters.
double min_curvature_radius(const BoundaryCurve& curve, int samples = 10000);

/// Edge of an element, parametrized over t in [0,1].
class EdgeCurve {
 public:
  static EdgeCurve segment(const Vec2& a, const Vec2& b);
  /// Restriction of a boundary curve to the parameter range [theta0, theta1]
  /// (theta1 < theta0 allowed, traversing clockwise).
  static EdgeCurve boundary_arc(BoundaryCurve curve, double theta0, double theta1);

  Vec2 point(double t) const;
  Vec2 tangent(double t) const;
  bool is_straight() const { return std::holds_alternative<Segment>(shape_); }

 private:
  struct Segment {
    Vec2 a, b;
  };
  struct Arc {
    BoundaryCurve curve;
    double theta0, theta1;
  };
  explicit EdgeCurve(std::variant<Segment, Arc> s) : shape_(std::move(s)) {}
  std::variant<Segment, Arc> shape_;
};

/// Element sides. Sides 0/1 are parametrized by eta, sides 2/3 by xi.
enum Side : int { kXi0 = 0, kXi1 = 1, kEta0 = 2, kEta1 = 3 };

/// Reference coordinates of the point at parameter t on a side.
Vec2 side_point(int side, double t);

/// Gordon-Hall bilinear blending of four edge curves over [0,1]^2.
class TransfiniteMap {
 public:
  /// edges indexed by Side. Throws GeometryError on corner mismatch > 1e-10.
  explicit TransfiniteMap(std::array<EdgeCurve, 4> edges);

  Vec2 point(double xi, double eta) const;
  /// Columns are d/dxi and d/deta.
  Mat2 jacobian(double xi, double eta) const;
  const EdgeCurve& edge(int side) const { return edges_[side]; }
  /// Corners (0,0), (1,0), (0,1), (1,1).
  const std::array<Vec2, 4>& corners() const { return corners_; }

 private:
  std::array<EdgeCurve, 4> edges_;
  std::array<Vec2, 4> corners_;
};

/// Element map M = M_parent o A, where A(xi, eta) = (a + (b - a) xi, eta)
/// stretches the reference square onto the strip [a,b] x [0,1] of the
/// parent's reference square. Unsplit elements use [a,b] = [0,1].
class ElementMap {
 public:
  ElementMap() = default;
  explicit ElementMap(std::shared_ptr<const TransfiniteMap> parent, double a = 0.0,
                      double b = 1.0);

  Vec2 point(double xi, double eta) const { return parent_->point(parent_xi(xi), eta); }
  Mat2 jacobian(double xi, double eta) const;

  /// Corner by local index: 0 -> (0,0), 1 -> (1,0), 2 -> (0,1), 3 -> (1,1).
  Vec2 corner(int i) const;
  Vec2 edge_point(int side, double t) const;

  double parent_xi(double xi) const { return a_ + (b_ - a_) * xi; }
  double xi_begin() const { return a_; }
  double xi_end() const { return b_; }
  double width() const { return b_ - a_; }
  const TransfiniteMap& parent() const { return *parent_; }
  const std::shared_ptr<const TransfiniteMap>& parent_ptr() const { return parent_; }

  /// Sub-strip [lo, hi] of this element's own reference square.
  ElementMap restrict(double lo, double hi) const;

 private:
  std::shared_ptr<const TransfiniteMap> parent_;
  double a_ = 0.0;
  double b_ = 1.0;
};

ElementMap transfinite_map(std::array<EdgeCurve, 4> edges);

enum class LocateStatus { Inside, Outside, Failed };

struct InverseResult {
  LocateStatus status = LocateStatus::Failed;
  Vec2 ref{0.5, 0.5};
  double residual = 0.0;
  int iterations = 0;
};

inline constexpr double kLocateSlack = 1e-9;

/// Newton inversion of an element map, seeded at the center and restarted
/// from a 5x5 grid of seeds if needed. Inside results are clamped to [0,1]^2.
InverseResult inverse_map(const ElementMap& map, const Vec2& x, double tol = 1e-12);

}  // namespace sblfem
