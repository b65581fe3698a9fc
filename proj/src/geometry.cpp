#include "sblfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sblfem/errors.hpp"

namespace sblfem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double theta, double period) {
  double t = std::fmod(theta, period);
  return t < 0.0 ? t + period : t;
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

// ---------------------------------------------------------------------------
// BoundaryCurve

BoundaryCurve BoundaryCurve::make(Impl impl) {
  auto shared = std::make_shared<Impl>(std::move(impl));
  BoundaryCurve curve(shared);
  shared->min_radius = sblfem::min_curvature_radius(curve);
  return curve;
}

BoundaryCurve BoundaryCurve::circle(double radius) {
  if (!(radius > 0.0)) throw GeometryError("circle radius must be positive");
  Impl impl{CurveKind::Circle,
            "circle",
            kTwoPi,
            radius,
            [radius](const Jet& t) { return radius * cos(t); },
            [radius](const Jet& t) { return radius * sin(t); },
            0.0};
  return make(std::move(impl));
}

BoundaryCurve BoundaryCurve::cranioid() {
  auto r = [](const Jet& t) {
    Jet c = cos(t);
    Jet c2 = c * c;
    return 0.25 * sin(t) + 0.5 * sqrt(1.0 - 0.9 * c2) + 0.5 * sqrt(1.0 - 0.7 * c2);
  };
  Impl impl{CurveKind::Cranioid,
            "cranioid",
            kTwoPi,
            0.0,
            [r](const Jet& t) { return r(t) * cos(t); },
            [r](const Jet& t) { return r(t) * sin(t); },
            0.0};
  return make(std::move(impl));
}

BoundaryCurve BoundaryCurve::parametric(Component x, Component y, double period,
                                        std::string name) {
  if (!(period > 0.0)) throw GeometryError("curve period must be positive");
  Impl impl{CurveKind::Parametric, std::move(name), period, 0.0, std::move(x), std::move(y),
            0.0};
  return make(std::move(impl));
}

Vec2 BoundaryCurve::position(double theta) const {
  Jet t = Jet::constant(wrap(theta, impl_->period));
  return {impl_->x(t).value(), impl_->y(t).value()};
}

std::array<Vec2, 4> BoundaryCurve::derivatives(double theta) const {
  Jet t = Jet::variable(wrap(theta, impl_->period));
  Jet x = impl_->x(t);
  Jet y = impl_->y(t);
  std::array<Vec2, 4> d;
  for (int k = 0; k < 4; ++k) d[k] = Vec2(x.derivative(k), y.derivative(k));
  return d;
}

BoundaryCurve curve_from_name(const std::string& name, double radius) {
  if (name == "circle") return BoundaryCurve::circle(radius);
  if (name == "cranioid") return BoundaryCurve::cranioid();
  throw ConfigError("unknown curve '" + name + "' (expected circle or cranioid)");
}

Vec2 curve_eval(const BoundaryCurve& curve, double theta) { return curve.position(theta); }

CurveFrame curve_frame(const BoundaryCurve& curve, double theta) {
  auto d = curve.derivatives(theta);
  double speed = d[1].norm();
  if (speed < 1e-12) throw GeometryError("degenerate tangent at theta = " + std::to_string(theta));
  Vec2 tangent = d[1] / speed;
  Vec2 normal(-tangent.y(), tangent.x());
  double kappa = cross(d[1], d[2]) / (speed * speed * speed);
  return {tangent, normal, kappa};
}

Vec2 offset_point(const BoundaryCurve& curve, double theta, double rho) {
  if (rho < 0.0) throw GeometryError("negative offset distance");
  if (rho >= curve.min_curvature_radius())
    throw GeometryError("offset " + std::to_string(rho) +
                        " leaves the tubular neighborhood (min curvature radius " +
                        std::to_string(curve.min_curvature_radius()) + ")");
  return curve.position(theta) + rho * curve_frame(curve, theta).inward_normal;
}

double min_curvature_radius(const BoundaryCurve& curve, int samples) {
  double max_kappa = 0.0;
  for (int i = 0; i < samples; ++i) {
    double theta = curve.period() * i / samples;
    max_kappa = std::max(max_kappa, std::abs(curve_frame(curve, theta).curvature));
  }
  return max_kappa > 0.0 ? 1.0 / max_kappa : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// EdgeCurve

EdgeCurve EdgeCurve::segment(const Vec2& a, const Vec2& b) { return EdgeCurve(Segment{a, b}); }

EdgeCurve EdgeCurve::boundary_arc(BoundaryCurve curve, double theta0, double theta1) {
  return EdgeCurve(Arc{std::move(curve), theta0, theta1});
}

Vec2 EdgeCurve::point(double t) const {
  if (auto* s = std::get_if<Segment>(&shape_)) return (1.0 - t) * s->a + t * s->b;
  const auto& arc = std::get<Arc>(shape_);
  // Endpoints are evaluated at the exact stored parameters so that shared
  // corners agree bitwise between neighbors.
  double theta = t == 1.0 ? arc.theta1 : arc.theta0 + t * (arc.theta1 - arc.theta0);
  return arc.curve.position(theta);
}

Vec2 EdgeCurve::tangent(double t) const {
  if (auto* s = std::get_if<Segment>(&shape_)) return s->b - s->a;
  const auto& arc = std::get<Arc>(shape_);
  double dtheta = arc.theta1 - arc.theta0;
  return dtheta * arc.curve.derivatives(arc.theta0 + t * dtheta)[1];
}

// ---------------------------------------------------------------------------
// Transfinite maps

Vec2 side_point(int side, double t) {
  switch (side) {
    case kXi0: return {0.0, t};
    case kXi1: return {1.0, t};
    case kEta0: return {t, 0.0};
    default: return {t, 1.0};
  }
}

TransfiniteMap::TransfiniteMap(std::array<EdgeCurve, 4> edges) : edges_(std::move(edges)) {
  corners_ = {edges_[kXi0].point(0.0), edges_[kXi1].point(0.0), edges_[kXi0].point(1.0),
              edges_[kXi1].point(1.0)};
  const std::array<Vec2, 4> other = {edges_[kEta0].point(0.0), edges_[kEta0].point(1.0),
                                     edges_[kEta1].point(0.0), edges_[kEta1].point(1.0)};
  for (int i = 0; i < 4; ++i) {
    if ((corners_[i] - other[i]).norm() > 1e-10)
      throw GeometryError("element edges do not meet at corner " + std::to_string(i));
  }
}

Vec2 TransfiniteMap::point(double xi, double eta) const {
  const auto& c = corners_;
  Vec2 blend = (1.0 - xi) * edges_[kXi0].point(eta) + xi * edges_[kXi1].point(eta) +
               (1.0 - eta) * edges_[kEta0].point(xi) + eta * edges_[kEta1].point(xi);
  Vec2 bilinear = (1.0 - xi) * (1.0 - eta) * c[0] + xi * (1.0 - eta) * c[1] +
                  (1.0 - xi) * eta * c[2] + xi * eta * c[3];
  return blend - bilinear;
}

Mat2 TransfiniteMap::jacobian(double xi, double eta) const {
  const auto& c = corners_;
  Vec2 dxi = edges_[kXi1].point(eta) - edges_[kXi0].point(eta) +
             (1.0 - eta) * edges_[kEta0].tangent(xi) + eta * edges_[kEta1].tangent(xi) -
             ((1.0 - eta) * (c[1] - c[0]) + eta * (c[3] - c[2]));
  Vec2 deta = (1.0 - xi) * edges_[kXi0].tangent(eta) + xi * edges_[kXi1].tangent(eta) +
              edges_[kEta1].point(xi) - edges_[kEta0].point(xi) -
              ((1.0 - xi) * (c[2] - c[0]) + xi * (c[3] - c[1]));
  Mat2 J;
  J.col(0) = dxi;
  J.col(1) = deta;
  return J;
}

ElementMap::ElementMap(std::shared_ptr<const TransfiniteMap> parent, double a, double b)
    : parent_(std::move(parent)), a_(a), b_(b) {
  if (!(b_ > a_)) throw GeometryError("empty element strip");
}

Mat2 ElementMap::jacobian(double xi, double eta) const {
  Mat2 J = parent_->jacobian(parent_xi(xi), eta);
  J.col(0) *= (b_ - a_);
  return J;
}

Vec2 ElementMap::corner(int i) const { return point(i % 2, i / 2); }

Vec2 ElementMap::edge_point(int side, double t) const {
  Vec2 r = side_point(side, t);
  return point(r.x(), r.y());
}

ElementMap ElementMap::restrict(double lo, double hi) const {
  return ElementMap(parent_, lo == 0.0 ? a_ : parent_xi(lo), hi == 1.0 ? b_ : parent_xi(hi));
}

ElementMap transfinite_map(std::array<EdgeCurve, 4> edges) {
  return ElementMap(std::make_shared<const TransfiniteMap>(std::move(edges)));
}

// ---------------------------------------------------------------------------
// Inversion

namespace {

struct Attempt {
  Vec2 ref;
  double residual;
  int iterations;
  bool converged;
};

Attempt newton(const ElementMap& map, const Vec2& x, Vec2 r, double tol) {
  constexpr int kMaxIter = 50;
  double residual = std::numeric_limits<double>::infinity();
  Attempt best{r, residual, 0, false};
  for (int it = 0; it < kMaxIter; ++it) {
    Vec2 f = map.point(r.x(), r.y()) - x;
    residual = f.norm();
    if (residual < best.residual) best = {r, residual, it, false};
    Mat2 J = map.jacobian(r.x(), r.y());
    double det = J.determinant();
    if (det == 0.0 || !std::isfinite(det)) break;
    Vec2 step = J.inverse() * f;
    r -= step;
    r = r.cwiseMax(-1.0).cwiseMin(2.0);
    if (step.lpNorm<Eigen::Infinity>() <= 1e-15 || residual == 0.0) {
      Vec2 g = map.point(r.x(), r.y()) - x;
      if (g.norm() <= best.residual) best = {r, g.norm(), it + 1, false};
      break;
    }
  }
  best.converged = best.residual <= tol;
  return best;
}

bool in_box(const Vec2& r) {
  return r.x() >= -kLocateSlack && r.x() <= 1.0 + kLocateSlack && r.y() >= -kLocateSlack &&
         r.y() <= 1.0 + kLocateSlack;
}

InverseResult finish(const Attempt& a, LocateStatus status) {
  InverseResult out;
  out.status = status;
  out.ref = status == LocateStatus::Inside ? Vec2(a.ref.cwiseMax(0.0).cwiseMin(1.0)) : a.ref;
  out.residual = a.residual;
  out.iterations = a.iterations;
  return out;
}

}  // namespace

InverseResult inverse_map(const ElementMap& map, const Vec2& x, double tol) {
  Attempt best = newton(map, x, Vec2(0.5, 0.5), tol);
  if (best.converged && in_box(best.ref)) return finish(best, LocateStatus::Inside);
  bool converged_outside = best.converged;

  // The analytic continuation of a curved map may have spurious preimages
  // outside the square, so an outside verdict needs every seed.
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      Attempt a = newton(map, x, Vec2(0.1 + 0.2 * i, 0.1 + 0.2 * j), tol);
      if (a.converged && in_box(a.ref)) return finish(a, LocateStatus::Inside);
      converged_outside = converged_outside || a.converged;
      if (a.residual < best.residual) best = a;
    }
  }
  if (converged_outside || !in_box(best.ref)) return finish(best, LocateStatus::Outside);
  return finish(best, LocateStatus::Failed);
}

}  // namespace sblfem
