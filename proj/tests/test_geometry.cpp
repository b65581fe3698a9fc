#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sblfem/errors.hpp"
#include "sblfem/geometry.hpp"
#include "sblfem/mesh.hpp"

using namespace sblfem;
using std::numbers::pi;

TEST_CASE("cranioid reference points") {
  auto c = BoundaryCurve::cranioid();
  Vec2 top = curve_eval(c, pi / 2);
  CHECK(std::abs(top.x()) < 1e-15);
  CHECK(std::abs(top.y() - 1.25) < 1e-15);
  Vec2 right = curve_eval(c, 0.0);
  double expect = 0.5 * std::sqrt(0.1) + 0.5 * std::sqrt(0.3);
  CHECK(std::abs(right.x() - expect) < 1e-15);
  CHECK(std::abs(right.y()) < 1e-15);
}

TEST_CASE("circle evaluation and periodic wrap") {
  auto c = BoundaryCurve::circle(2.0);
  for (double t : {0.0, 0.3, 1.7, 4.0}) {
    Vec2 p = curve_eval(c, t);
    CHECK(std::abs(p.norm() - 2.0) < 1e-14);
    CHECK((curve_eval(c, t + 2 * pi) - p).norm() < 1e-13);
  }
}

TEST_CASE("curvature against finite differences of the tangent angle") {
  auto c = BoundaryCurve::cranioid();
  auto angle = [](double t) {
    Eigen::Vector2d d = oracle::derivative5(oracle::cranioid, t, 1e-4);
    return std::atan2(d.y(), d.x());
  };
  for (double t : {0.4, 1.0, 2.2, 3.5, 5.0, 6.1}) {
    double speed = oracle::derivative5(oracle::cranioid, t, 1e-3).norm();
    // The angle is smooth locally; unwrap around the stencil centre.
    auto local = [&](double s) {
      double a = angle(s) - angle(t);
      return std::remainder(a, 2 * pi);
    };
    double kappa = oracle::derivative5(local, t, 1e-3) / speed;
    CHECK(std::abs(curve_frame(c, t).curvature - kappa) < 1e-6);
  }
  auto circ = BoundaryCurve::circle(1.0);
  CHECK(std::abs(curve_frame(circ, 0.7).curvature - 1.0) < 1e-14);
}

TEST_CASE("derivatives of the cranioid match finite differences") {
  auto c = BoundaryCurve::cranioid();
  for (double t : {0.1, 1.3, 2.9, 4.4}) {
    auto d = c.derivatives(t);
    Eigen::Vector2d fd = oracle::derivative5(oracle::cranioid, t, 1e-3);
    CHECK((d[1] - fd).norm() < 1e-9);
    CHECK((d[0] - oracle::cranioid(t)).norm() < 1e-15);
  }
}

TEST_CASE("frame orientation and offset points") {
  auto c = BoundaryCurve::cranioid();
  auto f = curve_frame(c, pi / 2);
  CHECK(std::abs(f.inward_normal.x()) < 1e-14);
  CHECK(std::abs(f.inward_normal.y() + 1.0) < 1e-14);
  Vec2 q = offset_point(c, pi / 2, 0.1);
  CHECK(std::abs(q.x()) < 1e-14);
  CHECK(std::abs(q.y() - 1.15) < 1e-14);
  CHECK_THROWS_AS(offset_point(c, 0.0, -0.1), GeometryError);
  CHECK_THROWS_AS(offset_point(c, 0.0, 0.2), GeometryError);
}

TEST_CASE("minimum curvature radius") {
  CHECK(std::abs(BoundaryCurve::circle(1.0).min_curvature_radius() - 1.0) < 1e-12);
  CHECK(std::abs(BoundaryCurve::circle(3.0).min_curvature_radius() - 3.0) < 1e-12);
  double r = BoundaryCurve::cranioid().min_curvature_radius();
  CHECK(r > 0.12);
  CHECK(r < 0.13);
}

TEST_CASE("tubular coordinates of the unit circle have Jacobian 1 - rho") {
  auto c = BoundaryCurve::circle(1.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> th(0, 2 * pi), rh(0, 0.9);
  for (int i = 0; i < 100; ++i) {
    double t = th(rng), r = rh(rng), h = 1e-4;
    auto at = [&](double a, double b) { return offset_point(c, a, b); };
    Vec2 dt = (at(t + h, r) - at(t - h, r)) / (2 * h);
    Vec2 dr = (at(t, r + h) - at(t, r - h)) / (2 * h);
    double det = std::abs(dt.x() * dr.y() - dt.y() * dr.x());
    CHECK(std::abs(det - (1 - r)) < 1e-6);
  }
}

namespace {

ElementMap square(double w = 1.0, double h = 1.0) {
  Vec2 a(0, 0), b(w, 0), c(0, h), d(w, h);
  return transfinite_map({EdgeCurve::segment(a, c), EdgeCurve::segment(b, d),
                          EdgeCurve::segment(a, b), EdgeCurve::segment(c, d)});
}

}  // namespace

TEST_CASE("transfinite map of the unit square is the identity") {
  auto m = square();
  for (double x : {0.0, 0.2, 0.77, 1.0})
    for (double y : {0.0, 0.5, 0.9}) {
      CHECK((m.point(x, y) - Vec2(x, y)).norm() < 1e-15);
      CHECK(std::abs(m.jacobian(x, y).determinant() - 1.0) < 1e-15);
    }
}

TEST_CASE("straight-edged maps reduce to bilinear interpolation") {
  Vec2 a(0, 0), b(2, 0.3), c(-0.2, 1), d(1.5, 1.8);
  auto m = transfinite_map({EdgeCurve::segment(a, c), EdgeCurve::segment(b, d),
                            EdgeCurve::segment(a, b), EdgeCurve::segment(c, d)});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 50; ++i) {
    double x = u(rng), y = u(rng);
    Vec2 bl = (1 - x) * (1 - y) * a + x * (1 - y) * b + (1 - x) * y * c + x * y * d;
    CHECK((m.point(x, y) - bl).norm() < 1e-14);
  }
}

TEST_CASE("curved side of a boundary element lies on the curve") {
  auto circle = BoundaryCurve::circle(1.0);
  auto mesh = build_asymptotic_mesh(circle, 1);
  for (int e = 0; e < mesh->num_boundary; ++e)
    for (double t : {0.0, 0.13, 0.5, 0.91, 1.0})
      CHECK(std::abs(mesh->elements[e].map.point(0.0, t).norm() - 1.0) < 1e-14);
}

TEST_CASE("analytic Jacobian matches central differences") {
  auto mesh = build_asymptotic_mesh(BoundaryCurve::cranioid(), 2);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (const auto& el : mesh->elements) {
    for (int i = 0; i < 20; ++i) {
      double x = u(rng), y = u(rng), h = 1e-5;
      Mat2 J = el.map.jacobian(x, y);
      Vec2 dx = (el.map.point(x + h, y) - el.map.point(x - h, y)) / (2 * h);
      Vec2 dy = (el.map.point(x, y + h) - el.map.point(x, y - h)) / (2 * h);
      CHECK((J.col(0) - dx).norm() < 1e-6);
      CHECK((J.col(1) - dy).norm() < 1e-6);
    }
  }
}

TEST_CASE("corner mismatch is rejected") {
  Vec2 a(0, 0), b(1, 0), c(0, 1), d(1, 1);
  CHECK_THROWS_AS(transfinite_map({EdgeCurve::segment(a, c), EdgeCurve::segment(b, d),
                                   EdgeCurve::segment(a, b), EdgeCurve::segment(c, Vec2(1, 1.1))}),
                  GeometryError);
}

TEST_CASE("inverse map round trip on mesh elements") {
  for (auto curve : {BoundaryCurve::circle(1.0), BoundaryCurve::cranioid()}) {
    auto mesh = build_asymptotic_mesh(curve, 2);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (const auto& el : mesh->elements) {
      for (int i = 0; i < 1000; ++i) {
        Vec2 r(u(rng), u(rng));
        auto res = inverse_map(el.map, el.map.point(r.x(), r.y()));
        REQUIRE(res.status == LocateStatus::Inside);
        CHECK((res.ref - r).norm() < 1e-10);
      }
    }
  }
}

TEST_CASE("inverse map on a thin element") {
  auto m = square(1e-8, 1.0);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    Vec2 r(u(rng), u(rng));
    auto res = inverse_map(m, m.point(r.x(), r.y()));
    REQUIRE(res.status == LocateStatus::Inside);
    CHECK((res.ref - r).norm() < 1e-10);
  }
}

TEST_CASE("inverse map reports points outside") {
  auto m = square();
  CHECK(inverse_map(m, Vec2(1.5, 0.5)).status == LocateStatus::Outside);
  CHECK(inverse_map(m, Vec2(-0.2, -0.3)).status == LocateStatus::Outside);
  auto mesh = build_asymptotic_mesh(BoundaryCurve::cranioid(), 2);
  CHECK(inverse_map(mesh->elements[0].map, Vec2(5.0, 5.0)).status != LocateStatus::Inside);
}
