#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "sblfem/assembly.hpp"
#include "sblfem/errors.hpp"

using namespace sblfem;

namespace {

Eigen::MatrixXd dense(const SparseMatrix& A) { return Eigen::MatrixXd(A); }

ProblemConfig config_for(double eps1, double eps2, int p) {
  ProblemConfig c;
  c.eps1 = eps1;
  c.eps2 = eps2;
  c.p = p;
  c.f = [](double x, double y) { return 10.0 * x + y * y; };
  return c;
}

}  // namespace

TEST_CASE("unit square at p = 1") {
  ElementMap map = fixture::square(0, 0).map;
  ReferenceTables tables(1, 4);
  ElementMatrices m = element_matrices(map, tables, [](double, double) { return 1.0; },
                                       [](double, double) { return 0.0; });
  // Bilinear hat products: 1/9 on the diagonal, 1/18 along a side, 1/36 across.
  CHECK(m.mass(0, 0) == doctest::Approx(1.0 / 9).epsilon(1e-15));
  CHECK(m.mass(0, 1) == doctest::Approx(1.0 / 18).epsilon(1e-15));
  CHECK(m.mass(0, 2) == doctest::Approx(1.0 / 18).epsilon(1e-15));
  CHECK(m.mass(0, 3) == doctest::Approx(1.0 / 36).epsilon(1e-15));
  CHECK(m.stiff(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(m.stiff(0, 3) == doctest::Approx(-1.0 / 3).epsilon(1e-15));
  CHECK(m.stiff.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
  CHECK((m.mass - m.mass_c).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.load.cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.mass.sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("scaled square picks up the Jacobian") {
  ElementMap map = fixture::square(2, -1, 0.5).map;
  ReferenceTables tables(3, 6);
  ElementMatrices m = element_matrices(map, tables, [](double x, double) { return x; },
                                       [](double, double) { return 1.0; });
  CHECK(m.mass.sum() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(m.load.sum() == doctest::Approx(0.25).epsilon(1e-14));
  // int x over [2, 2.5] x [-1, -0.5] = 0.5 * (2.5^2 - 2^2) / 2
  CHECK(m.mass_c.sum() == doctest::Approx(0.5625).epsilon(1e-14));
  // Stiffness is scale invariant in two dimensions.
  ElementMatrices unit = element_matrices(fixture::square(0, 0).map, tables,
                                          [](double, double) { return 1.0; },
                                          [](double, double) { return 1.0; });
  CHECK((m.stiff - unit.stiff).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("inverted element is rejected") {
  Vec2 a(0, 0), b(1, 0), c(0, 1), d(1, 1);
  ElementMap bad = transfinite_map({EdgeCurve::segment(b, d), EdgeCurve::segment(a, c),
                                    EdgeCurve::segment(b, a), EdgeCurve::segment(d, c)});
  ReferenceTables tables(2, 5);
  CHECK_THROWS_AS(element_matrices(bad, tables, [](double, double) { return 1.0; },
                                   [](double, double) { return 1.0; }),
                  GeometryError);
}

TEST_CASE("system layout and block structure") {
  for (auto mesh : {fixture::disk_mesh(4, 1e-9, 1e-3), fixture::cranioid_mesh(3, 1e-11, 1e-3)}) {
    const int p = mesh->p;
    DofMap um = build_dof_map(*mesh, p, FieldKind::U), wm = build_dof_map(*mesh, p, FieldKind::W);
    ProblemConfig cfg = config_for(mesh->eps1, mesh->eps2, p);
    AssembledBlocks blocks = assemble_blocks(*mesh, um, wm, cfg);
    LinearSystem sys = compose_system(blocks, cfg.eps1, cfg.eps2);
    CHECK(sys.size() == um.num_free + wm.num_free);
    CHECK(sys.A.rows() == sys.size());
    CHECK(sys.A.cols() == sys.size());
    CHECK(sys.b.tail(sys.n_w).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd A = dense(sys.A);
    CHECK(A.allFinite());
    Eigen::MatrixXd uu = A.topLeftCorner(sys.n_u, sys.n_u), ww = A.bottomRightCorner(sys.n_w, sys.n_w);
    Eigen::MatrixXd uw = A.topRightCorner(sys.n_u, sys.n_w), wu = A.bottomLeftCorner(sys.n_w, sys.n_u);
    CHECK((uu - uu.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * uu.cwiseAbs().maxCoeff());
    CHECK((ww - ww.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * ww.cwiseAbs().maxCoeff());
    CHECK((uw + wu.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(uw.cwiseAbs().maxCoeff() > 0.0);

    // Quadratic form: the cross blocks cancel.
    for (int t = 0; t < 100; ++t) {
      Eigen::VectorXd v = fixture::random_vector(sys.size(), 100 + t);
      Eigen::VectorXd u = v.head(sys.n_u), w = v.tail(sys.n_w);
      double lhs = v.dot(sys.A * v);
      double rhs = u.dot(blocks.mass_c_uu * u) + cfg.eps2 * cfg.eps2 * u.dot(blocks.stiff_uu * u) +
                   w.dot(blocks.mass_ww * w);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
    }
  }
}

TEST_CASE("zero forcing gives a zero right-hand side") {
  auto mesh = fixture::disk_mesh(3, 1e-5, 1e-2);
  DofMap um = build_dof_map(*mesh, 3, FieldKind::U), wm = build_dof_map(*mesh, 3, FieldKind::W);
  ProblemConfig cfg;
  cfg.eps1 = 1e-5;
  cfg.eps2 = 1e-2;
  cfg.p = 3;
  LinearSystem sys = assemble_system(*mesh, um, wm, cfg);
  CHECK(sys.b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assembly is independent of the thread count") {
  auto mesh = fixture::cranioid_mesh(4, 1e-11, 1e-4);
  DofMap um = build_dof_map(*mesh, 4, FieldKind::U), wm = build_dof_map(*mesh, 4, FieldKind::W);
  ProblemConfig cfg = config_for(1e-11, 1e-4, 4);
  LinearSystem a = assemble_system(*mesh, um, wm, cfg, 1);
  LinearSystem b = assemble_system(*mesh, um, wm, cfg, 4);
  CHECK(a.A.nonZeros() == b.A.nonZeros());
  CHECK(matrix_market(a.A) == matrix_market(b.A));
  CHECK(a.b == b.b);
}

namespace {

double block_change(const SBLMesh& mesh, int p) {
  DofMap um = build_dof_map(mesh, p, FieldKind::U), wm = build_dof_map(mesh, p, FieldKind::W);
  ProblemConfig lo = config_for(mesh.eps1, mesh.eps2, p), hi = lo;
  hi.quad_order = p + 5;
  AssembledBlocks a = assemble_blocks(mesh, um, wm, lo), b = assemble_blocks(mesh, um, wm, hi);
  auto rel = [](const SparseMatrix& x, const SparseMatrix& y) {
    Eigen::MatrixXd dx = dense(x), dy = dense(y);
    return (dx - dy).cwiseAbs().maxCoeff() / dy.cwiseAbs().maxCoeff();
  };
  return std::max({rel(a.mass_uu, b.mass_uu), rel(a.stiff_uu, b.stiff_uu),
                   rel(a.stiff_uw, b.stiff_uw), rel(a.mass_ww, b.mass_ww)});
}

}  // namespace

TEST_CASE("quadrature order p+3 versus p+5") {
  // Straight sides: every integrand is a polynomial of degree <= 2p, so both
  // rules are exact.
  std::vector<MeshElement> els;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) els.push_back(fixture::square(0.5 * i, 0.5 * j, 0.5));
  std::vector<EdgeRecord> edges;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      int e = i + 3 * j;
      if (i < 2) edges.push_back({e, 1, e + 1, 0, 1});
      if (j < 2) edges.push_back({e, 3, e + 3, 2, 1});
    }
  for (int p : {2, 4, 7}) {
    auto mesh = fixture::as_sbl_mesh(els, edges, p);
    CHECK(block_change(*mesh, p) <= 1e-10);
  }
  // Curved sides make the stiffness integrand rational; the rule then only
  // converges. Bound measured on the disk.
  for (int p : {2, 4, 6})
    CHECK(block_change(*fixture::disk_mesh(p, 1e-5, 1e-2), p) <= 1e-5);
}

TEST_CASE("parameter validation") {
  ProblemConfig c;
  c.eps1 = 1e-3;
  c.eps2 = 1e-1;
  CHECK(validate_parameters(c).empty());
  c.eps1 = 0.5;
  CHECK_THROWS_AS(validate_parameters(c), ConfigError);
  c.eps1 = 0.0;
  CHECK_THROWS_AS(validate_parameters(c), ConfigError);
  c.eps1 = 1e-3;
  c.eps2 = 2.0;
  CHECK_THROWS_AS(validate_parameters(c), ConfigError);
  c.eps2 = 1e-2;
  c.eps1 = 1e-3;
  CHECK(validate_parameters(c).size() == 1);  // eps1 > eps2^2 only warns
  c.p = 0;
  CHECK_THROWS_AS(validate_parameters(c), ConfigError);
}

TEST_CASE("coefficient must stay positive at every quadrature point") {
  auto mesh = fixture::disk_mesh(3, 1e-5, 1e-2);
  ProblemConfig c;
  c.eps1 = 1e-5;
  c.eps2 = 1e-2;
  c.p = 3;
  c.c = [](double x, double) { return 2.0 + x; };
  CHECK_NOTHROW(validate_coefficient(c, *mesh));
  c.c = [](double x, double) { return 0.5 + x; };
  CHECK_THROWS_AS(validate_coefficient(c, *mesh), ConfigError);
}

TEST_CASE("matrix market dump") {
  SparseMatrix A(2, 3);
  A.insert(0, 0) = 1.5;
  A.insert(1, 2) = -2.0;
  A.makeCompressed();
  std::string mm = matrix_market(A);
  CHECK(mm.rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
  CHECK(mm.find("2 3 2") != std::string::npos);
  CHECK(mm.find("2 3 -2") != std::string::npos);
}
