#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fixtures.hpp"
#include "sblfem/analysis.hpp"
#include "sblfem/errors.hpp"
#include "sblfem/harness.hpp"
#include "sblfem/solver.hpp"

using namespace sblfem;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& d) { return d.sparseView(); }

bool in_band(const SparseMatrix& A) {
  Eigen::MatrixXd d(A);
  Eigen::VectorXd r = d.cwiseAbs().rowwise().maxCoeff(), c = d.cwiseAbs().colwise().maxCoeff();
  return r.minCoeff() >= 0.5 && r.maxCoeff() <= 1.0 && c.minCoeff() >= 0.5 && c.maxCoeff() <= 1.0;
}

}  // namespace

TEST_CASE("identity needs no scaling") {
  SparseMatrix I(5, 5);
  I.setIdentity();
  Eigen::VectorXd b = fixture::random_vector(5, 1);
  EquilibratedSystem eq = equilibrate(I, b);
  CHECK(eq.converged);
  CHECK(eq.row_scale == Eigen::VectorXd::Ones(5));
  CHECK(eq.col_scale == Eigen::VectorXd::Ones(5));
  SolveResult r = sparse_lu_solve(eq);
  CHECK(r.x == b);
  CHECK(r.residual == 0.0);
}

TEST_CASE("badly scaled diagonal is brought to the identity") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 1e-11;
  d(1, 1) = 1.0;
  EquilibratedSystem eq = equilibrate(sparse(d), Eigen::Vector2d(1e-11, 2.0));
  CHECK(eq.converged);
  Eigen::MatrixXd s(eq.A);
  CHECK(s(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  SolveResult r = sparse_lu_solve(eq);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.x[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("equilibrated solve matches a dense solve") {
  const int n = 50;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1), ex(-6, 6);
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d(i, j) = 0.1 * u(rng);
    d(i, i) += 4.0;
  }
  Eigen::VectorXd b = fixture::random_vector(n, 8);
  EquilibratedSystem eq = equilibrate(sparse(d), b);
  CHECK(eq.converged);
  CHECK(in_band(eq.A));
  SolveResult r = sparse_lu_solve(eq);
  Eigen::VectorXd oracle = d.partialPivLu().solve(b);
  CHECK((r.x - oracle).cwiseAbs().maxCoeff() <= 1e-12 * oracle.cwiseAbs().maxCoeff());
  CHECK(r.residual <= 1e-14);

  // Row and column scales spread over twelve decades still land in the band.
  Eigen::VectorXd rs(n), cs(n);
  for (int i = 0; i < n; ++i) rs[i] = std::pow(10.0, ex(rng)), cs[i] = std::pow(10.0, ex(rng));
  Eigen::MatrixXd wild = rs.asDiagonal() * d * cs.asDiagonal();
  EquilibratedSystem weq = equilibrate(sparse(wild), b);
  CHECK(weq.converged);
  CHECK(in_band(weq.A));
  SolveResult wr = sparse_lu_solve(weq);
  // The scaled problem has the unscaled solution cs^{-1} d^{-1} rs^{-1} b.
  Eigen::VectorXd expect = cs.cwiseInverse().cwiseProduct(d.partialPivLu().solve(rs.cwiseInverse().cwiseProduct(b)));
  CHECK(((wr.x - expect).array() / expect.array()).abs().maxCoeff() <= 1e-10);

  // Scaling then unscaling is the identity.
  Eigen::VectorXd y = fixture::random_vector(n, 9);
  Eigen::VectorXd there = weq.col_scale.cwiseInverse().cwiseProduct(y);
  CHECK(((weq.unscale(there) - y).array() / y.array()).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("sparse LU against dense LU on a diagonally dominant system") {
  const int n = 100;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> col(0, n - 1);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0;
    for (int k = 0; k < 6; ++k) {
      int j = col(rng);
      if (j == i) continue;
      d(i, j) = u(rng);
      off += std::abs(d(i, j));
    }
    d(i, i) = off + 1.0 + std::abs(u(rng));
  }
  Eigen::VectorXd b = fixture::random_vector(n, 18);
  SolveResult r = sparse_lu_solve(equilibrate(sparse(d), b));
  Eigen::VectorXd oracle = d.partialPivLu().solve(b);
  CHECK((r.x - oracle).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("singular systems are reported") {
  Eigen::MatrixXd d(3, 3);
  d << 1, 2, 3, 4, 5, 6, 1, 2, 3;
  CHECK_THROWS_AS(sparse_lu_solve(equilibrate(sparse(d), Eigen::Vector3d(1, 2, 3))),
                  SingularMatrixError);

  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(3, 3);
  z(1, 1) = 0.0;
  try {
    equilibrate(sparse(z), Eigen::Vector3d(1, 1, 1));
    FAIL("zero row accepted");
  } catch (const SingularMatrixError& e) {
    CHECK(e.index() == 1);
    CHECK(std::string(e.what()).find('1') != std::string::npos);
  }
}

TEST_CASE("zero forcing gives the zero solution") {
  ProblemConfig c;
  c.curve = BoundaryCurve::cranioid();
  c.eps1 = 1e-9;
  c.eps2 = 1e-3;
  c.p = 3;
  Solution s = solve_problem(c);
  CHECK(s.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.u.size() == s.u_map->num_free);
  CHECK(s.w.size() == s.w_map->num_free);
}

TEST_CASE("cranioid 10x at the extreme eps1") {
  ProblemConfig c;
  c.curve = BoundaryCurve::cranioid();
  c.eps1 = 1e-11;
  c.eps2 = 1e-3;
  c.p = 3;
  apply_forcing(c, "10x");
  Solution s = solve_problem(c);
  CHECK(s.mesh->regime == Regime::PreAsymptotic);
  CHECK(s.residual <= 1e-8);
  CHECK(s.u.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("manufactured disk at p = 6") {
  ManufacturedCase mc{1e-3, 1e-1};
  ProblemConfig c = mc.config(6);
  Solution s = solve_problem(c);
  CHECK(s.residual <= 1e-10);

  // Galerkin residual of the assembled system.
  LinearSystem sys = assemble_system(*s.mesh, *s.u_map, *s.w_map, c);
  Eigen::VectorXd x(sys.size());
  x << s.u, s.w;
  CHECK((sys.A * x - sys.b).cwiseAbs().maxCoeff() <= 1e-10 * sys.b.cwiseAbs().maxCoeff());
}

TEST_CASE("repeated solves are bit identical") {
  ProblemConfig c;
  c.curve = BoundaryCurve::cranioid();
  c.eps1 = 1e-11;
  c.eps2 = 1e-4;
  c.p = 4;
  apply_forcing(c, "10x");
  Solution a = solve_problem(c), b = solve_problem(c, SolveOptions{4, 1e-8});
  CHECK(a.u == b.u);
  CHECK(a.w == b.w);
  CHECK(a.residual == b.residual);
}

TEST_CASE("residual contract is enforced") {
  ManufacturedCase mc{1e-3, 1e-1};
  CHECK_THROWS_AS(solve_problem(mc.config(3), SolveOptions{1, 0.0}), NumericalError);
}

TEST_CASE("invalid parameters never reach the solver") {
  ProblemConfig c;
  c.eps1 = 0.2;
  c.eps2 = 0.1;
  CHECK_THROWS_AS(solve_problem(c), ConfigError);
}
