#include "sblfem/solver.hpp"

#include <cmath>
#include <regex>

#include <Eigen/SparseLU>

#include "sblfem/errors.hpp"

namespace sblfem {

namespace {

// Nearest power of two to 1/sqrt(v), or to 1/v when `full`.
// Power of two near 1/sqrt(v); exact, so the sweeps add no rounding.
double pow2_inverse(double v) {
  int e;
  std::frexp(v, &e);  // v = m 2^e, m in [1/2, 1)
  return std::ldexp(1.0, -(e / 2));
}

void maxima(const SparseMatrix& A, Eigen::VectorXd& rows, Eigen::VectorXd& cols) {
  rows = Eigen::VectorXd::Zero(A.rows());
  cols = Eigen::VectorXd::Zero(A.cols());
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      double a = std::abs(it.value());
      rows[it.row()] = std::max(rows[it.row()], a);
      cols[it.col()] = std::max(cols[it.col()], a);
    }
  }
}

bool balanced(const Eigen::VectorXd& rows, const Eigen::VectorXd& cols) {
  // x * (1/x) may round one ulp above 1.
  auto ok = [](double v) { return v >= 0.5 && v <= 1.0 + 4e-16; };
  for (double v : rows) if (!ok(v)) return false;
  for (double v : cols) if (!ok(v)) return false;
  return true;
}

}  // namespace

EquilibratedSystem equilibrate(const SparseMatrix& A, const Eigen::VectorXd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw ConfigError("equilibrate needs a square system with a matching rhs");
  EquilibratedSystem out;
  out.original = A;
  out.original_b = b;
  out.A = A;
  out.row_scale = Eigen::VectorXd::Ones(A.rows());
  out.col_scale = Eigen::VectorXd::Ones(A.cols());

  Eigen::VectorXd rows, cols;
  maxima(out.A, rows, cols);
  for (Eigen::Index i = 0; i < rows.size(); ++i)
    if (rows[i] == 0.0) throw SingularMatrixError("row of dof " + std::to_string(i) + " is zero", i);
  for (Eigen::Index j = 0; j < cols.size(); ++j)
    if (cols[j] == 0.0)
      throw SingularMatrixError("column of dof " + std::to_string(j) + " is zero", j);

  for (int sweep = 0; sweep < 10 && !balanced(rows, cols); ++sweep) {
    Eigen::VectorXd r(rows.size()), c(cols.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = pow2_inverse(rows[i]);
    for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = pow2_inverse(cols[j]);
    out.A = r.asDiagonal() * out.A * c.asDiagonal();
    out.row_scale = out.row_scale.cwiseProduct(r);
    out.col_scale = out.col_scale.cwiseProduct(c);
    maxima(out.A, rows, cols);
    out.sweeps = sweep + 1;
  }
  // Finish with exact reciprocals: rows to max 1, then columns. The factors
  // are at most 2 once the sweeps have converged, so rows stay above 1/2.
  {
    Eigen::VectorXd r = rows.cwiseInverse();
    out.A = r.asDiagonal() * out.A;
    out.row_scale = out.row_scale.cwiseProduct(r);
    maxima(out.A, rows, cols);
    Eigen::VectorXd c = cols.cwiseInverse();
    out.A = out.A * c.asDiagonal();
    out.col_scale = out.col_scale.cwiseProduct(c);
    maxima(out.A, rows, cols);
  }
  out.converged = balanced(rows, cols);
  out.b = out.row_scale.cwiseProduct(b);
  return out;
}

EquilibratedSystem equilibrate(const LinearSystem& sys) { return equilibrate(sys.A, sys.b); }

SolveResult sparse_lu_solve(const EquilibratedSystem& sys) {
  SolveResult out;
  const double bnorm = sys.original_b.lpNorm<Eigen::Infinity>();
  if (sys.A.rows() == 0) return out;

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.setPivotThreshold(0.1);
  SparseMatrix A = sys.A;
  A.makeCompressed();
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) {
    std::string msg = lu.lastErrorMessage();
    std::smatch m;
    std::ptrdiff_t index = -1;
    if (std::regex_search(msg, m, std::regex("(\\d+)\\s*$"))) index = std::stoll(m[1]) - 1;
    throw SingularMatrixError("sparse LU failed: " + msg, index);
  }

  auto solve_scaled = [&](const Eigen::VectorXd& rhs) {
    Eigen::VectorXd y = lu.solve(sys.row_scale.cwiseProduct(rhs));
    return sys.unscale(y);
  };
  out.x = solve_scaled(sys.original_b);
  Eigen::VectorXd r = sys.original_b - sys.original * out.x;
  out.x += solve_scaled(r);
  if (!out.x.allFinite()) throw SingularMatrixError("sparse LU produced non-finite values", -1);
  r = sys.original_b - sys.original * out.x;
  const double rnorm = r.lpNorm<Eigen::Infinity>();
  out.residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
  return out;
}

Solution solve_problem(const ProblemConfig& config, const SolveOptions& options) {
  validate_parameters(config);
  return solve_problem(config, build_asymptotic_mesh(config.curve, config.m, config.strip_fraction),
                       options);
}

Solution solve_problem(const ProblemConfig& config, std::shared_ptr<const AsymptoticMesh> base,
                       const SolveOptions& options) {
  validate_parameters(config);
  Solution sol;
  sol.p = config.p;
  sol.eps1 = config.eps1;
  sol.eps2 = config.eps2;
  sol.kappa = config.kappa;
  sol.mesh = build_sbl_mesh(std::move(base), config.kappa, config.p, config.eps1, config.eps2);
  validate_coefficient(config, *sol.mesh);
  sol.u_map = std::make_shared<DofMap>(build_dof_map(*sol.mesh, config.p, FieldKind::U));
  sol.w_map = std::make_shared<DofMap>(build_dof_map(*sol.mesh, config.p, FieldKind::W));
  sol.basis = std::make_shared<TensorBasis>(config.p);

  LinearSystem sys = assemble_system(*sol.mesh, *sol.u_map, *sol.w_map, config, options.threads);
  SolveResult res = sparse_lu_solve(equilibrate(sys));
  if (!(res.residual <= options.residual_limit))
    throw NumericalError("relative residual " + std::to_string(res.residual) +
                         " exceeds the limit " + std::to_string(options.residual_limit));
  sol.residual = res.residual;
  sol.u = res.x.head(sys.n_u);
  sol.w = res.x.tail(sys.n_w);
  return sol;
}

}  // namespace sblfem
