#pragma once

#include <Eigen/Sparse>

#include "sblfem/assembly.hpp"
#include "sblfem/femspace.hpp"

namespace sblfem {

/// D_r A D_c with power-of-two diagonal scalings, so unscaling is exact.
struct EquilibratedSystem {
  SparseMatrix A;      ///< scaled
  Eigen::VectorXd b;   ///< scaled rhs, D_r b
  Eigen::VectorXd row_scale, col_scale;
  SparseMatrix original;
  Eigen::VectorXd original_b;
  bool converged = false;  ///< every row and column max in [1/2, 1]
  int sweeps = 0;

  /// x = D_c y
  Eigen::VectorXd unscale(const Eigen::VectorXd& y) const { return col_scale.cwiseProduct(y); }
};

/// Alternating row/column infinity-norm scaling, at most 10 sweeps. Throws
/// SingularMatrixError naming the dof of a structurally zero row or column.
EquilibratedSystem equilibrate(const SparseMatrix& A, const Eigen::VectorXd& b);
EquilibratedSystem equilibrate(const LinearSystem& sys);

struct SolveResult {
  Eigen::VectorXd x;
  double residual = 0.0;  ///< ||A x - b||_inf / ||b||_inf in the unscaled system
};

/// Sparse LU (COLAMD ordering, pivot threshold 0.1) plus one step of
/// iterative refinement. Throws SingularMatrixError on a zero pivot.
SolveResult sparse_lu_solve(const EquilibratedSystem& sys);

struct SolveOptions {
  int threads = 1;
  double residual_limit = 1e-8;
};

/// Mesh, dof maps, assembly, equilibration and solve. Throws NumericalError if
/// the relative residual exceeds the limit.
Solution solve_problem(const ProblemConfig& config, const SolveOptions& options = {});

/// Same, reusing an already built asymptotic mesh.
Solution solve_problem(const ProblemConfig& config, std::shared_ptr<const AsymptoticMesh> base,
                       const SolveOptions& options = {});

}  // namespace sblfem
