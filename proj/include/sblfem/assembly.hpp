#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sblfem/femspace.hpp"
#include "sblfem/geometry.hpp"
#include "sblfem/mesh.hpp"
#include "sblfem/refspace.hpp"

namespace sblfem {

using ScalarField = std::function<double(double, double)>;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct ProblemConfig {
  BoundaryCurve curve = BoundaryCurve::circle(1.0);
  int m = 2;
  double strip_fraction = 0.5;
  double eps1 = 1e-3, eps2 = 1e-1;
  double kappa = 1.0;
  int p = 4;
  int quad_order = 0;  ///< 0 selects p + 3
  ScalarField c = [](double, double) { return 1.0; };
  ScalarField f = [](double, double) { return 0.0; };
  std::string forcing_name = "zero", coefficient_name = "1";

  int quadrature() const { return quad_order > 0 ? quad_order : p + 3; }
};

/// Parameter checks shared by every entry point. Throws ConfigError; returns
/// warnings (currently only eps1 > eps2^2).
std::vector<std::string> validate_parameters(const ProblemConfig& config);

/// Rejects c <= 0 at any quadrature point of the mesh.
void validate_coefficient(const ProblemConfig& config, const SBLMesh& mesh);

/// Basis values and reference gradients at tensor Gauss points.
struct ReferenceTables {
  ReferenceTables(int p, int quad_order);
  int p, quad_order;
  QuadratureRule rule;
  std::vector<double> xi, eta, weight;  ///< flattened tensor points
  Eigen::MatrixXd values, dxi, deta;    ///< (points x basis)
};

struct ElementMatrices {
  Eigen::MatrixXd mass_c;  ///< int c phi_i phi_j
  Eigen::MatrixXd mass;    ///< int phi_i phi_j
  Eigen::MatrixXd stiff;   ///< int grad phi_i . grad phi_j
  Eigen::VectorXd load;    ///< int f phi_i
};

/// Throws GeometryError if det J <= 0 at a quadrature point.
ElementMatrices element_matrices(const ElementMap& map, const ReferenceTables& tables,
                                 const ScalarField& c, const ScalarField& f);

/// Global matrices over free dofs, before the parameters are applied.
struct AssembledBlocks {
  SparseMatrix mass_c_uu, mass_uu, stiff_uu;
  SparseMatrix stiff_uw;  ///< u rows, w columns
  SparseMatrix mass_ww;
  Eigen::VectorXd load_u;
};

AssembledBlocks assemble_blocks(const SBLMesh& mesh, const DofMap& u_map, const DofMap& w_map,
                                const ProblemConfig& config, int threads = 1);

/// Unknowns ordered (u free dofs, w free dofs).
struct LinearSystem {
  SparseMatrix A;
  Eigen::VectorXd b;
  int n_u = 0, n_w = 0;
  int size() const { return n_u + n_w; }
};

/// [[M_c + eps2^2 K, -eps1 K_uw], [eps1 K_uw^T, M]] with rhs (load, 0).
LinearSystem compose_system(const AssembledBlocks& blocks, double eps1, double eps2);

LinearSystem assemble_system(const SBLMesh& mesh, const DofMap& u_map, const DofMap& w_map,
                             const ProblemConfig& config, int threads = 1);

/// MatrixMarket coordinate format.
std::string matrix_market(const SparseMatrix& A);

}  // namespace sblfem
