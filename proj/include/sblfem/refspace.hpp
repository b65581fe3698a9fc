#pragma once

#include <functional>
#include <vector>

namespace sblfem {

/// Gauss-Lobatto-Legendre nodes of degree p on [0,1].
struct NodeSet {
  int degree = 0;
  std::vector<double> nodes;  ///< p+1 ascending values, nodes[0] = 0, nodes[p] = 1
};

/// Gauss-Legendre rule on [0,1]; exact for polynomials of degree 2n-1.
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

/// Throws std::invalid_argument for p < 1.
NodeSet gll_nodes(int p);
/// Throws std::invalid_argument for n < 1.
QuadratureRule gauss_rule(int n);

/// Legendre polynomial P_n and its first two derivatives at x in [-1,1].
struct LegendreValue {
  double p, dp, ddp;
};
LegendreValue legendre(int n, double x);

/// Nodal Lagrange basis on a 1D node set, evaluated in barycentric form.
class LagrangeBasis1D {
 public:
  explicit LagrangeBasis1D(std::vector<double> nodes);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Values and first derivatives of all basis functions at x.
  void eval(double x, double* values, double* derivatives) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> diff_;  ///< differentiation matrix, row-major
};

/**
 * Tensor-product Q_p basis on [0,1]^2 with nodes at the tensor GLL grid.
 * Local node (i, j) -- i along xi, j along eta -- has index i + (p+1) j.
 */
class TensorBasis {
 public:
  explicit TensorBasis(int p);

  int degree() const { return p_; }
  int size() const { return (p_ + 1) * (p_ + 1); }
  int index(int i, int j) const { return i + (p_ + 1) * j; }
  const LagrangeBasis1D& line() const { return line_; }

  /// values: size() entries; gradients: 2*size() entries (d/dxi, d/deta pairs).
  void eval(double xi, double eta, double* values, double* gradients) const;

 private:
  int p_;
  LagrangeBasis1D line_;
};

/// Nodal values of f at the tensor GLL grid (index i + (p+1) j).
std::vector<double> gll_interpolate(const std::function<double(double, double)>& f, int p);

}  // namespace sblfem
