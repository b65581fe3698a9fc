#include "sblfem/refspace.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sblfem {

LegendreValue legendre(int n, double x) {
  // Three-term recurrences for P_k, P_k' and P_k'' (valid at the endpoints).
  double p0 = 1.0, p1 = x;
  double d0 = 0.0, d1 = 1.0;
  double dd0 = 0.0, dd1 = 0.0;
  if (n == 0) return {p0, d0, dd0};
  for (int k = 1; k < n; ++k) {
    double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    double d2 = d0 + (2 * k + 1) * p1;
    double dd2 = dd0 + (2 * k + 1) * d1;
    p0 = p1, p1 = p2;
    d0 = d1, d1 = d2;
    dd0 = dd1, dd1 = dd2;
  }
  return {p1, d1, dd1};
}

NodeSet gll_nodes(int p) {
  if (p < 1) throw std::invalid_argument("GLL degree must be >= 1, got " + std::to_string(p));
  NodeSet set;
  set.degree = p;
  set.nodes.assign(p + 1, 0.0);
  set.nodes[p] = 1.0;
  // Interior nodes are the roots of P_p'; solve on the left half and mirror.
  for (int j = 1; j <= p / 2; ++j) {
    double x = -std::cos(std::numbers::pi * j / p);
    for (int it = 0; it < 100; ++it) {
      auto L = legendre(p, x);
      double dx = L.dp / L.ddp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    set.nodes[j] = 0.5 * (1.0 + x);
    set.nodes[p - j] = 0.5 * (1.0 - x);
  }
  if (p % 2 == 0) set.nodes[p / 2] = 0.5;
  return set;
}

QuadratureRule gauss_rule(int n) {
  if (n < 1) throw std::invalid_argument("Gauss rule needs n >= 1, got " + std::to_string(n));
  QuadratureRule rule;
  rule.points.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double dx = legendre(n, x).p / legendre(n, x).dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double dp = legendre(n, x).dp;
    double w = 1.0 / ((1.0 - x * x) * dp * dp);  // half of the [-1,1] weight
    // x > 0 here: fill from the right end and mirror.
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.points[i] = 0.5 * (1.0 - x);
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.5;
  return rule;
}

LagrangeBasis1D::LagrangeBasis1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  weights_.assign(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) weights_[j] /= nodes_[j] - nodes_[k];

  diff_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = (weights_[j] / weights_[i]) / (nodes_[i] - nodes_[j]);
      diff_[i * n + j] = d;
      diag -= d;
    }
    diff_[i * n + i] = diag;
  }
}

void LagrangeBasis1D::eval(double x, double* values, double* derivatives) const {
  const std::size_t n = nodes_.size();
  for (std::size_t m = 0; m < n; ++m) {
    if (std::abs(x - nodes_[m]) <= 1e-15) {
      for (std::size_t j = 0; j < n; ++j) {
        values[j] = j == m ? 1.0 : 0.0;
        if (derivatives) derivatives[j] = diff_[m * n + j];
      }
      return;
    }
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = weights_[j] / (x - nodes_[j]);
    sum += values[j];
  }
  for (std::size_t j = 0; j < n; ++j) values[j] /= sum;
  if (!derivatives) return;
  // l_j'(x) = l_j(x) * sum_{k != j} 1/(x - x_k), summed without cancellation.
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) s += 1.0 / (x - nodes_[k]);
    derivatives[j] = values[j] * s;
  }
}

TensorBasis::TensorBasis(int p) : p_(p), line_(gll_nodes(p).nodes) {}

void TensorBasis::eval(double xi, double eta, double* values, double* gradients) const {
  const int n = p_ + 1;
  double vx[64], dx[64], vy[64], dy[64];
  if (n > 64) throw std::invalid_argument("polynomial degree too large");
  line_.eval(xi, vx, dx);
  line_.eval(eta, vy, dy);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      int k = i + n * j;
      values[k] = vx[i] * vy[j];
      if (gradients) {
        gradients[2 * k] = dx[i] * vy[j];
        gradients[2 * k + 1] = vx[i] * dy[j];
      }
    }
  }
}

std::vector<double> gll_interpolate(const std::function<double(double, double)>& f, int p) {
  const auto nodes = gll_nodes(p).nodes;
  const int n = p + 1;
  std::vector<double> coeffs(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) coeffs[i + n * j] = f(nodes[i], nodes[j]);
  return coeffs;
}

}  // namespace sblfem
