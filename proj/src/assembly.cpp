#include "sblfem/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "sblfem/errors.hpp"

namespace sblfem {

std::vector<std::string> validate_parameters(const ProblemConfig& config) {
  if (!(config.eps1 > 0.0 && config.eps1 <= config.eps2 && config.eps2 <= 1.0))
    throw ConfigError("need 0 < eps1 <= eps2 <= 1 (got eps1 = " + std::to_string(config.eps1) +
                      ", eps2 = " + std::to_string(config.eps2) + ")");
  if (!(config.kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (config.p < 1) throw ConfigError("polynomial degree must be >= 1");
  if (config.quad_order < 0) throw ConfigError("quadrature order must be positive");
  if (!config.c || !config.f) throw ConfigError("coefficient and forcing must be set");
  std::vector<std::string> warnings;
  if (config.eps1 > config.eps2 * config.eps2)
    warnings.push_back("eps1 > eps2^2: outside the intended parameter range");
  return warnings;
}

void validate_coefficient(const ProblemConfig& config, const SBLMesh& mesh) {
  const auto rule = gauss_rule(config.quadrature());
  for (const auto& el : mesh.elements) {
    for (double x : rule.points) {
      for (double y : rule.points) {
        Vec2 q = el.map.point(x, y);
        double c = config.c(q.x(), q.y());
        if (!(c > 0.0)) {
          std::ostringstream os;
          os << "coefficient c = " << c << " is not positive at (" << q.x() << ", " << q.y()
             << ")";
          throw ConfigError(os.str());
        }
      }
    }
  }
}

ReferenceTables::ReferenceTables(int p_, int q) : p(p_), quad_order(q), rule(gauss_rule(q)) {
  TensorBasis basis(p);
  const int nb = basis.size(), nq = q * q;
  values.resize(nq, nb);
  dxi.resize(nq, nb);
  deta.resize(nq, nb);
  std::vector<double> v(nb), g(2 * nb);
  for (int j = 0; j < q; ++j) {
    for (int i = 0; i < q; ++i) {
      const int k = i + q * j;
      xi.push_back(rule.points[i]);
      eta.push_back(rule.points[j]);
      weight.push_back(rule.weights[i] * rule.weights[j]);
      basis.eval(rule.points[i], rule.points[j], v.data(), g.data());
      for (int b = 0; b < nb; ++b) {
        values(k, b) = v[b];
        dxi(k, b) = g[2 * b];
        deta(k, b) = g[2 * b + 1];
      }
    }
  }
}

ElementMatrices element_matrices(const ElementMap& map, const ReferenceTables& t,
                                 const ScalarField& c, const ScalarField& f) {
  const Eigen::Index nq = t.values.rows();
  Eigen::VectorXd w(nq), wc(nq), wf(nq);
  Eigen::MatrixXd gx(nq, t.values.cols()), gy(nq, t.values.cols());
  for (Eigen::Index k = 0; k < nq; ++k) {
    Mat2 J = map.jacobian(t.xi[k], t.eta[k]);
    double det = J.determinant();
    if (!(det > 0.0))
      throw GeometryError("nonpositive Jacobian " + std::to_string(det) + " at quadrature point");
    Vec2 x = map.point(t.xi[k], t.eta[k]);
    w[k] = t.weight[k] * det;
    wc[k] = w[k] * c(x.x(), x.y());
    wf[k] = w[k] * f(x.x(), x.y());
    // Physical gradient = J^{-T} (d/dxi, d/deta).
    Mat2 Jit = J.inverse().transpose();
    gx.row(k) = Jit(0, 0) * t.dxi.row(k) + Jit(0, 1) * t.deta.row(k);
    gy.row(k) = Jit(1, 0) * t.dxi.row(k) + Jit(1, 1) * t.deta.row(k);
  }
  ElementMatrices m;
  m.mass_c = t.values.transpose() * wc.asDiagonal() * t.values;
  m.mass = t.values.transpose() * w.asDiagonal() * t.values;
  m.stiff = gx.transpose() * w.asDiagonal() * gx + gy.transpose() * w.asDiagonal() * gy;
  m.load = t.values.transpose() * wf;
  return m;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct ElementTriplets {
  Triplets mass_c_uu, mass_uu, stiff_uu, stiff_uw, mass_ww;
  std::vector<std::pair<int, double>> load;
};

void scatter(const ElementMatrices& m, const int* du, const int* dw, int n, ElementTriplets& out) {
  for (int i = 0; i < n; ++i) {
    const int ui = du[i], wi = dw[i];
    if (ui >= 0) out.load.emplace_back(ui, m.load[i]);
    for (int j = 0; j < n; ++j) {
      const int uj = du[j], wj = dw[j];
      if (ui >= 0 && uj >= 0) {
        out.mass_c_uu.emplace_back(ui, uj, m.mass_c(i, j));
        out.mass_uu.emplace_back(ui, uj, m.mass(i, j));
        out.stiff_uu.emplace_back(ui, uj, m.stiff(i, j));
      }
      if (ui >= 0) out.stiff_uw.emplace_back(ui, wj, m.stiff(i, j));
      out.mass_ww.emplace_back(wi, wj, m.mass(i, j));
    }
  }
}

SparseMatrix build(int rows, int cols, const std::vector<ElementTriplets>& parts,
                   Triplets ElementTriplets::*member) {
  std::size_t total = 0;
  for (const auto& p : parts) total += (p.*member).size();
  Triplets all;
  all.reserve(total);
  // Concatenation in element order keeps the summation order fixed.
  for (const auto& p : parts) all.insert(all.end(), (p.*member).begin(), (p.*member).end());
  SparseMatrix A(rows, cols);
  A.setFromTriplets(all.begin(), all.end());
  return A;
}

}  // namespace

AssembledBlocks assemble_blocks(const SBLMesh& mesh, const DofMap& u_map, const DofMap& w_map,
                                const ProblemConfig& config, int threads) {
  if (u_map.p != w_map.p || u_map.num_elements != mesh.size() ||
      w_map.num_elements != mesh.size())
    throw ConfigError("dof maps do not belong to this mesh");
  const ReferenceTables tables(u_map.p, config.quadrature());
  const int ne = mesh.size();
  const int n = u_map.nodes_per_element();
  std::vector<ElementTriplets> parts(ne);
  auto work = [&](int e) {
    auto m = element_matrices(mesh.elements[e].map, tables, config.c, config.f);
    scatter(m, u_map.element_dofs(e), w_map.element_dofs(e), n, parts[e]);
  };
  threads = std::max(1, std::min(threads, ne));
  if (threads == 1) {
    for (int e = 0; e < ne; ++e) work(e);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int e = t; e < ne; e += threads) work(e);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  AssembledBlocks b;
  const int nu = u_map.num_free, nw = w_map.num_free;
  b.mass_c_uu = build(nu, nu, parts, &ElementTriplets::mass_c_uu);
  b.mass_uu = build(nu, nu, parts, &ElementTriplets::mass_uu);
  b.stiff_uu = build(nu, nu, parts, &ElementTriplets::stiff_uu);
  b.stiff_uw = build(nu, nw, parts, &ElementTriplets::stiff_uw);
  b.mass_ww = build(nw, nw, parts, &ElementTriplets::mass_ww);
  b.load_u = Eigen::VectorXd::Zero(nu);
  for (const auto& p : parts)
    for (const auto& [i, v] : p.load) b.load_u[i] += v;
  return b;
}

LinearSystem compose_system(const AssembledBlocks& blocks, double eps1, double eps2) {
  const int nu = static_cast<int>(blocks.mass_c_uu.rows());
  const int nw = static_cast<int>(blocks.mass_ww.rows());
  Triplets t;
  t.reserve(blocks.mass_c_uu.nonZeros() + blocks.stiff_uu.nonZeros() +
            2 * blocks.stiff_uw.nonZeros() + blocks.mass_ww.nonZeros());
  const double e22 = eps2 * eps2;
  SparseMatrix uu = blocks.mass_c_uu + e22 * blocks.stiff_uu;
  for (int k = 0; k < uu.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(uu, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < blocks.stiff_uw.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(blocks.stiff_uw, k); it; ++it) {
      const double v = eps1 * it.value();
      t.emplace_back(it.row(), nu + it.col(), -v);  // -eps1 <grad w, grad psi>
      t.emplace_back(nu + it.col(), it.row(), v);   // +eps1 <grad u, grad phi>
    }
  }
  for (int k = 0; k < blocks.mass_ww.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(blocks.mass_ww, k); it; ++it)
      t.emplace_back(nu + it.row(), nu + it.col(), it.value());
  LinearSystem sys;
  sys.n_u = nu;
  sys.n_w = nw;
  sys.A.resize(nu + nw, nu + nw);
  sys.A.setFromTriplets(t.begin(), t.end());
  sys.b = Eigen::VectorXd::Zero(nu + nw);
  sys.b.head(nu) = blocks.load_u;
  return sys;
}

LinearSystem assemble_system(const SBLMesh& mesh, const DofMap& u_map, const DofMap& w_map,
                             const ProblemConfig& config, int threads) {
  return compose_system(assemble_blocks(mesh, u_map, w_map, config, threads), config.eps1,
                        config.eps2);
}

std::string matrix_market(const SparseMatrix& A) {
  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  char buf[64];
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row() + 1),
                    static_cast<long long>(it.col() + 1), it.value());
      os << buf;
    }
  }
  return os.str();
}

}  // namespace sblfem
