#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mgb/core_graph.hpp"
#include "mgb/gasket.hpp"
#include "mgb/spectral.hpp"

namespace mgb::approx {

struct GammaOptions {
  int quadrature_level = -1;  // -1 selects m + 4
  int cells_per_edge = 1;
};

/// The metric graph Gamma_m laid over the level-m gasket graph, with the data
/// that ties it to L^2(K, mu).
///
/// Graph edge k joins gasket vertices endpoints[k] = {p, q}, p < q, and is
/// oriented from p to q. Gasket vertex p is graph vertex graph_vertex[p].
struct ApproxBundle {
  int level = 0;
  int quadrature_level = 0;
  gasket::HierarchyPtr hierarchy;
  gasket::SelfSimilarMeasure measure;
  GraphPtr graph;
  GridPtr grid;
  std::vector<std::array<std::size_t, 2>> endpoints;
  std::vector<std::size_t> graph_vertex;
  std::vector<std::size_t> gasket_vertex;
  Eigen::VectorXd vertex_weights;   // c(p): 1/2 on V_0, 1/4 elsewhere
  Eigen::VectorXd vertex_integrals; // \int psi_{p,m} dmu
  Eigen::VectorXd edge_integrals;   // \int psi_{e,m} dmu

  std::size_t num_edges() const { return endpoints.size(); }
  /// mu_m(X_m) = sum_e c_e l_e.
  double total_measure() const { return graph->total_measure(); }
};

/// Builds Gamma_m: l_e = 2^{-m}, a_e = 2^{-m} r^{-m}, c_e = 2^m \int psi_{e,m} dmu.
/// The hierarchy must reach the quadrature level.
ApproxBundle build_gamma_m(gasket::HierarchyPtr hierarchy, int m,
                           const gasket::SelfSimilarMeasure& mu, const GammaOptions& opts = {});

/// sum_e avg(f_e) psi_{e,m}, returned at the level-m vertices.
gasket::GasketFunction J0_forward(const ApproxBundle& b, const GraphFunction& f);
gasket::GasketFunction J0_forward(const ApproxBundle& b, const EdgeField& f);
/// Same, harmonically extended to `output_level`.
gasket::GasketFunction J0_forward(const ApproxBundle& b, const GraphFunction& f, int output_level);

/// (J0* u)_e = <u, psi_{e,m}> / \int psi_{e,m} dmu, as a cellwise field.
EdgeField J0_adjoint(const ApproxBundle& b, const gasket::GasketFunction& u);

/// Vertex values on V_m (gasket numbering) of a function on Gamma_m.
Eigen::VectorXd vertex_restriction(const ApproxBundle& b, const GraphFunction& f);

/// H_m(f|_{V_m}) at level m.
gasket::GasketFunction J1(const ApproxBundle& b, const GraphFunction& f);
/// Edgewise-linear interpolation of u|_{V_m}.
GraphFunction J1_tilde(const ApproxBundle& b, const gasket::GasketFunction& u);
/// Edgewise-linear function on Gamma_m with the given V_m values.
GraphFunction H_gamma(const ApproxBundle& b, const Eigen::VectorXd& vertex_values);

/// Isomorphism EL_m -> PH_m. Throws std::invalid_argument unless f is linear
/// on every edge (relative tolerance `tol`).
gasket::GasketFunction phi_m(const ApproxBundle& b, const GraphFunction& f, double tol = 1e-10);
/// Inverse of phi_m.
GraphFunction phi_m_inverse(const ApproxBundle& b, const gasket::GasketFunction& u);
/// Gradient version: for u = df with f in EL_m, the piecewise-harmonic
/// potential H_m(f|_{V_m}) anchored so that it vanishes at q0. Throws
/// std::invalid_argument when u is not the gradient of an edgewise-linear
/// function.
gasket::GasketFunction phi_m_gradient(const ApproxBundle& b, const EdgeField& u,
                                      double tol = 1e-10);

/// 54 max_{|w|=m} mu(K_w) r^m.
double delta_m(int m, const gasket::SelfSimilarMeasure& mu);

struct LemmaStat {
  std::string name;
  double constant = 0.0;     // factor in front of max mu(K_w) r^m E(.)
  double worst_ratio = 0.0;  // max over samples of lhs / rhs
  double worst_lhs = 0.0;
  bool holds = true;
};

struct QuasiUnitaryReport {
  int level = 0;
  std::size_t samples = 0;
  std::vector<LemmaStat> lemmas;  // the four bounds, squared norms on the left
  double elemma_defect = 0.0;     // max |E_Gamma(f, J1~ u) - E(J1 f, u)| / scale
  double contraction_ratio = 0.0; // max ||J0 f|| / ||f||
  double adjoint_defect = 0.0;    // max relative defect of <J0 f, u> = <f, J0* u>
  double dominance_ratio = 0.0;   // max E_m(f|V_m) / E_Gamma(f)
  bool holds = true;
};

struct SuiteOptions {
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  int cells_per_edge = 4;  // resolution of the random graph functions
  int refinement = 2;      // random u is piecewise harmonic at level m + refinement
  double tolerance = 1e-8;
};

QuasiUnitaryReport quasi_unitary_suite(gasket::HierarchyPtr hierarchy, int m,
                                       const gasket::SelfSimilarMeasure& mu,
                                       const SuiteOptions& opts = {});

struct ConvergenceRow {
  int level = 0;
  double time = 0.0;
  std::string quantity;
  double value = 0.0;
};

struct HeatConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<double> times;
  std::vector<int> levels;
  Eigen::MatrixXd discrepancy;  // D(m, t): rows levels, columns times
  std::vector<double> slopes;   // fitted d log D / dm per time
  bool smoothing_holds = true;
};

struct ConvergenceOptions {
  std::vector<int> levels{1, 2, 3, 4};
  int reference_level = 6;
  int quadrature_level = -1;  // -1 selects reference_level + 2
  std::vector<double> times{0.1, 0.5};
};

/// Compares J_{0,m} e^{t L_m} J*_{0,m} w0 with the level-M reference.
HeatConvergenceResult heat_convergence_experiment(const gasket::GasketFunction& w0,
                                                  const gasket::SelfSimilarMeasure& mu,
                                                  const ConvergenceOptions& opts);

struct BurgersConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<double> times;
  std::vector<int> levels;
  /// |P(m, t, phi)| indexed [time][phi](level).
  std::vector<std::vector<Eigen::VectorXd>> pairings;
  Eigen::MatrixXd min_w;  // min over X_m of w_m(t): rows levels, columns times
  double positivity_floor = 0.0;
  bool positivity_holds = true;
};

/// Weak convergence of the Cole-Hopf solutions through potentials:
/// P(m, t, phi) = E(H_m(log w_m(t)|_{V_m}) - log w_ref(t), phi). The test
/// potentials are piecewise harmonic at a level no finer than min(levels).
BurgersConvergenceResult burgers_convergence_experiment(
    const gasket::GasketFunction& h0, const gasket::SelfSimilarMeasure& mu,
    std::span<const gasket::GasketFunction> test_potentials, const ConvergenceOptions& opts);

/// Least-squares slope of log(values) against levels.
double fitted_log_slope(std::span<const int> levels, const Eigen::VectorXd& values);

}  // namespace mgb::approx
