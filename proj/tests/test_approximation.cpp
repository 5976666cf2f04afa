#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "mgb/approximation.hpp"

using namespace mgb;
using namespace mgb::approx;
using gasket::GasketFunction;
using gasket::Hierarchy;
using gasket::SelfSimilarMeasure;

namespace {

GraphFunction random_graph_function(const ApproxBundle& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(b.grid->num_dofs()));
  for (auto& x : v) x = u(rng);
  return GraphFunction(b.grid, v);
}

GasketFunction random_gasket_function(const gasket::HierarchyPtr& h, int level, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(h->num_vertices(level)));
  for (auto& x : v) x = u(rng);
  return GasketFunction(h, level, v);
}

}  // namespace

TEST_CASE("Gamma_m edge data") {
  const auto h = Hierarchy::build(6);
  const SelfSimilarMeasure uniform;

  const auto b0 = build_gamma_m(h, 0, uniform);
  CHECK(b0.num_edges() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(b0.graph->edge(e).length == 1.0);
    CHECK(b0.graph->edge(e).energy_weight == doctest::Approx(1.0));
    CHECK(b0.graph->edge(e).measure_weight == doctest::Approx(1.0 / 3.0));
  }

  const auto b1 = build_gamma_m(h, 1, uniform);
  CHECK(b1.num_edges() == 9);
  CHECK(b1.graph->num_vertices() == 6);
  for (std::size_t e = 0; e < 9; ++e) {
    CHECK(b1.graph->edge(e).length == 0.5);
    CHECK(b1.graph->edge(e).energy_weight == doctest::Approx(5.0 / 6.0));
    CHECK(b1.endpoints[e][0] < b1.endpoints[e][1]);
  }
  CHECK(b1.vertex_weights[0] == 0.5);
  CHECK(b1.vertex_weights[4] == 0.25);

  for (const auto& mu : {uniform, SelfSimilarMeasure({0.5, 0.3, 0.2})}) {
    for (int m = 0; m <= 2; ++m) {
      const auto b = build_gamma_m(h, m, mu);
      CHECK(b.total_measure() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(b.vertex_integrals.sum() == doctest::Approx(1.0).epsilon(1e-12));
      for (std::size_t p = 0; p < h->num_vertices(m); ++p) {
        CHECK(b.gasket_vertex[b.graph_vertex[p]] == p);
      }
    }
  }
  CHECK_THROWS_AS(build_gamma_m(h, 3, uniform), std::invalid_argument);
  CHECK_THROWS_AS(build_gamma_m(h, -1, uniform), std::invalid_argument);
}

TEST_CASE("identification operators fix constants") {
  const auto h = Hierarchy::build(6);
  const SelfSimilarMeasure mu({0.45, 0.35, 0.2});
  const auto b = build_gamma_m(h, 2, mu, {6, 3});
  const auto one = J0_forward(b, GraphFunction::constant(b.grid, 1.0));
  CHECK((one.values().array() - 1.0).abs().maxCoeff() < 1e-12);
  const auto back = J0_adjoint(b, GasketFunction::constant(h, 4, 1.0));
  CHECK((back - EdgeField::edgewise_constant(
                    b.grid, FieldBasis::kCellwise,
                    std::vector<double>(b.num_edges(), 1.0))).max_abs() < 1e-12);
  CHECK((J1(b, GraphFunction::constant(b.grid, 2.0)).values().array() - 2.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("J0 and J0* are adjoint and J0 is a contraction") {
  std::mt19937_64 rng(4);
  const auto h = Hierarchy::build(7);
  const SelfSimilarMeasure mu({0.5, 0.3, 0.2});
  for (int m = 1; m <= 3; ++m) {
    const auto b = build_gamma_m(h, m, mu, {7, 3});
    for (int k = 0; k < 5; ++k) {
      const auto f = random_graph_function(b, rng);
      const auto u = random_gasket_function(h, m + 2, rng);
      const double lhs = gasket::l2_inner_gasket(J0_forward(b, f), u, mu, 7);
      const double rhs = l2_inner(f, J0_adjoint(b, u));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
      CHECK(gasket::l2_norm_gasket(J0_forward(b, f), mu, 7) <= l2_norm(f) * (1 + 1e-12));
    }
  }
}

TEST_CASE("energy identity between J1 and J1~") {
  std::mt19937_64 rng(8);
  const auto h = Hierarchy::build(6);
  const SelfSimilarMeasure mu;
  for (int m = 0; m <= 2; ++m) {
    const auto b = build_gamma_m(h, m, mu, {6, 4});
    for (int k = 0; k < 5; ++k) {
      const auto f = random_graph_function(b, rng);
      const auto u = random_gasket_function(h, m + 2, rng);
      const double lhs = energy_form(f, J1_tilde(b, u));
      const double rhs = gasket::graph_energy(gasket::harmonic_extend(J1(b, f), m + 2), u);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
      // Restriction to V_m never increases the energy.
      CHECK(gasket::graph_energy(J1(b, f)) <= energy(f) * (1 + 1e-12));
    }
  }
}

TEST_CASE("phi_m is an energy isometry of edgewise-linear functions") {
  std::mt19937_64 rng(12);
  const auto h = Hierarchy::build(6);
  const auto b = build_gamma_m(h, 2, SelfSimilarMeasure(), {6, 5});
  for (int k = 0; k < 5; ++k) {
    const auto u = random_gasket_function(h, 2, rng);
    const GraphFunction f = phi_m_inverse(b, u);
    CHECK(energy(f) == doctest::Approx(gasket::graph_energy(u)).epsilon(1e-12));
    CHECK((phi_m(b, f).values() - u.values()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((vertex_restriction(b, f) - u.values()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((H_gamma(b, u.values()) - f).sup_norm() < 1e-12);

    const auto potential = phi_m_gradient(b, gradient_d(f));
    CHECK(potential[0] == doctest::Approx(0.0).epsilon(1e-12));
    const Eigen::VectorXd shifted = u.values().array() - u[0];
    CHECK((potential.values() - shifted).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(phi_m(b, random_graph_function(b, rng)), std::invalid_argument);

  const auto b0 = build_gamma_m(h, 0, SelfSimilarMeasure());
  std::vector<double> oriented(3);
  for (std::size_t e = 0; e < 3; ++e) {
    // +1 along the cycle q0 -> q1 -> q2 -> q0 in the p < q orientation.
    oriented[e] = (b0.endpoints[e][0] == 0 && b0.endpoints[e][1] == 2) ? -1.0 : 1.0;
  }
  CHECK_THROWS_AS(phi_m_gradient(b0, EdgeField::edgewise_constant(b0.grid, FieldBasis::kCellwise, oriented)),
                  std::invalid_argument);
  CHECK_NOTHROW(phi_m_gradient(b0, EdgeField::edgewise_constant(b0.grid, FieldBasis::kCellwise,
                                                                std::vector<double>(3, 0.0))));
}

TEST_CASE("delta_m") {
  const SelfSimilarMeasure uniform;
  CHECK(delta_m(0, uniform) == doctest::Approx(54.0));
  CHECK(delta_m(2, uniform) == doctest::Approx(2.16));
  for (int m = 0; m < 6; ++m) CHECK(delta_m(m + 1, uniform) / delta_m(m, uniform) == doctest::Approx(0.2));
  const SelfSimilarMeasure skew({0.5, 0.3, 0.2});
  CHECK(delta_m(3, skew) == doctest::Approx(54.0 * 0.125 * 0.216));
}

TEST_CASE("quasi-unitary suite holds on small levels") {
  const auto h = Hierarchy::build(7);
  SuiteOptions opts;
  opts.samples = 12;
  for (const auto& mu : {SelfSimilarMeasure(), SelfSimilarMeasure({0.5, 0.3, 0.2})}) {
    for (int m = 1; m <= 2; ++m) {
      const auto report = quasi_unitary_suite(h, m, mu, opts);
      CHECK(report.holds);
      CHECK(report.samples == 12);
      REQUIRE(report.lemmas.size() == 4);
      for (const auto& lemma : report.lemmas) {
        CHECK(lemma.holds);
        CHECK(lemma.worst_ratio <= 1.0);
      }
      CHECK(report.elemma_defect < 1e-10);
      CHECK(report.adjoint_defect < 1e-10);
      CHECK(report.contraction_ratio <= 1.0 + 1e-12);
      CHECK(report.dominance_ratio <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("constant data give zero discrepancy") {
  const auto h = Hierarchy::build(6);
  const SelfSimilarMeasure mu;
  ConvergenceOptions opts;
  opts.levels = {1, 2};
  opts.reference_level = 3;
  opts.quadrature_level = 5;
  opts.times = {0.1, 0.5};

  const auto heat = heat_convergence_experiment(GasketFunction::constant(h, 1, 1.0), mu, opts);
  CHECK(heat.discrepancy.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(heat.smoothing_holds);

  const std::vector<GasketFunction> tests{GasketFunction::delta(h, 1, 0), GasketFunction::delta(h, 1, 4)};
  const auto burgers = burgers_convergence_experiment(GasketFunction::constant(h, 1, 0.0), mu, tests, opts);
  CHECK(burgers.positivity_holds);
  for (const auto& per_time : burgers.pairings) {
    for (const auto& per_phi : per_time) CHECK(per_phi.cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK((burgers.min_w.array() - 1.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("heat discrepancy decreases with the level") {
  const auto h = Hierarchy::build(7);
  const SelfSimilarMeasure mu;
  ConvergenceOptions opts;
  opts.levels = {1, 2, 3};
  opts.reference_level = 5;
  opts.times = {0.1};
  Eigen::VectorXd datum(6);
  datum << 1.0, 0.3, -0.5, 0.8, 0.1, 0.6;
  const auto w0 = GasketFunction(h, 1, datum.array() + 2.0);
  const auto res = heat_convergence_experiment(w0, mu, opts);
  REQUIRE(res.discrepancy.rows() == 3);
  CHECK(res.discrepancy(1, 0) < res.discrepancy(0, 0));
  CHECK(res.discrepancy(2, 0) < res.discrepancy(1, 0));
  CHECK(res.slopes[0] < 0.0);
  CHECK(res.smoothing_holds);
}

TEST_CASE("fitted log slope") {
  const std::vector<int> levels{1, 2, 3, 4};
  Eigen::VectorXd v(4);
  for (int i = 0; i < 4; ++i) v[i] = 3.0 * std::exp(-0.7 * levels[static_cast<std::size_t>(i)]);
  CHECK(fitted_log_slope(levels, v) == doctest::Approx(-0.7));
  CHECK_THROWS_AS(fitted_log_slope(std::span<const int>(levels.data(), 1), v.head(1)), std::invalid_argument);
}

TEST_CASE("invalid convergence setups are rejected") {
  const auto h = Hierarchy::build(5);
  ConvergenceOptions opts;
  opts.levels = {1, 2};
  opts.reference_level = 3;
  opts.quadrature_level = 5;
  opts.times = {0.0};
  CHECK_THROWS_AS(heat_convergence_experiment(GasketFunction::constant(h, 1, 1.0), SelfSimilarMeasure(), opts),
                  std::invalid_argument);
  opts.times = {0.1};
  opts.quadrature_level = 6;
  CHECK_THROWS_AS(heat_convergence_experiment(GasketFunction::constant(h, 1, 1.0), SelfSimilarMeasure(), opts),
                  std::invalid_argument);
  opts.quadrature_level = 5;
  opts.levels = {1, 3};
  CHECK_THROWS_AS(heat_convergence_experiment(GasketFunction::constant(h, 1, 1.0), SelfSimilarMeasure(), opts),
                  std::invalid_argument);
}
