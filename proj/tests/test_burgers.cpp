#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "mgb/burgers.hpp"

using namespace mgb;

namespace {

GraphPtr share(MetricGraph g) { return std::make_shared<const MetricGraph>(std::move(g)); }

// Explicit conservative finite differences for u_t + (u^2/2)_x = u_xx on
// [0, 1] with u = 0 at both ends. Returns nodal values at time t.
std::vector<double> burgers_fd(const std::function<double(double)>& u0, int n, double t) {
  const double h = 1.0 / n;
  std::vector<double> u(static_cast<std::size_t>(n) + 1), next(u.size());
  for (int i = 0; i <= n; ++i) u[static_cast<std::size_t>(i)] = u0(i * h);
  u.front() = u.back() = 0.0;
  const auto steps = static_cast<long>(std::ceil(t / (0.2 * h * h)));
  const double dt = t / static_cast<double>(steps);
  for (long s = 0; s < steps; ++s) {
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
      const double flux = (u[i + 1] * u[i + 1] - u[i - 1] * u[i - 1]) / (4.0 * h);
      next[i] = u[i] + dt * ((u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h) - flux);
    }
    next.front() = next.back() = 0.0;
    u.swap(next);
  }
  return u;
}

GraphFunction triangle_potential(const GridPtr& grid) {
  return GraphFunction::interpolate(grid, [](std::size_t e, double s) {
    return 0.8 * (1.0 + static_cast<double>(e)) * std::sin(M_PI * s);
  });
}

GraphFunction triangle_test_function(const GridPtr& grid) {
  return GraphFunction::interpolate(grid, [](std::size_t e, double s) {
    return 1.0 + std::pow(std::sin(M_PI * s), 2) * (e == 1 ? -0.5 : 1.0);
  });
}

double fitted_order(const std::vector<double>& errors) {
  return std::log2(errors.front() / errors.back()) / static_cast<double>(errors.size() - 1);
}

}  // namespace

TEST_CASE("zero potential gives the zero solution") {
  const auto grid = EdgeGrid::uniform(share(star_graph(3)), 10);
  const auto spec = eigensolve(grid);
  const std::vector<double> times{0.0, 0.1, 1.0};
  const auto sol = cole_hopf_solve(spec, GraphFunction::constant(grid, 0.0), times);
  REQUIRE(sol.size() == 3);
  for (const auto& u : sol.u) CHECK(u.max_abs() < 1e-12);
  for (const auto& h : sol.h) CHECK(h.sup_norm() < 1e-12);
}

TEST_CASE("potentials are anchored and a constant shift is invisible") {
  const auto grid = EdgeGrid::uniform(share(triangle_graph()), 8);
  const auto spec = eigensolve(grid);
  const auto h0 = triangle_potential(grid);
  const std::vector<double> times{0.0, 0.05};
  ColeHopfOptions opts;
  opts.anchor_vertex = 1;
  const auto a = cole_hopf_solve(spec, h0, times, opts);
  const auto b = cole_hopf_solve(spec, h0 + GraphFunction::constant(grid, 3.0), times, opts);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.h[i].vertex_value(1) == 0.0);
    CHECK((a.u[i] - b.u[i]).max_abs() < 1e-10);
  }
}

TEST_CASE("closed form on the unit interval") {
  const auto grid = EdgeGrid::uniform(share(interval_graph()), 1000);
  const auto spec = eigensolve(grid);
  const double amp = 0.5;
  const auto w0 =
      GraphFunction::interpolate(grid, [&](std::size_t, double s) { return 1.0 + amp * std::cos(M_PI * s); });
  const std::vector<double> times{0.1};
  const auto sol = cole_hopf_from_heat(spec, w0, times);
  const double decay = amp * std::exp(-M_PI * M_PI * 0.1);
  const auto u = sol.u[0].values(0);
  double worst = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    const double s = (static_cast<double>(c) + 0.5) / 1000.0;
    const double exact = 2.0 * M_PI * decay * std::sin(M_PI * s) / (1.0 + decay * std::cos(M_PI * s));
    worst = std::max(worst, std::abs(u[c] - exact));
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("agrees with a finite-difference Burgers solver") {
  const int n = 400;
  const double t = 0.1;
  const auto grid = EdgeGrid::uniform(share(interval_graph()), n);
  const auto spec = eigensolve(grid);
  const auto h0 = GraphFunction::interpolate(grid, [](std::size_t, double s) { return std::cos(M_PI * s); });
  const std::vector<double> times{t};
  const auto sol = cole_hopf_solve(spec, h0, times);
  const auto fd = burgers_fd([](double x) { return -M_PI * std::sin(M_PI * x); }, n, t);

  const auto u = sol.u[0].values(0);
  double sq = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    const double ref = 0.5 * (fd[c] + fd[c + 1]);
    sq += (u[c] - ref) * (u[c] - ref) / n;
  }
  CHECK(std::sqrt(sq) <= 2e-3);
}

TEST_CASE("potential equation residual vanishes under refinement") {
  std::vector<double> errors;
  for (int n : {16, 32, 64}) {
    const auto grid = EdgeGrid::uniform(share(triangle_graph()), n);
    const auto spec = eigensolve(grid);
    const std::vector<double> times{0.05 - 1e-4, 0.05, 0.05 + 1e-4};
    const auto sol = cole_hopf_solve(spec, triangle_potential(grid), times);
    errors.push_back(std::abs(kpz_residual(sol, triangle_test_function(grid), 1)));
  }
  CHECK(errors.back() < errors.front());
  CHECK(fitted_order(errors) >= 0.9);
}

TEST_CASE("vector equation residual vanishes under refinement") {
  std::vector<double> errors;
  for (int n : {16, 32, 64}) {
    const auto grid = EdgeGrid::uniform(share(triangle_graph()), n);
    const auto spec = eigensolve(grid);
    const std::vector<double> times{0.05 - 1e-4, 0.05, 0.05 + 1e-4};
    const auto sol = cole_hopf_solve(spec, triangle_potential(grid), times);
    const auto v = bump_gradient_field(grid, 1, 0.5, 0.3);
    errors.push_back(std::abs(vector_residual(sol, v, 1)));
  }
  CHECK(fitted_order(errors) >= 0.9);
}

TEST_CASE("test fields are checked against the vertex conditions") {
  const auto grid = EdgeGrid::uniform(share(triangle_graph()), 8);
  const auto spec = eigensolve(grid);
  const std::vector<double> times{0.0, 0.01, 0.02};
  const auto sol = cole_hopf_solve(spec, triangle_potential(grid), times);
  const std::vector<double> bad{1.0, 0.0, 0.0};
  const TestField v{EdgeField::edgewise_constant(grid, FieldBasis::kNodal, bad),
                    GraphFunction::constant(grid, 0.0)};
  CHECK_THROWS_AS(vector_residual(sol, v, 1), std::invalid_argument);
  CHECK_THROWS_AS(vector_residual(sol, v, 0), std::out_of_range);
  CHECK_THROWS_AS(bump_gradient_field(grid, 0, 0.1, 0.2), std::invalid_argument);
}

TEST_CASE("gradient solutions have no circulation part") {
  const auto grid = EdgeGrid::uniform(share(triangle_graph()), 12);
  const auto spec = eigensolve(grid);
  const std::vector<double> times{0.0, 0.1};
  const auto sol = cole_hopf_solve(spec, triangle_potential(grid), times);
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const auto parts = structure_decompose(sol, i);
    CHECK(parts.circulation.max_abs() < 1e-10 * std::max(1.0, sol.u[i].max_abs()));
  }
}

TEST_CASE("a frozen circulation is carried unchanged") {
  const auto grid = EdgeGrid::uniform(share(triangle_graph()), 12);
  const auto spec = eigensolve(grid);
  const auto fields = circulation_test_fields(grid);
  REQUIRE(fields.size() == 1);
  CHECK(coderivative_dstar(fields[0].field).in_domain);
  CHECK(coderivative_dstar(fields[0].field).value.max_abs() < 1e-12);

  const auto eta = 0.7 * fields[0].field;
  const std::vector<double> times{0.0, 0.05, 0.2};
  const auto sol = cole_hopf_solve_with_circulation(spec, triangle_potential(grid), eta, times);
  REQUIRE(sol.circulation.has_value());
  const auto plain = cole_hopf_solve(spec, triangle_potential(grid), times);
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const auto parts = structure_decompose(sol, i);
    CHECK((parts.circulation - *sol.circulation).max_abs() < 1e-10);
    CHECK((parts.gradient - plain.u[i]).max_abs() < 1e-10);
  }
  CHECK_THROWS_AS(apriori_check(sol), std::invalid_argument);

  const auto interval = EdgeGrid::uniform(share(interval_graph()), 4);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(cole_hopf_solve_with_circulation(
                      eigensolve(interval), GraphFunction::constant(interval, 0.0),
                      EdgeField::edgewise_constant(interval, FieldBasis::kNodal, one), times),
                  std::invalid_argument);
}

TEST_CASE("scalar Burgers: constants, time-step convergence and difference from the vector flow") {
  const auto grid = EdgeGrid::uniform(share(interval_graph()), 60);
  const auto spec = eigensolve(grid);
  const std::vector<double> times{0.05};

  const auto c = scalar_burgers_solve(spec, GraphFunction::constant(grid, 0.4), times);
  CHECK((c[0] - GraphFunction::constant(grid, 0.4)).sup_norm() < 1e-10);

  const auto g0 = GraphFunction::interpolate(grid, [](std::size_t, double s) { return 1.0 + std::cos(M_PI * s); });
  std::vector<GraphFunction> runs;
  for (double dt : {4e-4, 2e-4, 1e-4, 5e-5}) {
    ScalarBurgersOptions opts;
    opts.max_step = dt;
    runs.push_back(scalar_burgers_solve(spec, g0, times, opts)[0]);
  }
  std::vector<double> diffs;
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) diffs.push_back((runs[k] - runs[k + 1]).sup_norm());
  CHECK(fitted_order(diffs) >= 1.0 - 0.1);

  const auto vec = cole_hopf_solve(spec, GraphFunction::interpolate(grid, [](std::size_t, double s) {
                                     return -2.0 * std::sin(M_PI * s) / M_PI;
                                   }),
                                   times);
  const auto nodal = runs.back().edge_values(0);
  std::vector<double> midpoint(nodal.size() - 1);
  for (std::size_t k = 0; k < midpoint.size(); ++k) midpoint[k] = 0.5 * (nodal[k] + nodal[k + 1]);
  const EdgeField scalar_cells(grid, FieldBasis::kCellwise, {midpoint});
  CHECK(l2_norm(vec.u[0] - scalar_cells) > 1e-3);

  ScalarBurgersOptions tight;
  tight.max_step = 0.5;
  CHECK_THROWS_AS(scalar_burgers_solve(spec, g0, times, tight), std::invalid_argument);
}

TEST_CASE("a-priori bound and the log-energy identity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const auto grid = EdgeGrid::uniform(share(star_graph(3)), 16);
  const auto spec = eigensolve(grid);
  const std::vector<double> times{0.0, 0.01, 0.1, 0.5};
  for (int trial = 0; trial < 5; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    const auto h0 = GraphFunction::interpolate(grid, [&](std::size_t e, double s) {
      return a * std::cos(M_PI * s) + b * s * s * static_cast<double>(e + 1) + c;
    });
    const auto report = apriori_check(cole_hopf_solve(spec, h0, times));
    CHECK(report.holds);
    CHECK(report.identity_defect < 1e-10);
    for (const auto& row : report.rows) CHECK(row.margin >= 0.0);
  }
}

TEST_CASE("stability: perturbations of the potential scale linearly") {
  const auto grid = EdgeGrid::uniform(share(triangle_graph()), 16);
  const auto spec = eigensolve(grid);
  const auto pert = GraphFunction::interpolate(grid, [](std::size_t e, double s) {
    return std::sin(2.0 * M_PI * s) * (e == 2 ? 1.0 : -1.0);
  });
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  const std::vector<double> times{0.0, 0.05, 0.2};
  const auto out = stability_sweep(spec, triangle_potential(grid), pert, eps, times);
  REQUIRE(out.size() == eps.size());
  for (std::size_t k = 0; k + 1 < out.size(); ++k) CHECK(out[k + 1] < out[k]);
  CHECK(out[3] / out[2] == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("loss of positivity is reported with its time") {
  const auto grid = EdgeGrid::uniform(share(interval_graph()), 40);
  const auto spec = eigensolve(grid);
  const std::vector<double> times{0.0, 0.1};

  const auto w0 = GraphFunction::interpolate(grid, [](std::size_t, double s) { return 1e-4 + (s > 0.49 && s < 0.51 ? 1.0 : 0.0); });
  bool caught = false;
  try {
    cole_hopf_from_heat(spec, w0, std::vector<double>{0.0, 1e-5, 1e-4, 1e-3});
  } catch (const PositivityError& e) {
    caught = true;
    CHECK(std::string(e.what()).find("t = ") != std::string::npos);
    CHECK(e.value() <= 1e-12);
  }
  CHECK(caught);

  const auto negative = GraphFunction::interpolate(grid, [](std::size_t, double s) { return s - 0.5; });
  CHECK_THROWS_AS(cole_hopf_from_heat(spec, negative, times), PositivityError);
  CHECK_THROWS_AS(cole_hopf_solve(spec, GraphFunction::constant(grid, 0.0), std::vector<double>{0.1, 0.0}),
                  std::invalid_argument);
}
