#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "mgb/spectral.hpp"

using namespace mgb;

namespace {

GraphPtr share(MetricGraph g) { return std::make_shared<const MetricGraph>(std::move(g)); }

// Roots of the Kirchhoff secular function of a star with free leaves,
//   F(k) = sum_i sin(k l_i) prod_{j != i} cos(k l_j),
// found by sign scanning and bisection. Returns k^2.
std::vector<double> star_secular_eigenvalues(const std::vector<double>& lengths, double k_max) {
  auto secular = [&](double k) {
    double total = 0.0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      double term = std::sin(k * lengths[i]);
      for (std::size_t j = 0; j < lengths.size(); ++j) {
        if (j != i) term *= std::cos(k * lengths[j]);
      }
      total += term;
    }
    return total;
  };
  std::vector<double> out{0.0};
  const double dk = 1e-4;
  for (double k = dk; k < k_max; k += dk) {
    double a = k, b = k + dk;
    if (secular(a) * secular(b) > 0.0) continue;
    for (int it = 0; it < 80; ++it) {
      const double m = 0.5 * (a + b);
      (secular(a) * secular(m) <= 0.0 ? b : a) = m;
    }
    out.push_back(std::pow(0.5 * (a + b), 2));
  }
  return out;
}

GraphFunction positive_datum(const GridPtr& grid) {
  return GraphFunction::interpolate(grid, [](std::size_t e, double s) {
    return 1.0 + 0.5 * std::cos(3.0 * s + static_cast<double>(e));
  });
}

}  // namespace

TEST_CASE("element matrices on a single unit edge") {
  const auto grid = EdgeGrid::uniform(share(interval_graph()), 1);
  const auto op = assemble(grid);
  CHECK(op.stiffness(0, 0) == doctest::Approx(1.0));
  CHECK(op.stiffness(0, 1) == doctest::Approx(-1.0));
  CHECK(op.stiffness(1, 1) == doctest::Approx(1.0));
  CHECK(op.mass(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(op.mass(0, 1) == doctest::Approx(1.0 / 6.0));

  const auto lumped = assemble(grid, MassMatrix::kLumped);
  CHECK(lumped.mass(0, 0) == doctest::Approx(0.5));
  CHECK(lumped.mass(0, 1) == 0.0);
}

TEST_CASE("stiffness annihilates constants and mass integrates them") {
  const auto tri = EdgeGrid::uniform(share(triangle_graph()), 6);
  const auto op = assemble(tri);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(op.stiffness.rows());
  CHECK((op.stiffness * one).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(one.dot(op.mass * one) == doctest::Approx(3.0));

  const auto f = positive_datum(tri);
  const Eigen::VectorXd b = load_vector(op, f);
  CHECK((b - op.mass * f.dofs()).norm() < 1e-12);
}

TEST_CASE("interval spectrum converges to (k pi)^2") {
  const auto grid = EdgeGrid::uniform(share(interval_graph()), 1000);
  const auto spec = eigensolve(grid);
  CHECK(spec.complete());
  CHECK(spec.eigenvalues()[0] == 0.0);
  for (int k = 1; k <= 5; ++k) {
    const double exact = std::pow(k * M_PI, 2);
    CHECK(spec.eigenvalues()[k] == doctest::Approx(exact).epsilon(1e-4));
  }
  const Eigen::MatrixXd gram =
      spec.eigenvectors().transpose() * spec.op().mass * spec.eigenvectors();
  CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <
        1e-8);
}

TEST_CASE("weights rescale the interval spectrum by a/c") {
  const auto grid = EdgeGrid::uniform(share(interval_graph(2.0, 3.0, 0.5)), 400);
  const auto spec = eigensolve(grid, MassMatrix::kConsistent, 4);
  CHECK(spec.size() == 4);
  for (int k = 1; k < 4; ++k) {
    CHECK(spec.eigenvalues()[k] == doctest::Approx(6.0 * std::pow(k * M_PI / 2.0, 2)).epsilon(1e-4));
  }
}

TEST_CASE("a path of two edges behaves like an interval of length two") {
  const auto spec = eigensolve(EdgeGrid::uniform(share(path_graph(2)), 400));
  for (int k = 1; k <= 4; ++k) {
    CHECK(spec.eigenvalues()[k] == doctest::Approx(std::pow(k * M_PI / 2.0, 2)).epsilon(1e-4));
  }
}

TEST_CASE("star spectrum matches the secular equation") {
  const std::vector<double> lengths{1.0, 0.7, 0.4};
  std::vector<EdgeSpec> specs;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    specs.push_back({std::to_string(i), "l" + std::to_string(i), "c", lengths[i], 1.0, 1.0});
  }
  std::vector<int> cells;
  for (double l : lengths) cells.push_back(static_cast<int>(std::lround(600 * l)));
  const auto grid = std::make_shared<const EdgeGrid>(share(MetricGraph::build(specs)), cells);
  const auto spec = eigensolve(grid, MassMatrix::kConsistent, 12);
  const auto oracle = star_secular_eigenvalues(lengths, 12.0);
  REQUIRE(oracle.size() >= 8);
  CHECK(spec.eigenvalues()[0] == 0.0);
  for (std::size_t k = 1; k < 8; ++k) {
    CHECK(spec.eigenvalues()[static_cast<Eigen::Index>(k)] ==
          doctest::Approx(oracle[k]).epsilon(1e-4));
  }
}

TEST_CASE("equal star has degenerate half-integer modes") {
  const auto spec = eigensolve(EdgeGrid::uniform(share(star_graph(3)), 300), MassMatrix::kConsistent, 4);
  const double half = std::pow(M_PI / 2.0, 2);
  CHECK(spec.eigenvalues()[1] == doctest::Approx(half).epsilon(1e-4));
  CHECK(spec.eigenvalues()[2] == doctest::Approx(half).epsilon(1e-4));
  CHECK(spec.eigenvalues()[3] == doctest::Approx(M_PI * M_PI).epsilon(1e-4));
}

TEST_CASE("heat flow of a cosine decays at rate pi^2") {
  const auto grid = EdgeGrid::uniform(share(interval_graph()), 400);
  const auto spec = eigensolve(grid);
  const auto w0 = GraphFunction::interpolate(grid, [](std::size_t, double s) { return std::cos(M_PI * s); });
  for (double t : {0.01, 0.05, 0.2}) {
    const auto w = heat_apply(spec, w0, t);
    const auto exact = std::exp(-M_PI * M_PI * t) * w0;
    CHECK((w - exact).sup_norm() < 1e-4 * std::exp(-M_PI * M_PI * t) + 1e-12);
  }
  CHECK((heat_apply(spec, w0, 0.0) - w0).sup_norm() < 1e-10);
}

TEST_CASE("semigroup properties") {
  const auto grid = EdgeGrid::uniform(share(star_graph(4)), 20);
  const auto spec = eigensolve(grid);
  const auto w0 = positive_datum(grid);
  const double mass0 = load_vector(spec.op(), GraphFunction::constant(grid, 1.0)).dot(w0.dofs());

  double prev_l2 = l2_norm(w0), prev_energy = energy(w0);
  for (double t : {0.01, 0.1, 0.5, 2.0}) {
    const auto w = heat_apply(spec, w0, t);
    const double mass = load_vector(spec.op(), GraphFunction::constant(grid, 1.0)).dot(w.dofs());
    CHECK(mass == doctest::Approx(mass0).epsilon(1e-12));
    CHECK(l2_norm(w) <= prev_l2 + 1e-12);
    CHECK(energy(w) <= prev_energy + 1e-12);
    prev_l2 = l2_norm(w);
    prev_energy = energy(w);

    const auto twice = heat_apply(spec, heat_apply(spec, w0, t / 2), t / 2);
    CHECK((twice - w).sup_norm() < 1e-10);

    CHECK(smoothing_norm(spec, w0, t) <= smoothing_constant(t) * l2_norm(w0) * (1 + 1e-12));
    CHECK(smoothing_norm(spec, w0, t) * smoothing_norm(spec, w0, t) ==
          doctest::Approx(energy(w)).epsilon(1e-9));
  }
}

TEST_CASE("smoothing constant is the supremum of sqrt(x) exp(-x t)") {
  for (double t : {0.05, 1.0, 3.0}) {
    double best = 0.0;
    for (double x = 0.0; x < 200.0 / t; x += 1e-3 / t) best = std::max(best, std::sqrt(x) * std::exp(-x * t));
    CHECK(smoothing_constant(t) == doctest::Approx(best).epsilon(1e-6));
  }
}

TEST_CASE("lumped mass keeps positive data positive") {
  const auto grid = EdgeGrid::uniform(share(triangle_graph()), 30);
  const auto spec = eigensolve(grid, MassMatrix::kLumped);
  std::vector<double> spike(grid->num_dofs(), 0.0);
  spike[0] = 1.0;
  const GraphFunction w0(grid, Eigen::Map<Eigen::VectorXd>(spike.data(), static_cast<Eigen::Index>(spike.size())));
  for (double t : {1e-4, 1e-3, 1e-2, 0.1}) {
    CHECK(heat_apply(spec, w0, t).min_value() >= -1e-12);
  }
}

TEST_CASE("invalid requests are rejected") {
  const auto grid = EdgeGrid::uniform(share(interval_graph()), 4);
  const auto spec = eigensolve(grid);
  const auto w0 = GraphFunction::constant(grid, 1.0);
  CHECK_THROWS_AS(heat_apply(spec, w0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(smoothing_norm(spec, w0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(eigensolve(grid, MassMatrix::kConsistent, 99), SolverError);

  const auto other = EdgeGrid::uniform(share(interval_graph()), 5);
  CHECK_THROWS_AS(heat_apply(spec, GraphFunction::constant(other, 1.0), 0.1), MismatchError);
}
