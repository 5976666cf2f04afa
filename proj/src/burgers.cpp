#include "mgb/burgers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mgb/csv.hpp"

namespace mgb {

namespace {

void check_times(std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("time grid is empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i])) {
      throw std::invalid_argument("times must be finite and nonnegative");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw std::invalid_argument("times must be strictly ascending");
    }
  }
}

GraphFunction anchored(const GraphFunction& f, std::size_t anchor) {
  return f.map([shift = f.vertex_value(anchor)](double x) { return x - shift; });
}

GraphFunction raw_potential(const GraphFunction& w) {
  return w.map([](double x) { return -2.0 * std::log(x); });
}

BurgersSolution solve_from_coefficients(const SpectralDecomposition& spec,
                                        const Eigen::VectorXd& coeff,
                                        std::span<const double> times,
                                        const ColeHopfOptions& opts) {
  check_times(times);
  if (opts.anchor_vertex >= spec.grid_ptr()->graph().num_vertices()) {
    throw std::invalid_argument("anchor vertex out of range");
  }
  GraphFunction w0 = spec.synthesize(coeff);
  if (w0.min_value() <= opts.positivity_floor) {
    std::ostringstream os;
    os << "initial heat datum has nodal value " << w0.min_value() << " below the floor "
       << opts.positivity_floor;
    throw PositivityError(0.0, w0.min_value(), os.str());
  }
  BurgersSolution sol{{}, {}, {}, {}, std::nullopt, opts.anchor_vertex, 0.0, w0};
  sol.initial_sup_norm = anchored(raw_potential(w0), opts.anchor_vertex).sup_norm();

  const Eigen::ArrayXd lambda = spec.eigenvalues().array();
  for (double t : times) {
    GraphFunction w = spec.synthesize((coeff.array() * (-t * lambda).exp()).matrix());
    if (w.min_value() <= opts.positivity_floor) {
      std::ostringstream os;
      os << "heat solution reaches " << w.min_value() << " at t = " << t
         << " (floor " << opts.positivity_floor << "); the Cole-Hopf logarithm is undefined";
      throw PositivityError(t, w.min_value(), os.str());
    }
    GraphFunction h = anchored(raw_potential(w), opts.anchor_vertex);
    sol.u.push_back(gradient_d(h));  // u = -2 d log w = dh
    sol.times.push_back(t);
    sol.w.push_back(std::move(w));
    sol.h.push_back(std::move(h));
  }
  return sol;
}

void check_interior_index(const BurgersSolution& sol, std::size_t i) {
  if (i < 1 || i + 1 >= sol.size()) {
    throw std::out_of_range("centered time difference needs 1 <= i <= N - 2");
  }
}

}  // namespace

BurgersSolution cole_hopf_solve(const SpectralDecomposition& spec, const GraphFunction& h0,
                                std::span<const double> times, const ColeHopfOptions& opts) {
  if (opts.anchor_vertex >= h0.grid().graph().num_vertices()) {
    throw std::invalid_argument("anchor vertex out of range");
  }
  const GraphFunction h0a = anchored(h0, opts.anchor_vertex);
  if (!h0a.dofs().allFinite()) throw std::invalid_argument("initial potential is not finite");
  const GraphFunction w0 = h0a.map([](double x) { return std::exp(-0.5 * x); });
  BurgersSolution sol = solve_from_coefficients(spec, spec.coefficients(w0), times, opts);
  sol.initial_sup_norm = h0a.sup_norm();
  return sol;
}

BurgersSolution cole_hopf_from_heat(const SpectralDecomposition& spec, const HeatDatum& w0,
                                    std::span<const double> times,
                                    const ColeHopfOptions& opts) {
  const Eigen::VectorXd coeff =
      std::visit([&](const auto& d) { return spec.coefficients(d); }, w0);
  return solve_from_coefficients(spec, coeff, times, opts);
}

BurgersSolution cole_hopf_solve_with_circulation(const SpectralDecomposition& spec,
                                                 const GraphFunction& h0, const EdgeField& eta0,
                                                 std::span<const double> times,
                                                 const ColeHopfOptions& opts) {
  if (eta0.basis() != FieldBasis::kNodal) {
    throw std::invalid_argument("frozen circulation must be given as a nodal field");
  }
  const auto dstar = coderivative_dstar(eta0);
  if (!dstar.in_domain || dstar.value.max_abs() > 1e-9 * std::max(1.0, eta0.max_abs())) {
    throw std::invalid_argument("frozen circulation is not in ker d*");
  }
  BurgersSolution sol = cole_hopf_solve(spec, h0, times, opts);
  std::vector<double> per_edge(eta0.grid().graph().num_edges());
  for (std::size_t e = 0; e < per_edge.size(); ++e) per_edge[e] = eta0.edge_mean(e);
  const EdgeField eta_cells =
      EdgeField::edgewise_constant(eta0.grid_ptr(), FieldBasis::kCellwise, per_edge);
  for (auto& u : sol.u) u += eta_cells;
  sol.circulation = eta_cells;
  return sol;
}

double kpz_residual(const BurgersSolution& sol, const GraphFunction& phi, std::size_t i) {
  check_interior_index(sol, i);
  const double dt = sol.times[i + 1] - sol.times[i - 1];
  const GraphFunction h = raw_potential(sol.w[i]);
  const GraphFunction h_t = (1.0 / dt) * (raw_potential(sol.w[i + 1]) - raw_potential(sol.w[i - 1]));
  const EdgeField dh = gradient_d(h);
  return l2_inner(h_t, phi) + energy_form(h, phi) + 0.5 * l2_inner(phi, dh.squared());
}

TestField bump_gradient_field(const GridPtr& grid, std::size_t edge, double center,
                              double radius) {
  const auto& graph = grid->graph();
  if (edge >= graph.num_edges()) throw std::out_of_range("edge index out of range");
  const auto& e = graph.edge(edge);
  if (!(radius > 0.0) || center - radius <= 0.0 || center + radius >= e.length) {
    throw std::invalid_argument("bump support must lie strictly inside the edge");
  }
  const double ratio = e.energy_weight / e.measure_weight;
  auto dphi = [=](double s) {
    const double z = (s - center) / radius;
    if (std::abs(z) >= 1.0) return 0.0;
    const double q = 1.0 - z * z;
    return -8.0 * z * q * q * q / radius;
  };
  auto d2phi = [=](double s) {
    const double z = (s - center) / radius;
    if (std::abs(z) >= 1.0) return 0.0;
    const double q = 1.0 - z * z;
    return (-8.0 * q * q * q + 48.0 * z * z * q * q) / (radius * radius);
  };

  std::vector<std::vector<double>> values(graph.num_edges());
  for (std::size_t k = 0; k < graph.num_edges(); ++k) {
    values[k].assign(static_cast<std::size_t>(grid->cells(k) + 1), 0.0);
  }
  const double h = grid->spacing(edge);
  for (int k = 0; k <= grid->cells(edge); ++k) {
    values[edge][static_cast<std::size_t>(k)] = std::sqrt(ratio) * dphi(k * h);
  }
  GraphFunction dstar = GraphFunction::interpolate(grid, [&](std::size_t k, double s) {
    return k == edge ? -ratio * d2phi(s) : 0.0;
  });
  return {EdgeField(grid, FieldBasis::kNodal, std::move(values)), std::move(dstar)};
}

std::vector<TestField> circulation_test_fields(const GridPtr& grid) {
  std::vector<TestField> out;
  for (auto& field : kernel_dstar_basis(grid, FieldBasis::kNodal)) {
    out.push_back({std::move(field), GraphFunction::constant(grid, 0.0)});
  }
  return out;
}

double vector_residual(const BurgersSolution& sol, const TestField& v, std::size_t i) {
  check_interior_index(sol, i);
  const auto dstar = coderivative_dstar(v.field);
  if (!dstar.in_domain) {
    throw std::invalid_argument("test field violates the anti-Kirchhoff vertex conditions");
  }
  const double dt = sol.times[i + 1] - sol.times[i - 1];
  const EdgeField u_t = (1.0 / dt) * (sol.u[i + 1] - sol.u[i - 1]);
  const EdgeField& u = sol.u[i];
  return l2_inner(u_t, v.field) + l2_inner(u, gradient_d(v.dstar)) +
         0.5 * l2_inner(u.squared(), v.dstar);
}

HelmholtzParts structure_decompose(const BurgersSolution& sol, std::size_t i) {
  return helmholtz_project(sol.u.at(i));
}

std::vector<GraphFunction> scalar_burgers_solve(const SpectralDecomposition& spec,
                                                const GraphFunction& g0,
                                                std::span<const double> times,
                                                const ScalarBurgersOptions& opts) {
  check_times(times);
  if (!spec.complete()) throw std::invalid_argument("scalar Burgers needs the full spectrum");
  if (!g0.dofs().allFinite()) throw std::invalid_argument("initial datum is not finite");
  const auto& grid = spec.grid_ptr();
  const auto& graph = grid->graph();

  double speed = 0.0;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(e);
    speed = std::max(speed, std::sqrt(edge.energy_weight / edge.measure_weight) / grid->spacing(e));
  }
  const double courant = opts.max_step * std::max(g0.sup_norm(), 1e-300) * speed;
  if (courant > opts.cfl) {
    std::ostringstream os;
    os << "time step " << opts.max_step << " violates the CFL bound (" << courant << " > "
       << opts.cfl << ")";
    throw std::invalid_argument(os.str());
  }

  const auto& op = spec.op();
  const Eigen::MatrixXd& vectors = spec.eigenvectors();
  const Eigen::ArrayXd lambda = spec.eigenvalues().array();

  auto convection = [&](const Eigen::VectorXd& g) {
    std::vector<std::vector<double>> values(graph.num_edges());
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
      const auto& edge = graph.edge(e);
      const double scale =
          -0.5 * std::sqrt(edge.energy_weight / edge.measure_weight) / grid->spacing(e);
      values[e].resize(static_cast<std::size_t>(grid->cells(e)));
      for (int k = 0; k < grid->cells(e); ++k) {
        const double a = g[static_cast<Eigen::Index>(grid->dof(e, k))];
        const double b = g[static_cast<Eigen::Index>(grid->dof(e, k + 1))];
        values[e][static_cast<std::size_t>(k)] = scale * (b * b - a * a);
      }
    }
    return load_vector(op, EdgeField(grid, FieldBasis::kCellwise, std::move(values)));
  };

  std::vector<GraphFunction> out;
  Eigen::VectorXd g = g0.dofs();
  double now = 0.0;
  for (double target : times) {
    const double span = target - now;
    const auto steps = static_cast<long long>(std::ceil(span / opts.max_step - 1e-12));
    if (steps > 0) {
      const double dt = span / static_cast<double>(steps);
      const Eigen::ArrayXd decay = (-dt * lambda).exp();
      for (long long s = 0; s < steps; ++s) {
        Eigen::VectorXd c = vectors.transpose() * (op.mass * g + dt * convection(g));
        c.array() *= decay;
        g = vectors * c;
        const double peak = g.cwiseAbs().maxCoeff();
        if (!std::isfinite(peak) || peak > opts.blowup_cap) {
          std::ostringstream os;
          os << "scalar Burgers blow-up: |g| = " << peak << " near t = "
             << now + dt * static_cast<double>(s + 1);
          throw SolverError(os.str());
        }
      }
    }
    now = target;
    out.emplace_back(grid, g);
  }
  return out;
}

AprioriReport apriori_check(const BurgersSolution& sol) {
  if (sol.circulation) throw std::invalid_argument("a-priori bound covers gradient solutions only");
  AprioriReport report;
  const double bound =
      2.0 * std::exp(0.5 * sol.initial_sup_norm) * std::sqrt(energy(sol.w0));
  for (std::size_t i = 0; i < sol.size(); ++i) {
    AprioriRow row;
    row.time = sol.times[i];
    row.u_norm = l2_norm(sol.u[i]);
    row.log_energy_form =
        2.0 * std::sqrt(energy(sol.w[i].map([](double x) { return std::log(x); })));
    row.energy_bound = bound;
    row.margin = bound - row.u_norm;
    if (row.u_norm > bound * (1.0 + 1e-12) + 1e-300) report.holds = false;
    const double defect =
        std::abs(row.u_norm - row.log_energy_form) / std::max(1e-300, std::max(row.u_norm, 1.0));
    report.identity_defect = std::max(report.identity_defect, defect);
    report.rows.push_back(row);
  }
  return report;
}

std::vector<double> stability_sweep(const SpectralDecomposition& spec, const GraphFunction& h0,
                                    const GraphFunction& perturbation,
                                    std::span<const double> epsilons,
                                    std::span<const double> times) {
  const BurgersSolution base = cole_hopf_solve(spec, h0, times);
  std::vector<double> out;
  for (double eps : epsilons) {
    const BurgersSolution other = cole_hopf_solve(spec, h0 + eps * perturbation, times);
    double worst = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      worst = std::max(worst, l2_norm(base.u[i] - other.u[i]));
    }
    out.push_back(worst);
  }
  return out;
}

void write_trajectory_csv(const BurgersSolution& sol, const std::filesystem::path& path) {
  CsvWriter csv(path, {"time", "edge_id", "node_index", "u_value", "h_value", "w_value"});
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const auto& grid = sol.w[i].grid();
    for (std::size_t e = 0; e < grid.graph().num_edges(); ++e) {
      const auto u = sol.u[i].values(e);
      const int n = grid.cells(e);
      for (int k = 0; k <= n; ++k) {
        const auto left = static_cast<std::size_t>(std::max(k - 1, 0));
        const auto right = static_cast<std::size_t>(std::min(k, n - 1));
        const double u_node = 0.5 * (u[left] + u[right]);
        csv.row(sol.times[i], grid.graph().edge(e).id, k, u_node, sol.h[i].value(e, k),
                sol.w[i].value(e, k));
      }
    }
  }
}

}  // namespace mgb
