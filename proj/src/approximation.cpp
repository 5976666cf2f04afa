#include "mgb/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "mgb/burgers.hpp"

namespace mgb::approx {

using gasket::GasketFunction;
using gasket::HierarchyPtr;
using gasket::SelfSimilarMeasure;

namespace {

void require_grid(const ApproxBundle& b, const EdgeGrid& grid) {
  if (&grid != b.grid.get() && !grid.same_as(*b.grid)) {
    throw MismatchError("function does not live on this Gamma_m grid");
  }
}

void require_hierarchy(const ApproxBundle& b, const GasketFunction& u) {
  if (u.hierarchy() != b.hierarchy) {
    throw MismatchError("gasket function belongs to a different hierarchy");
  }
}

GasketFunction at_level(const GasketFunction& u, int level) {
  if (u.level() == level) return u;
  if (u.level() < level) return gasket::harmonic_extend(u, level);
  return u.restrict_to(level);
}

}  // namespace

ApproxBundle build_gamma_m(HierarchyPtr hierarchy, int m, const SelfSimilarMeasure& mu,
                           const GammaOptions& opts) {
  if (m < 0) throw std::invalid_argument("level must be nonnegative");
  if (opts.cells_per_edge < 1) throw std::invalid_argument("cells per edge must be positive");
  const int q = opts.quadrature_level < 0 ? m + 4 : opts.quadrature_level;
  if (q < m) throw std::invalid_argument("quadrature level below the graph level");
  if (!hierarchy || hierarchy->max_level() < q) {
    throw std::invalid_argument("hierarchy does not reach the quadrature level " +
                                std::to_string(q));
  }

  ApproxBundle b;
  b.level = m;
  b.quadrature_level = q;
  b.hierarchy = hierarchy;
  b.measure = mu;

  const auto& lvl = hierarchy->level(m);
  const auto nv = static_cast<Eigen::Index>(lvl.num_vertices());
  b.vertex_weights = Eigen::VectorXd::Constant(nv, 0.25);
  b.vertex_weights.head(3).setConstant(0.5);

  b.vertex_integrals = gasket::extend_transpose(
      hierarchy, gasket::quadrature_weights(hierarchy, q, mu), q, m);

  const double length = std::ldexp(1.0, -m);
  const double energy_weight = length * std::pow(gasket::kEnergyRatio, -m);
  b.endpoints = lvl.edges;
  b.edge_integrals.resize(static_cast<Eigen::Index>(b.endpoints.size()));
  std::vector<EdgeSpec> specs;
  specs.reserve(b.endpoints.size());
  Eigen::VectorXd spline_weight = Eigen::VectorXd::Zero(nv);
  for (std::size_t k = 0; k < b.endpoints.size(); ++k) {
    const auto p = static_cast<Eigen::Index>(b.endpoints[k][0]);
    const auto q2 = static_cast<Eigen::Index>(b.endpoints[k][1]);
    const double integral = b.vertex_weights[p] * b.vertex_integrals[p] +
                            b.vertex_weights[q2] * b.vertex_integrals[q2];
    b.edge_integrals[static_cast<Eigen::Index>(k)] = integral;
    spline_weight[p] += b.vertex_weights[p];
    spline_weight[q2] += b.vertex_weights[q2];
    specs.push_back({"e" + std::to_string(k), std::to_string(p), std::to_string(q2), length,
                     energy_weight, integral / length});
  }
  if ((spline_weight.array() - 1.0).abs().maxCoeff() > 1e-14) {
    throw AssertionFailure("edge splines do not sum to one at every vertex");
  }

  b.graph = std::make_shared<const MetricGraph>(MetricGraph::build(specs));
  b.grid = EdgeGrid::uniform(b.graph, opts.cells_per_edge);
  b.graph_vertex.resize(lvl.num_vertices());
  b.gasket_vertex.resize(lvl.num_vertices());
  for (std::size_t p = 0; p < lvl.num_vertices(); ++p) {
    const auto v = b.graph->find_vertex(std::to_string(p));
    b.graph_vertex[p] = *v;
    b.gasket_vertex[*v] = p;
  }
  return b;
}

GasketFunction J0_forward(const ApproxBundle& b, const EdgeField& f) {
  require_grid(b, f.grid());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(b.vertex_weights.size());
  for (std::size_t k = 0; k < b.endpoints.size(); ++k) {
    const double avg = f.edge_mean(k);
    g[static_cast<Eigen::Index>(b.endpoints[k][0])] += avg;
    g[static_cast<Eigen::Index>(b.endpoints[k][1])] += avg;
  }
  return GasketFunction(b.hierarchy, b.level, g.cwiseProduct(b.vertex_weights));
}

GasketFunction J0_forward(const ApproxBundle& b, const GraphFunction& f) {
  return J0_forward(b, EdgeField::from_function(f));
}

GasketFunction J0_forward(const ApproxBundle& b, const GraphFunction& f, int output_level) {
  return gasket::harmonic_extend(J0_forward(b, f), output_level);
}

EdgeField J0_adjoint(const ApproxBundle& b, const GasketFunction& u) {
  require_hierarchy(b, u);
  if (u.level() > b.quadrature_level) {
    throw std::invalid_argument("gasket function is finer than the quadrature level");
  }
  const Eigen::VectorXd moments =
      gasket::spline_moments(u, b.level, b.measure, b.quadrature_level);
  std::vector<double> values(b.endpoints.size());
  for (std::size_t k = 0; k < b.endpoints.size(); ++k) {
    const auto p = static_cast<Eigen::Index>(b.endpoints[k][0]);
    const auto q = static_cast<Eigen::Index>(b.endpoints[k][1]);
    values[k] = (b.vertex_weights[p] * moments[p] + b.vertex_weights[q] * moments[q]) /
                b.edge_integrals[static_cast<Eigen::Index>(k)];
  }
  return EdgeField::edgewise_constant(b.grid, FieldBasis::kCellwise, values);
}

Eigen::VectorXd vertex_restriction(const ApproxBundle& b, const GraphFunction& f) {
  require_grid(b, f.grid());
  Eigen::VectorXd out(static_cast<Eigen::Index>(b.graph_vertex.size()));
  for (std::size_t p = 0; p < b.graph_vertex.size(); ++p) {
    out[static_cast<Eigen::Index>(p)] = f.vertex_value(b.graph_vertex[p]);
  }
  return out;
}

GasketFunction J1(const ApproxBundle& b, const GraphFunction& f) {
  return GasketFunction(b.hierarchy, b.level, vertex_restriction(b, f));
}

GraphFunction H_gamma(const ApproxBundle& b, const Eigen::VectorXd& vertex_values) {
  if (static_cast<std::size_t>(vertex_values.size()) != b.graph_vertex.size()) {
    throw MismatchError("need one value per vertex of V_m");
  }
  const double length = std::ldexp(1.0, -b.level);
  return GraphFunction::interpolate(b.grid, [&](std::size_t e, double s) {
    const double fp = vertex_values[static_cast<Eigen::Index>(b.endpoints[e][0])];
    const double fq = vertex_values[static_cast<Eigen::Index>(b.endpoints[e][1])];
    const double z = s / length;
    return (1.0 - z) * fp + z * fq;
  });
}

GraphFunction J1_tilde(const ApproxBundle& b, const GasketFunction& u) {
  require_hierarchy(b, u);
  return H_gamma(b, at_level(u, b.level).values());
}

GasketFunction phi_m(const ApproxBundle& b, const GraphFunction& f, double tol) {
  require_grid(b, f.grid());
  const double scale = std::max(1.0, f.sup_norm());
  for (std::size_t e = 0; e < b.endpoints.size(); ++e) {
    const auto v = f.edge_values(e);
    const int n = b.grid->cells(e);
    for (int k = 1; k < n; ++k) {
      const double z = static_cast<double>(k) / n;
      const double lin = (1.0 - z) * v.front() + z * v.back();
      if (std::abs(v[static_cast<std::size_t>(k)] - lin) > tol * scale) {
        throw std::invalid_argument("function is not linear on edge " +
                                    b.graph->edge(e).id);
      }
    }
  }
  return J1(b, f);
}

GraphFunction phi_m_inverse(const ApproxBundle& b, const GasketFunction& u) {
  return J1_tilde(b, u);
}

GasketFunction phi_m_gradient(const ApproxBundle& b, const EdgeField& u, double tol) {
  require_grid(b, u.grid());
  const double scale = std::max(1.0, u.max_abs());
  const std::size_t nv = b.graph_vertex.size();
  std::vector<double> jump(b.endpoints.size());
  for (std::size_t e = 0; e < b.endpoints.size(); ++e) {
    const auto vals = u.values(e);
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    if (*hi - *lo > tol * scale) {
      throw std::invalid_argument("field is not constant on edge " + b.graph->edge(e).id);
    }
    const Edge& edge = b.graph->edge(e);
    jump[e] = u.edge_mean(e) * std::sqrt(edge.measure_weight / edge.energy_weight) * edge.length;
  }

  const auto& graph = *b.graph;
  std::vector<double> potential(nv, 0.0);
  std::vector<char> seen(nv, 0);
  std::vector<std::size_t> stack{b.graph_vertex[0]};
  seen[b.graph_vertex[0]] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t e : graph.incident_edges(v)) {
      const Edge& edge = graph.edge(e);
      const std::size_t w = edge.tail == v ? edge.head : edge.tail;
      if (seen[w]) continue;
      seen[w] = 1;
      potential[w] = potential[v] + (edge.tail == v ? jump[e] : -jump[e]);
      stack.push_back(w);
    }
  }
  double pscale = 1.0;
  for (double p : potential) pscale = std::max(pscale, std::abs(p));
  for (std::size_t e = 0; e < b.endpoints.size(); ++e) {
    const Edge& edge = graph.edge(e);
    if (std::abs(potential[edge.head] - potential[edge.tail] - jump[e]) > tol * pscale) {
      throw std::invalid_argument("field is not a gradient (nonzero circulation)");
    }
  }
  Eigen::VectorXd values(static_cast<Eigen::Index>(nv));
  for (std::size_t p = 0; p < nv; ++p) {
    values[static_cast<Eigen::Index>(p)] = potential[b.graph_vertex[p]];
  }
  return GasketFunction(b.hierarchy, b.level, std::move(values));
}

double delta_m(int m, const SelfSimilarMeasure& mu) {
  if (m < 0) throw std::invalid_argument("level must be nonnegative");
  return 54.0 * mu.max_cell_measure(m) * std::pow(gasket::kEnergyRatio, m);
}

// ---------------------------------------------------------------------------

namespace {

double squared_distance(const GraphFunction& f, const EdgeField& g) {
  return std::max(0.0, l2_inner(f, f) - 2.0 * l2_inner(f, g) + l2_inner(g, g));
}

void record(LemmaStat& stat, double lhs, double rhs, double tol) {
  stat.worst_lhs = std::max(stat.worst_lhs, lhs);
  if (rhs > 1e-14) {
    stat.worst_ratio = std::max(stat.worst_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + tol)) stat.holds = false;
  } else if (lhs > tol) {
    stat.holds = false;
  }
}

}  // namespace

QuasiUnitaryReport quasi_unitary_suite(HierarchyPtr hierarchy, int m, const SelfSimilarMeasure& mu,
                                       const SuiteOptions& opts) {
  if (opts.refinement < 0) throw std::invalid_argument("refinement must be nonnegative");
  const int fine = m + opts.refinement;
  const ApproxBundle b = build_gamma_m(
      hierarchy, m, mu, {std::max(m + 4, fine), opts.cells_per_edge});
  const int q = b.quadrature_level;
  const double scale = mu.max_cell_measure(m) * std::pow(gasket::kEnergyRatio, m);

  QuasiUnitaryReport report;
  report.level = m;
  report.samples = opts.samples;
  report.lemmas = {{"J0lemma", 54.0}, {"compare01_i", 36.0}, {"compare01_ii", 4.5},
                   {"triangleineq", 6.0}};

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_vector = [&](Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = unif(rng);
    return v;
  };

  const auto nv_m = static_cast<Eigen::Index>(hierarchy->num_vertices(m));
  for (std::size_t s = 0; s < opts.samples; ++s) {
    // Alternate rough, edgewise-linear and near-harmonic samples.
    GraphFunction f = GraphFunction::constant(b.grid, 0.0);
    switch (s % 3) {
      case 0:
        f = GraphFunction(b.grid, random_vector(static_cast<Eigen::Index>(b.grid->num_dofs())));
        break;
      case 1:
        f = H_gamma(b, random_vector(nv_m));
        break;
      default: {
        const GasketFunction coarse(hierarchy, 0, random_vector(3));
        f = H_gamma(b, gasket::harmonic_extend(coarse, m).values());
        f += GraphFunction(b.grid,
                           0.05 * random_vector(static_cast<Eigen::Index>(b.grid->num_dofs())));
      }
    }
    const int u_level = (s % 2 == 0) ? fine : m;
    const GasketFunction u(hierarchy, u_level,
                           random_vector(static_cast<Eigen::Index>(hierarchy->num_vertices(u_level))));

    const double energy_f = energy(f);
    const double energy_u = gasket::graph_energy(u);
    const GasketFunction j0f = J0_forward(b, f);
    const EdgeField j0star_u = J0_adjoint(b, u);

    record(report.lemmas[0], squared_distance(f, J0_adjoint(b, j0f)), 54.0 * scale * energy_f,
           opts.tolerance);

    const GasketFunction j1f = J1(b, f);
    const double c1 = std::pow(gasket::l2_norm_gasket(j1f - j0f, mu, q), 2);
    record(report.lemmas[1], c1, 36.0 * scale * energy_f, opts.tolerance);

    const double c2 = squared_distance(J1_tilde(b, u), j0star_u);
    record(report.lemmas[2], c2, 4.5 * scale * energy_u, opts.tolerance);

    const GasketFunction back = gasket::harmonic_extend(J0_forward(b, j0star_u), u_level);
    const double tri = std::pow(gasket::l2_norm_gasket(u - back, mu, q), 2);
    record(report.lemmas[3], tri, 6.0 * scale * energy_u, opts.tolerance);

    const double lhs = energy_form(f, J1_tilde(b, u));
    const double rhs = gasket::graph_energy(gasket::harmonic_extend(j1f, u_level), u);
    const double e_scale = std::max(1e-300, std::sqrt(energy_f * energy_u));
    report.elemma_defect = std::max(report.elemma_defect, std::abs(lhs - rhs) / e_scale);

    const double norm_f = l2_norm(f);
    if (norm_f > 0.0) {
      report.contraction_ratio =
          std::max(report.contraction_ratio, gasket::l2_norm_gasket(j0f, mu, q) / norm_f);
    }

    const double ip_k = gasket::l2_inner_gasket(j0f, u, mu, q);
    const double ip_x = l2_inner(f, j0star_u);
    const double denom = std::max(1e-300, norm_f * gasket::l2_norm_gasket(u, mu, q));
    report.adjoint_defect = std::max(report.adjoint_defect, std::abs(ip_k - ip_x) / denom);

    if (energy_f > 0.0) {
      report.dominance_ratio = std::max(report.dominance_ratio, gasket::graph_energy(j1f) / energy_f);
    }
  }

  report.holds = report.elemma_defect <= 1e-10 && report.contraction_ratio <= 1.0 + opts.tolerance &&
                 report.adjoint_defect <= opts.tolerance &&
                 report.dominance_ratio <= 1.0 + opts.tolerance;
  for (const auto& l : report.lemmas) report.holds = report.holds && l.holds;
  return report;
}

// ---------------------------------------------------------------------------

double fitted_log_slope(std::span<const int> levels, const Eigen::VectorXd& values) {
  const auto n = static_cast<Eigen::Index>(levels.size());
  if (n < 2 || values.size() != n) throw std::invalid_argument("need at least two levels");
  double mx = 0.0, my = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(values[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    mx += levels[static_cast<std::size_t>(i)];
    my += std::log(values[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dx = levels[static_cast<std::size_t>(i)] - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

struct LevelRun {
  ApproxBundle bundle;
  std::shared_ptr<const AssembledOperator> op;
  SpectralDecomposition spec;
};

int resolve_quadrature(const ConvergenceOptions& opts) {
  return opts.quadrature_level < 0 ? opts.reference_level + 2 : opts.quadrature_level;
}

void check_options(const ConvergenceOptions& opts, const HierarchyPtr& hierarchy, int q) {
  if (opts.levels.empty() || opts.times.empty()) {
    throw std::invalid_argument("levels and times must be nonempty");
  }
  for (int m : opts.levels) {
    if (m < 0 || m >= opts.reference_level) {
      throw std::invalid_argument("every level must lie below the reference level");
    }
  }
  for (double t : opts.times) {
    if (!(t > 0.0)) throw std::invalid_argument("times must be positive");
  }
  if (q < opts.reference_level) throw std::invalid_argument("quadrature level below reference");
  if (hierarchy->max_level() < q) {
    throw std::invalid_argument("hierarchy does not reach the quadrature level");
  }
}

LevelRun prepare_level(const HierarchyPtr& hierarchy, int m, const SelfSimilarMeasure& mu, int q,
                       MassMatrix mass) {
  ApproxBundle b = build_gamma_m(hierarchy, m, mu, {q, 1});
  auto op = std::make_shared<const AssembledOperator>(assemble(b.grid, mass));
  SpectralDecomposition spec = eigensolve(op);
  return {std::move(b), op, std::move(spec)};
}

}  // namespace

HeatConvergenceResult heat_convergence_experiment(const GasketFunction& w0,
                                                  const SelfSimilarMeasure& mu,
                                                  const ConvergenceOptions& opts) {
  const HierarchyPtr& hierarchy = w0.hierarchy();
  const int q = resolve_quadrature(opts);
  check_options(opts, hierarchy, q);
  if (w0.level() > q) throw std::invalid_argument("initial datum finer than quadrature level");

  HeatConvergenceResult res;
  res.times = opts.times;
  res.levels = opts.levels;
  const auto nt = static_cast<Eigen::Index>(opts.times.size());
  res.discrepancy.resize(static_cast<Eigen::Index>(opts.levels.size()), nt);

  const double w0_norm2 = std::pow(gasket::l2_norm_gasket(w0, mu, q), 2);

  auto solve = [&](const LevelRun& run, double t) {
    const EdgeField datum = J0_adjoint(run.bundle, w0);
    return heat_apply(run.spec, datum, t);
  };

  const LevelRun ref_run =
      prepare_level(hierarchy, opts.reference_level, mu, q, MassMatrix::kConsistent);
  std::vector<GasketFunction> reference;
  for (double t : opts.times) {
    reference.push_back(J0_forward(ref_run.bundle, solve(ref_run, t), q));
  }

  for (std::size_t i = 0; i < opts.levels.size(); ++i) {
    const int m = opts.levels[i];
    const LevelRun run = prepare_level(hierarchy, m, mu, q, MassMatrix::kConsistent);
    for (Eigen::Index j = 0; j < nt; ++j) {
      const double t = opts.times[static_cast<std::size_t>(j)];
      const GraphFunction wm = solve(run, t);
      const GasketFunction approx = J0_forward(run.bundle, wm, q);
      const double d = gasket::l2_norm_gasket(approx - reference[static_cast<std::size_t>(j)], mu, q);
      const GasketFunction ph = gasket::harmonic_extend(J1(run.bundle, wm), q);
      const double ph_err =
          gasket::l2_norm_gasket(ph - reference[static_cast<std::size_t>(j)], mu, q);
      const double e = energy(wm);
      const double bound = w0_norm2 / (2.0 * std::exp(1.0) * t);
      if (e > bound * (1.0 + 1e-9)) res.smoothing_holds = false;
      res.discrepancy(static_cast<Eigen::Index>(i), j) = d;
      res.rows.push_back({m, t, "discrepancy", d});
      res.rows.push_back({m, t, "graph_energy", e});
      res.rows.push_back({m, t, "smoothing_bound", bound});
      res.rows.push_back({m, t, "ph_error", ph_err});
      res.rows.push_back({m, t, "delta_m", delta_m(m, mu)});
    }
  }
  for (Eigen::Index j = 0; j < nt; ++j) {
    res.slopes.push_back(fitted_log_slope(opts.levels, res.discrepancy.col(j)));
  }
  return res;
}

BurgersConvergenceResult burgers_convergence_experiment(
    const GasketFunction& h0, const SelfSimilarMeasure& mu,
    std::span<const GasketFunction> test_potentials, const ConvergenceOptions& opts) {
  const HierarchyPtr& hierarchy = h0.hierarchy();
  const int q = resolve_quadrature(opts);
  check_options(opts, hierarchy, q);
  const int coarsest = *std::min_element(opts.levels.begin(), opts.levels.end());
  if (h0.level() > coarsest) throw std::invalid_argument("h0 must live on the coarsest level");
  for (const auto& phi : test_potentials) {
    if (phi.level() > coarsest) {
      throw std::invalid_argument("test potentials must live on the coarsest level");
    }
  }
  const int big = opts.reference_level;

  const GasketFunction h0q = gasket::harmonic_extend(h0, q);
  const GasketFunction w0 = h0q.map([](double h) { return std::exp(-0.5 * h); });

  BurgersConvergenceResult res;
  res.times = opts.times;
  res.levels = opts.levels;
  res.positivity_floor = std::exp(-0.5 * h0q.values().cwiseAbs().maxCoeff());
  const auto nl = static_cast<Eigen::Index>(opts.levels.size());
  const auto nt = static_cast<Eigen::Index>(opts.times.size());
  res.min_w.resize(nl, nt);
  res.pairings.assign(opts.times.size(),
                      std::vector<Eigen::VectorXd>(test_potentials.size(), Eigen::VectorXd(nl)));

  std::vector<GasketFunction> phis;
  for (const auto& phi : test_potentials) phis.push_back(gasket::harmonic_extend(phi, big));

  // log w_m(t) on V_m, harmonically extended to the reference level.
  auto log_potentials = [&](int m, std::vector<double>* minima) {
    const LevelRun run = prepare_level(hierarchy, m, mu, q, MassMatrix::kLumped);
    const EdgeField datum = J0_adjoint(run.bundle, w0);
    const BurgersSolution sol = cole_hopf_from_heat(run.spec, datum, opts.times);
    std::vector<GasketFunction> out;
    for (std::size_t j = 0; j < sol.size(); ++j) {
      if (minima) minima->push_back(sol.w[j].min_value());
      const GasketFunction logw =
          J1(run.bundle, sol.w[j]).map([](double w) { return std::log(w); });
      out.push_back(gasket::harmonic_extend(logw, big));
    }
    return out;
  };

  const std::vector<GasketFunction> reference = log_potentials(big, nullptr);
  for (Eigen::Index i = 0; i < nl; ++i) {
    const int m = opts.levels[static_cast<std::size_t>(i)];
    std::vector<double> minima;
    const auto logs = log_potentials(m, &minima);
    for (Eigen::Index j = 0; j < nt; ++j) {
      const double t = opts.times[static_cast<std::size_t>(j)];
      const double mw = minima[static_cast<std::size_t>(j)];
      res.min_w(i, j) = mw;
      if (mw < res.positivity_floor - 1e-6) res.positivity_holds = false;
      res.rows.push_back({m, t, "min_w", mw});
      const GasketFunction diff = logs[static_cast<std::size_t>(j)] -
                                  reference[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < phis.size(); ++k) {
        const double p = std::abs(gasket::graph_energy(diff, phis[k]));
        res.pairings[static_cast<std::size_t>(j)][k][i] = p;
        res.rows.push_back({m, t, "pairing_phi" + std::to_string(k), p});
      }
    }
  }
  return res;
}

}  // namespace mgb::approx
