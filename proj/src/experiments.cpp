#include "mgb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "mgb/approximation.hpp"
#include "mgb/burgers.hpp"
#include "mgb/csv.hpp"
#include "mgb/gasket.hpp"
#include "mgb/spectral.hpp"

namespace mgb {

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

constexpr double kPi = std::numbers::pi;

MetricGraph make_graph(const ExperimentConfig& cfg) {
  const std::string& g = cfg.text("graph");
  const double len = cfg.number("edge_length");
  auto count = [&](std::size_t prefix) { return static_cast<std::size_t>(std::stoul(g.substr(prefix))); };
  if (g == "interval") return interval_graph(len);
  if (g == "triangle") return triangle_graph(len);
  if (g.rfind("path:", 0) == 0) return path_graph(count(5), len);
  if (g.rfind("star:", 0) == 0) return star_graph(count(5), len);
  return MetricGraph::load(g);
}

gasket::SelfSimilarMeasure make_measure(const ExperimentConfig& cfg) {
  if (cfg.text("weights") == "uniform") return gasket::SelfSimilarMeasure::uniform();
  const auto w = cfg.numbers("weights");
  return gasket::SelfSimilarMeasure({w[0], w[1], w[2]});
}

std::vector<int> levels(const ExperimentConfig& cfg) {
  std::vector<int> out;
  for (long long m : cfg.integers("m")) out.push_back(static_cast<int>(m));
  return out;
}

// Heat datum for the graph experiments: 1 + a cos(k pi s / l_e) or the constant a.
GraphFunction initial_heat(const ExperimentConfig& cfg, const GridPtr& grid) {
  const double a = cfg.number("amplitude");
  if (cfg.text("initial") == "constant") return GraphFunction::constant(grid, a);
  const double k = static_cast<double>(cfg.integer("mode"));
  const MetricGraph& graph = grid->graph();
  return GraphFunction::interpolate(grid, [&](std::size_t e, double s) {
    return 1.0 + a * std::cos(k * kPi * s / graph.edge(e).length);
  });
}

void write_table(const std::filesystem::path& path,
                 const std::vector<approx::ConvergenceRow>& rows) {
  CsvWriter csv(path, {"m", "t", "quantity", "value"});
  for (const auto& r : rows) csv.row(r.level, r.time, r.quantity, r.value);
}

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, std::filesystem::path dir)
      : cfg_(cfg), dir_(std::move(dir)) {}

  std::filesystem::path file(const std::string& name) {
    report_.files.push_back(dir_ / name);
    return dir_ / name;
  }
  void note(const std::string& name, double value) { report_.summary.emplace_back(name, value); }
  void check(const std::string& name, bool ok, const std::string& detail = {}) {
    report_.checks.push_back({name, ok, detail});
  }

  RunReport finish() {
    {
      CsvWriter csv(file("summary.csv"), {"quantity", "value"});
      for (const auto& [k, v] : report_.summary) csv.row(k, v);
    }
    {
      CsvWriter csv(file("checks.csv"), {"check", "passed", "detail"});
      for (const auto& c : report_.checks) csv.row(c.name, c.passed ? "true" : "false", c.detail);
    }
    return std::move(report_);
  }

  void graph_heat();
  void graph_burgers();
  void gasket_approx();
  void heat_convergence();
  void burgers_convergence();
  void lemma_suite();

 private:
  SpectralDecomposition graph_spectrum();

  const ExperimentConfig& cfg_;
  std::filesystem::path dir_;
  RunReport report_;
};

SpectralDecomposition Runner::graph_spectrum() {
  auto graph = std::make_shared<const MetricGraph>(make_graph(cfg_));
  auto grid = EdgeGrid::uniform(graph, static_cast<int>(cfg_.integer("cells_per_edge")));
  const MassMatrix mass =
      cfg_.text("mass") == "lumped" ? MassMatrix::kLumped : MassMatrix::kConsistent;
  auto spec = eigensolve(grid, mass, static_cast<Eigen::Index>(cfg_.integer("modes")));
  spec.write_csv(file("eigenvalues.csv"));
  note("vertices", static_cast<double>(graph->num_vertices()));
  note("edges", static_cast<double>(graph->num_edges()));
  note("dofs", static_cast<double>(grid->num_dofs()));
  note("modes", static_cast<double>(spec.size()));
  return spec;
}

void Runner::graph_heat() {
  const SpectralDecomposition spec = graph_spectrum();
  const GridPtr& grid = spec.grid_ptr();
  const GraphFunction w0 = initial_heat(cfg_, grid);
  const GraphFunction one = GraphFunction::constant(grid, 1.0);
  const double mass0 = l2_inner(w0, one);
  const double norm0 = l2_norm(w0);

  CsvWriter csv(file("heat.csv"), {"time", "edge_id", "node_index", "value"});
  double conservation = 0.0;
  bool smoothing = true;
  for (double t : cfg_.numbers("times")) {
    const GraphFunction w = heat_apply(spec, w0, t);
    for (std::size_t e = 0; e < grid->graph().num_edges(); ++e) {
      for (int k = 0; k <= grid->cells(e); ++k) {
        csv.row(t, grid->graph().edge(e).id, k, w.value(e, k));
      }
    }
    conservation = std::max(conservation, std::abs(l2_inner(w, one) - mass0) / std::abs(mass0));
    if (t > 0.0) {
      const double lhs = smoothing_norm(spec, w0, t);
      const double rhs = smoothing_constant(t) * norm0;
      note("smoothing_ratio_t=" + format_double(t), lhs / rhs);
      smoothing = smoothing && lhs <= rhs * (1.0 + 1e-12);
    }
  }
  note("conservation_defect", conservation);
  check("conservation", conservation <= 1e-10, "relative drift of <w(t),1> at most 1e-10");
  check("smoothing", smoothing, "||sqrt(-L) e^{tL} w0|| <= (2et)^{-1/2} ||w0||");
}

void Runner::graph_burgers() {
  const SpectralDecomposition spec = graph_spectrum();
  const GridPtr& grid = spec.grid_ptr();
  const GraphFunction w0 = initial_heat(cfg_, grid);
  const auto times = cfg_.numbers("times");
  const BurgersSolution sol = cole_hopf_from_heat(spec, w0, times);
  write_trajectory_csv(sol, file("trajectory.csv"));

  const AprioriReport apriori = apriori_check(sol);
  note("apriori_identity_defect", apriori.identity_defect);
  check("apriori_bound", apriori.holds, "||u(t)|| <= 2 e^{||h0||/2} E(w0)^{1/2}");

  const MetricGraph& graph = grid->graph();
  const Edge& e0 = graph.edge(0);
  if (graph.num_edges() == 1 && e0.energy_weight == 1.0 && e0.measure_weight == 1.0 &&
      cfg_.text("initial") == "cosine") {
    const double a = cfg_.number("amplitude");
    const double kk = static_cast<double>(cfg_.integer("mode")) * kPi / e0.length;
    const double h = grid->spacing(0);
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.size(); ++i) {
      const double decay = a * std::exp(-kk * kk * sol.times[i]);
      const auto u = sol.u[i].values(0);
      for (std::size_t c = 0; c < u.size(); ++c) {
        const double s = (static_cast<double>(c) + 0.5) * h;
        const double exact = 2.0 * kk * decay * std::sin(kk * s) / (1.0 + decay * std::cos(kk * s));
        worst = std::max(worst, std::abs(u[c] - exact));
      }
    }
    note("closed_form_max_error", worst);
    check("closed_form", worst <= 1e-3, "max |u - u_exact| over cell midpoints <= 1e-3");
  }
}

void Runner::gasket_approx() {
  const int m = levels(cfg_).front();
  const int q = static_cast<int>(cfg_.integer("quadrature_level"));
  const auto mu = make_measure(cfg_);
  const auto hierarchy = gasket::Hierarchy::build(q);
  const approx::ApproxBundle b = approx::build_gamma_m(hierarchy, m, mu, {q, 1});

  {
    CsvWriter csv(file("edges.csv"), {"edge_id", "tail", "head", "length", "energy_weight",
                                      "measure_weight", "spline_integral"});
    for (std::size_t k = 0; k < b.num_edges(); ++k) {
      const Edge& e = b.graph->edge(k);
      csv.row(e.id, b.endpoints[k][0], b.endpoints[k][1], e.length, e.energy_weight,
              e.measure_weight, b.edge_integrals[static_cast<Eigen::Index>(k)]);
    }
  }
  gasket::write_csv(gasket::GasketFunction(hierarchy, m, b.vertex_integrals),
                    file("vertex_spline_integrals.csv"));

  const double total = b.total_measure();
  note("vertices", static_cast<double>(hierarchy->num_vertices(m)));
  note("edges", static_cast<double>(b.num_edges()));
  note("total_measure", total);
  note("delta_m", approx::delta_m(m, mu));
  check("total_measure", std::abs(total - 1.0) <= 1e-10, "mu_m(X_m) = mu(K) = 1");
  check("positive_weights", b.edge_integrals.minCoeff() > 0.0, "every c_e > 0");
}

void Runner::heat_convergence() {
  approx::ConvergenceOptions opts;
  opts.levels = levels(cfg_);
  opts.reference_level = static_cast<int>(cfg_.integer("reference_level"));
  opts.quadrature_level = static_cast<int>(cfg_.integer("quadrature_level"));
  opts.times = cfg_.numbers("times");
  const auto mu = make_measure(cfg_);
  const auto hierarchy = gasket::Hierarchy::build(opts.quadrature_level);

  const auto values = cfg_.numbers("datum_values");
  const gasket::GasketFunction coarse(hierarchy, static_cast<int>(cfg_.integer("datum_level")),
                                      Eigen::Map<const Eigen::VectorXd>(
                                          values.data(), static_cast<Eigen::Index>(values.size())));
  const double offset = cfg_.number("datum_offset");
  const gasket::GasketFunction w0 = coarse.map([offset](double v) { return v + offset; });

  const auto res = approx::heat_convergence_experiment(w0, mu, opts);
  write_table(file("table.csv"), res.rows);

  const double predicted =
      std::log(*std::max_element(mu.weights().begin(), mu.weights().end()) *
               gasket::kEnergyRatio);
  for (std::size_t j = 0; j < res.times.size(); ++j) {
    const std::string tag = "t=" + format_double(res.times[j]);
    const auto col = res.discrepancy.col(static_cast<Eigen::Index>(j));
    bool decreasing = true;
    for (Eigen::Index i = 1; i < col.size(); ++i) decreasing = decreasing && col[i] < col[i - 1];
    note("fitted_slope_" + tag, res.slopes[j]);
    check("discrepancy_decreasing_" + tag, decreasing, "D(m,t) strictly decreasing in m");
    check("rate_" + tag, res.slopes[j] <= predicted + 0.35,
          "fitted log-slope <= " + format_double(predicted) + " + 0.35");
  }
  note("predicted_log_rate", predicted);
  check("smoothing_chain", res.smoothing_holds, "E_Gamma_m(w_m(t)) <= (2et)^{-1} ||w0||^2");
}

void Runner::burgers_convergence() {
  approx::ConvergenceOptions opts;
  opts.levels = levels(cfg_);
  opts.reference_level = static_cast<int>(cfg_.integer("reference_level"));
  opts.quadrature_level = static_cast<int>(cfg_.integer("quadrature_level"));
  opts.times = cfg_.numbers("times");
  const auto mu = make_measure(cfg_);
  const auto hierarchy = gasket::Hierarchy::build(opts.quadrature_level);

  const auto pot = cfg_.numbers("potential");
  const gasket::GasketFunction h0(hierarchy, 0, Eigen::Vector3d(pot[0], pot[1], pot[2]));
  const int test_level = static_cast<int>(cfg_.integer("test_level"));
  std::vector<gasket::GasketFunction> phis;
  for (std::size_t p = 0; p < hierarchy->num_vertices(test_level); ++p) {
    phis.push_back(gasket::GasketFunction::delta(hierarchy, test_level, p));
  }

  const auto res = approx::burgers_convergence_experiment(h0, mu, phis, opts);
  write_table(file("table.csv"), res.rows);
  note("positivity_floor", res.positivity_floor);
  note("min_w", res.min_w.minCoeff());
  check("positivity", res.positivity_holds, "min w_m(t) >= exp(-||h0||_sup / 2) - 1e-6");

  for (std::size_t j = 0; j < res.times.size(); ++j) {
    bool decreasing = true;
    for (const auto& series : res.pairings[j]) {
      for (Eigen::Index i = 1; i < series.size(); ++i) {
        const bool negligible = series[i - 1] < 1e-13 && series[i] < 1e-13;
        decreasing = decreasing && (series[i] < series[i - 1] || negligible);
      }
    }
    check("pairings_decreasing_t=" + format_double(res.times[j]), decreasing,
          "|P(m,t,phi)| decreasing in m for every test potential");
  }
}

void Runner::lemma_suite() {
  const auto ms = levels(cfg_);
  const auto mu = make_measure(cfg_);
  approx::SuiteOptions opts;
  opts.samples = static_cast<std::size_t>(cfg_.integer("samples"));
  opts.seed = static_cast<std::uint64_t>(cfg_.integer("seed"));
  opts.cells_per_edge = static_cast<int>(cfg_.integer("sample_resolution"));
  opts.refinement = static_cast<int>(cfg_.integer("refinement"));
  const int top = ms.back() + std::max(4, opts.refinement);
  const auto hierarchy = gasket::Hierarchy::build(top);

  CsvWriter csv(file("table.csv"), {"m", "t", "quantity", "value"});
  for (int m : ms) {
    const auto r = approx::quasi_unitary_suite(hierarchy, m, mu, opts);
    const std::string tag = "_m=" + std::to_string(m);
    for (const auto& l : r.lemmas) {
      csv.row(m, "", l.name + "_worst_ratio", l.worst_ratio);
      check(l.name + tag, l.holds && l.worst_ratio < 1.0,
            "worst ratio " + format_double(l.worst_ratio));
    }
    csv.row(m, "", "elemma_defect", r.elemma_defect);
    csv.row(m, "", "contraction_ratio", r.contraction_ratio);
    csv.row(m, "", "adjoint_defect", r.adjoint_defect);
    csv.row(m, "", "dominance_ratio", r.dominance_ratio);
    csv.row(m, "", "delta_m", approx::delta_m(m, mu));
    check("elemma" + tag, r.elemma_defect <= 1e-10, "relative defect <= 1e-10");
    check("contraction" + tag, r.contraction_ratio <= 1.0 + 1e-8, "||J0 f|| <= ||f||");
    check("adjointness" + tag, r.adjoint_defect <= 1e-8, "<J0 f, u> = <f, J0* u>");
    check("dominance" + tag, r.dominance_ratio <= 1.0 + 1e-8, "E_m(f|V_m) <= E_Gamma_m(f)");
  }
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  Runner run(config, out_dir);
  {
    std::ofstream manifest(run.file("manifest.cfg"), std::ios::binary);
    manifest << "# mgb effective configuration; rerun with: mgb run manifest.cfg\n"
             << config.render();
    if (!manifest) throw std::runtime_error("cannot write the manifest in " + out_dir.string());
  }
  const std::string& name = config.experiment();
  if (name == "graph-heat") run.graph_heat();
  else if (name == "graph-burgers") run.graph_burgers();
  else if (name == "gasket-approx") run.gasket_approx();
  else if (name == "heat-convergence") run.heat_convergence();
  else if (name == "burgers-convergence") run.burgers_convergence();
  else run.lemma_suite();
  return run.finish();
}

}  // namespace mgb
