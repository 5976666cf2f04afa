#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mgb/core_graph.hpp"
#include "mgb/spectral.hpp"

namespace mgb {

struct ColeHopfOptions {
  std::size_t anchor_vertex = 0;  // s0, where every potential is pinned to 0
  double positivity_floor = 1e-12;
};

/// Cole-Hopf solution u(t) = -2 d log w(t), w(t) = e^{tL} w0, sampled on a
/// time grid. Potentials h(t) = -2 log w(t) are stored re-anchored at s0.
struct BurgersSolution {
  std::vector<double> times;
  std::vector<GraphFunction> w;
  std::vector<GraphFunction> h;
  std::vector<EdgeField> u;
  std::optional<EdgeField> circulation;  // frozen eta0, when one was supplied
  std::size_t anchor_vertex = 0;
  double initial_sup_norm = 0.0;  // ||h0||_sup of the anchored initial potential
  GraphFunction w0;               // heat datum actually propagated (projected)

  std::size_t size() const { return times.size(); }
};

/// Solves from an initial potential h0 (re-anchored at s0 first) with heat
/// datum w0 = exp(-h0 / 2). Throws PositivityError when a nodal value of
/// w(t_i) falls below the floor; values are never clipped.
BurgersSolution cole_hopf_solve(const SpectralDecomposition& spec, const GraphFunction& h0,
                                std::span<const double> times, const ColeHopfOptions& opts = {});

/// Same, starting from an arbitrary positive L^2 heat datum (for instance an
/// edgewise-constant J0* exp(-h0/2)).
BurgersSolution cole_hopf_from_heat(const SpectralDecomposition& spec, const HeatDatum& w0,
                                    std::span<const double> times,
                                    const ColeHopfOptions& opts = {});

/// u(t) = dh(t) + eta0 for a frozen circulation eta0 in ker d*.
BurgersSolution cole_hopf_solve_with_circulation(const SpectralDecomposition& spec,
                                                 const GraphFunction& h0, const EdgeField& eta0,
                                                 std::span<const double> times,
                                                 const ColeHopfOptions& opts = {});

/// Weak residual of the potential equation h_t = L h - |dh|^2 / 2 at time
/// index i (centered difference in t, so 1 <= i <= size() - 2):
///   <h_t, phi> + E(h, phi) + 1/2 <phi dh, dh>.
double kpz_residual(const BurgersSolution& sol, const GraphFunction& phi, std::size_t i);

/// Test field for the vector equation: v in D(d*) with d*v continuous.
struct TestField {
  EdgeField field;      // nodal
  GraphFunction dstar;  // d*v
};

/// v = d phi for phi(s) = (1 - ((s - center)/radius)^2)^4 on |s - center| < radius,
/// supported inside `edge`.
TestField bump_gradient_field(const GridPtr& grid, std::size_t edge, double center, double radius);

/// Elements of ker d* (d*v = 0).
std::vector<TestField> circulation_test_fields(const GridPtr& grid);

/// Weak residual of u_t = -d d* u - d(u^2)/2 against v:
///   <u_t, v> + <d*u, d*v> + 1/2 <u^2, d*v>,
/// with <d*u, d*v> evaluated as <u, d(d*v)>. Rejects v outside D(d*).
double vector_residual(const BurgersSolution& sol, const TestField& v, std::size_t i);

HelmholtzParts structure_decompose(const BurgersSolution& sol, std::size_t i);

struct ScalarBurgersOptions {
  double max_step = 1e-3;
  double cfl = 0.5;            // dt * sup|g| * max (a/c)^{1/2} / h_min must not exceed this
  double blowup_cap = 1e6;
};

/// IMEX integrator for g_t = L g - 1/2 d(g^2): exact spectral propagator for
/// the diffusion, explicit conservative convection. Needs a complete
/// decomposition. Returns g at each requested time.
std::vector<GraphFunction> scalar_burgers_solve(const SpectralDecomposition& spec,
                                                const GraphFunction& g0,
                                                std::span<const double> times,
                                                const ScalarBurgersOptions& opts = {});

struct AprioriRow {
  double time = 0.0;
  double u_norm = 0.0;          // ||u(t)||_{L^2}
  double log_energy_form = 0.0; // 2 E(log w(t))^{1/2}
  double energy_bound = 0.0;    // 2 e^{||h0||_sup / 2} E(w0)^{1/2}
  double margin = 0.0;          // energy_bound - u_norm
};

struct AprioriReport {
  std::vector<AprioriRow> rows;
  bool holds = true;
  double identity_defect = 0.0;  // max | u_norm - log_energy_form | relative
};

AprioriReport apriori_check(const BurgersSolution& sol);

/// sup_t ||u - u~||_{L^2} for h~0 = h0 + eps * perturbation, one entry per eps.
std::vector<double> stability_sweep(const SpectralDecomposition& spec, const GraphFunction& h0,
                                    const GraphFunction& perturbation,
                                    std::span<const double> epsilons,
                                    std::span<const double> times);

/// CSV columns: time, edge_id, node_index, u_value, h_value, w_value. The
/// cellwise u is averaged onto nodes (one-sided at the edge ends).
void write_trajectory_csv(const BurgersSolution& sol, const std::filesystem::path& path);

}  // namespace mgb
