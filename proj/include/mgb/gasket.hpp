#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mgb/errors.hpp"

namespace mgb::gasket {

/// Energy renormalization factor r of the gasket.
inline constexpr double kEnergyRatio = 3.0 / 5.0;

using Point = std::array<double, 2>;

/// Address w = w_1 ... w_m of the cell K_w = F_{w_1} o ... o F_{w_m}(K).
class CellWord {
 public:
  CellWord() = default;
  explicit CellWord(std::vector<std::uint8_t> digits);
  static CellWord from_string(const std::string& digits);
  /// Inverse of index(): the level-m cell with base-3 index `index`.
  static CellWord from_index(int level, std::size_t index);

  int level() const { return static_cast<int>(digits_.size()); }
  std::span<const std::uint8_t> digits() const { return digits_; }
  /// Position of K_w among the 3^m cells of its level.
  std::size_t index() const;
  std::string to_string() const;

 private:
  std::vector<std::uint8_t> digits_;
};

/// Self-similar probability measure with mu(K_w) = prod_i weights[w_i].
class SelfSimilarMeasure {
 public:
  SelfSimilarMeasure() = default;
  explicit SelfSimilarMeasure(std::array<double, 3> weights);
  static SelfSimilarMeasure uniform() { return {}; }

  const std::array<double, 3>& weights() const { return weights_; }
  double cell_measure(const CellWord& w) const;
  /// mu(K_w) for all level-m cells, indexed like GasketLevel::cells.
  std::vector<double> cell_measures(int level) const;
  /// max_{|w| = m} mu(K_w).
  double max_cell_measure(int level) const;

 private:
  std::array<double, 3> weights_{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

/// A new vertex of level m is the midpoint of the level-(m-1) edge {a, b};
/// c is the third corner of the unique cell containing that edge.
struct ExtensionRule {
  std::size_t vertex;
  std::size_t a;
  std::size_t b;
  std::size_t c;
};

struct GasketLevel {
  int level = 0;
  std::vector<Point> coordinates;                      // V_m; V_{m-1} is a prefix
  std::vector<std::array<std::size_t, 2>> edges;       // p < q, sorted
  std::vector<std::array<std::size_t, 3>> cells;       // (F_w q0, F_w q1, F_w q2)
  std::vector<ExtensionRule> rules;                    // empty at m = 0

  std::size_t num_vertices() const { return coordinates.size(); }
};

/// Levels 0..max_level of the gasket graphs, with stable vertex ids:
/// V_m occupies ids [0, |V_m|) at every finer level. Cell k of level m has
/// children 3k, 3k + 1, 3k + 2.
class Hierarchy {
 public:
  static std::shared_ptr<const Hierarchy> build(int max_level);

  int max_level() const { return static_cast<int>(levels_.size()) - 1; }
  const GasketLevel& level(int m) const;
  std::size_t num_vertices(int m) const { return level(m).num_vertices(); }

 private:
  std::vector<GasketLevel> levels_;
};

using HierarchyPtr = std::shared_ptr<const Hierarchy>;

/// (3^{m+1} + 3) / 2.
std::size_t vertex_count(int level);

/// Real values on V_m.
class GasketFunction {
 public:
  GasketFunction(HierarchyPtr hierarchy, int level, Eigen::VectorXd values);
  static GasketFunction constant(HierarchyPtr hierarchy, int level, double value);
  static GasketFunction delta(HierarchyPtr hierarchy, int level, std::size_t vertex);

  const HierarchyPtr& hierarchy() const { return hierarchy_; }
  int level() const { return level_; }
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](std::size_t v) const { return values_[static_cast<Eigen::Index>(v)]; }

  /// f|_{V_m} for m <= level().
  GasketFunction restrict_to(int m) const;
  GasketFunction map(const std::function<double(double)>& fn) const;

  GasketFunction& operator+=(const GasketFunction& other);
  GasketFunction& operator-=(const GasketFunction& other);
  GasketFunction& operator*=(double s);

 private:
  HierarchyPtr hierarchy_;
  int level_;
  Eigen::VectorXd values_;
};

GasketFunction operator+(GasketFunction a, const GasketFunction& b);
GasketFunction operator-(GasketFunction a, const GasketFunction& b);
GasketFunction operator*(double s, GasketFunction a);
/// Pointwise product on V_m (both at the same level).
GasketFunction pointwise_product(const GasketFunction& a, const GasketFunction& b);

/// E_m(f, g) = r^{-m} sum_{edges {p,q} of G_m} (f(p) - f(q)) (g(p) - g(q)).
double graph_energy(const GasketFunction& f, const GasketFunction& g);
double graph_energy(const GasketFunction& f);

/// m-piecewise harmonic extension to level M: each new midpoint opposite
/// corner C in a cell with corners A, B, C receives (2A + 2B + C) / 5.
GasketFunction harmonic_extend(const GasketFunction& f, int target_level);

/// Adjoint of harmonic_extend for the Euclidean pairing on vertex values:
/// <extend(f), g>_{V_M} = <f, extend_transpose(g)>_{V_m}.
Eigen::VectorXd extend_transpose(const HierarchyPtr& hierarchy, Eigen::VectorXd values,
                                 int from_level, int to_level);

/// Energy of f (taken piecewise harmonic at its level) restricted to K_w:
/// E_{K_w}(f) = r^{-m} E(f o F_w).
double cell_energy(const GasketFunction& f, const CellWord& w);

/// Vertices of V_M lying in K_w.
std::vector<std::size_t> cell_vertices(const HierarchyPtr& hierarchy, int level_m,
                                       const CellWord& w);

/// psi_{p,m} represented at level M.
GasketFunction spline_psi(const HierarchyPtr& hierarchy, std::size_t vertex, int level_m,
                          int output_level);

/// W(x) = sum over level-M cells containing x of mu(K_w) / 3.
Eigen::VectorXd quadrature_weights(const HierarchyPtr& hierarchy, int level,
                                   const SelfSimilarMeasure& mu);

/// sum over level-M cells of mu(K_w) times the mean of the corner values.
double integrate(const GasketFunction& f, const SelfSimilarMeasure& mu);

/// Extends both arguments to `quadrature_level`, multiplies pointwise and
/// integrates.
double l2_inner_gasket(const GasketFunction& f, const GasketFunction& g,
                       const SelfSimilarMeasure& mu, int quadrature_level);
double l2_norm_gasket(const GasketFunction& f, const SelfSimilarMeasure& mu,
                      int quadrature_level);

/// <u, psi_{p,m}> for every p in V_m, with the same quadrature as
/// l2_inner_gasket at `quadrature_level`.
Eigen::VectorXd spline_moments(const GasketFunction& u, int level_m, const SelfSimilarMeasure& mu,
                               int quadrature_level);

/// Neumann graph Laplacian 4 (I - D^{-1} A) of G_m (no renormalization), the
/// operator whose spectra obey lambda_m = lambda_{m+1} (5 - lambda_{m+1}).
Eigen::MatrixXd decimation_laplacian(const HierarchyPtr& hierarchy, int level);
/// Its eigenvalues, ascending (computed through the symmetric similarity
/// transform D^{1/2} L D^{-1/2}).
Eigen::VectorXd decimation_spectrum(const HierarchyPtr& hierarchy, int level);

/// CSV columns: vertex_id, x, y, value, level.
void write_csv(const GasketFunction& f, const std::filesystem::path& path);

}  // namespace mgb::gasket
