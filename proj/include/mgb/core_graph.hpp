#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mgb/errors.hpp"

namespace mgb {

// One line of a graph specification: an oriented edge from `tail` = i(e)
// to `head` = j(e).
struct EdgeSpec {
  std::string id;
  std::string tail;
  std::string head;
  double length = 1.0;
  double energy_weight = 1.0;
  double measure_weight = 1.0;
};

struct Edge {
  std::string id;
  std::size_t tail = 0;
  std::size_t head = 0;
  double length = 1.0;
  double energy_weight = 1.0;   // a_e
  double measure_weight = 1.0;  // c_e
};

/// Compact connected metric graph without loops or multiple edges.
///
/// The energy of f is sum_e a_e \int_0^{l_e} (f_e')^2 ds and the reference
/// measure has density c_e with respect to arc length on edge e.
class MetricGraph {
 public:
  static MetricGraph build(std::span<const EdgeSpec> specs);

  /// Reads `edge_id i_vertex j_vertex length energy_weight measure_weight`
  /// lines; `#` starts a comment.
  static MetricGraph parse(std::istream& in);
  static MetricGraph load(const std::filesystem::path& path);

  std::size_t num_vertices() const { return vertex_names_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }
  const std::string& vertex_name(std::size_t v) const { return vertex_names_[v]; }
  std::optional<std::size_t> find_vertex(const std::string& name) const;
  std::span<const std::size_t> incident_edges(std::size_t v) const { return incident_[v]; }

  /// U_p(e): +1 if p = j(e), -1 if p = i(e), 0 otherwise.
  int orientation(std::size_t v, std::size_t e) const;

  /// |E| - |V| + 1.
  std::size_t cycle_dimension() const { return edges_.size() + 1 - vertex_names_.size(); }

  /// mu(X) = sum_e c_e l_e.
  double total_measure() const;

  /// Edge indices sorted by edge id (numeric ids compare numerically).
  const std::vector<std::size_t>& edges_by_id() const { return edges_by_id_; }

 private:
  std::vector<std::string> vertex_names_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::size_t> edges_by_id_;
};

using GraphPtr = std::shared_ptr<const MetricGraph>;

MetricGraph interval_graph(double length = 1.0, double energy_weight = 1.0,
                           double measure_weight = 1.0);
MetricGraph path_graph(std::size_t num_edges, double edge_length = 1.0);
// Edges 0->1, 1->2, 2->0, so the unit circulation is edgewise +1.
MetricGraph triangle_graph(double edge_length = 1.0);
// Center "c" and leaves "l0".."l{k-1}"; edge k runs from leaf k into the center.
MetricGraph star_graph(std::size_t num_leaves, double edge_length = 1.0);

/// Uniform grid of `cells(e)` linear elements on every edge, with degrees of
/// freedom shared at vertices. Vertex DOFs come first (DOF v = vertex v),
/// followed by the interior nodes of each edge in edge order.
class EdgeGrid {
 public:
  EdgeGrid(GraphPtr graph, std::vector<int> cells);

  static std::shared_ptr<const EdgeGrid> uniform(GraphPtr graph, int cells_per_edge);

  const MetricGraph& graph() const { return *graph_; }
  const GraphPtr& graph_ptr() const { return graph_; }
  int cells(std::size_t e) const { return cells_[e]; }
  double spacing(std::size_t e) const { return graph_->edge(e).length / cells_[e]; }
  std::size_t num_dofs() const { return num_dofs_; }

  /// DOF of node k (0..cells(e)) on edge e; k = 0 is the tail vertex.
  std::size_t dof(std::size_t e, int k) const;

  bool same_as(const EdgeGrid& other) const;

 private:
  GraphPtr graph_;
  std::vector<int> cells_;
  std::vector<std::size_t> interior_offset_;
  std::size_t num_dofs_ = 0;
};

using GridPtr = std::shared_ptr<const EdgeGrid>;

/// Continuous piecewise-linear function on a discretized metric graph.
class GraphFunction {
 public:
  GraphFunction(GridPtr grid, Eigen::VectorXd dofs);

  static GraphFunction constant(GridPtr grid, double value);
  /// Nodal interpolant of `fn(edge, s)`, s in [0, l_e]. Vertex values are
  /// taken from the first incident edge in edge order.
  static GraphFunction interpolate(GridPtr grid,
                                   const std::function<double(std::size_t, double)>& fn);
  /// Per-edge nodal arrays; vertex traces must agree within `tolerance`.
  static GraphFunction from_edge_values(GridPtr grid,
                                        const std::vector<std::vector<double>>& values,
                                        double tolerance = 1e-12);

  const EdgeGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& dofs() const { return dofs_; }

  double value(std::size_t e, int k) const { return dofs_[grid_->dof(e, k)]; }
  double vertex_value(std::size_t v) const { return dofs_[v]; }
  std::vector<double> edge_values(std::size_t e) const;
  double min_value() const { return dofs_.minCoeff(); }
  double max_value() const { return dofs_.maxCoeff(); }
  double sup_norm() const { return dofs_.cwiseAbs().maxCoeff(); }

  GraphFunction map(const std::function<double(double)>& fn) const;

  GraphFunction& operator+=(const GraphFunction& other);
  GraphFunction& operator-=(const GraphFunction& other);
  GraphFunction& operator*=(double s);

 private:
  GridPtr grid_;
  Eigen::VectorXd dofs_;
};

GraphFunction operator+(GraphFunction a, const GraphFunction& b);
GraphFunction operator-(GraphFunction a, const GraphFunction& b);
GraphFunction operator*(double s, GraphFunction a);

enum class FieldBasis {
  kNodal,     // n_e + 1 values per edge, linear between nodes
  kCellwise,  // n_e values per edge, constant on each cell
};

/// Per-edge data without any vertex coupling: an L^2 vector field.
class EdgeField {
 public:
  EdgeField(GridPtr grid, FieldBasis basis, std::vector<std::vector<double>> values);

  static EdgeField zero(GridPtr grid, FieldBasis basis);
  static EdgeField edgewise_constant(GridPtr grid, FieldBasis basis,
                                     std::span<const double> per_edge);
  static EdgeField from_function(const GraphFunction& f);

  const EdgeGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  FieldBasis basis() const { return basis_; }
  std::span<const double> values(std::size_t e) const { return values_[e]; }
  std::span<double> values(std::size_t e) { return values_[e]; }

  /// Boundary value of u_e at the tail (at_head = false) or head vertex.
  double trace(std::size_t e, bool at_head) const;

  /// Mean of u_e over the edge, (1/l_e) \int_e u_e ds.
  double edge_mean(std::size_t e) const;

  /// Pointwise square; cellwise fields only (the square of a nodal field is
  /// not piecewise linear).
  EdgeField squared() const;

  double max_abs() const;

  EdgeField& operator+=(const EdgeField& other);
  EdgeField& operator-=(const EdgeField& other);
  EdgeField& operator*=(double s);

 private:
  GridPtr grid_;
  FieldBasis basis_;
  std::vector<std::vector<double>> values_;
};

EdgeField operator+(EdgeField a, const EdgeField& b);
EdgeField operator-(EdgeField a, const EdgeField& b);
EdgeField operator*(double s, EdgeField a);

/// sum_e c_e \int_e f g ds, exact for the piecewise polynomial data.
double l2_inner(const EdgeField& f, const EdgeField& g);
double l2_inner(const GraphFunction& f, const GraphFunction& g);
double l2_inner(const GraphFunction& f, const EdgeField& g);
double l2_inner(const EdgeField& f, const GraphFunction& g);
double l2_norm(const EdgeField& f);
double l2_norm(const GraphFunction& f);

/// sum_e a_e \int_e f' g' ds.
double energy_form(const GraphFunction& f, const GraphFunction& g);
double energy(const GraphFunction& f);

/// (df)_e = (a_e / c_e)^{1/2} f_e', returned cellwise.
EdgeField gradient_d(const GraphFunction& f);

struct CoderivativeResult {
  EdgeField value;                // -(a_e / c_e)^{1/2} u_e', cellwise
  std::vector<double> residuals;  // sum_{e~p} (a_e c_e)^{1/2} U_p(e) u_e(p)
  double tolerance = 0.0;
  bool in_domain = false;  // all |residual| <= tolerance
};

/// Edgewise coderivative of a nodal field plus the anti-Kirchhoff vertex
/// residuals. The membership tolerance is `relative_tolerance` times the
/// largest weighted nodal value of the field.
CoderivativeResult coderivative_dstar(const EdgeField& u, double relative_tolerance = 1e-9);

/// L^2(mu)-orthonormal, edgewise-constant basis of ker d*: one field per
/// fundamental cycle of a depth-first spanning tree.
std::vector<EdgeField> kernel_dstar_basis(const GridPtr& grid,
                                          FieldBasis basis = FieldBasis::kNodal);

struct HelmholtzParts {
  EdgeField gradient;
  EdgeField circulation;
};

HelmholtzParts helmholtz_project(const EdgeField& u);
HelmholtzParts helmholtz_project(const EdgeField& u, std::span<const EdgeField> kernel_basis);

}  // namespace mgb
