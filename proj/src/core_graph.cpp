#include "mgb/core_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mgb {

namespace {

bool parse_index(const std::string& s, long long& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool id_less(const std::string& a, const std::string& b) {
  long long ia = 0;
  long long ib = 0;
  const bool na = parse_index(a, ia);
  const bool nb = parse_index(b, ib);
  if (na && nb) return ia < ib;
  if (na != nb) return na;
  return a < b;
}

void check_positive(const EdgeSpec& s, double v, const char* what, GraphErrorKind kind) {
  if (!std::isfinite(v)) {
    throw GraphError(GraphErrorKind::kNonfiniteValue,
                     "edge '" + s.id + "': " + what + " is not finite");
  }
  if (v <= 0.0) {
    std::ostringstream os;
    os << "edge '" << s.id << "': " << what << " must be positive, got " << v;
    throw GraphError(kind, os.str());
  }
}

void require_same_grid(const EdgeGrid& a, const EdgeGrid& b) {
  if (!a.same_as(b)) throw MismatchError("operands live on different graphs or grids");
}

}  // namespace

MetricGraph MetricGraph::build(std::span<const EdgeSpec> specs) {
  if (specs.empty()) throw GraphError(GraphErrorKind::kEmpty, "graph has no edges");

  MetricGraph g;
  std::map<std::string, std::size_t> index;
  auto vertex = [&](const std::string& name) {
    auto [it, inserted] = index.emplace(name, g.vertex_names_.size());
    if (inserted) g.vertex_names_.push_back(name);
    return it->second;
  };

  std::set<std::string> ids;
  std::set<std::pair<std::size_t, std::size_t>> endpoints;
  for (const auto& s : specs) {
    if (!ids.insert(s.id).second) {
      throw GraphError(GraphErrorKind::kDuplicateEdge, "edge id '" + s.id + "' used twice");
    }
    if (s.tail == s.head) {
      throw GraphError(GraphErrorKind::kLoop,
                       "edge '" + s.id + "' is a loop at vertex '" + s.tail + "'");
    }
    check_positive(s, s.length, "length", GraphErrorKind::kNonpositiveLength);
    check_positive(s, s.energy_weight, "energy weight", GraphErrorKind::kNonpositiveWeight);
    check_positive(s, s.measure_weight, "measure weight", GraphErrorKind::kNonpositiveWeight);

    Edge e{s.id, vertex(s.tail), vertex(s.head), s.length, s.energy_weight, s.measure_weight};
    auto key = std::minmax(e.tail, e.head);
    if (!endpoints.insert({key.first, key.second}).second) {
      throw GraphError(GraphErrorKind::kDuplicateEdge, "edge '" + s.id +
                                                           "' duplicates the endpoints '" +
                                                           s.tail + "'-'" + s.head + "'");
    }
    g.edges_.push_back(std::move(e));
  }

  g.incident_.assign(g.vertex_names_.size(), {});
  g.edges_by_id_.resize(g.edges_.size());
  for (std::size_t e = 0; e < g.edges_.size(); ++e) g.edges_by_id_[e] = e;
  std::sort(g.edges_by_id_.begin(), g.edges_by_id_.end(), [&](std::size_t a, std::size_t b) {
    return id_less(g.edges_[a].id, g.edges_[b].id);
  });
  for (std::size_t e : g.edges_by_id_) {
    g.incident_[g.edges_[e].tail].push_back(e);
    g.incident_[g.edges_[e].head].push_back(e);
  }

  // Connectivity.
  std::vector<char> seen(g.vertex_names_.size(), 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t e : g.incident_[v]) {
      const std::size_t w = g.edges_[e].tail == v ? g.edges_[e].head : g.edges_[e].tail;
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  if (reached != g.vertex_names_.size()) {
    std::ostringstream os;
    os << "graph is disconnected: " << reached << " of " << g.vertex_names_.size()
       << " vertices reachable from '" << g.vertex_names_[0] << "'";
    throw GraphError(GraphErrorKind::kDisconnected, os.str());
  }
  return g;
}

MetricGraph MetricGraph::parse(std::istream& in) {
  std::vector<EdgeSpec> specs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    EdgeSpec s;
    if (!(ls >> s.id)) continue;
    if (!(ls >> s.tail >> s.head >> s.length >> s.energy_weight >> s.measure_weight)) {
      throw GraphError(GraphErrorKind::kParse,
                       "line " + std::to_string(lineno) +
                           ": expected 'edge_id i_vertex j_vertex length energy_weight "
                           "measure_weight'");
    }
    std::string extra;
    if (ls >> extra) {
      throw GraphError(GraphErrorKind::kParse,
                       "line " + std::to_string(lineno) + ": unexpected token '" + extra + "'");
    }
    specs.push_back(std::move(s));
  }
  return build(specs);
}

MetricGraph MetricGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GraphError(GraphErrorKind::kParse, "cannot open graph file " + path.string());
  return parse(in);
}

std::optional<std::size_t> MetricGraph::find_vertex(const std::string& name) const {
  for (std::size_t v = 0; v < vertex_names_.size(); ++v) {
    if (vertex_names_[v] == name) return v;
  }
  return std::nullopt;
}

int MetricGraph::orientation(std::size_t v, std::size_t e) const {
  if (edges_[e].head == v) return 1;
  if (edges_[e].tail == v) return -1;
  return 0;
}

double MetricGraph::total_measure() const {
  double total = 0.0;
  for (const auto& e : edges_) total += e.measure_weight * e.length;
  return total;
}

MetricGraph interval_graph(double length, double energy_weight, double measure_weight) {
  const EdgeSpec spec{"0", "a", "b", length, energy_weight, measure_weight};
  return MetricGraph::build(std::span(&spec, 1));
}

MetricGraph path_graph(std::size_t num_edges, double edge_length) {
  std::vector<EdgeSpec> specs;
  for (std::size_t k = 0; k < num_edges; ++k) {
    specs.push_back({std::to_string(k), std::to_string(k), std::to_string(k + 1), edge_length});
  }
  return MetricGraph::build(specs);
}

MetricGraph triangle_graph(double edge_length) {
  const std::vector<EdgeSpec> specs{{"0", "0", "1", edge_length},
                                    {"1", "1", "2", edge_length},
                                    {"2", "2", "0", edge_length}};
  return MetricGraph::build(specs);
}

MetricGraph star_graph(std::size_t num_leaves, double edge_length) {
  std::vector<EdgeSpec> specs;
  for (std::size_t k = 0; k < num_leaves; ++k) {
    specs.push_back({std::to_string(k), "l" + std::to_string(k), "c", edge_length});
  }
  return MetricGraph::build(specs);
}

// ---------------------------------------------------------------------------

EdgeGrid::EdgeGrid(GraphPtr graph, std::vector<int> cells)
    : graph_(std::move(graph)), cells_(std::move(cells)) {
  if (cells_.size() != graph_->num_edges()) {
    throw MismatchError("grid needs one cell count per edge");
  }
  num_dofs_ = graph_->num_vertices();
  interior_offset_.resize(cells_.size());
  for (std::size_t e = 0; e < cells_.size(); ++e) {
    if (cells_[e] < 1) throw MismatchError("every edge needs at least one cell");
    interior_offset_[e] = num_dofs_;
    num_dofs_ += static_cast<std::size_t>(cells_[e] - 1);
  }
}

std::shared_ptr<const EdgeGrid> EdgeGrid::uniform(GraphPtr graph, int cells_per_edge) {
  std::vector<int> cells(graph->num_edges(), cells_per_edge);
  return std::make_shared<const EdgeGrid>(std::move(graph), std::move(cells));
}

std::size_t EdgeGrid::dof(std::size_t e, int k) const {
  if (k == 0) return graph_->edge(e).tail;
  if (k == cells_[e]) return graph_->edge(e).head;
  return interior_offset_[e] + static_cast<std::size_t>(k - 1);
}

bool EdgeGrid::same_as(const EdgeGrid& other) const {
  return this == &other || (graph_ == other.graph_ && cells_ == other.cells_);
}

// ---------------------------------------------------------------------------

GraphFunction::GraphFunction(GridPtr grid, Eigen::VectorXd dofs)
    : grid_(std::move(grid)), dofs_(std::move(dofs)) {
  if (static_cast<std::size_t>(dofs_.size()) != grid_->num_dofs()) {
    throw MismatchError("DOF vector does not match the grid");
  }
}

GraphFunction GraphFunction::constant(GridPtr grid, double value) {
  const auto n = static_cast<Eigen::Index>(grid->num_dofs());
  return GraphFunction(std::move(grid), Eigen::VectorXd::Constant(n, value));
}

GraphFunction GraphFunction::interpolate(GridPtr grid,
                                         const std::function<double(std::size_t, double)>& fn) {
  Eigen::VectorXd dofs(static_cast<Eigen::Index>(grid->num_dofs()));
  std::vector<char> vertex_set(grid->graph().num_vertices(), 0);
  for (std::size_t e = 0; e < grid->graph().num_edges(); ++e) {
    const double h = grid->spacing(e);
    for (int k = 0; k <= grid->cells(e); ++k) {
      const std::size_t d = grid->dof(e, k);
      if (d < vertex_set.size()) {
        if (vertex_set[d]) continue;
        vertex_set[d] = 1;
      }
      const double s = k == grid->cells(e) ? grid->graph().edge(e).length : k * h;
      dofs[static_cast<Eigen::Index>(d)] = fn(e, s);
    }
  }
  return GraphFunction(std::move(grid), std::move(dofs));
}

GraphFunction GraphFunction::from_edge_values(GridPtr grid,
                                              const std::vector<std::vector<double>>& values,
                                              double tolerance) {
  const auto& g = grid->graph();
  if (values.size() != g.num_edges()) throw MismatchError("need one array per edge");
  Eigen::VectorXd dofs(static_cast<Eigen::Index>(grid->num_dofs()));
  std::vector<char> vertex_set(g.num_vertices(), 0);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (values[e].size() != static_cast<std::size_t>(grid->cells(e) + 1)) {
      throw MismatchError("edge '" + g.edge(e).id + "' has the wrong number of samples");
    }
    for (int k = 0; k <= grid->cells(e); ++k) {
      const std::size_t d = grid->dof(e, k);
      const double v = values[e][static_cast<std::size_t>(k)];
      if (d < vertex_set.size() && vertex_set[d]) {
        const double prev = dofs[static_cast<Eigen::Index>(d)];
        if (std::abs(prev - v) > tolerance * std::max(1.0, std::abs(prev))) {
          throw MismatchError("values disagree at vertex '" + g.vertex_name(d) + "'");
        }
        continue;
      }
      if (d < vertex_set.size()) vertex_set[d] = 1;
      dofs[static_cast<Eigen::Index>(d)] = v;
    }
  }
  return GraphFunction(std::move(grid), std::move(dofs));
}

std::vector<double> GraphFunction::edge_values(std::size_t e) const {
  std::vector<double> out(static_cast<std::size_t>(grid_->cells(e) + 1));
  for (int k = 0; k <= grid_->cells(e); ++k) out[static_cast<std::size_t>(k)] = value(e, k);
  return out;
}

GraphFunction GraphFunction::map(const std::function<double(double)>& fn) const {
  Eigen::VectorXd out = dofs_.unaryExpr(fn);
  return GraphFunction(grid_, std::move(out));
}

GraphFunction& GraphFunction::operator+=(const GraphFunction& other) {
  require_same_grid(*grid_, *other.grid_);
  dofs_ += other.dofs_;
  return *this;
}

GraphFunction& GraphFunction::operator-=(const GraphFunction& other) {
  require_same_grid(*grid_, *other.grid_);
  dofs_ -= other.dofs_;
  return *this;
}

GraphFunction& GraphFunction::operator*=(double s) {
  dofs_ *= s;
  return *this;
}

GraphFunction operator+(GraphFunction a, const GraphFunction& b) { return a += b; }
GraphFunction operator-(GraphFunction a, const GraphFunction& b) { return a -= b; }
GraphFunction operator*(double s, GraphFunction a) { return a *= s; }

// ---------------------------------------------------------------------------

EdgeField::EdgeField(GridPtr grid, FieldBasis basis, std::vector<std::vector<double>> values)
    : grid_(std::move(grid)), basis_(basis), values_(std::move(values)) {
  const auto& g = grid_->graph();
  if (values_.size() != g.num_edges()) throw MismatchError("need one array per edge");
  const int extra = basis_ == FieldBasis::kNodal ? 1 : 0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (values_[e].size() != static_cast<std::size_t>(grid_->cells(e) + extra)) {
      throw MismatchError("edge '" + g.edge(e).id + "' has the wrong number of values");
    }
  }
}

EdgeField EdgeField::zero(GridPtr grid, FieldBasis basis) {
  std::vector<double> zeros(grid->graph().num_edges(), 0.0);
  return edgewise_constant(std::move(grid), basis, zeros);
}

EdgeField EdgeField::edgewise_constant(GridPtr grid, FieldBasis basis,
                                       std::span<const double> per_edge) {
  const int extra = basis == FieldBasis::kNodal ? 1 : 0;
  std::vector<std::vector<double>> values(grid->graph().num_edges());
  for (std::size_t e = 0; e < values.size(); ++e) {
    values[e].assign(static_cast<std::size_t>(grid->cells(e) + extra), per_edge[e]);
  }
  return EdgeField(std::move(grid), basis, std::move(values));
}

EdgeField EdgeField::from_function(const GraphFunction& f) {
  std::vector<std::vector<double>> values(f.grid().graph().num_edges());
  for (std::size_t e = 0; e < values.size(); ++e) values[e] = f.edge_values(e);
  return EdgeField(f.grid_ptr(), FieldBasis::kNodal, std::move(values));
}

double EdgeField::trace(std::size_t e, bool at_head) const {
  return at_head ? values_[e].back() : values_[e].front();
}

double EdgeField::edge_mean(std::size_t e) const {
  const auto& v = values_[e];
  double sum = 0.0;
  if (basis_ == FieldBasis::kCellwise) {
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  }
  for (std::size_t k = 0; k + 1 < v.size(); ++k) sum += 0.5 * (v[k] + v[k + 1]);
  return sum / static_cast<double>(v.size() - 1);
}

EdgeField EdgeField::squared() const {
  if (basis_ != FieldBasis::kCellwise) {
    throw MismatchError("pointwise square is only exact for cellwise fields");
  }
  EdgeField out = *this;
  for (auto& v : out.values_) {
    for (double& x : v) x *= x;
  }
  return out;
}

double EdgeField::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) {
    for (double x : v) m = std::max(m, std::abs(x));
  }
  return m;
}

EdgeField& EdgeField::operator+=(const EdgeField& other) {
  require_same_grid(*grid_, *other.grid_);
  if (basis_ != other.basis_) throw MismatchError("cannot add fields in different bases");
  for (std::size_t e = 0; e < values_.size(); ++e) {
    for (std::size_t k = 0; k < values_[e].size(); ++k) values_[e][k] += other.values_[e][k];
  }
  return *this;
}

EdgeField& EdgeField::operator-=(const EdgeField& other) {
  require_same_grid(*grid_, *other.grid_);
  if (basis_ != other.basis_) throw MismatchError("cannot subtract fields in different bases");
  for (std::size_t e = 0; e < values_.size(); ++e) {
    for (std::size_t k = 0; k < values_[e].size(); ++k) values_[e][k] -= other.values_[e][k];
  }
  return *this;
}

EdgeField& EdgeField::operator*=(double s) {
  for (auto& v : values_) {
    for (double& x : v) x *= s;
  }
  return *this;
}

EdgeField operator+(EdgeField a, const EdgeField& b) { return a += b; }
EdgeField operator-(EdgeField a, const EdgeField& b) { return a -= b; }
EdgeField operator*(double s, EdgeField a) { return a *= s; }

// ---------------------------------------------------------------------------

double l2_inner(const EdgeField& f, const EdgeField& g) {
  require_same_grid(f.grid(), g.grid());
  const auto& graph = f.grid().graph();
  double total = 0.0;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const double h = f.grid().spacing(e);
    const int n = f.grid().cells(e);
    const auto a = f.values(e);
    const auto b = g.values(e);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      if (f.basis() == FieldBasis::kNodal && g.basis() == FieldBasis::kNodal) {
        sum += (2.0 * a[i] * b[i] + a[i] * b[i + 1] + a[i + 1] * b[i] + 2.0 * a[i + 1] * b[i + 1]) /
               6.0;
      } else if (f.basis() == FieldBasis::kNodal) {
        sum += 0.5 * (a[i] + a[i + 1]) * b[i];
      } else if (g.basis() == FieldBasis::kNodal) {
        sum += a[i] * 0.5 * (b[i] + b[i + 1]);
      } else {
        sum += a[i] * b[i];
      }
    }
    total += graph.edge(e).measure_weight * h * sum;
  }
  return total;
}

double l2_inner(const GraphFunction& f, const GraphFunction& g) {
  return l2_inner(EdgeField::from_function(f), EdgeField::from_function(g));
}

double l2_inner(const GraphFunction& f, const EdgeField& g) {
  return l2_inner(EdgeField::from_function(f), g);
}

double l2_inner(const EdgeField& f, const GraphFunction& g) {
  return l2_inner(f, EdgeField::from_function(g));
}

double l2_norm(const EdgeField& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }
double l2_norm(const GraphFunction& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

double energy_form(const GraphFunction& f, const GraphFunction& g) {
  require_same_grid(f.grid(), g.grid());
  const auto& grid = f.grid();
  double total = 0.0;
  for (std::size_t e = 0; e < grid.graph().num_edges(); ++e) {
    const double h = grid.spacing(e);
    double sum = 0.0;
    for (int k = 0; k < grid.cells(e); ++k) {
      sum += (f.value(e, k + 1) - f.value(e, k)) * (g.value(e, k + 1) - g.value(e, k));
    }
    total += grid.graph().edge(e).energy_weight * sum / h;
  }
  return total;
}

double energy(const GraphFunction& f) { return energy_form(f, f); }

EdgeField gradient_d(const GraphFunction& f) {
  const auto& grid = f.grid();
  std::vector<std::vector<double>> values(grid.graph().num_edges());
  for (std::size_t e = 0; e < values.size(); ++e) {
    const auto& edge = grid.graph().edge(e);
    const double scale = std::sqrt(edge.energy_weight / edge.measure_weight) / grid.spacing(e);
    values[e].resize(static_cast<std::size_t>(grid.cells(e)));
    for (int k = 0; k < grid.cells(e); ++k) {
      values[e][static_cast<std::size_t>(k)] = scale * (f.value(e, k + 1) - f.value(e, k));
    }
  }
  return EdgeField(f.grid_ptr(), FieldBasis::kCellwise, std::move(values));
}

CoderivativeResult coderivative_dstar(const EdgeField& u, double relative_tolerance) {
  if (u.basis() != FieldBasis::kNodal) {
    throw MismatchError("d* needs a nodal (piecewise linear) field");
  }
  const auto& grid = u.grid();
  const auto& graph = grid.graph();
  std::vector<std::vector<double>> values(graph.num_edges());
  std::vector<double> residuals(graph.num_vertices(), 0.0);
  double max_weighted = 0.0;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(e);
    const double scale = std::sqrt(edge.energy_weight / edge.measure_weight) / grid.spacing(e);
    const auto v = u.values(e);
    values[e].resize(static_cast<std::size_t>(grid.cells(e)));
    for (std::size_t k = 0; k + 1 < v.size(); ++k) values[e][k] = -scale * (v[k + 1] - v[k]);

    const double w = std::sqrt(edge.energy_weight * edge.measure_weight);
    residuals[edge.head] += w * u.trace(e, true);
    residuals[edge.tail] -= w * u.trace(e, false);
    for (double x : v) max_weighted = std::max(max_weighted, w * std::abs(x));
  }
  CoderivativeResult out{EdgeField(u.grid_ptr(), FieldBasis::kCellwise, std::move(values)),
                         std::move(residuals), relative_tolerance * max_weighted, true};
  for (double r : out.residuals) {
    if (std::abs(r) > out.tolerance) out.in_domain = false;
  }
  return out;
}

std::vector<EdgeField> kernel_dstar_basis(const GridPtr& grid, FieldBasis basis) {
  const auto& graph = grid->graph();
  const std::size_t nv = graph.num_vertices();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // Depth-first spanning tree from vertex 0, visiting edges in id order.
  std::vector<std::size_t> parent_edge(nv, kNone);
  std::vector<std::size_t> depth(nv, 0);
  std::vector<char> seen(nv, 0);
  std::vector<char> in_tree(graph.num_edges(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  seen[0] = 1;
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    const auto inc = graph.incident_edges(v);
    if (next == inc.size()) {
      stack.pop_back();
      continue;
    }
    const std::size_t e = inc[next++];
    const std::size_t w = graph.edge(e).tail == v ? graph.edge(e).head : graph.edge(e).tail;
    if (seen[w]) continue;
    seen[w] = 1;
    parent_edge[w] = e;
    depth[w] = depth[v] + 1;
    in_tree[e] = 1;
    stack.emplace_back(w, 0);
  }
  auto parent = [&](std::size_t v) {
    const auto& edge = graph.edge(parent_edge[v]);
    return edge.tail == v ? edge.head : edge.tail;
  };

  std::vector<EdgeField> fields;
  for (std::size_t e : graph.edges_by_id()) {
    if (in_tree[e]) continue;
    // Traverse tail -> head along e, then back from head to tail in the tree.
    std::vector<double> coeff(graph.num_edges(), 0.0);
    auto add = [&](std::size_t edge_index, double sign) {
      const auto& edge = graph.edge(edge_index);
      coeff[edge_index] += sign / std::sqrt(edge.energy_weight * edge.measure_weight);
    };
    add(e, 1.0);
    std::size_t a = graph.edge(e).head;  // walks up, traversed upward
    std::size_t b = graph.edge(e).tail;  // walks up, traversed downward
    while (a != b) {
      if (depth[a] >= depth[b]) {
        const std::size_t pe = parent_edge[a];
        add(pe, graph.edge(pe).tail == a ? 1.0 : -1.0);
        a = parent(a);
      } else {
        const std::size_t pe = parent_edge[b];
        add(pe, graph.edge(pe).head == b ? 1.0 : -1.0);
        b = parent(b);
      }
    }
    fields.push_back(EdgeField::edgewise_constant(grid, basis, coeff));
  }

  // Modified Gram-Schmidt, two passes.
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) fields[i] -= l2_inner(fields[i], fields[j]) * fields[j];
    }
    fields[i] *= 1.0 / l2_norm(fields[i]);
  }
  return fields;
}

HelmholtzParts helmholtz_project(const EdgeField& u) {
  const auto basis = kernel_dstar_basis(u.grid_ptr(), u.basis());
  return helmholtz_project(u, basis);
}

HelmholtzParts helmholtz_project(const EdgeField& u, std::span<const EdgeField> kernel_basis) {
  EdgeField circulation = EdgeField::zero(u.grid_ptr(), u.basis());
  for (const auto& b : kernel_basis) circulation += l2_inner(u, b) * b;
  EdgeField gradient = u - circulation;
  return {std::move(gradient), std::move(circulation)};
}

}  // namespace mgb
