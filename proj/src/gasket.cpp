#include "mgb/gasket.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mgb/csv.hpp"

namespace mgb::gasket {

namespace {

std::size_t pow3(int k) {
  std::size_t p = 1;
  for (int i = 0; i < k; ++i) p *= 3;
  return p;
}

void require_level(const HierarchyPtr& h, int level) {
  if (level < 0 || level > h->max_level()) {
    std::ostringstream os;
    os << "level " << level << " outside the hierarchy (0.." << h->max_level() << ")";
    throw std::out_of_range(os.str());
  }
}

void require_same(const GasketFunction& a, const GasketFunction& b) {
  if (a.hierarchy() != b.hierarchy() || a.level() != b.level()) {
    throw MismatchError("gasket functions live on different levels");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

CellWord::CellWord(std::vector<std::uint8_t> digits) : digits_(std::move(digits)) {
  for (auto d : digits_) {
    if (d > 2) throw std::invalid_argument("cell word digits must be 0, 1 or 2");
  }
}

CellWord CellWord::from_string(const std::string& digits) {
  std::vector<std::uint8_t> d;
  for (char c : digits) {
    if (c < '0' || c > '2') throw std::invalid_argument("cell word digits must be 0, 1 or 2");
    d.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return CellWord(std::move(d));
}

CellWord CellWord::from_index(int level, std::size_t index) {
  if (level < 0 || index >= pow3(level)) throw std::out_of_range("cell index out of range");
  std::vector<std::uint8_t> d(static_cast<std::size_t>(level));
  for (int i = level - 1; i >= 0; --i) {
    d[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(index % 3);
    index /= 3;
  }
  return CellWord(std::move(d));
}

std::size_t CellWord::index() const {
  std::size_t idx = 0;
  for (auto d : digits_) idx = 3 * idx + d;
  return idx;
}

std::string CellWord::to_string() const {
  std::string s;
  for (auto d : digits_) s.push_back(static_cast<char>('0' + d));
  return s;
}

SelfSimilarMeasure::SelfSimilarMeasure(std::array<double, 3> weights) : weights_(weights) {
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("measure weights must be positive");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("measure weights must sum to 1");
}

double SelfSimilarMeasure::cell_measure(const CellWord& w) const {
  double m = 1.0;
  for (auto d : w.digits()) m *= weights_[d];
  return m;
}

std::vector<double> SelfSimilarMeasure::cell_measures(int level) const {
  std::vector<double> out{1.0};
  for (int k = 0; k < level; ++k) {
    std::vector<double> next;
    next.reserve(out.size() * 3);
    for (double m : out) {
      for (double w : weights_) next.push_back(m * w);
    }
    out = std::move(next);
  }
  return out;
}

double SelfSimilarMeasure::max_cell_measure(int level) const {
  return std::pow(*std::max_element(weights_.begin(), weights_.end()), level);
}

// ---------------------------------------------------------------------------

std::shared_ptr<const Hierarchy> Hierarchy::build(int max_level) {
  if (max_level < 0) throw std::invalid_argument("level must be nonnegative");
  auto h = std::make_shared<Hierarchy>();

  GasketLevel base;
  base.level = 0;
  base.coordinates = {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
  base.cells = {{0, 1, 2}};
  base.edges = {{0, 1}, {0, 2}, {1, 2}};
  h->levels_.push_back(std::move(base));

  for (int m = 1; m <= max_level; ++m) {
    const GasketLevel& prev = h->levels_.back();
    GasketLevel next;
    next.level = m;
    next.coordinates = prev.coordinates;
    next.cells.reserve(prev.cells.size() * 3);
    auto midpoint = [&](std::size_t a, std::size_t b, std::size_t c) {
      const std::size_t id = next.coordinates.size();
      next.coordinates.push_back({0.5 * (next.coordinates[a][0] + next.coordinates[b][0]),
                                  0.5 * (next.coordinates[a][1] + next.coordinates[b][1])});
      next.rules.push_back({id, a, b, c});
      return id;
    };
    for (const auto& [a, b, c] : prev.cells) {
      const std::size_t ab = midpoint(a, b, c);
      const std::size_t ac = midpoint(a, c, b);
      const std::size_t bc = midpoint(b, c, a);
      next.cells.push_back({a, ab, ac});
      next.cells.push_back({ab, b, bc});
      next.cells.push_back({ac, bc, c});
    }
    for (const auto& [a, b, c] : next.cells) {
      next.edges.push_back({std::min(a, b), std::max(a, b)});
      next.edges.push_back({std::min(a, c), std::max(a, c)});
      next.edges.push_back({std::min(b, c), std::max(b, c)});
    }
    std::sort(next.edges.begin(), next.edges.end());
    h->levels_.push_back(std::move(next));
  }
  return h;
}

const GasketLevel& Hierarchy::level(int m) const {
  if (m < 0 || m > max_level()) throw std::out_of_range("gasket level out of range");
  return levels_[static_cast<std::size_t>(m)];
}

std::size_t vertex_count(int level) { return (pow3(level + 1) + 3) / 2; }

// ---------------------------------------------------------------------------

GasketFunction::GasketFunction(HierarchyPtr hierarchy, int level, Eigen::VectorXd values)
    : hierarchy_(std::move(hierarchy)), level_(level), values_(std::move(values)) {
  require_level(hierarchy_, level_);
  if (static_cast<std::size_t>(values_.size()) != hierarchy_->num_vertices(level_)) {
    throw MismatchError("gasket function needs one value per vertex of V_m");
  }
}

GasketFunction GasketFunction::constant(HierarchyPtr hierarchy, int level, double value) {
  require_level(hierarchy, level);
  const auto n = static_cast<Eigen::Index>(hierarchy->num_vertices(level));
  return GasketFunction(std::move(hierarchy), level, Eigen::VectorXd::Constant(n, value));
}

GasketFunction GasketFunction::delta(HierarchyPtr hierarchy, int level, std::size_t vertex) {
  require_level(hierarchy, level);
  const auto n = hierarchy->num_vertices(level);
  if (vertex >= n) throw std::out_of_range("vertex is not in V_m");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  v[static_cast<Eigen::Index>(vertex)] = 1.0;
  return GasketFunction(std::move(hierarchy), level, std::move(v));
}

GasketFunction GasketFunction::restrict_to(int m) const {
  if (m > level_) throw std::invalid_argument("cannot restrict to a finer level");
  const auto n = static_cast<Eigen::Index>(hierarchy_->num_vertices(m));
  return GasketFunction(hierarchy_, m, values_.head(n));
}

GasketFunction GasketFunction::map(const std::function<double(double)>& fn) const {
  return GasketFunction(hierarchy_, level_, values_.unaryExpr(fn));
}

GasketFunction& GasketFunction::operator+=(const GasketFunction& other) {
  require_same(*this, other);
  values_ += other.values_;
  return *this;
}

GasketFunction& GasketFunction::operator-=(const GasketFunction& other) {
  require_same(*this, other);
  values_ -= other.values_;
  return *this;
}

GasketFunction& GasketFunction::operator*=(double s) {
  values_ *= s;
  return *this;
}

GasketFunction operator+(GasketFunction a, const GasketFunction& b) { return a += b; }
GasketFunction operator-(GasketFunction a, const GasketFunction& b) { return a -= b; }
GasketFunction operator*(double s, GasketFunction a) { return a *= s; }

GasketFunction pointwise_product(const GasketFunction& a, const GasketFunction& b) {
  require_same(a, b);
  return GasketFunction(a.hierarchy(), a.level(), a.values().cwiseProduct(b.values()));
}

// ---------------------------------------------------------------------------

double graph_energy(const GasketFunction& f, const GasketFunction& g) {
  require_same(f, g);
  const auto& lvl = f.hierarchy()->level(f.level());
  double sum = 0.0;
  for (const auto& [p, q] : lvl.edges) sum += (f[p] - f[q]) * (g[p] - g[q]);
  return sum * std::pow(kEnergyRatio, -f.level());
}

double graph_energy(const GasketFunction& f) { return graph_energy(f, f); }

GasketFunction harmonic_extend(const GasketFunction& f, int target_level) {
  if (target_level < f.level()) throw std::invalid_argument("target level below source level");
  require_level(f.hierarchy(), target_level);
  Eigen::VectorXd v = f.values();
  for (int m = f.level() + 1; m <= target_level; ++m) {
    const auto& lvl = f.hierarchy()->level(m);
    const auto old = v.size();
    v.conservativeResize(static_cast<Eigen::Index>(lvl.num_vertices()));
    (void)old;
    for (const auto& r : lvl.rules) {
      const auto a = static_cast<Eigen::Index>(r.a);
      const auto b = static_cast<Eigen::Index>(r.b);
      const auto c = static_cast<Eigen::Index>(r.c);
      v[static_cast<Eigen::Index>(r.vertex)] = (2.0 * v[a] + 2.0 * v[b] + v[c]) / 5.0;
    }
  }
  return GasketFunction(f.hierarchy(), target_level, std::move(v));
}

Eigen::VectorXd extend_transpose(const HierarchyPtr& hierarchy, Eigen::VectorXd values,
                                 int from_level, int to_level) {
  require_level(hierarchy, from_level);
  if (to_level < 0 || to_level > from_level) throw std::invalid_argument("bad level range");
  if (static_cast<std::size_t>(values.size()) != hierarchy->num_vertices(from_level)) {
    throw MismatchError("vector does not match V_M");
  }
  for (int m = from_level; m > to_level; --m) {
    const auto& lvl = hierarchy->level(m);
    for (auto it = lvl.rules.rbegin(); it != lvl.rules.rend(); ++it) {
      const double x = values[static_cast<Eigen::Index>(it->vertex)];
      values[static_cast<Eigen::Index>(it->a)] += 0.4 * x;
      values[static_cast<Eigen::Index>(it->b)] += 0.4 * x;
      values[static_cast<Eigen::Index>(it->c)] += 0.2 * x;
    }
    values.conservativeResize(static_cast<Eigen::Index>(hierarchy->num_vertices(m - 1)));
  }
  return values;
}

double cell_energy(const GasketFunction& f, const CellWord& w) {
  const int big = f.level();
  const int m = w.level();
  if (m > big) throw std::out_of_range("cell word is finer than the function's level");
  const auto& lvl = f.hierarchy()->level(big);
  const std::size_t block = pow3(big - m);
  const std::size_t first = w.index() * block;
  double sum = 0.0;
  for (std::size_t k = first; k < first + block; ++k) {
    const auto& [a, b, c] = lvl.cells[k];
    sum += (f[a] - f[b]) * (f[a] - f[b]) + (f[a] - f[c]) * (f[a] - f[c]) +
           (f[b] - f[c]) * (f[b] - f[c]);
  }
  return sum * std::pow(kEnergyRatio, -big);
}

std::vector<std::size_t> cell_vertices(const HierarchyPtr& hierarchy, int level_m,
                                       const CellWord& w) {
  require_level(hierarchy, level_m);
  if (w.level() > level_m) throw std::out_of_range("cell word is finer than the level");
  const auto& lvl = hierarchy->level(level_m);
  const std::size_t block = pow3(level_m - w.level());
  const std::size_t first = w.index() * block;
  std::vector<std::size_t> out;
  for (std::size_t k = first; k < first + block; ++k) {
    for (std::size_t v : lvl.cells[k]) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GasketFunction spline_psi(const HierarchyPtr& hierarchy, std::size_t vertex, int level_m,
                          int output_level) {
  return harmonic_extend(GasketFunction::delta(hierarchy, level_m, vertex), output_level);
}

Eigen::VectorXd quadrature_weights(const HierarchyPtr& hierarchy, int level,
                                   const SelfSimilarMeasure& mu) {
  require_level(hierarchy, level);
  const auto& lvl = hierarchy->level(level);
  const auto measures = mu.cell_measures(level);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lvl.num_vertices()));
  for (std::size_t k = 0; k < lvl.cells.size(); ++k) {
    for (std::size_t v : lvl.cells[k]) w[static_cast<Eigen::Index>(v)] += measures[k] / 3.0;
  }
  return w;
}

double integrate(const GasketFunction& f, const SelfSimilarMeasure& mu) {
  return quadrature_weights(f.hierarchy(), f.level(), mu).dot(f.values());
}

double l2_inner_gasket(const GasketFunction& f, const GasketFunction& g,
                       const SelfSimilarMeasure& mu, int quadrature_level) {
  if (quadrature_level < f.level() || quadrature_level < g.level()) {
    throw std::invalid_argument("quadrature level below the level of an argument");
  }
  const auto fe = harmonic_extend(f, quadrature_level);
  const auto ge = harmonic_extend(g, quadrature_level);
  return integrate(pointwise_product(fe, ge), mu);
}

double l2_norm_gasket(const GasketFunction& f, const SelfSimilarMeasure& mu,
                      int quadrature_level) {
  return std::sqrt(std::max(0.0, l2_inner_gasket(f, f, mu, quadrature_level)));
}

Eigen::VectorXd spline_moments(const GasketFunction& u, int level_m, const SelfSimilarMeasure& mu,
                               int quadrature_level) {
  if (quadrature_level < u.level() || level_m > quadrature_level) {
    throw std::invalid_argument("quadrature level below the level of an argument");
  }
  const auto ue = harmonic_extend(u, quadrature_level);
  Eigen::VectorXd weighted =
      quadrature_weights(u.hierarchy(), quadrature_level, mu).cwiseProduct(ue.values());
  return extend_transpose(u.hierarchy(), std::move(weighted), quadrature_level, level_m);
}

Eigen::MatrixXd decimation_laplacian(const HierarchyPtr& hierarchy, int level) {
  require_level(hierarchy, level);
  const auto& lvl = hierarchy->level(level);
  const auto n = static_cast<Eigen::Index>(lvl.num_vertices());
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [p, q] : lvl.edges) {
    adj(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = 1.0;
    adj(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = 1.0;
  }
  const Eigen::VectorXd degree = adj.rowwise().sum();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n) - degree.cwiseInverse().asDiagonal() * adj;
  return 4.0 * lap;
}

Eigen::VectorXd decimation_spectrum(const HierarchyPtr& hierarchy, int level) {
  require_level(hierarchy, level);
  const auto& lvl = hierarchy->level(level);
  const auto n = static_cast<Eigen::Index>(lvl.num_vertices());
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (const auto& [p, q] : lvl.edges) {
    degree[static_cast<Eigen::Index>(p)] += 1.0;
    degree[static_cast<Eigen::Index>(q)] += 1.0;
  }
  Eigen::MatrixXd sym = 4.0 * Eigen::MatrixXd::Identity(n, n);
  for (const auto& [p, q] : lvl.edges) {
    const auto i = static_cast<Eigen::Index>(p);
    const auto j = static_cast<Eigen::Index>(q);
    const double v = -4.0 / std::sqrt(degree[i] * degree[j]);
    sym(i, j) = v;
    sym(j, i) = v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw SolverError("decimation eigensolve failed");
  return solver.eigenvalues();
}

void write_csv(const GasketFunction& f, const std::filesystem::path& path) {
  CsvWriter csv(path, {"vertex_id", "x", "y", "value", "level"});
  const auto& lvl = f.hierarchy()->level(f.level());
  for (std::size_t v = 0; v < lvl.num_vertices(); ++v) {
    csv.row(v, lvl.coordinates[v][0], lvl.coordinates[v][1], f[v], f.level());
  }
}

}  // namespace mgb::gasket
