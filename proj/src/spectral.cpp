#include "mgb/spectral.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mgb/csv.hpp"

namespace mgb {

AssembledOperator assemble(GridPtr grid, MassMatrix mass_kind) {
  const auto n = static_cast<Eigen::Index>(grid->num_dofs());
  AssembledOperator op{grid, mass_kind, Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  const auto& graph = grid->graph();
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(e);
    const double h = grid->spacing(e);
    const double k = edge.energy_weight / h;
    const double m = edge.measure_weight * h;
    for (int c = 0; c < grid->cells(e); ++c) {
      const auto i = static_cast<Eigen::Index>(grid->dof(e, c));
      const auto j = static_cast<Eigen::Index>(grid->dof(e, c + 1));
      op.stiffness(i, i) += k;
      op.stiffness(j, j) += k;
      op.stiffness(i, j) -= k;
      op.stiffness(j, i) -= k;
      if (mass_kind == MassMatrix::kLumped) {
        op.mass(i, i) += m / 2.0;
        op.mass(j, j) += m / 2.0;
      } else {
        op.mass(i, i) += m / 3.0;
        op.mass(j, j) += m / 3.0;
        op.mass(i, j) += m / 6.0;
        op.mass(j, i) += m / 6.0;
      }
    }
  }
  return op;
}

Eigen::VectorXd load_vector(const AssembledOperator& op, const GraphFunction& data) {
  if (!data.grid().same_as(*op.grid)) throw MismatchError("datum lives on a different grid");
  return op.mass * data.dofs();
}

Eigen::VectorXd load_vector(const AssembledOperator& op, const EdgeField& data) {
  const auto& grid = *op.grid;
  if (!data.grid().same_as(grid)) throw MismatchError("datum lives on a different grid");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.num_dofs()));
  for (std::size_t e = 0; e < grid.graph().num_edges(); ++e) {
    const double m = grid.graph().edge(e).measure_weight * grid.spacing(e);
    const auto v = data.values(e);
    for (int c = 0; c < grid.cells(e); ++c) {
      const auto i = static_cast<Eigen::Index>(grid.dof(e, c));
      const auto j = static_cast<Eigen::Index>(grid.dof(e, c + 1));
      const auto k = static_cast<std::size_t>(c);
      if (data.basis() == FieldBasis::kCellwise) {
        b[i] += m * v[k] / 2.0;
        b[j] += m * v[k] / 2.0;
      } else {
        b[i] += m * (2.0 * v[k] + v[k + 1]) / 6.0;
        b[j] += m * (v[k] + 2.0 * v[k + 1]) / 6.0;
      }
    }
  }
  return b;
}

SpectralDecomposition::SpectralDecomposition(std::shared_ptr<const AssembledOperator> op,
                                             Eigen::VectorXd eigenvalues,
                                             Eigen::MatrixXd eigenvectors)
    : op_(std::move(op)),
      eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)) {}

Eigen::VectorXd SpectralDecomposition::coefficients(const GraphFunction& data) const {
  return eigenvectors_.transpose() * load_vector(*op_, data);
}

Eigen::VectorXd SpectralDecomposition::coefficients(const EdgeField& data) const {
  return eigenvectors_.transpose() * load_vector(*op_, data);
}

GraphFunction SpectralDecomposition::synthesize(const Eigen::VectorXd& coefficients) const {
  return GraphFunction(op_->grid, eigenvectors_ * coefficients);
}

void SpectralDecomposition::write_csv(const std::filesystem::path& path) const {
  CsvWriter csv(path, {"index", "eigenvalue"});
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
    csv.row(static_cast<long long>(k), eigenvalues_[k]);
  }
}

SpectralDecomposition eigensolve(std::shared_ptr<const AssembledOperator> op, Eigen::Index count) {
  const Eigen::Index n = op->stiffness.rows();
  if (count <= 0) count = n;
  if (count > n) throw SolverError("requested more eigenpairs than degrees of freedom");

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  if (op->mass_kind == MassMatrix::kLumped) {
    const Eigen::VectorXd inv_sqrt = op->mass.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd a = inv_sqrt.asDiagonal() * op->stiffness * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success) throw SolverError("symmetric eigensolver failed");
    values = solver.eigenvalues();
    vectors = inv_sqrt.asDiagonal() * solver.eigenvectors();
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(op->stiffness, op->mass);
    if (solver.info() != Eigen::Success) {
      throw SolverError("generalized symmetric eigensolver failed");
    }
    values = solver.eigenvalues();
    vectors = solver.eigenvectors();
  }
  if (!values.allFinite() || !vectors.allFinite()) {
    throw SolverError("eigensolver returned non-finite values");
  }

  // Connected graph: the kernel is exactly the constants.
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if (std::abs(values[0]) > 1e-9 * scale) {
    std::ostringstream os;
    os << "lowest eigenvalue " << values[0] << " is not zero";
    throw SolverError(os.str());
  }
  const double total_mass = op->mass.sum();
  values[0] = 0.0;
  vectors.col(0).setConstant(1.0 / std::sqrt(total_mass));

  values.conservativeResize(count);
  vectors.conservativeResize(Eigen::NoChange, count);

  for (Eigen::Index k = 0; k < count; ++k) {
    const double residual =
        (op->stiffness * vectors.col(k) - values[k] * (op->mass * vectors.col(k))).norm();
    if (!(residual <= 1e-8 * (1.0 + values[k]))) {
      std::ostringstream os;
      os << "eigenpair " << k << " residual " << residual << " exceeds tolerance";
      throw SolverError(os.str());
    }
  }
  return SpectralDecomposition(std::move(op), std::move(values), std::move(vectors));
}

SpectralDecomposition eigensolve(GridPtr grid, MassMatrix mass_kind, Eigen::Index count) {
  return eigensolve(std::make_shared<const AssembledOperator>(assemble(std::move(grid), mass_kind)),
                    count);
}

namespace {

Eigen::VectorXd datum_coefficients(const SpectralDecomposition& spec, const HeatDatum& w0) {
  return std::visit([&](const auto& d) { return spec.coefficients(d); }, w0);
}

}  // namespace

GraphFunction heat_apply(const SpectralDecomposition& spec, const HeatDatum& w0, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat_apply: time must be nonnegative");
  Eigen::VectorXd c = datum_coefficients(spec, w0);
  c.array() *= (-t * spec.eigenvalues().array()).exp();
  return spec.synthesize(c);
}

double smoothing_norm(const SpectralDecomposition& spec, const HeatDatum& w0, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("smoothing_norm: time must be nonnegative");
  const Eigen::VectorXd c = datum_coefficients(spec, w0);
  const auto& lambda = spec.eigenvalues().array();
  const Eigen::ArrayXd terms = lambda * (-2.0 * t * lambda).exp() * c.array().square();
  return std::sqrt(terms.sum());
}

double smoothing_constant(double t) { return 1.0 / std::sqrt(2.0 * std::numbers::e * t); }

}  // namespace mgb
