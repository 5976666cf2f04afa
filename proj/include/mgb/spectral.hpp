#pragma once

#include <filesystem>
#include <memory>
#include <variant>

#include <Eigen/Dense>

#include "mgb/core_graph.hpp"

namespace mgb {

enum class MassMatrix {
  kConsistent,
  kLumped,  // row-sum lumping; keeps the discrete semigroup positivity preserving
};

/// Stiffness and mass matrices of the Kirchhoff Laplacian on the nodal hat
/// basis of an EdgeGrid. Kirchhoff conditions are natural and not imposed.
struct AssembledOperator {
  GridPtr grid;
  MassMatrix mass_kind = MassMatrix::kConsistent;
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd mass;
};

AssembledOperator assemble(GridPtr grid, MassMatrix mass_kind = MassMatrix::kConsistent);

/// Load vector b_i = <data, phi_i>_{L^2(mu)}. A GraphFunction in the finite
/// element space gives b = M f, so projecting it returns f itself.
Eigen::VectorXd load_vector(const AssembledOperator& op, const GraphFunction& data);
Eigen::VectorXd load_vector(const AssembledOperator& op, const EdgeField& data);

/// Solutions of K v = lambda M v, ascending, with V^T M V = I.
class SpectralDecomposition {
 public:
  SpectralDecomposition(std::shared_ptr<const AssembledOperator> op, Eigen::VectorXd eigenvalues,
                        Eigen::MatrixXd eigenvectors);

  const AssembledOperator& op() const { return *op_; }
  const GridPtr& grid_ptr() const { return op_->grid; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  Eigen::Index size() const { return eigenvalues_.size(); }
  bool complete() const {
    return static_cast<std::size_t>(eigenvalues_.size()) == op_->grid->num_dofs();
  }

  /// Expansion coefficients <data, v_k>.
  Eigen::VectorXd coefficients(const GraphFunction& data) const;
  Eigen::VectorXd coefficients(const EdgeField& data) const;

  GraphFunction synthesize(const Eigen::VectorXd& coefficients) const;

  void write_csv(const std::filesystem::path& path) const;

 private:
  std::shared_ptr<const AssembledOperator> op_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

/// Lowest `count` eigenpairs (all of them when count is 0). Throws
/// SolverError when the solver fails or the post-solve residual check
/// |K v - lambda M v| <= 1e-8 (1 + lambda) does not hold.
SpectralDecomposition eigensolve(std::shared_ptr<const AssembledOperator> op,
                                 Eigen::Index count = 0);
SpectralDecomposition eigensolve(GridPtr grid, MassMatrix mass_kind = MassMatrix::kConsistent,
                                 Eigen::Index count = 0);

using HeatDatum = std::variant<GraphFunction, EdgeField>;

/// w(t) = sum_k exp(-lambda_k t) <w0, v_k> v_k.
GraphFunction heat_apply(const SpectralDecomposition& spec, const HeatDatum& w0, double t);

/// || sqrt(-L) e^{tL} w0 ||, the left side of the analytic smoothing bound.
double smoothing_norm(const SpectralDecomposition& spec, const HeatDatum& w0, double t);

/// (2 e t)^{-1/2}, the sharp constant of sup_k sqrt(lambda_k) exp(-lambda_k t).
double smoothing_constant(double t);

}  // namespace mgb
