#pragma once

#include <Eigen/Core>

#include <vector>

#include "spheresr/geometry.hpp"
#include "spheresr/harmonics.hpp"
#include "spheresr/parallel.hpp"

namespace spheresr {

/// Discrete measure supported on a fixed evaluation grid.
struct GridMeasure {
    std::vector<SpherePoint> grid;
    Eigen::VectorXd weights;

    double tv_norm() const { return weights.cwiseAbs().sum(); }
};

struct SolverOptions {
    int max_iters = 4000;
    double primal_tol = 1e-9;   // on ||A w - y|| / ||y||
    double dual_tol = 1e-10;    // on the relative l1-objective change over 50 iterations
    double step_ratio = 8.0;    // primal step = ratio / L, dual step = 1 / (ratio L)
    bool nonneg = false;
    bool trace_objective = false;  // record the averaged-iterate objective every 25 iterations
};

struct RecoveryReport {
    double support_distance = 0.0;  // max over true atoms of distance to nearest recovered atom
    double weight_error = 0.0;      // max |c_true - c_rec| over matched atoms
    double residual = 0.0;          // ||A w - y||_2
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;  // final l1 objective of the grid measure
    int spurious_atoms = 0;  // recovered atoms with no matching true atom
    std::vector<double> averaged_objective_trace;
};

/// Dense measurement operator A = sampling_matrix(grid, N) with hand-written
/// OpenMP forward/adjoint kernels (serial twins kept for the tests and the
/// benchmark) and a cached power-iteration operator-norm estimate.
class MeasurementOperator {
  public:
    MeasurementOperator(std::vector<SpherePoint> grid, int degree, Exec exec = Exec::Parallel);

    int rows() const { return static_cast<int>(matrix_.rows()); }
    int cols() const { return static_cast<int>(matrix_.cols()); }
    int degree() const { return degree_; }
    const std::vector<SpherePoint>& grid() const { return grid_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }

    /// y = A w.
    void apply(const Eigen::VectorXd& w, Eigen::VectorXd& y, Exec exec = Exec::Parallel) const;
    /// y = A w visiting only the listed columns (w is zero elsewhere).
    void apply_columns(const Eigen::VectorXd& w, const std::vector<int>& columns,
                       Eigen::VectorXd& y) const;
    /// v = A^T p over all columns.
    void apply_transpose(const Eigen::VectorXd& p, Eigen::VectorXd& v,
                         Exec exec = Exec::Parallel) const;
    /// v[j] = column_j . p for the listed columns only; other entries untouched.
    void apply_transpose_columns(const Eigen::VectorXd& p, const std::vector<int>& columns,
                                 Eigen::VectorXd& v) const;

    /// Largest singular value estimated by 50 power-iteration steps (cached).
    double operator_norm() const;

  private:
    std::vector<SpherePoint> grid_;
    int degree_;
    Eigen::MatrixXd matrix_;  // column-major: one grid point per column
    mutable double norm_ = 0.0;
};

struct RecoveryResult {
    GridMeasure measure;
    RecoveryReport report;  // residual / iterations / objective part only
};

/// Approximately solves min ||w||_1 s.t. A w = y by Chambolle-Pock primal-dual
/// splitting with step sizes tied to the power-iteration norm estimate.
/// Inactive columns are screened out between periodic full passes and the
/// fixed-point conditions are re-verified on all columns before termination,
/// so the returned point satisfies the same conditions as the unscreened
/// iteration. Non-convergence at max_iters is flagged, not thrown.
RecoveryResult tv_min_recover(const MomentVector& y, const MeasurementOperator& op,
                              const SolverOptions& opts);

/// Convenience overload building the operator from a grid.
RecoveryResult tv_min_recover(const MomentVector& y, const std::vector<SpherePoint>& grid,
                              const SolverOptions& opts);

/// Same iteration with the primal prox replaced by max(v - tau, 0), i.e.
/// projection onto the non-negative orthant folded into the shrink.
RecoveryResult nonneg_recover(const MomentVector& y, const MeasurementOperator& op,
                              const SolverOptions& opts);
RecoveryResult nonneg_recover(const MomentVector& y, const std::vector<SpherePoint>& grid,
                              const SolverOptions& opts);

/// Thresholds at weight_floor, then greedily clusters the survivors in
/// descending |w| order; each cluster becomes one atom at the |w|-weighted
/// chordal mean (reprojected), with the signed weight sum. A singleton
/// cluster keeps its grid point bit-exactly.
DiracEnsemble extract_support(const GridMeasure& m, double weight_floor, double cluster_radius);

/// Greedy nearest matching truth -> recovered; unmatched true atoms score the
/// sentinel distance pi. residual is ||moments(recovered) - y||_2.
RecoveryReport recovery_report(const DiracEnsemble& truth, const DiracEnsemble& recovered,
                               const MomentVector& y);

}  // namespace spheresr
